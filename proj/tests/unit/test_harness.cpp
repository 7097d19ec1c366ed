#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lpflow/harness.hpp"
#include "lpflow/io.hpp"

using namespace lpflow;
using namespace lpflow::harness;

TEST_CASE("registry and configs") {
  CHECK(registry().size() >= 10);
  CHECK_THROWS_AS(find_experiment("no_such_experiment"), std::invalid_argument);
  CHECK_THROWS(make_config("no_such_experiment"));
  CHECK_THROWS(make_config("smoke", json{{"bogus", 1}}));
  CHECK_THROWS(make_config("smoke", json{{"params", {{"bogus", 1}}}}));
  CHECK_THROWS(make_config("smoke", json{{"integrator", {{"dt_min", -1.0}}}}));
  CHECK_THROWS(make_config("smoke", json{{"experiment", "intertwining"}}));
  const auto cfg = make_config("smoke", json{{"seed", 5}}, 9);
  CHECK(cfg.seed == 9);
  CHECK(make_config("smoke").seed == kDefaultSeed);
}

TEST_CASE("same config and seed give identical reports") {
  auto cfg = make_config("smoke", json{{"samples", {{"n_paths", 500}}}}, 3);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto ja = to_json(a[i]), jb = to_json(b[i]);
    ja.erase("wall_time");
    jb.erase("wall_time");
    CHECK(ja == jb);
  }
}

TEST_CASE("report relations") {
  CHECK(within(1.0, "le", 1.0));
  CHECK_FALSE(within(1.1, "le", 1.0));
  CHECK(within(2.0, "ge", 1.0));
  CHECK_FALSE(within(std::nan(""), "ge", 1.0));
  CHECK(within(std::nan(""), "info", 1.0));
  CHECK_THROWS(within(1.0, "lt", 1.0));
}

TEST_CASE("ensemble round trip") {
  PathEnsemble ens;
  ens.times = {0.0, 0.5};
  ens.n_paths = 2;
  ens.n_particles = 2;
  ens.params = {Model::HP, 0.0, 0.0, 0.5, -0.25, 0.0};
  ens.seed = 77;
  ens.data = {1.0, -1.0, 1.25, -0.75, 2.0, 0.5, 1.0 / 3.0, -2.0};
  const auto dir = std::filesystem::temp_directory_path() / "lpflow_roundtrip";
  std::filesystem::create_directories(dir);
  io::save_ensemble(ens, dir / "ens");
  const auto back = io::load_ensemble(dir / "ens");
  CHECK(back.data == ens.data);
  CHECK(back.times == ens.times);
  CHECK(back.params.model == Model::HP);
  CHECK(back.params.s_im == -0.25);
  CHECK(back.seed == 77);
  std::filesystem::remove_all(dir);

  std::ostringstream os;
  io::write_ensemble_csv(ens, os);
  CHECK(os.str().rfind("path,t,i,value\n", 0) == 0);
}

TEST_CASE("point configuration and integrator JSON") {
  PointConfiguration pc;
  pc.points = {3.0, 0.5, -1.0};
  pc.kernel_id = "hp";
  pc.domain = {{-2.0, -0.1}, {0.1, 5.0}};
  pc.resolution = 64;
  const auto back = io::point_configuration_from_json(io::to_json(pc));
  CHECK(back.points == pc.points);
  CHECK(back.domain == pc.domain);
  CHECK(back.kernel_id == "hp");
  CHECK_THROWS(io::point_configuration_from_json(json{{"points", json::array()}, {"extra", 1}}));
  CHECK_THROWS(io::integrator_from_json(json{{"dt", 0.1}}));
  IntegratorConfig ic;
  ic.dt_max = 0.02;
  CHECK(io::integrator_from_json(io::to_json(ic)).dt_max == 0.02);
}
