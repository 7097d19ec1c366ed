#include "lpflow/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lpflow::io {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument(std::string(where) + ": unknown key '" + key + "'");
  }
}

json to_json(const ModelParams& p) {
  return {{"model", model_name(p.model)}, {"theta", p.theta}, {"nu", p.nu},
          {"s_re", p.s_re},               {"s_im", p.s_im},   {"c", p.c}};
}

ModelParams model_params_from_json(const json& j) {
  reject_unknown_keys(j, {"model", "theta", "nu", "s_re", "s_im", "c"}, "model params");
  ModelParams p;
  p.model = model_from_name(j.value("model", std::string("GL")));
  p.theta = j.value("theta", 0.0);
  p.nu = j.value("nu", 0.0);
  p.s_re = j.value("s_re", 0.0);
  p.s_im = j.value("s_im", 0.0);
  p.c = j.value("c", 0.0);
  return p;
}

json to_json(const IntegratorConfig& c) {
  return {{"dt_max", c.dt_max},
          {"dt_min", c.dt_min},
          {"collision_guard", c.collision_guard},
          {"max_substeps", c.max_substeps},
          {"seed", c.seed}};
}

IntegratorConfig integrator_from_json(const json& j) {
  reject_unknown_keys(j, {"dt_max", "dt_min", "collision_guard", "max_substeps", "seed"},
                      "integrator");
  IntegratorConfig c;
  c.dt_max = j.value("dt_max", c.dt_max);
  c.dt_min = j.value("dt_min", c.dt_min);
  c.collision_guard = j.value("collision_guard", c.collision_guard);
  c.max_substeps = j.value("max_substeps", c.max_substeps);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

json ensemble_header(const PathEnsemble& ens) {
  return {{"params", to_json(ens.params)},
          {"seed", ens.seed},
          {"grid", ens.times},
          {"n_paths", ens.n_paths},
          {"n_particles", ens.n_particles}};
}

void write_ensemble_csv(const PathEnsemble& ens, std::ostream& os) {
  os << "path,t,i,value\n";
  os.precision(17);
  for (std::size_t p = 0; p < ens.n_paths; ++p)
    for (std::size_t k = 0; k < ens.n_times(); ++k) {
      const auto row = ens.at(p, k);
      for (std::size_t i = 0; i < ens.n_particles; ++i)
        os << p << ',' << ens.times[k] << ',' << i << ',' << row[i] << '\n';
    }
}

PathEnsemble read_ensemble(const json& header, std::istream& csv) {
  PathEnsemble ens;
  ens.params = model_params_from_json(header.at("params"));
  ens.seed = header.at("seed").get<std::uint64_t>();
  ens.times = header.at("grid").get<std::vector<double>>();
  ens.n_paths = header.at("n_paths").get<std::size_t>();
  ens.n_particles = header.at("n_particles").get<std::size_t>();
  ens.data.assign(ens.n_paths * ens.n_times() * ens.n_particles, 0.0);
  std::string line;
  std::getline(csv, line);
  if (line != "path,t,i,value") throw std::invalid_argument("ensemble csv: bad header");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t p = 0, i = 0;
    double t = 0.0, v = 0.0;
    char c1, c2, c3;
    if (!(ls >> p >> c1 >> t >> c2 >> i >> c3 >> v))
      throw std::invalid_argument("ensemble csv: malformed row");
    const std::size_t k = rows / ens.n_particles % ens.n_times();
    if (p >= ens.n_paths || i >= ens.n_particles)
      throw std::invalid_argument("ensemble csv: index out of range");
    ens.at(p, k)[i] = v;
    ++rows;
  }
  if (rows != ens.data.size()) throw std::invalid_argument("ensemble csv: row count mismatch");
  return ens;
}

void save_ensemble(const PathEnsemble& ens, const std::filesystem::path& stem) {
  std::ofstream csv(stem.string() + ".csv");
  write_ensemble_csv(ens, csv);
  std::ofstream hdr(stem.string() + ".json");
  hdr << ensemble_header(ens).dump(2) << '\n';
}

PathEnsemble load_ensemble(const std::filesystem::path& stem) {
  std::ifstream hdr(stem.string() + ".json");
  std::ifstream csv(stem.string() + ".csv");
  if (!hdr || !csv) throw std::runtime_error("load_ensemble: cannot open " + stem.string());
  return read_ensemble(json::parse(hdr), csv);
}

json to_json(const PointConfiguration& cfg) {
  json domain = json::array();
  for (const auto& [a, b] : cfg.domain) domain.push_back({a, b});
  return {{"points", cfg.points},
          {"kernel_id", cfg.kernel_id},
          {"domain", domain},
          {"resolution", cfg.resolution},
          {"clipping", {{"magnitude", cfg.clip_magnitude}, {"warning", cfg.clip_warning}}}};
}

PointConfiguration point_configuration_from_json(const json& j) {
  reject_unknown_keys(j, {"points", "kernel_id", "domain", "resolution", "clipping"},
                      "point configuration");
  PointConfiguration cfg;
  cfg.points = j.at("points").get<std::vector<double>>();
  cfg.kernel_id = j.at("kernel_id").get<std::string>();
  for (const auto& iv : j.at("domain")) cfg.domain.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
  cfg.resolution = j.at("resolution").get<int>();
  cfg.clip_magnitude = j.at("clipping").at("magnitude").get<double>();
  cfg.clip_warning = j.at("clipping").at("warning").get<bool>();
  return cfg;
}

}  // namespace lpflow::io
