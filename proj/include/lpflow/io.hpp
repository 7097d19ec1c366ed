#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "lpflow/sde_core.hpp"
#include "lpflow/stationary_dpp.hpp"

namespace lpflow::io {

using json = nlohmann::json;

json to_json(const ModelParams& p);
ModelParams model_params_from_json(const json& j);
json to_json(const IntegratorConfig& c);
IntegratorConfig integrator_from_json(const json& j);

// Header: params, seed, grid (times), n_paths, n_particles.
json ensemble_header(const PathEnsemble& ens);
void write_ensemble_csv(const PathEnsemble& ens, std::ostream& os);
PathEnsemble read_ensemble(const json& header, std::istream& csv);

// Writes <stem>.csv and <stem>.json.
void save_ensemble(const PathEnsemble& ens, const std::filesystem::path& stem);
PathEnsemble load_ensemble(const std::filesystem::path& stem);

json to_json(const PointConfiguration& cfg);
PointConfiguration point_configuration_from_json(const json& j);

// Throws std::invalid_argument naming the first key of j not in allowed.
void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* where);

}  // namespace lpflow::io
