#ifndef FSW_CLI_CONFIG_HPP
#define FSW_CLI_CONFIG_HPP

#include <json.hpp>
#include <optional>

#include "fsw/dg/mesh.hpp"
#include "fsw/model/system.hpp"

namespace fsw::cli {

class ConfigError : public Error {
public:
  using Error::Error;
};

struct SystemCfg {
  std::string id;
  nlohmann::json overrides = nlohmann::json::object();
};

struct MeshCfg {
  std::vector<std::size_t> cells;
  std::optional<std::vector<std::array<double, 2>>> box;
  std::vector<bool> periodic;
};

struct SamplingCfg {
  std::string kind = "grid"; // grid | random
  std::size_t count = 10;    // grid: points per axis; random: total points
  std::uint64_t seed = 1;
};

struct ReductionCfg {
  std::size_t n_max = 20;
  double tol = 1e-6;
  std::string ref_norm = "auto"; // auto | l2 | x0
};

struct ProfileCfg {
  std::string type = "gaussian"; // gaussian | sin | box
  double center = 0.5, width = 0.05;
  double k = 1.0;
  double lo = 0.25, hi = 0.75;
};

struct DictionaryCfg {
  std::string kind = "constant"; // constant | shift
  std::string generator = "snapshots"; // constant: snapshots | pod
  std::size_t count = 0;               // 0 = all
  std::vector<ProfileCfg> profiles;    // shift
  double shift_scale = 1.0;            // shift: offset = scale * mu[0]
};

struct SectionalCfg {
  std::string target = "solution"; // solution | shifted-profile
  ProfileCfg target_profile;
  double target_shift_scale = 1.0;
  std::vector<DictionaryCfg> dictionaries;
  std::size_t n_max = 10;
  double tol = 0.0;
  bool exhaustive = false;
  std::string norm = "per-mu"; // per-mu | reference
  std::optional<std::vector<std::array<double, 2>>> parameters; // synthetic targets
};

struct Config {
  std::optional<SystemCfg> system;
  std::optional<MeshCfg> mesh;
  std::size_t dg_order = 1;
  std::optional<SamplingCfg> sampling;
  model::ValidationOptions validation;
  std::optional<std::vector<double>> solve_mu;
  ReductionCfg reduction;
  std::optional<SectionalCfg> sectional;
  std::string out_dir = "out";
  unsigned threads = 0;
  bool debug_matrices = false;
  nlohmann::json raw;

  std::uint64_t hash() const;
};

// Strict parse: unknown keys and wrong types are rejected with their JSON
// path. Throws ConfigError.
Config parse_config(const nlohmann::json& doc);
// Reads and parses a file; JSON syntax errors are reported with line/column.
Config load_config(const std::string& path);

// assembled from the config (mesh defaults to the system domain)
dg::StructuredMesh make_mesh(const Config& cfg, const model::FriedrichsSystem* sys);
std::vector<model::ParamPoint> make_samples(const SamplingCfg& sampling,
                                            const model::ParameterDomain& dom,
                                            std::uint64_t seed_override);

} // namespace fsw::cli

#endif
