#ifndef FSW_CLI_RUNNER_HPP
#define FSW_CLI_RUNNER_HPP

#include <climits>
#include <string>

namespace fsw::cli {

// exit codes: 0 success, 1 usage/config, 2 validation failure, 3 numerical
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

struct RunOptions {
  std::string command;
  std::string config_path;
  std::string out_override;
  std::uint64_t seed = 0;                  // 0 = use the config seed
  unsigned threads_override = UINT_MAX;    // UINT_MAX = use the config value
  bool check = false;                      // verify output hashes against the manifest
  bool debug_matrices = false;
};

// commands: validate | classify | solve | sweep | nwidth | sectional | report
int run(const RunOptions& opts);

} // namespace fsw::cli

#endif
