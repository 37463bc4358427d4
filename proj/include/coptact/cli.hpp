#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace coptact::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCalibDegenerate = 3;
inline constexpr int kExitSysidDegenerate = 4;

/// Loads a JSON config, applies dotted-path `--set key=value` overrides and
/// the COPTACT_SEED environment variable (when the config carries a seed).
nlohmann::json load_config(const std::string& path, const std::vector<std::string>& overrides);

int run_synth(const nlohmann::json& config, int threads);
int run_calibrate(const nlohmann::json& config, int threads);
int run_map(const nlohmann::json& config, int threads);
int run_sysid(const nlohmann::json& config, int threads);
int run_probe(const nlohmann::json& config, int threads);

/// Dispatch + exception-to-exit-code mapping (0 ok, 2 config/schema,
/// 3 calibration degenerate, 4 sysid degenerate).
int run_subcommand(const std::string& name, const std::string& config_path,
                   const std::vector<std::string>& overrides, int threads);

}  // namespace coptact::cli
