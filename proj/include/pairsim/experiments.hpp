#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace pairsim::experiments {

inline constexpr const char* kToolkitVersion = "1.0.0";

/// Shared run context resolved from the command line.
struct RunContext {
  std::string output_dir;
  int jobs = 1;
  std::uint64_t seed = 1;
};

/// Each runner validates its config (throwing ConfigError), executes the
/// experiment, writes its output files plus run_record.json into
/// ctx.output_dir, and returns the result summary that was written.
nlohmann::json run_single_pulse(const nlohmann::json& config,
                                const RunContext& ctx);
nlohmann::json run_echo_sweep(const nlohmann::json& config,
                              const RunContext& ctx);
nlohmann::json run_ramp_study(const nlohmann::json& config,
                              const RunContext& ctx);
nlohmann::json run_fit(const nlohmann::json& config, const RunContext& ctx);
nlohmann::json run_entangle(const nlohmann::json& config,
                            const RunContext& ctx);
nlohmann::json run_cosmo(const nlohmann::json& config, const RunContext& ctx);

/// Dispatch by subcommand name; returns the process exit code (0 success,
/// 2 config error, 3 numerical error, 4 I/O error) and prints diagnostics
/// for failures on standard error.
int run_experiment(const std::string& name, const std::string& config_path,
                   const RunContext& ctx);

}  // namespace pairsim::experiments
