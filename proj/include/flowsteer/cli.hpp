#pragma once

// Command implementations behind the flowsteer executable.

#include <iosfwd>
#include <string>
#include <vector>

#include "flowsteer/benchmarks.hpp"
#include "flowsteer/run_config.hpp"

namespace flowsteer {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Trains on config.data and writes <out_dir>/<checkpoint> and loss_trace.csv.
std::vector<std::string> cmd_train(const RunConfig& config, const std::string& out_dir);

/// Unsteered ODE/SDE samples from the checkpoint: <out_dir>/samples.csv.
std::vector<std::string> cmd_sample(const RunConfig& config, const std::string& out_dir);

/// FK-steered samples and diagnostics: samples.csv, diagnostics.csv.
std::vector<std::string> cmd_steer(const RunConfig& config, const std::string& out_dir);

/// Runs a benchmark suite and writes its report files.
std::vector<std::string> cmd_bench(const RunConfig& config, Profile profile, const std::string& out_dir);

/// Full command line handling. Returns the process exit code: 0 on success,
/// 2 for configuration errors, 3 for numeric failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flowsteer
