#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmod/analysis.hpp"
#include "wmod/shift.hpp"
#include "wmod/space.hpp"

namespace wmod::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsageError = 2 };

/// Invalid run configuration or command-line usage.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kMaxN = 256;
inline constexpr const char* kConfigEnv = "WMOD_CONFIG";
inline constexpr const char* kStampFile = "selftest.stamp";

struct RunConfig {
    std::string kernel_spec_path = "builtin";  ///< "builtin" or a file path
    std::vector<WeightParams> weights;
    std::vector<std::string> functions;  ///< corpus labels or const_<value>
    int n_max = 64;
    std::string delta_grid = "reciprocal";
    std::filesystem::path output_dir = "wmod-out";
    int resolution = 1;  ///< multiplies every quadrature node count
    std::map<std::string, double> overrides;
    unsigned threads = 0;
};

/// Parses the INI text. Relative paths resolve against `base_dir`.
/// Throws ConfigError.
[[nodiscard]] RunConfig parse_run_config(const std::string& text,
                                         const std::filesystem::path& base_dir);
/// Throws ConfigError (also when the file cannot be read).
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// Ascending delta values described by config.delta_grid:
/// "reciprocal" (1/n for n = 2..n_max), "geometric LO HI COUNT", or a list.
[[nodiscard]] std::vector<double> delta_values(const RunConfig& config);
/// 1, 2, ..., n_max.
[[nodiscard]] std::vector<int> n_values(const RunConfig& config);
[[nodiscard]] std::vector<FunctionHandle> resolve_functions(const RunConfig& config);
/// Throws KernelSpecError.
[[nodiscard]] KernelSpec resolve_kernel(const RunConfig& config);
[[nodiscard]] StudyOptions study_options(const RunConfig& config);

/// File-name fragment for a weight, e.g. "p-inf_alpha-1".
[[nodiscard]] std::string weight_tag(const WeightParams& w);

/// Each command writes into config.output_dir and returns an ExitCode;
/// none of them throws.
int cmd_selftest(const RunConfig& config, std::ostream& log);
int cmd_curves(const RunConfig& config, bool force, std::ostream& log);
int cmd_verify(const RunConfig& config, bool force, std::ostream& log);

}  // namespace wmod::cli
