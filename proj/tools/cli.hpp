#ifndef SIGA_TOOLS_CLI_HPP
#define SIGA_TOOLS_CLI_HPP

#include <siga/portfolio/evaluation.hpp>
#include <siga/solver.hpp>

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace siga::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

/// Thrown for configuration problems; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Parsed run configuration. Every field is optional in the JSON file:
///
///   {
///     "problem": {"builtin": "toy1d"}
///              | {"portfolio": {"dataset": "prices.csv" | "synthetic:N:J:SEED",
///                               "format": "csv" | "indtrack",
///                               "zero_frac_max": 0.05, "top_k": 50,
///                               "train_frac": 0.9, "ridge": 1e-4,
///                               "nu": 1.0, "delta": 0.001}},
///     "kernel": "chks" | "uniform",
///     "siga": {"mu0", "zeta0", "tau0", "p", "max_outer_iters", "max_inner_iters",
///              "min_inner_iters", "early_stop_epsilon", "clarke_grid_points",
///              "x0": [...], "y0": [...]},
///     "fix": {"tolerance", "max_iters"},
///     "out": "results",
///     "seed": 42
///   }
struct RunConfig {
  std::string builtin = "toy1d";
  std::optional<std::string> dataset;
  std::optional<portfolio::PriceFormat> format;
  portfolio::DatasetOptions dataset_options;
  std::string kernel = "chks";
  nlohmann::json siga = nlohmann::json::object();
  portfolio::FixConfig fix;
  std::string out = "results";
  std::uint64_t seed = 42;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Applies the "siga" overrides on top of `base` and validates the result.
SigaConfig<double> siga_config(const nlohmann::json& overrides, SigaConfig<double> base,
                               Index m, Index n);

SmoothingKernel<double> kernel_by_name(const std::string& name);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace siga::cli

#endif  // SIGA_TOOLS_CLI_HPP
