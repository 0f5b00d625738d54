#ifndef SIGA_BUILTIN_HPP
#define SIGA_BUILTIN_HPP

#include <siga/pvi.hpp>

#include <optional>
#include <string>
#include <vector>

namespace siga {

/// Small reference problems used by the CLI, the probe suites and the tests.
struct BuiltinProblem {
  std::string name;
  PviProblem<double> problem;
  UpperObjective<double> objective;
  Eigen::VectorXd x0;
  Eigen::VectorXd y0;
  FeasibleBox<double> probe_region;  // where random probes of x are drawn
  std::optional<Eigen::VectorXd> optimum;
};

/// toy1d: F = y - x, delta = 0.5, Omega = [0, 1], X = [0, 1],
/// f = (y - 0.8)^2 + 0.1 x^2; optimum x = 0.8 / 1.1.
BuiltinProblem toy1d();

/// box2d: nonlinear F and a genuinely moving box in two dimensions.
BuiltinProblem box2d();

/// portfolio3: three-asset mean-variance model with the Sharpe objective.
BuiltinProblem portfolio3();

/// toy1d with jac_F_y off by a factor of two. Only useful as a negative control.
BuiltinProblem corrupted();

/// toy1d, box2d, portfolio3.
std::vector<std::string> builtin_names();
BuiltinProblem builtin_by_name(const std::string& name);

}  // namespace siga

#endif  // SIGA_BUILTIN_HPP
