#ifndef SIGA_CHECKS_HPP
#define SIGA_CHECKS_HPP

#include <siga/builtin.hpp>
#include <siga/oracle.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace siga::checks {

using oracle::ProbeReport;

/// Implicit gradient of h_mu against central differences of h_mu at random
/// x in the probe region; max relative error over `probes` points.
ProbeReport hypergradient_probe(const BuiltinProblem& bp, double mu, long probes,
                                std::uint64_t seed, double threshold = 1e-4);

/// Model derivatives (jac_F_x, jac_F_y, grad_l, grad_u, grad_f) against
/// central differences.
std::vector<ProbeReport> derivative_probes(const BuiltinProblem& bp, long probes,
                                           std::uint64_t seed, double threshold = 1e-5);

/// psi_mu_jacobian against central differences of psi_mu.
ProbeReport smoothed_jacobian_probe(const BuiltinProblem& bp, double mu, long probes,
                                    std::uint64_t seed, double threshold = 1e-5);

/// max |psi_mu - psi| / mu over a dense scalar grid (box [0, 1], Phi swept).
ProbeReport chks_uniform_bound(double mu, long points, double threshold = 2.0);

std::vector<ProbeReport> gradients_suite(const std::vector<BuiltinProblem>& problems,
                                         std::uint64_t seed);
std::vector<ProbeReport> smoothing_suite(const std::vector<BuiltinProblem>& problems,
                                         std::uint64_t seed);
std::vector<ProbeReport> contraction_suite(const std::vector<BuiltinProblem>& problems,
                                           std::uint64_t seed);

/// "gradients", "smoothing", "contraction" or "all".
std::vector<ProbeReport> run_suite(const std::string& selector,
                                   const std::vector<BuiltinProblem>& problems, std::uint64_t seed);

bool all_pass(const std::vector<ProbeReport>& reports);

}  // namespace siga::checks

#endif  // SIGA_CHECKS_HPP
