#include "siga/checks.hpp"

#include "siga/smoothing.hpp"
#include "siga/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace siga::checks {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using oracle::Rng;

const auto kChks = SmoothingKernel<double>::chks();

std::string label(const BuiltinProblem& bp, const std::string& what) { return bp.name + ": " + what; }

std::string mu_label(double mu) {
  std::ostringstream os;
  os << "mu=" << mu;
  return os.str();
}

// y drawn around the moving box so that all three regimes get exercised
VectorXd sample_y(const BuiltinProblem& bp, const VectorXd& x, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const VectorXd lo = bp.problem.omega.l(x), hi = bp.problem.omega.u(x);
  VectorXd y(bp.problem.n);
  for (Index i = 0; i < y.size(); ++i) {
    const double w = hi(i) - lo(i);
    y(i) = lo(i) - 0.5 * w + 2.0 * w * unit(rng);
  }
  return y;
}

VectorXd solve_y(const BuiltinProblem& bp, const VectorXd& x, double mu) {
  const VectorXd y0 = (bp.problem.omega.l(x) + bp.problem.omega.u(x)) / 2.0;
  return fixed_point_solve(kChks, bp.problem, x, mu, 1e-14, y0, 2'000'000).y;
}

}  // namespace

ProbeReport hypergradient_probe(const BuiltinProblem& bp, double mu, long probes,
                                std::uint64_t seed, double threshold) {
  const auto xs =
      oracle::uniform_box_sampler<double>(bp.probe_region.lower(), bp.probe_region.upper());
  const std::function<double(const VectorXd&)> h = [&](const VectorXd& x) {
    return bp.objective.f(x, solve_y(bp, x, mu));
  };
  std::function<double(Rng&)> sample = [&](Rng& rng) {
    const VectorXd x = xs(rng);
    const VectorXd y = solve_y(bp, x, mu);
    const auto jac = psi_mu_jacobian(kChks, bp.problem, x, y, mu);
    const VectorXd v = solve_adjoint(jac, bp.objective.grad_f_y(x, y));
    const VectorXd g = implicit_gradient(jac, bp.objective.grad_f_x(x, y), v);
    // the smoothed map bends on a scale of mu, so the difference step follows it
    const VectorXd fd = oracle::finite_diff_gradient<double>(h, x, 1e-3 * mu);
    return oracle::relative_error(g, fd, 1e-6);
  };
  return oracle::run_probe<double>(label(bp, "hypergradient rel. error, " + mu_label(mu)), sample,
                                   probes, seed, threshold);
}

std::vector<ProbeReport> derivative_probes(const BuiltinProblem& bp, long probes,
                                           std::uint64_t seed, double threshold) {
  const auto& P = bp.problem;
  const auto xs =
      oracle::uniform_box_sampler<double>(bp.probe_region.lower(), bp.probe_region.upper());
  std::vector<ProbeReport> out;

  auto add = [&](const std::string& what, const std::function<double(const VectorXd&,
                                                                     const VectorXd&)>& err) {
    std::function<double(Rng&)> sample = [&](Rng& rng) {
      const VectorXd x = xs(rng);
      return err(x, sample_y(bp, x, rng));
    };
    out.push_back(oracle::run_probe<double>(label(bp, what), sample, probes, seed, threshold));
  };

  add("jac_F_x rel. error", [&](const VectorXd& x, const VectorXd& y) {
    const std::function<VectorXd(const VectorXd&)> g = [&](const VectorXd& xx) { return P.F(xx, y); };
    return oracle::relative_error(P.jac_F_x(x, y), oracle::finite_diff_jacobian(g, x));
  });
  add("jac_F_y rel. error", [&](const VectorXd& x, const VectorXd& y) {
    const std::function<VectorXd(const VectorXd&)> g = [&](const VectorXd& yy) { return P.F(x, yy); };
    return oracle::relative_error(P.jac_F_y(x, y), oracle::finite_diff_jacobian(g, y));
  });
  add("grad_l rel. error", [&](const VectorXd& x, const VectorXd&) {
    const MatrixXd fd = oracle::finite_diff_jacobian<double>(P.omega.l, x).transpose();
    return oracle::relative_error(P.omega.grad_l(x), fd);
  });
  add("grad_u rel. error", [&](const VectorXd& x, const VectorXd&) {
    const MatrixXd fd = oracle::finite_diff_jacobian<double>(P.omega.u, x).transpose();
    return oracle::relative_error(P.omega.grad_u(x), fd);
  });
  add("grad_f rel. error", [&](const VectorXd& x, const VectorXd& y) {
    const std::function<double(const VectorXd&)> fx = [&](const VectorXd& xx) {
      return bp.objective.f(xx, y);
    };
    const std::function<double(const VectorXd&)> fy = [&](const VectorXd& yy) {
      return bp.objective.f(x, yy);
    };
    VectorXd analytic(P.m + P.n), fd(P.m + P.n);
    analytic << bp.objective.grad_f_x(x, y), bp.objective.grad_f_y(x, y);
    fd << oracle::finite_diff_gradient(fx, x), oracle::finite_diff_gradient(fy, y);
    return oracle::relative_error(analytic, fd);
  });
  return out;
}

ProbeReport smoothed_jacobian_probe(const BuiltinProblem& bp, double mu, long probes,
                                    std::uint64_t seed, double threshold) {
  const auto& P = bp.problem;
  const auto xs =
      oracle::uniform_box_sampler<double>(bp.probe_region.lower(), bp.probe_region.upper());
  std::function<double(Rng&)> sample = [&](Rng& rng) {
    const VectorXd x = xs(rng);
    const VectorXd y = sample_y(bp, x, rng);
    const auto jac = psi_mu_jacobian(kChks, P, x, y, mu);
    const std::function<VectorXd(const VectorXd&)> gx = [&](const VectorXd& xx) {
      return psi_mu(kChks, P, xx, y, mu);
    };
    const std::function<VectorXd(const VectorXd&)> gy = [&](const VectorXd& yy) {
      return psi_mu(kChks, P, x, yy, mu);
    };
    const double step = 1e-4 * mu;
    MatrixXd analytic(P.n, P.m + P.n), fd(P.n, P.m + P.n);
    analytic << jac.d_psi_dx, jac.d_psi_dy;
    fd << oracle::finite_diff_jacobian(gx, x, step), oracle::finite_diff_jacobian(gy, y, step);
    // entries are O(1); far outside the box they shrink like mu^2 and a pure
    // relative error would only measure rounding
    return oracle::relative_error(analytic, fd, 1e-2);
  };
  return oracle::run_probe<double>(label(bp, "psi_mu jacobian rel. error, " + mu_label(mu)), sample,
                                   probes, seed, threshold);
}

ProbeReport chks_uniform_bound(double mu, long points, double threshold) {
  // Single coordinate, box [0, 1], Phi on [-1, 2]: the excess of
  // |psi_mu - psi| over threshold * mu must stay nonpositive.
  double worst = -std::numeric_limits<double>::infinity();
  for (long k = 0; k < points; ++k) {
    const double p = -1.0 + 3.0 * double(k) / double(points - 1);
    const double exact = std::clamp(p, 0.0, 1.0);
    const double smooth = detail::smoothed_mid(kChks, 0.0, 1.0, p, mu);
    worst = std::max(worst, std::abs(smooth - exact) - threshold * mu);
  }
  return oracle::make_report("chks |psi_mu - psi| - 2 mu, " + mu_label(mu), points, worst, 0.0);
}

std::vector<ProbeReport> gradients_suite(const std::vector<BuiltinProblem>& problems,
                                         std::uint64_t seed) {
  std::vector<ProbeReport> out;
  for (const auto& bp : problems) {
    auto d = derivative_probes(bp, 100, seed);
    out.insert(out.end(), d.begin(), d.end());
    for (double mu : {1e-1, 1e-2, 1e-3}) out.push_back(hypergradient_probe(bp, mu, 20, seed));
  }
  return out;
}

std::vector<ProbeReport> smoothing_suite(const std::vector<BuiltinProblem>& problems,
                                         std::uint64_t seed) {
  std::vector<ProbeReport> out;
  for (double mu : {1e-1, 1e-2, 1e-3, 1e-4}) out.push_back(chks_uniform_bound(mu, 10'000));
  for (const auto& bp : problems) {
    for (double mu : {1e-1, 1e-2, 1e-3}) out.push_back(smoothed_jacobian_probe(bp, mu, 100, seed));

    // Psi_mu(x, .) keeps the contraction constant of Psi(x, .)
    const auto report = analyze_contraction(bp.problem);
    if (report.condition == ContractionCondition::Unverified) continue;
    const auto xs =
        oracle::uniform_box_sampler<double>(bp.probe_region.lower(), bp.probe_region.upper());
    for (double mu : {1e-1, 1e-3}) {
      std::function<double(Rng&)> ratio = [&](Rng& rng) {
        const VectorXd x = xs(rng);
        for (;;) {
          const VectorXd a = sample_y(bp, x, rng), b = sample_y(bp, x, rng);
          const double d = (a - b).norm();
          if (d > 0.0) {
            return (psi_mu(kChks, bp.problem, x, a, mu) - psi_mu(kChks, bp.problem, x, b, mu)).norm() / d;
          }
        }
      };
      out.push_back(oracle::run_probe<double>(
          label(bp, "psi_mu contraction ratio, " + mu_label(mu)), ratio, 2000, seed,
          static_cast<double>(report.L) + 1e-9));
    }
  }
  return out;
}

std::vector<ProbeReport> contraction_suite(const std::vector<BuiltinProblem>& problems,
                                           std::uint64_t seed) {
  std::vector<ProbeReport> out;
  for (const auto& bp : problems) {
    const auto report = analyze_contraction(bp.problem);
    const bool certified = report.condition != ContractionCondition::Unverified;
    out.push_back(oracle::make_report(label(bp, "contraction constant L"), 64,
                                      certified ? double(report.L) : 1.0, 1.0 - 1e-12));
    if (!certified) continue;
    out.push_back(oracle::psi_contraction_probe(bp.problem, 10'000, seed, double(report.L) + 1e-9,
                                                2.0, std::optional(bp.probe_region)));
    out.back().quantity = label(bp, out.back().quantity);
  }
  return out;
}

std::vector<ProbeReport> run_suite(const std::string& selector,
                                   const std::vector<BuiltinProblem>& problems, std::uint64_t seed) {
  if (selector == "gradients") return gradients_suite(problems, seed);
  if (selector == "smoothing") return smoothing_suite(problems, seed);
  if (selector == "contraction") return contraction_suite(problems, seed);
  if (selector == "all") {
    auto out = gradients_suite(problems, seed);
    for (auto* suite : {&smoothing_suite, &contraction_suite}) {
      auto more = (*suite)(problems, seed);
      out.insert(out.end(), more.begin(), more.end());
    }
    return out;
  }
  throw ArgumentError("unknown check suite '" + selector +
                      "' (expected gradients, smoothing, contraction or all)");
}

bool all_pass(const std::vector<ProbeReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const ProbeReport& r) { return r.pass; });
}

}  // namespace siga::checks
