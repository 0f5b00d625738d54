#ifndef SIGA_ORACLE_HPP
#define SIGA_ORACLE_HPP

#include <siga/core.hpp>
#include <siga/pvi.hpp>
#include <siga/smoothing.hpp>
#include <siga/solver.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace siga::oracle {

/// Central-difference step used when none is given: 1e-5 * (1 + |x_i|).
template <typename Scalar>
Scalar default_step(Scalar xi) {
  using std::abs;
  return Scalar(1e-5) * (Scalar(1) + abs(xi));
}

/// Central differences (g(x + h e_i) - g(x - h e_i)) / 2h. A nonpositive
/// `step` selects the relative default.
template <typename Scalar>
Vector<Scalar> finite_diff_gradient(const std::function<Scalar(const Vector<Scalar>&)>& g,
                                    const Vector<Scalar>& x, Scalar step = Scalar(0)) {
  Vector<Scalar> grad(x.size());
  Vector<Scalar> xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const Scalar h = step > Scalar(0) ? step : default_step(x(i));
    xp(i) = x(i) + h;
    const Scalar gp = g(xp);
    xp(i) = x(i) - h;
    const Scalar gm = g(xp);
    xp(i) = x(i);
    if (!std::isfinite(static_cast<double>(gp)) || !std::isfinite(static_cast<double>(gm))) {
      throw NumericalError("finite_diff_gradient: non-finite evaluation at coordinate " +
                           std::to_string(i));
    }
    grad(i) = (gp - gm) / (Scalar(2) * h);
  }
  return grad;
}

/// Jacobian of a vector map by central differences, rows indexing outputs.
template <typename Scalar>
Matrix<Scalar> finite_diff_jacobian(const std::function<Vector<Scalar>(const Vector<Scalar>&)>& g,
                                    const Vector<Scalar>& x, Scalar step = Scalar(0)) {
  Matrix<Scalar> jac;
  Vector<Scalar> xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const Scalar h = step > Scalar(0) ? step : default_step(x(i));
    xp(i) = x(i) + h;
    const Vector<Scalar> gp = g(xp);
    xp(i) = x(i) - h;
    const Vector<Scalar> gm = g(xp);
    xp(i) = x(i);
    if (!gp.allFinite() || !gm.allFinite()) {
      throw NumericalError("finite_diff_jacobian: non-finite evaluation at coordinate " +
                           std::to_string(i));
    }
    if (i == 0) jac.resize(gp.size(), x.size());
    jac.col(i) = (gp - gm) / (Scalar(2) * h);
  }
  return jac;
}

/// ||a - b|| / max(||a||, ||b||, floor).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar relative_error(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b,
                                         typename DerivedA::Scalar floor = 1e-8) {
  const typename DerivedA::Scalar scale = std::max({a.norm(), b.norm(), floor});
  return (a - b).norm() / scale;
}

struct ProbeReport {
  std::string quantity;
  long samples = 0;
  double max_observed = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline ProbeReport make_report(std::string quantity, long samples, double max_observed,
                               double threshold) {
  return {std::move(quantity), samples, max_observed, threshold, max_observed <= threshold};
}

using Rng = std::mt19937_64;

template <typename Scalar>
std::function<Vector<Scalar>(Rng&)> uniform_box_sampler(Vector<Scalar> lower, Vector<Scalar> upper) {
  return [lower = std::move(lower), upper = std::move(upper)](Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector<Scalar> out(lower.size());
    for (Index i = 0; i < lower.size(); ++i) {
      out(i) = lower(i) + Scalar(unit(rng)) * (upper(i) - lower(i));
    }
    return out;
  };
}

/// Runs `sample` `count` times from a seeded generator and reports the
/// maximum returned value against `threshold`.
template <typename Scalar>
ProbeReport run_probe(std::string quantity, const std::function<Scalar(Rng&)>& sample, long count,
                      std::uint64_t seed, double threshold) {
  if (count < 1) throw ArgumentError("run_probe: count must be positive");
  Rng rng(seed);
  double worst = 0.0;
  for (long k = 0; k < count; ++k) {
    const double value = static_cast<double>(sample(rng));
    if (std::isnan(value)) {
      worst = std::numeric_limits<double>::infinity();
    } else {
      worst = std::max(worst, value);
    }
  }
  return make_report(std::move(quantity), count, worst, threshold);
}

/// Largest ||map(a) - map(b)|| / ||a - b|| over `pairs` sampled pairs.
/// Coincident pairs are redrawn.
template <typename Scalar>
ProbeReport lipschitz_probe(const std::function<Vector<Scalar>(const Vector<Scalar>&)>& map,
                            const std::function<Vector<Scalar>(Rng&)>& sampler, long pairs,
                            std::uint64_t seed, double threshold,
                            std::string quantity = "lipschitz ratio") {
  if (pairs < 1) throw ArgumentError("lipschitz_probe: pairs must be positive");
  std::function<Scalar(Rng&)> ratio = [&](Rng& rng) {
    for (;;) {
      const Vector<Scalar> a = sampler(rng);
      const Vector<Scalar> b = sampler(rng);
      const Scalar d = (a - b).norm();
      if (d > Scalar(0)) return (map(a) - map(b)).norm() / d;
    }
  };
  return run_probe<Scalar>(std::move(quantity), ratio, pairs, seed, threshold);
}

/// Sampled Lipschitz ratio of Psi(x, .) with a fresh x per pair drawn from
/// `x_region` (default X); y, y' are uniform on [-ybound, ybound]^n.
template <typename Scalar>
ProbeReport psi_contraction_probe(const PviProblem<Scalar>& problem, long pairs, std::uint64_t seed,
                                  double threshold, Scalar ybound = Scalar(10),
                                  const std::optional<FeasibleBox<Scalar>>& x_region = std::nullopt) {
  const auto& region = x_region ? *x_region : problem.domain;
  const auto xs = uniform_box_sampler<Scalar>(region.lower(), region.upper());
  const auto ys = uniform_box_sampler<Scalar>(Vector<Scalar>::Constant(problem.n, -ybound),
                                              Vector<Scalar>::Constant(problem.n, ybound));
  std::function<Scalar(Rng&)> ratio = [&](Rng& rng) {
    const Vector<Scalar> x = xs(rng);
    for (;;) {
      const Vector<Scalar> a = ys(rng);
      const Vector<Scalar> b = ys(rng);
      const Scalar d = (a - b).norm();
      if (d > Scalar(0)) return (psi(problem, x, a) - psi(problem, x, b)).norm() / d;
    }
  };
  return run_probe<Scalar>("psi contraction ratio", ratio, pairs, seed, threshold);
}

/// Sample counts per dimension of an exhaustive grid over X.
struct GridSpec {
  std::vector<long> counts;

  static constexpr long kMaxPoints = 10'000'000;

  long total() const {
    long t = 1;
    for (long c : counts) {
      if (c < 1) throw ArgumentError("GridSpec: counts must be positive");
      if (t > kMaxPoints / c) return kMaxPoints + 1;
      t *= c;
    }
    return t;
  }
};

template <typename Scalar>
struct GridSearchResult {
  Vector<Scalar> x_best;
  Scalar h_best = std::numeric_limits<Scalar>::infinity();
  Vector<Scalar> spacing;
  long evaluated = 0;
};

/// Reduced objective h(x) = f(x, y(x)) (or h_mu with mu > 0), y(x) from a
/// tight Picard solve started at the box midpoint.
template <typename Scalar>
Scalar reduced_objective(const SmoothingKernel<Scalar>& kernel, const PviProblem<Scalar>& problem,
                         const UpperObjective<Scalar>& objective, const Vector<Scalar>& x, Scalar mu,
                         Scalar tol = Scalar(1e-12), long max_inner = 200000) {
  const Vector<Scalar> y0 = (problem.omega.l(x) + problem.omega.u(x)) / Scalar(2);
  const auto sol = fixed_point_solve(kernel, problem, x, mu, tol, y0, max_inner);
  return objective.f(x, sol.y);
}

/// Exhaustive minimization of the reduced objective over a grid on X.
/// Ties keep the lowest enumeration index (dimension 0 varies slowest).
template <typename Scalar>
GridSearchResult<Scalar> grid_search_reduced(const SmoothingKernel<Scalar>& kernel,
                                             const PviProblem<Scalar>& problem,
                                             const UpperObjective<Scalar>& objective,
                                             const GridSpec& grid, Scalar mu = Scalar(0)) {
  const Index m = problem.m;
  if (m > 3) throw ArgumentError("grid_search_reduced: limited to m <= 3");
  detail::require_size(static_cast<Index>(grid.counts.size()), m, "GridSpec counts");
  const long total = grid.total();
  if (total > GridSpec::kMaxPoints) throw ArgumentError("grid_search_reduced: grid too large");

  const auto& lo = problem.domain.lower();
  const auto& hi = problem.domain.upper();
  GridSearchResult<Scalar> out;
  out.spacing.resize(m);
  for (Index j = 0; j < m; ++j) {
    const long c = grid.counts[static_cast<std::size_t>(j)];
    out.spacing(j) = c > 1 ? (hi(j) - lo(j)) / Scalar(c - 1) : Scalar(0);
  }

  Vector<Scalar> x(m);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (Index j = m - 1; j >= 0; --j) {
      const long c = grid.counts[static_cast<std::size_t>(j)];
      const long k = rem % c;
      rem /= c;
      x(j) = c > 1 ? lo(j) + out.spacing(j) * Scalar(k) : lo(j);
    }
    const Scalar h = reduced_objective(kernel, problem, objective, x, mu);
    if (h < out.h_best) {
      out.h_best = h;
      out.x_best = x;
    }
    ++out.evaluated;
  }
  return out;
}

}  // namespace siga::oracle

#endif  // SIGA_ORACLE_HPP
