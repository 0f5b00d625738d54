#ifndef SIGA_SMOOTHING_HPP
#define SIGA_SMOOTHING_HPP

#include <siga/core.hpp>
#include <siga/pvi.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace siga {

enum class KernelKind { CHKS, Density };

/// Smoothing kernel for the componentwise median.
///
/// CHKS uses the closed form
///   1/2 (l + sqrt((l - p)^2 + 4 mu^2) + u - sqrt((u - p)^2 + 4 mu^2)).
/// Density smooths mid{l, u, p - mu t} against a probability density rho;
/// it needs the CDF and the partial first moment G(t) = int_{-inf}^t s rho(s) ds.
template <typename Scalar>
struct SmoothingKernel {
  using ScalarFn = std::function<Scalar(Scalar)>;

  KernelKind kind = KernelKind::CHKS;
  ScalarFn density;
  ScalarFn cdf;
  ScalarFn partial_moment;
  Scalar abs_mean = Scalar(0);
  Scalar sup_density = Scalar(0);
  std::string name = "chks";

  static SmoothingKernel chks() { return SmoothingKernel{}; }

  /// Uniform density on [-1/2, 1/2].
  static SmoothingKernel uniform() {
    SmoothingKernel k;
    k.kind = KernelKind::Density;
    k.name = "uniform";
    k.density = [](Scalar t) {
      return (t >= Scalar(-0.5) && t <= Scalar(0.5)) ? Scalar(1) : Scalar(0);
    };
    k.cdf = [](Scalar t) { return std::clamp(t + Scalar(0.5), Scalar(0), Scalar(1)); };
    k.partial_moment = [](Scalar t) {
      const Scalar c = std::clamp(t, Scalar(-0.5), Scalar(0.5));
      return (c * c - Scalar(0.25)) / Scalar(2);
    };
    k.abs_mean = Scalar(0.25);
    k.sup_density = Scalar(1);
    return k;
  }

  /// User-supplied density. Validated on a probe grid over [-probe, probe].
  static SmoothingKernel from_density(ScalarFn density, ScalarFn cdf, ScalarFn partial_moment,
                                      Scalar abs_mean, Scalar sup_density,
                                      Scalar probe = Scalar(1e3)) {
    SmoothingKernel k;
    k.kind = KernelKind::Density;
    k.name = "density";
    k.density = std::move(density);
    k.cdf = std::move(cdf);
    k.partial_moment = std::move(partial_moment);
    k.abs_mean = abs_mean;
    k.sup_density = sup_density;
    k.validate(probe);
    return k;
  }

  void validate(Scalar probe = Scalar(1e3)) const {
    if (kind == KernelKind::CHKS) return;
    if (!density || !cdf || !partial_moment) {
      throw ArgumentError("SmoothingKernel: density kernels need density, cdf and partial moment");
    }
    if (!(abs_mean >= Scalar(0)) || !(sup_density > Scalar(0)) ||
        !std::isfinite(static_cast<double>(sup_density))) {
      throw ArgumentError("SmoothingKernel: moments must be finite and nonnegative");
    }
    constexpr int kProbes = 4001;
    Scalar prev = Scalar(0);
    for (int i = 0; i < kProbes; ++i) {
      const Scalar t = -probe + Scalar(2) * probe * Scalar(i) / Scalar(kProbes - 1);
      const Scalar c = cdf(t);
      const Scalar r = density(t);
      if (c < Scalar(0) || c > Scalar(1) || (i > 0 && c < prev)) {
        throw ArgumentError("SmoothingKernel: cdf must be nondecreasing with values in [0, 1]");
      }
      if (r < Scalar(0) || r > sup_density) {
        throw ArgumentError("SmoothingKernel: density outside [0, sup_density]");
      }
      prev = c;
    }
    if (cdf(-probe) > Scalar(1e-3) || cdf(probe) < Scalar(1) - Scalar(1e-3)) {
      throw ArgumentError("SmoothingKernel: cdf does not approach 0 and 1 in the tails");
    }
  }
};

/// Per-coordinate masses of the three regimes of mid{l, u, p - mu t}.
template <typename Scalar>
struct RegimeWeights {
  Scalar lower;
  Scalar interior;
  Scalar upper;
};

namespace detail {

// 1/2 (1 + a / sqrt(a^2 + 4 mu^2)) without cancellation.
template <typename Scalar>
Scalar chks_step(Scalar a, Scalar mu) {
  using std::sqrt;
  const Scalar s = sqrt(a * a + Scalar(4) * mu * mu);
  if (a >= Scalar(0)) return Scalar(0.5) * (Scalar(1) + a / s);
  return Scalar(2) * mu * mu / (s * (s - a));
}

template <typename Scalar>
RegimeWeights<Scalar> regime_weights(const SmoothingKernel<Scalar>& k, Scalar l, Scalar u,
                                     Scalar p, Scalar mu) {
  RegimeWeights<Scalar> w;
  if (k.kind == KernelKind::CHKS) {
    // d/dl of the closed form and d/du respectively.
    w.lower = chks_step(l - p, mu);
    w.upper = chks_step(p - u, mu);
    w.interior = chks_step(p - l, mu) - w.upper;
  } else {
    const Scalar cl = k.cdf((p - l) / mu);
    const Scalar cu = k.cdf((p - u) / mu);
    w.lower = Scalar(1) - cl;
    w.upper = cu;
    w.interior = cl - cu;
  }
  w.interior = std::clamp(w.interior, Scalar(0), Scalar(1));
  return w;
}

template <typename Scalar>
Scalar smoothed_mid(const SmoothingKernel<Scalar>& k, Scalar l, Scalar u, Scalar p, Scalar mu) {
  using std::sqrt;
  if (k.kind == KernelKind::CHKS) {
    const Scalar dl = l - p, du = u - p;
    return Scalar(0.5) *
           (l + sqrt(dl * dl + Scalar(4) * mu * mu) + u - sqrt(du * du + Scalar(4) * mu * mu));
  }
  const Scalar pl = (p - l) / mu, pu = (p - u) / mu;
  const Scalar cl = k.cdf(pl), cu = k.cdf(pu);
  return cu * u + (cl - cu) * p - mu * (k.partial_moment(pl) - k.partial_moment(pu)) +
         (Scalar(1) - cl) * l;
}

template <typename Scalar>
void check_mu(Scalar mu) {
  if (!(mu > Scalar(0)) || !std::isfinite(static_cast<double>(mu))) {
    throw ArgumentError("smoothing parameter mu must be positive and finite");
  }
}

template <typename Scalar>
void check_bounds_ordered(const Vector<Scalar>& lo, const Vector<Scalar>& hi) {
  for (Index i = 0; i < lo.size(); ++i) {
    if (!(lo(i) < hi(i))) {
      throw ModelError("moving box is degenerate at coordinate " + std::to_string(i) +
                       ": l(x) >= u(x)");
    }
  }
}

}  // namespace detail

/// Smoothed projection Psi_mu(x, y).
template <typename Scalar>
Vector<Scalar> psi_mu(const SmoothingKernel<Scalar>& kernel, const PviProblem<Scalar>& problem,
                      const Vector<Scalar>& x, const Vector<Scalar>& y, Scalar mu) {
  detail::check_mu(mu);
  const Vector<Scalar> p = phi(problem, x, y);
  const Vector<Scalar> lo = problem.omega.l(x);
  const Vector<Scalar> hi = problem.omega.u(x);
  detail::require_size(lo.size(), problem.n, "l(x)");
  detail::require_size(hi.size(), problem.n, "u(x)");
  detail::check_bounds_ordered(lo, hi);
  Vector<Scalar> out(problem.n);
  for (Index i = 0; i < problem.n; ++i) {
    out(i) = detail::smoothed_mid(kernel, lo(i), hi(i), p(i), mu);
  }
  return out;
}

/// Jacobians of Psi_mu in the row convention: row i of d_psi_dx is the
/// gradient of (Psi_mu)_i with respect to x (n x m), likewise d_psi_dy (n x n).
template <typename Scalar>
struct SmoothedJacobian {
  Vector<Scalar> value;
  Matrix<Scalar> d_psi_dx;
  Matrix<Scalar> d_psi_dy;
  Vector<Scalar> weights_lower;
  Vector<Scalar> weights_upper;
  Vector<Scalar> weights_interior;
};

template <typename Scalar>
SmoothedJacobian<Scalar> psi_mu_jacobian(const SmoothingKernel<Scalar>& kernel,
                                         const PviProblem<Scalar>& problem,
                                         const Vector<Scalar>& x, const Vector<Scalar>& y,
                                         Scalar mu) {
  detail::check_mu(mu);
  const Index n = problem.n, m = problem.m;
  const Vector<Scalar> p = phi(problem, x, y);
  const Vector<Scalar> lo = problem.omega.l(x);
  const Vector<Scalar> hi = problem.omega.u(x);
  detail::check_bounds_ordered(lo, hi);
  const Matrix<Scalar> Jx = problem.jac_F_x(x, y);
  const Matrix<Scalar> Jy = problem.jac_F_y(x, y);
  const Matrix<Scalar> Gl = problem.omega.grad_l(x);
  const Matrix<Scalar> Gu = problem.omega.grad_u(x);
  if (Jx.rows() != n || Jx.cols() != m || Jy.rows() != n || Jy.cols() != n) {
    throw ArgumentError("psi_mu_jacobian: F Jacobian has wrong shape");
  }
  if (Gl.rows() != m || Gl.cols() != n || Gu.rows() != m || Gu.cols() != n) {
    throw ArgumentError("psi_mu_jacobian: moving-box gradient has wrong shape");
  }

  SmoothedJacobian<Scalar> out;
  out.value.resize(n);
  out.weights_lower.resize(n);
  out.weights_upper.resize(n);
  out.weights_interior.resize(n);
  out.d_psi_dx.resize(n, m);
  out.d_psi_dy.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto w = detail::regime_weights(kernel, lo(i), hi(i), p(i), mu);
    out.value(i) = detail::smoothed_mid(kernel, lo(i), hi(i), p(i), mu);
    out.weights_lower(i) = w.lower;
    out.weights_upper(i) = w.upper;
    out.weights_interior(i) = w.interior;
    // grad_y Phi_i = e_i - delta grad_y F_i ; grad_x Phi_i = -delta grad_x F_i
    out.d_psi_dy.row(i) = -w.interior * problem.delta * Jy.row(i);
    out.d_psi_dy(i, i) += w.interior;
    out.d_psi_dx.row(i) = -w.interior * problem.delta * Jx.row(i) +
                          w.upper * Gu.col(i).transpose() + w.lower * Gl.col(i).transpose();
  }
  return out;
}

enum class ClarkeCase { BelowLower, AtLower, Interior, AtUpper, AboveUpper };

inline const char* to_string(ClarkeCase c) {
  switch (c) {
    case ClarkeCase::BelowLower: return "below_lower";
    case ClarkeCase::AtLower: return "at_lower";
    case ClarkeCase::Interior: return "interior";
    case ClarkeCase::AtUpper: return "at_upper";
    case ClarkeCase::AboveUpper: return "above_upper";
  }
  return "unknown";
}

template <typename Scalar>
struct CoordinateCase {
  ClarkeCase kind;
  Scalar cbar;  // convex weight on the bound gradient; meaningful at ties only
};

/// Element of the Clarke generalized Jacobian of Psi at (x, y).
/// Column i of gamma_x (m x n) and gamma_y (n x n) is the selected
/// generalized gradient of Psi_i, following the Cartesian-product layout.
template <typename Scalar>
struct ClarkeElement {
  Matrix<Scalar> gamma_x;
  Matrix<Scalar> gamma_y;
  std::vector<CoordinateCase<Scalar>> case_labels;
};

/// Choice of c-bar at coordinates where Phi_i ties a bound. Empty cbar means
/// the smoothing limit (1/2, the CHKS weight at an exact tie).
template <typename Scalar>
struct ClarkeSelection {
  Vector<Scalar> cbar;

  Scalar at(Index i) const {
    if (cbar.size() == 0) return Scalar(0.5);
    return std::clamp(cbar(i), Scalar(0), Scalar(1));
  }
};

namespace detail {

template <typename Scalar>
bool ties(Scalar p, Scalar bound) {
  using std::abs;
  return abs(p - bound) <= Scalar(1e-9) * (Scalar(1) + abs(bound));
}

// Pieces needed to build any Clarke element: per-coordinate case and the
// candidate columns for the Phi branch and the active bound branch.
template <typename Scalar>
struct ClarkeParts {
  std::vector<ClarkeCase> cases;
  Matrix<Scalar> phi_cols;    // (m + n) x n, column i = (grad_x Phi_i ; grad_y Phi_i)
  Matrix<Scalar> bound_cols;  // (m + n) x n, column i = (grad of active bound ; 0)
};

template <typename Scalar>
ClarkeParts<Scalar> clarke_parts(const PviProblem<Scalar>& problem, const Vector<Scalar>& x,
                                 const Vector<Scalar>& y) {
  const Index n = problem.n, m = problem.m;
  const Vector<Scalar> p = phi(problem, x, y);
  const Vector<Scalar> lo = problem.omega.l(x);
  const Vector<Scalar> hi = problem.omega.u(x);
  const Matrix<Scalar> Jx = problem.jac_F_x(x, y);
  const Matrix<Scalar> Jy = problem.jac_F_y(x, y);
  const Matrix<Scalar> Gl = problem.omega.grad_l(x);
  const Matrix<Scalar> Gu = problem.omega.grad_u(x);

  ClarkeParts<Scalar> parts;
  parts.cases.resize(static_cast<std::size_t>(n));
  parts.phi_cols.resize(m + n, n);
  parts.bound_cols = Matrix<Scalar>::Zero(m + n, n);
  for (Index i = 0; i < n; ++i) {
    parts.phi_cols.col(i).head(m) = -problem.delta * Jx.row(i).transpose();
    parts.phi_cols.col(i).tail(n) = -problem.delta * Jy.row(i).transpose();
    parts.phi_cols(m + i, i) += Scalar(1);

    ClarkeCase c;
    if (ties(p(i), lo(i))) {
      c = ClarkeCase::AtLower;
    } else if (ties(p(i), hi(i))) {
      c = ClarkeCase::AtUpper;
    } else if (p(i) < lo(i)) {
      c = ClarkeCase::BelowLower;
    } else if (p(i) > hi(i)) {
      c = ClarkeCase::AboveUpper;
    } else {
      c = ClarkeCase::Interior;
    }
    parts.cases[static_cast<std::size_t>(i)] = c;
    if (c == ClarkeCase::BelowLower || c == ClarkeCase::AtLower) {
      parts.bound_cols.col(i).head(m) = Gl.col(i);
    } else if (c == ClarkeCase::AboveUpper || c == ClarkeCase::AtUpper) {
      parts.bound_cols.col(i).head(m) = Gu.col(i);
    }
  }
  return parts;
}

// Column i of the stacked element for weight c on the bound branch.
template <typename Scalar>
Vector<Scalar> clarke_column(const ClarkeParts<Scalar>& parts, Index i, Scalar c) {
  switch (parts.cases[static_cast<std::size_t>(i)]) {
    case ClarkeCase::BelowLower:
    case ClarkeCase::AboveUpper:
      return parts.bound_cols.col(i);
    case ClarkeCase::Interior:
      return parts.phi_cols.col(i);
    default:
      return c * parts.bound_cols.col(i) + (Scalar(1) - c) * parts.phi_cols.col(i);
  }
}

template <typename Scalar>
ClarkeElement<Scalar> assemble(const ClarkeParts<Scalar>& parts, const std::vector<Scalar>& cbar,
                               Index m, Index n) {
  ClarkeElement<Scalar> el;
  el.gamma_x.resize(m, n);
  el.gamma_y.resize(n, n);
  el.case_labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto k = parts.cases[static_cast<std::size_t>(i)];
    const bool tie = k == ClarkeCase::AtLower || k == ClarkeCase::AtUpper;
    const Scalar c = tie ? cbar[static_cast<std::size_t>(i)] : Scalar(0);
    const Vector<Scalar> col = clarke_column(parts, i, c);
    el.gamma_x.col(i) = col.head(m);
    el.gamma_y.col(i) = col.tail(n);
    el.case_labels[static_cast<std::size_t>(i)] = {k, c};
  }
  return el;
}

template <typename Scalar>
Scalar spectral_norm(const Matrix<Scalar>& a) {
  using std::sqrt;
  if (a.size() == 0) return Scalar(0);
  // Gram matrix of the smaller side.
  const Matrix<Scalar> g = a.rows() >= a.cols() ? Matrix<Scalar>(a.transpose() * a)
                                                : Matrix<Scalar>(a * a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(g, Eigen::EigenvaluesOnly);
  return sqrt(std::max(eig.eigenvalues().maxCoeff(), Scalar(0)));
}

}  // namespace detail

/// Clarke element from the five-case formula with the given c-bar policy.
template <typename Scalar>
ClarkeElement<Scalar> clarke_element(const PviProblem<Scalar>& problem, const Vector<Scalar>& x,
                                     const Vector<Scalar>& y,
                                     const ClarkeSelection<Scalar>& selection = {}) {
  problem.check_dims(x, y);
  if (selection.cbar.size() != 0) {
    detail::require_size(selection.cbar.size(), problem.n, "ClarkeSelection cbar");
  }
  const auto parts = detail::clarke_parts(problem, x, y);
  std::vector<Scalar> cbar(static_cast<std::size_t>(problem.n));
  for (Index i = 0; i < problem.n; ++i) cbar[static_cast<std::size_t>(i)] = selection.at(i);
  return detail::assemble(parts, cbar, problem.m, problem.n);
}

template <typename Scalar>
struct ConsistencyResult {
  Scalar gap;
  ClarkeElement<Scalar> element;
};

/// Smallest spectral-norm distance between the transposed smoothed Jacobian
/// (stacked as (m + n) x n) and Clarke elements whose tie weights lie on a
/// uniform grid of `grid_points` values in [0, 1].
///
/// Up to two tie coordinates are enumerated exhaustively. With more ties the
/// search starts from the best shared c-bar and from per-column minimizers,
/// then improves by coordinate sweeps, so the result is never worse than any
/// shared grid value.
template <typename Scalar>
ConsistencyResult<Scalar> best_clarke_element(const SmoothingKernel<Scalar>& kernel,
                                              const PviProblem<Scalar>& problem,
                                              const Vector<Scalar>& x, const Vector<Scalar>& y,
                                              Scalar mu, int grid_points = 101) {
  if (grid_points < 2) throw ArgumentError("best_clarke_element: grid needs at least 2 points");
  const Index n = problem.n, m = problem.m;
  const auto jac = psi_mu_jacobian(kernel, problem, x, y, mu);
  Matrix<Scalar> smoothed(m + n, n);
  smoothed.topRows(m) = jac.d_psi_dx.transpose();
  smoothed.bottomRows(n) = jac.d_psi_dy.transpose();

  const auto parts = detail::clarke_parts(problem, x, y);
  std::vector<Index> ties;
  for (Index i = 0; i < n; ++i) {
    const auto k = parts.cases[static_cast<std::size_t>(i)];
    if (k == ClarkeCase::AtLower || k == ClarkeCase::AtUpper) ties.push_back(i);
  }

  std::vector<Scalar> grid(static_cast<std::size_t>(grid_points));
  for (int g = 0; g < grid_points; ++g) grid[g] = Scalar(g) / Scalar(grid_points - 1);

  Matrix<Scalar> diff(m + n, n);
  for (Index i = 0; i < n; ++i) diff.col(i) = smoothed.col(i) - detail::clarke_column(parts, i, Scalar(0));

  std::vector<Scalar> cbar(static_cast<std::size_t>(n), Scalar(0));
  auto set_tie = [&](Index i, Scalar c) {
    cbar[static_cast<std::size_t>(i)] = c;
    diff.col(i) = smoothed.col(i) - detail::clarke_column(parts, i, c);
  };

  Scalar best = detail::spectral_norm(diff);
  std::vector<Scalar> best_cbar = cbar;

  if (ties.size() == 1 || ties.size() == 2) {
    const std::size_t k = ties.size();
    const std::size_t total = k == 1 ? grid.size() : grid.size() * grid.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
      set_tie(ties[0], grid[idx % grid.size()]);
      if (k == 2) set_tie(ties[1], grid[idx / grid.size()]);
      const Scalar d = detail::spectral_norm(diff);
      if (d < best) {
        best = d;
        best_cbar = cbar;
      }
    }
  } else if (ties.size() > 2) {
    // Shared weight across all ties.
    for (const Scalar c : grid) {
      for (Index i : ties) set_tie(i, c);
      const Scalar d = detail::spectral_norm(diff);
      if (d < best) {
        best = d;
        best_cbar = cbar;
      }
    }
    // Per-column Euclidean minimizers.
    for (Index i : ties) {
      Scalar col_best = std::numeric_limits<Scalar>::infinity();
      Scalar arg = Scalar(0);
      for (const Scalar c : grid) {
        const Scalar d = (smoothed.col(i) - detail::clarke_column(parts, i, c)).norm();
        if (d < col_best) {
          col_best = d;
          arg = c;
        }
      }
      set_tie(i, arg);
    }
    if (const Scalar d = detail::spectral_norm(diff); d < best) {
      best = d;
      best_cbar = cbar;
    }
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (Index i : ties) set_tie(i, best_cbar[static_cast<std::size_t>(i)]);
      for (Index i : ties) {
        Scalar keep = best_cbar[static_cast<std::size_t>(i)];
        for (const Scalar c : grid) {
          set_tie(i, c);
          const Scalar d = detail::spectral_norm(diff);
          if (d < best) {
            best = d;
            keep = c;
            best_cbar = cbar;
          }
        }
        set_tie(i, keep);
      }
    }
  }

  return {best, detail::assemble(parts, best_cbar, m, n)};
}

template <typename Scalar>
Scalar jacobian_consistency_gap(const SmoothingKernel<Scalar>& kernel,
                                const PviProblem<Scalar>& problem, const Vector<Scalar>& x,
                                const Vector<Scalar>& y, Scalar mu, int grid_points = 101) {
  return best_clarke_element(kernel, problem, x, y, mu, grid_points).gap;
}

}  // namespace siga

#endif  // SIGA_SMOOTHING_HPP
