#ifndef SIGA_SOLVER_HPP
#define SIGA_SOLVER_HPP

#include <siga/core.hpp>
#include <siga/pvi.hpp>
#include <siga/smoothing.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace siga {

/// Parameters of the smoothing implicit gradient iteration.
///
/// Defaults are the portfolio experiment settings: p = 0.001,
/// mu0 = 0.001, zeta0 = 0.01, tau0 = 0.01 and 2000 outer iterations.
template <typename Scalar>
struct SigaConfig {
  Scalar mu0 = Scalar(0.001);
  Scalar zeta0 = Scalar(0.01);
  Scalar tau0 = Scalar(0.01);
  Scalar p = Scalar(0.001);
  long max_outer_iters = 2000;
  long max_inner_iters = 1000;
  // Picard steps taken before the inner residual test may accept y.
  long min_inner_iters = 1;
  // Stop once the certified epsilon drops below this value (0 disables).
  Scalar early_stop_epsilon = Scalar(0);
  int clarke_grid_points = 101;
  Vector<Scalar> x0;
  Vector<Scalar> y0;

  void validate(Index m, Index n) const {
    if (!(mu0 > Scalar(0) && mu0 <= Scalar(1))) throw ArgumentError("SigaConfig: mu0 must lie in (0, 1]");
    if (!(zeta0 > Scalar(0))) throw ArgumentError("SigaConfig: zeta0 must be positive");
    if (!(tau0 > Scalar(0))) throw ArgumentError("SigaConfig: tau0 must be positive");
    if (!(p > Scalar(0) && p < Scalar(0.25))) throw ArgumentError("SigaConfig: p must lie in (0, 1/4)");
    if (max_outer_iters < 0) throw ArgumentError("SigaConfig: max_outer_iters must be nonnegative");
    if (max_inner_iters <= 0) throw ArgumentError("SigaConfig: max_inner_iters must be positive");
    if (min_inner_iters < 0) throw ArgumentError("SigaConfig: min_inner_iters must be nonnegative");
    if (early_stop_epsilon < Scalar(0)) throw ArgumentError("SigaConfig: early_stop_epsilon must be nonnegative");
    detail::require_size(x0.size(), m, "SigaConfig x0");
    detail::require_size(y0.size(), n, "SigaConfig y0");
  }
};

template <typename Scalar>
struct Schedule {
  Scalar mu;
  Scalar zeta;
  Scalar tau;
};

/// mu_t = mu0 / t^p, zeta_t = zeta0 / t^(2p), tau_t = tau0 / t.
template <typename Scalar>
Schedule<Scalar> schedules(const SigaConfig<Scalar>& config, long t) {
  using std::pow;
  if (t < 1) throw ArgumentError("schedules: iteration counter starts at 1");
  const Scalar tt = Scalar(t);
  return {config.mu0 / pow(tt, config.p), config.zeta0 / pow(tt, Scalar(2) * config.p),
          config.tau0 / tt};
}

/// Inner iteration cap from the Banach rate: ceil(log(tau / diam) / log(L)) + 50,
/// clamped to [100, 100000].
template <typename Scalar>
long default_inner_cap(Scalar L, Scalar tau, Scalar diameter) {
  using std::ceil;
  using std::log;
  constexpr long kFloor = 100, kCeiling = 100000;
  if (!(L > Scalar(0) && L < Scalar(1)) || !(tau > Scalar(0)) || !(diameter > tau)) return kFloor;
  const double k = ceil(double(log(tau / diameter) / log(L))) + 50.0;
  if (!std::isfinite(k)) return kCeiling;
  return std::clamp(static_cast<long>(std::min(k, double(kCeiling))), kFloor, kCeiling);
}

template <typename Scalar>
struct FixedPointResult {
  Vector<Scalar> y;
  long iterations = 0;
  Scalar residual = Scalar(0);
  bool converged = false;
};

/// Picard iteration y <- Psi_mu(x, y) until ||y - Psi_mu(x, y)|| <= tau after
/// at least `min_iters` updates, or until `max_inner` updates were made.
/// mu = 0 iterates the nonsmooth map Psi. Never throws on non-convergence.
template <typename Scalar>
FixedPointResult<Scalar> picard_iterate(const SmoothingKernel<Scalar>& kernel,
                                        const PviProblem<Scalar>& problem, const Vector<Scalar>& x,
                                        Scalar mu, Scalar tau, const Vector<Scalar>& y_init,
                                        long max_inner, long min_iters = 0) {
  if (mu < Scalar(0)) throw ArgumentError("fixed_point_solve: mu must be nonnegative");
  if (!(tau > Scalar(0))) throw ArgumentError("fixed_point_solve: tau must be positive");
  if (max_inner <= 0) throw ArgumentError("fixed_point_solve: max_inner must be positive");
  problem.check_dims(x, y_init);
  auto map = [&](const Vector<Scalar>& y) {
    return mu > Scalar(0) ? psi_mu(kernel, problem, x, y, mu) : psi(problem, x, y);
  };

  FixedPointResult<Scalar> out;
  out.y = y_init;
  for (long k = 0;; ++k) {
    Vector<Scalar> next = map(out.y);
    out.residual = (out.y - next).norm();
    out.iterations = k;
    if (!std::isfinite(static_cast<double>(out.residual))) {
      throw NumericalError("fixed_point_solve: non-finite residual after " + std::to_string(k) +
                           " iterations");
    }
    if (out.residual <= tau && k >= min_iters) {
      out.converged = true;
      return out;
    }
    if (k >= max_inner) return out;
    out.y = std::move(next);
  }
}

/// As picard_iterate, but a residual still above tau after `max_inner`
/// updates raises ConvergenceError carrying the last residual.
template <typename Scalar>
FixedPointResult<Scalar> fixed_point_solve(const SmoothingKernel<Scalar>& kernel,
                                           const PviProblem<Scalar>& problem,
                                           const Vector<Scalar>& x, Scalar mu, Scalar tau,
                                           const Vector<Scalar>& y_init, long max_inner,
                                           long min_iters = 0) {
  auto out = picard_iterate(kernel, problem, x, mu, tau, y_init, max_inner, min_iters);
  if (!out.converged) {
    throw ConvergenceError("fixed_point_solve: residual " + std::to_string(double(out.residual)) +
                               " above tolerance " + std::to_string(double(tau)) + " after " +
                               std::to_string(out.iterations) + " iterations",
                           double(out.residual), out.iterations);
  }
  return out;
}

/// Adjoint v solving (I - dPsi_mu/dy)^T v = -grad_y f. The system matrix is
/// nonsingular whenever Psi_mu(x, .) is a contraction; a least-squares
/// solve takes over if the LU factor reports rank deficiency.
template <typename Scalar>
Vector<Scalar> solve_adjoint(const SmoothedJacobian<Scalar>& jac, const Vector<Scalar>& grad_y_f) {
  const Index n = jac.d_psi_dy.rows();
  detail::require_size(grad_y_f.size(), n, "solve_adjoint grad_y f");
  const Matrix<Scalar> A = (Matrix<Scalar>::Identity(n, n) - jac.d_psi_dy).transpose();
  const Vector<Scalar> b = -grad_y_f;
  Vector<Scalar> v;
  Eigen::FullPivLU<Matrix<Scalar>> lu(A);
  if (lu.isInvertible()) {
    v = lu.solve(b);
  } else {
    v = A.completeOrthogonalDecomposition().solve(b);
  }
  if (!v.allFinite()) throw NumericalError("solve_adjoint: factorization produced non-finite values");
  return v;
}

template <typename Scalar>
Vector<Scalar> solve_adjoint(const SmoothingKernel<Scalar>& kernel, const PviProblem<Scalar>& problem,
                             const UpperObjective<Scalar>& objective, const Vector<Scalar>& x,
                             const Vector<Scalar>& y, Scalar mu) {
  const auto jac = psi_mu_jacobian(kernel, problem, x, y, mu);
  return solve_adjoint(jac, objective.grad_f_y(x, y));
}

/// d_x = grad_x f + (grad_x H_mu)^T v with H_mu = y - Psi_mu(x, y).
template <typename Scalar>
Vector<Scalar> implicit_gradient(const SmoothedJacobian<Scalar>& jac, const Vector<Scalar>& grad_x_f,
                                 const Vector<Scalar>& v) {
  detail::require_size(grad_x_f.size(), jac.d_psi_dx.cols(), "implicit_gradient grad_x f");
  detail::require_size(v.size(), jac.d_psi_dx.rows(), "implicit_gradient v");
  return grad_x_f - jac.d_psi_dx.transpose() * v;
}

template <typename Scalar>
Vector<Scalar> implicit_gradient(const SmoothingKernel<Scalar>& kernel,
                                 const PviProblem<Scalar>& problem,
                                 const UpperObjective<Scalar>& objective, const Vector<Scalar>& x,
                                 const Vector<Scalar>& y, const Vector<Scalar>& v, Scalar mu) {
  const auto jac = psi_mu_jacobian(kernel, problem, x, y, mu);
  return implicit_gradient(jac, objective.grad_f_x(x, y), v);
}

/// Proj_X(x - zeta d_x).
template <typename Scalar>
Vector<Scalar> projected_step(const FeasibleBox<Scalar>& domain, const Vector<Scalar>& x,
                              const Vector<Scalar>& d_x, Scalar zeta) {
  if (!(zeta > Scalar(0))) throw ArgumentError("projected_step: zeta must be positive");
  detail::require_size(d_x.size(), x.size(), "projected_step d_x");
  return domain.project(x - zeta * d_x);
}

/// dist(0, g + N_X(x)) for a box X.
template <typename Scalar>
Scalar box_normal_cone_distance(const FeasibleBox<Scalar>& domain, const Vector<Scalar>& x,
                                const Vector<Scalar>& g) {
  detail::require_size(x.size(), domain.dim(), "normal cone x");
  detail::require_size(g.size(), domain.dim(), "normal cone g");
  Scalar acc = Scalar(0);
  for (Index i = 0; i < x.size(); ++i) {
    const bool at_lo = x(i) <= domain.lower()(i);
    const bool at_hi = x(i) >= domain.upper()(i);
    Scalar r;
    if (at_lo && at_hi) {
      r = Scalar(0);
    } else if (at_lo) {
      r = std::max(Scalar(0), -g(i));
    } else if (at_hi) {
      r = std::max(Scalar(0), g(i));
    } else {
      r = std::abs(g(i));
    }
    acc += r * r;
  }
  return std::sqrt(acc);
}

template <typename Scalar>
struct SigaState {
  long t = 0;
  Vector<Scalar> x;
  Vector<Scalar> y;
  Vector<Scalar> v;
  Scalar mu = Scalar(0);
  Scalar zeta = Scalar(0);
  Scalar tau = Scalar(0);
  Vector<Scalar> d_x;
};

/// One row per completed outer iteration.
template <typename Scalar>
struct SigaRecord {
  long t = 0;
  Scalar mu = Scalar(0);
  Scalar zeta = Scalar(0);
  Scalar tau = Scalar(0);
  Scalar feas = Scalar(0);     // ||y - Psi(x, y)||
  Scalar feas_mu = Scalar(0);  // ||y - Psi_mu(x, y)||
  Scalar stat = Scalar(0);     // stationarity residual at (x^t, y^t, v^t)
  Scalar objective = Scalar(0);
  Scalar step_norm = Scalar(0);  // ||x^{t+1} - x^t||
  long inner_iters = 0;
  Scalar adjoint_norm = Scalar(0);
  Scalar grad_y_norm = Scalar(0);
  Scalar jac_y_norm = Scalar(0);  // spectral norm of dPsi_mu/dy
};

template <typename Scalar>
struct SigaTrace {
  std::vector<SigaRecord<Scalar>> records;
};

template <typename Scalar>
struct SigaResult {
  SigaState<Scalar> state;
  SigaTrace<Scalar> trace;
};

namespace detail {

template <typename Scalar>
Scalar stationarity_from_parts(const FeasibleBox<Scalar>& domain, const Vector<Scalar>& x,
                               const SmoothedJacobian<Scalar>& jac, const Vector<Scalar>& gx,
                               const Vector<Scalar>& gy, const Vector<Scalar>& v) {
  using std::sqrt;
  const Vector<Scalar> d_x = implicit_gradient(jac, gx, v);
  const Scalar rx = box_normal_cone_distance(domain, x, d_x);
  const Scalar ry = (gy + v - jac.d_psi_dy.transpose() * v).norm();
  return sqrt(rx * rx + ry * ry);
}

template <typename Scalar>
void require_finite(const SigaState<Scalar>& s) {
  if (!s.x.allFinite() || !s.y.allFinite() || !s.v.allFinite() || !s.d_x.allFinite()) {
    throw NumericalError("run_siga: non-finite state at iteration " + std::to_string(s.t));
  }
}

}  // namespace detail

/// Stationarity residual: distance from zero of the smoothed KKT map
/// (grad f + (0; v) - grad Psi_mu^T v + (N_X(x); 0)) at the state.
///
/// The normal cone is taken at x^t, the iterate the gradient was evaluated at.
template <typename Scalar>
Scalar stationarity_residual(const SmoothingKernel<Scalar>& kernel, const PviProblem<Scalar>& problem,
                             const UpperObjective<Scalar>& objective, const SigaState<Scalar>& state) {
  const auto jac = psi_mu_jacobian(kernel, problem, state.x, state.y, state.mu);
  return detail::stationarity_from_parts(problem.domain, state.x, jac,
                                         objective.grad_f_x(state.x, state.y),
                                         objective.grad_f_y(state.x, state.y), state.v);
}

template <typename Scalar>
struct StationarityCertificate {
  Scalar epsilon_feas = Scalar(0);
  Scalar epsilon_stat_x = Scalar(0);
  Scalar epsilon_stat_y = Scalar(0);
  Scalar jacobian_gap = Scalar(0);
  Scalar beta = Scalar(0);
  ClarkeElement<Scalar> element;

  Scalar epsilon() const { return std::max({epsilon_feas, epsilon_stat_x, epsilon_stat_y}); }
};

/// Epsilon-stationarity certificate for (x, y, v): feasibility of the
/// nonsmooth fixed point and both stationarity blocks evaluated with the
/// Clarke element closest to the smoothed Jacobian. beta is ||v||.
template <typename Scalar>
StationarityCertificate<Scalar> certify_epsilon_stationary(const SmoothingKernel<Scalar>& kernel,
                                                           const PviProblem<Scalar>& problem,
                                                           const UpperObjective<Scalar>& objective,
                                                           const SigaState<Scalar>& state,
                                                           int grid_points = 101) {
  const auto& x = state.x;
  const auto& y = state.y;
  const auto& v = state.v;
  problem.check_dims(x, y);
  detail::require_size(v.size(), problem.n, "certificate v");
  const auto best = best_clarke_element(kernel, problem, x, y, state.mu, grid_points);

  StationarityCertificate<Scalar> c;
  c.element = best.element;
  c.jacobian_gap = best.gap;
  c.beta = v.norm();
  c.epsilon_feas = (y - psi(problem, x, y)).norm();
  const Vector<Scalar> gx = objective.grad_f_x(x, y) - best.element.gamma_x * v;
  c.epsilon_stat_x = box_normal_cone_distance(problem.domain, x, gx);
  c.epsilon_stat_y = (objective.grad_f_y(x, y) + v - best.element.gamma_y * v).norm();
  return c;
}

/// Smoothing implicit gradient iteration. Each outer step: update the
/// schedules, solve the smoothed fixed point warm-started from the previous
/// y, solve the adjoint system, assemble the implicit gradient and take a
/// projected step on X.
template <typename Scalar>
SigaResult<Scalar> run_siga(const SmoothingKernel<Scalar>& kernel, const PviProblem<Scalar>& problem,
                            const UpperObjective<Scalar>& objective,
                            const SigaConfig<Scalar>& config) {
  config.validate(problem.m, problem.n);
  SigaResult<Scalar> result;
  auto& s = result.state;
  s.t = 0;
  s.x = problem.domain.project(config.x0);
  s.y = config.y0;
  s.v = Vector<Scalar>::Zero(problem.n);
  s.d_x = Vector<Scalar>::Zero(problem.m);
  s.mu = config.mu0;
  s.zeta = config.zeta0;
  s.tau = config.tau0;
  result.trace.records.reserve(static_cast<std::size_t>(config.max_outer_iters));

  for (long t = 1; t <= config.max_outer_iters; ++t) {
    const auto sched = schedules(config, t);
    FixedPointResult<Scalar> inner;
    try {
      inner = fixed_point_solve(kernel, problem, s.x, sched.mu, sched.tau, s.y,
                                config.max_inner_iters, config.min_inner_iters);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("run_siga: inner solve failed at iteration " + std::to_string(t) +
                                 ": " + e.what(),
                             e.last_residual(), e.iterations());
    }

    const auto jac = psi_mu_jacobian(kernel, problem, s.x, inner.y, sched.mu);
    const Vector<Scalar> gx = objective.grad_f_x(s.x, inner.y);
    const Vector<Scalar> gy = objective.grad_f_y(s.x, inner.y);
    const Vector<Scalar> v = solve_adjoint(jac, gy);
    const Vector<Scalar> d_x = implicit_gradient(jac, gx, v);
    const Vector<Scalar> x_next = projected_step(problem.domain, s.x, d_x, sched.zeta);

    SigaRecord<Scalar> rec;
    rec.t = t;
    rec.mu = sched.mu;
    rec.zeta = sched.zeta;
    rec.tau = sched.tau;
    rec.feas = (inner.y - psi(problem, s.x, inner.y)).norm();
    rec.feas_mu = (inner.y - jac.value).norm();
    rec.stat = detail::stationarity_from_parts(problem.domain, s.x, jac, gx, gy, v);
    rec.objective = objective.f(s.x, inner.y);
    rec.step_norm = (x_next - s.x).norm();
    rec.inner_iters = inner.iterations;
    rec.adjoint_norm = v.norm();
    rec.grad_y_norm = gy.norm();
    rec.jac_y_norm = detail::spectral_norm(jac.d_psi_dy);
    result.trace.records.push_back(rec);

    s.t = t;
    s.y = inner.y;
    s.v = v;
    s.d_x = d_x;
    s.mu = sched.mu;
    s.zeta = sched.zeta;
    s.tau = sched.tau;
    s.x = x_next;
    detail::require_finite(s);
    if (!std::isfinite(static_cast<double>(rec.objective))) {
      throw NumericalError("run_siga: non-finite objective at iteration " + std::to_string(t));
    }

    if (config.early_stop_epsilon > Scalar(0)) {
      const auto cert =
          certify_epsilon_stationary(kernel, problem, objective, s, config.clarke_grid_points);
      if (cert.epsilon() <= config.early_stop_epsilon) break;
    }
  }
  return result;
}

/// Re-solves y at state.x (smoothing state.mu, tolerance tau, warm start
/// state.y) and recomputes v and d_x so that all fields refer to one point.
template <typename Scalar>
SigaState<Scalar> refresh_state(const SmoothingKernel<Scalar>& kernel,
                                const PviProblem<Scalar>& problem,
                                const UpperObjective<Scalar>& objective, SigaState<Scalar> state,
                                Scalar tau, long max_inner) {
  state.y = fixed_point_solve(kernel, problem, state.x, state.mu, tau, state.y, max_inner).y;
  const auto jac = psi_mu_jacobian(kernel, problem, state.x, state.y, state.mu);
  state.v = solve_adjoint(jac, objective.grad_f_y(state.x, state.y));
  state.d_x = implicit_gradient(jac, objective.grad_f_x(state.x, state.y), state.v);
  state.tau = tau;
  return state;
}

}  // namespace siga

#endif  // SIGA_SOLVER_HPP
