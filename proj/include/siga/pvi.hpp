#ifndef SIGA_PVI_HPP
#define SIGA_PVI_HPP

#include <siga/box.hpp>
#include <siga/core.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>

namespace siga {

/// Parametric variational inequality VI(Omega(x), F(x, .)) on a moving box,
/// together with the step delta of the fixed-point map
/// Psi(x, y) = Proj_{Omega(x)}(y - delta F(x, y)).
///
/// Jacobians use the usual row convention: jac_F_x is n x m, jac_F_y is n x n.
template <typename Scalar>
struct PviProblem {
  using VecFn = std::function<Vector<Scalar>(const Vector<Scalar>&, const Vector<Scalar>&)>;
  using MatFn = std::function<Matrix<Scalar>(const Vector<Scalar>&, const Vector<Scalar>&)>;

  PviProblem(Index n, Index m, VecFn F, MatFn jac_F_x, MatFn jac_F_y, Scalar delta,
             MovingBox<Scalar> omega, FeasibleBox<Scalar> domain)
      : n(n),
        m(m),
        F(std::move(F)),
        jac_F_x(std::move(jac_F_x)),
        jac_F_y(std::move(jac_F_y)),
        delta(delta),
        omega(std::move(omega)),
        domain(std::move(domain)) {
    if (n <= 0 || m <= 0) throw ArgumentError("PviProblem: dimensions must be positive");
    if (!(delta > Scalar(0)) || !std::isfinite(static_cast<double>(delta))) {
      throw ArgumentError("PviProblem: delta must be positive");
    }
    detail::require_size(this->domain.dim(), m, "PviProblem domain");
    if (!this->F || !this->jac_F_x || !this->jac_F_y || !this->omega.l || !this->omega.u ||
        !this->omega.grad_l || !this->omega.grad_u) {
      throw ArgumentError("PviProblem: all callables must be set");
    }
  }

  void check_dims(const Vector<Scalar>& x, const Vector<Scalar>& y) const {
    detail::require_size(x.size(), m, "x");
    detail::require_size(y.size(), n, "y");
  }

  Index n;
  Index m;
  VecFn F;
  MatFn jac_F_x;
  MatFn jac_F_y;
  Scalar delta;
  MovingBox<Scalar> omega;
  FeasibleBox<Scalar> domain;
};

/// Upper-level objective f(x, y) with its partial gradients.
template <typename Scalar>
struct UpperObjective {
  std::function<Scalar(const Vector<Scalar>&, const Vector<Scalar>&)> f;
  std::function<Vector<Scalar>(const Vector<Scalar>&, const Vector<Scalar>&)> grad_f_x;
  std::function<Vector<Scalar>(const Vector<Scalar>&, const Vector<Scalar>&)> grad_f_y;
};

/// Phi(x, y) = y - delta F(x, y).
template <typename Scalar>
Vector<Scalar> phi(const PviProblem<Scalar>& problem, const Vector<Scalar>& x,
                   const Vector<Scalar>& y) {
  problem.check_dims(x, y);
  Vector<Scalar> Fv = problem.F(x, y);
  detail::require_size(Fv.size(), problem.n, "F(x, y)");
  return y - problem.delta * Fv;
}

/// Psi(x, y) = mid{l(x), u(x), Phi(x, y)}.
template <typename Scalar>
Vector<Scalar> psi(const PviProblem<Scalar>& problem, const Vector<Scalar>& x,
                   const Vector<Scalar>& y) {
  return project_moving_box(problem.omega, x, phi(problem, x, y));
}

enum class ContractionCondition { StronglyMonotone, UniformP, Cocoercive, Unverified };

inline const char* to_string(ContractionCondition c) {
  switch (c) {
    case ContractionCondition::StronglyMonotone: return "strongly_monotone";
    case ContractionCondition::UniformP: return "uniform_p";
    case ContractionCondition::Cocoercive: return "cocoercive";
    case ContractionCondition::Unverified: return "unverified";
  }
  return "unknown";
}

template <typename Scalar>
struct ContractionReport {
  Scalar sigma = Scalar(0);
  Scalar lbar = Scalar(0);
  ContractionCondition condition = ContractionCondition::Unverified;
  Scalar delta = Scalar(0);
  Scalar delta_max = Scalar(0);
  // Contraction constant of Psi(x, .). Only guaranteed below one when the
  // condition is verified.
  Scalar L = Scalar(1);
  bool constant_jacobian = false;
  std::string warning;
};

/// Contraction constant from known moduli.
///
/// StronglyMonotone and UniformP: L = sqrt(1 - 2 delta sigma + delta^2 lbar^2)
/// valid for 0 < delta < 2 sigma / lbar^2.
/// Cocoercive: L = sqrt(1 + lbar^2 delta (delta - 2 sigma)) valid for
/// 0 < delta < 2 sigma, sigma < 1 / lbar.
template <typename Scalar>
ContractionReport<Scalar> contraction_from_moduli(ContractionCondition condition, Scalar sigma,
                                                  Scalar lbar, Scalar delta) {
  ContractionReport<Scalar> r;
  r.sigma = sigma;
  r.lbar = lbar;
  r.delta = delta;
  using std::sqrt;
  if (condition == ContractionCondition::Cocoercive) {
    r.delta_max = sigma > Scalar(0) ? Scalar(2) * sigma : Scalar(0);
    const Scalar sq = Scalar(1) + lbar * lbar * delta * (delta - Scalar(2) * sigma);
    r.L = sqrt(std::max(sq, Scalar(0)));
  } else {
    r.delta_max = (sigma > Scalar(0) && lbar > Scalar(0)) ? Scalar(2) * sigma / (lbar * lbar)
                                                         : Scalar(0);
    const Scalar sq = Scalar(1) - Scalar(2) * delta * sigma + delta * delta * lbar * lbar;
    r.L = sqrt(std::max(sq, Scalar(0)));
  }
  const bool ok = sigma > Scalar(0) && delta > Scalar(0) && delta < r.delta_max && r.L < Scalar(1);
  if (ok && condition != ContractionCondition::Unverified) {
    r.condition = condition;
  } else {
    r.condition = ContractionCondition::Unverified;
    if (sigma <= Scalar(0)) {
      r.warning = "no positive monotonicity modulus; contraction not certified";
    } else {
      r.warning = "delta exceeds the admissible bound " + std::to_string(double(r.delta_max)) +
                  "; contraction is not guaranteed by the sufficient condition";
    }
  }
  return r;
}

/// Estimates sigma (min eigenvalue of the symmetric part of jac_F_y) and
/// lbar (max spectral norm of jac_F_y) on seeded uniform samples over
/// X x [-10, 10]^n, then applies the uniform-P bound.
///
/// Sampling gives evidence, not a proof: a nonmonotone F can still pass.
template <typename Scalar>
ContractionReport<Scalar> analyze_contraction(const PviProblem<Scalar>& problem,
                                              long sample_count = 64, std::uint64_t seed = 42) {
  if (sample_count <= 0) throw ArgumentError("analyze_contraction: sample_count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto& lo = problem.domain.lower();
  const auto& hi = problem.domain.upper();
  Vector<Scalar> x(problem.m), y(problem.n);

  Scalar sigma = std::numeric_limits<Scalar>::infinity();
  Scalar lbar = Scalar(0);
  Matrix<Scalar> last_J;
  Scalar last_min_eig = Scalar(0), last_norm = Scalar(0);
  bool constant = true;
  for (long s = 0; s < sample_count; ++s) {
    for (Index j = 0; j < problem.m; ++j) x(j) = lo(j) + Scalar(unit(rng)) * (hi(j) - lo(j));
    for (Index i = 0; i < problem.n; ++i) y(i) = Scalar(-10) + Scalar(20) * Scalar(unit(rng));
    Matrix<Scalar> J = problem.jac_F_y(x, y);
    if (J.rows() != problem.n || J.cols() != problem.n) {
      throw ArgumentError("analyze_contraction: jac_F_y has wrong shape");
    }
    if (s > 0 && J == last_J) {
      // Linear in y: the spectrum is already known.
    } else {
      if (s > 0) constant = false;
      const Matrix<Scalar> sym = (J + J.transpose()) / Scalar(2);
      Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sym, Eigen::EigenvaluesOnly);
      last_min_eig = eig.eigenvalues().minCoeff();
      Eigen::JacobiSVD<Matrix<Scalar>> svd(J);
      last_norm = svd.singularValues()(0);
      last_J = std::move(J);
    }
    sigma = std::min(sigma, last_min_eig);
    lbar = std::max(lbar, last_norm);
  }

  auto report = contraction_from_moduli(ContractionCondition::UniformP, sigma, lbar, problem.delta);
  report.constant_jacobian = constant;
  return report;
}

}  // namespace siga

#endif  // SIGA_PVI_HPP
