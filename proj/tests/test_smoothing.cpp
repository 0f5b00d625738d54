#include <doctest.h>

#include "helpers.hpp"

#include <siga/smoothing.hpp>

#include <random>

using namespace siga;
using testing::vec;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const auto kChks = SmoothingKernel<double>::chks();
const auto kUniform = SmoothingKernel<double>::uniform();

// F = 0 on the fixed box [0, 1]^n with delta = 1: Phi = y, so y sets Phi
// directly.
PviProblem<double> identity_problem(Index n) {
  return PviProblem<double>(
      n, 1, [n](const VectorXd&, const VectorXd&) { return VectorXd::Zero(n).eval(); },
      [n](const VectorXd&, const VectorXd&) { return MatrixXd::Zero(n, 1).eval(); },
      [n](const VectorXd&, const VectorXd&) { return MatrixXd::Zero(n, n).eval(); }, 1.0,
      MovingBox<double>::fixed(VectorXd::Zero(n), VectorXd::Ones(n), 1),
      FeasibleBox<double>(vec({0.0}), vec({1.0})));
}

// Nonlinear F with a moving box, m = 2, n = 2.
PviProblem<double> moving_problem() {
  auto F = [](const VectorXd& x, const VectorXd& y) {
    return vec({2 * y(0) + 0.5 * y(1) + std::sin(y(0)) - x(0), -0.3 * y(0) + 1.5 * y(1) - x(1) * x(0)});
  };
  auto Jx = [](const VectorXd& x, const VectorXd&) {
    MatrixXd J(2, 2);
    J << -1.0, 0.0, -x(1), -x(0);
    return J;
  };
  auto Jy = [](const VectorXd&, const VectorXd& y) {
    MatrixXd J(2, 2);
    J << 2.0 + std::cos(y(0)), 0.5, -0.3, 1.5;
    return J;
  };
  MovingBox<double> omega;
  omega.l = [](const VectorXd& x) { return vec({0.2 * x(0), -0.5 + x(1) * x(1)}); };
  omega.u = [](const VectorXd& x) { return vec({1.0 + x(1), 2.0 + 0.5 * x(0)}); };
  omega.grad_l = [](const VectorXd& x) {
    MatrixXd g(2, 2);
    g << 0.2, 0.0, 0.0, 2 * x(1);
    return g;
  };
  omega.grad_u = [](const VectorXd&) {
    MatrixXd g(2, 2);
    g << 0.0, 0.5, 1.0, 0.0;
    return g;
  };
  return PviProblem<double>(2, 2, F, Jx, Jy, 0.1, omega,
                            FeasibleBox<double>(VectorXd::Zero(2), VectorXd::Ones(2)));
}

double chks_scalar(double l, double u, double p, double mu) {
  return detail::smoothed_mid(kChks, l, u, p, mu);
}

}  // namespace

TEST_CASE("CHKS closed-form examples") {
  for (double mu : {1e-1, 1e-3, 0.7}) CHECK(chks_scalar(0, 1, 0.5, mu) == doctest::Approx(0.5).epsilon(1e-15));
  const double expect = 0.5 * (0.2 + 1.0 - std::sqrt(1.04));
  CHECK(chks_scalar(0, 1, 0, 0.1) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(expect == doctest::Approx(0.090098).epsilon(1e-5));
}

TEST_CASE("CHKS equals the integral smoothing of the clamp against its density") {
  // quadrature oracle: psi_mu = int mid{l, u, p - mu t} rho(t) dt
  for (double mu : {0.1, 0.03}) {
    for (double p : {-0.4, 0.0, 0.05, 0.5, 0.97, 1.3}) {
      const double quad = testing::chks_density_integral(
          [&](double t) { return testing::clamp_mid(0.0, 1.0, p - mu * t); });
      CHECK(chks_scalar(0.0, 1.0, p, mu) == doctest::Approx(quad).epsilon(1e-8));
    }
  }
}

TEST_CASE("uniform kernel equals quadrature of its density") {
  for (double mu : {0.2, 0.05}) {
    for (double p : {-0.1, 0.0, 0.04, 0.5, 0.99, 1.2}) {
      const double quad = testing::uniform_density_integral(
          [&](double t) { return testing::clamp_mid(0.0, 1.0, p - mu * t); });
      CHECK(detail::smoothed_mid(kUniform, 0.0, 1.0, p, mu) == doctest::Approx(quad).epsilon(1e-9));
    }
  }
  // far inside the box the uniform kernel is exact
  CHECK(detail::smoothed_mid(kUniform, 0.0, 1.0, 0.5, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("CHKS stays within 2 mu of the clamp on a dense grid") {
  for (double mu : {1e-1, 1e-2, 1e-3, 1e-4}) {
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double p = -2.0 + 5.0 * k / 9999.0;
      worst = std::max(worst, std::abs(chks_scalar(0.0, 1.0, p, mu) - testing::clamp_mid(0, 1, p)));
    }
    CHECK(worst <= 2 * mu);
  }
}

TEST_CASE("regime weights partition unity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2.0, 3.0), M(1e-4, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const double p = U(rng), mu = M(rng);
    for (const auto* kernel : {&kChks, &kUniform}) {
      const auto w = detail::regime_weights(*kernel, 0.0, 1.0, p, mu);
      CHECK(w.lower >= 0.0);
      CHECK(w.upper >= 0.0);
      CHECK(w.interior >= 0.0);
      CHECK(w.lower + w.upper + w.interior == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("psi_mu argument checks") {
  const auto P = identity_problem(1);
  CHECK_THROWS_AS(psi_mu(kChks, P, vec({0.0}), vec({0.5}), 0.0), ArgumentError);
  CHECK_THROWS_AS(psi_mu(kChks, P, vec({0.0}), vec({0.5}), -1.0), ArgumentError);

  auto degenerate = identity_problem(1);
  degenerate.omega = MovingBox<double>::fixed(vec({1.0}), vec({1.0}), 1);
  CHECK_THROWS_AS(psi_mu(kChks, degenerate, vec({0.0}), vec({0.5}), 0.1), ModelError);
}

TEST_CASE("psi_mu_jacobian limits") {
  const auto P = identity_problem(2);
  const VectorXd x = vec({0.0});
  SUBCASE("interior, tiny mu: identity") {
    const auto J = psi_mu_jacobian(kChks, P, x, vec({0.5, 0.4}), 1e-9);
    CHECK((J.d_psi_dy - MatrixXd::Identity(2, 2)).norm() < 1e-12);
  }
  SUBCASE("far below l: zero row, bound gradient column") {
    const auto P2 = moving_problem();
    const VectorXd x2 = vec({0.5, 0.5});
    const VectorXd y = vec({-50.0, 0.5});
    const auto J = psi_mu_jacobian(kChks, P2, x2, y, 1e-3);
    CHECK(J.d_psi_dy.row(0).norm() < 1e-8);
    const VectorXd grad_l0 = P2.omega.grad_l(x2).col(0);
    CHECK((J.d_psi_dx.row(0).transpose() - grad_l0).norm() < 1e-8);
  }
}

TEST_CASE("psi_mu_jacobian matches finite differences") {
  const auto P = moving_problem();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0), Y(-1.0, 3.0);
  for (const auto* kernel : {&kChks, &kUniform}) {
    for (double mu : {0.05, 1e-2, 1e-3}) {
      for (int k = 0; k < 50; ++k) {
        const VectorXd x = vec({U(rng), U(rng)}), y = vec({Y(rng), Y(rng)});
        const auto J = psi_mu_jacobian(*kernel, P, x, y, mu);
        CHECK((J.value - psi_mu(*kernel, P, x, y, mu)).norm() == 0.0);
        const double h = 1e-4 * mu;
        MatrixXd fx(2, 2), fy(2, 2);
        for (int j = 0; j < 2; ++j) {
          VectorXd xp = x, xm = x, yp = y, ym = y;
          xp(j) += h;
          xm(j) -= h;
          yp(j) += h;
          ym(j) -= h;
          fx.col(j) = (psi_mu(*kernel, P, xp, y, mu) - psi_mu(*kernel, P, xm, y, mu)) / (2 * h);
          fy.col(j) = (psi_mu(*kernel, P, x, yp, mu) - psi_mu(*kernel, P, x, ym, mu)) / (2 * h);
        }
        // the uniform kernel has kinks at the edge of its support
        const double tol = kernel == &kChks ? 1e-5 : 1e-3;
        CHECK((J.d_psi_dx - fx).norm() <= tol * std::max(1.0, fx.norm()));
        CHECK((J.d_psi_dy - fy).norm() <= tol * std::max(1.0, fy.norm()));
      }
    }
  }
}

TEST_CASE("smoothing keeps Psi_mu(x, .) Lipschitz with the contraction constant") {
  const auto P = moving_problem();
  const auto rep = analyze_contraction(P);
  REQUIRE(rep.condition != ContractionCondition::Unverified);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0), Y(-1.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const VectorXd x = vec({U(rng), U(rng)});
    const VectorXd a = vec({Y(rng), Y(rng)}), b = vec({Y(rng), Y(rng)});
    const double r = (psi_mu(kChks, P, x, a, 0.01) - psi_mu(kChks, P, x, b, 0.01)).norm() / (a - b).norm();
    worst = std::max(worst, r);
  }
  CHECK(worst <= rep.L + 1e-9);
}

TEST_CASE("Psi_mu is Lipschitz in x (bounded sampled ratio)") {
  const auto P = moving_problem();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.0, 1.0), Y(-1.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const VectorXd x1 = vec({U(rng), U(rng)}), x2 = vec({U(rng), U(rng)});
    const VectorXd y = vec({Y(rng), Y(rng)});
    worst = std::max(worst, (psi_mu(kChks, P, x1, y, 1e-3) - psi_mu(kChks, P, x2, y, 1e-3)).norm() /
                                (x1 - x2).norm());
  }
  CHECK(std::isfinite(worst));
  CHECK(worst < 10.0);
}

TEST_CASE("Clarke element cases") {
  const auto P = moving_problem();
  const VectorXd x = vec({0.5, 0.5});
  const VectorXd lo = P.omega.l(x), hi = P.omega.u(x);
  const MatrixXd Gl = P.omega.grad_l(x), Gu = P.omega.grad_u(x);

  // choose y so that Phi hits prescribed values: solve Phi(y) = target by
  // fixed-point iteration on y = target + delta F(x, y)
  auto y_for = [&](const VectorXd& target) {
    VectorXd y = target;
    for (int k = 0; k < 500; ++k) y = target + P.delta * P.F(x, y);
    return y;
  };
  auto grad_phi = [&](const VectorXd& y, Index i) {
    VectorXd col(4);
    col << -P.delta * P.jac_F_x(x, y).row(i).transpose(),
        (MatrixXd::Identity(2, 2) - P.delta * P.jac_F_y(x, y)).row(i).transpose();
    return col;
  };
  auto clarke_col = [](const ClarkeElement<double>& el, Index i) {
    VectorXd col(4);
    col << el.gamma_x.col(i), el.gamma_y.col(i);
    return col;
  };

  SUBCASE("below lower and interior") {
    const VectorXd y = y_for(vec({lo(0) - 0.3, 0.5 * (lo(1) + hi(1))}));
    const auto el = clarke_element(P, x, y);
    CHECK(el.case_labels[0].kind == ClarkeCase::BelowLower);
    CHECK(el.case_labels[1].kind == ClarkeCase::Interior);
    VectorXd bound(4);
    bound << Gl.col(0), 0.0, 0.0;
    CHECK((clarke_col(el, 0) - bound).norm() < 1e-12);
    CHECK((clarke_col(el, 1) - grad_phi(y, 1)).norm() < 1e-12);
  }
  SUBCASE("ties at the bounds use the convex weight") {
    const VectorXd y = y_for(vec({lo(0), hi(1)}));
    ClarkeSelection<double> sel;
    sel.cbar = vec({0.5, 0.25});
    const auto el = clarke_element(P, x, y, sel);
    CHECK(el.case_labels[0].kind == ClarkeCase::AtLower);
    CHECK(el.case_labels[1].kind == ClarkeCase::AtUpper);
    VectorXd bl(4), bu(4);
    bl << Gl.col(0), 0.0, 0.0;
    bu << Gu.col(1), 0.0, 0.0;
    CHECK((clarke_col(el, 0) - (0.5 * bl + 0.5 * grad_phi(y, 0))).norm() < 1e-9);
    CHECK((clarke_col(el, 1) - (0.25 * bu + 0.75 * grad_phi(y, 1))).norm() < 1e-9);
    // default selection is the smoothing limit 1/2
    const auto def = clarke_element(P, x, y);
    CHECK(def.case_labels[1].cbar == 0.5);
  }
  SUBCASE("above upper") {
    const VectorXd y = y_for(vec({0.5 * (lo(0) + hi(0)), hi(1) + 1.0}));
    const auto el = clarke_element(P, x, y);
    CHECK(el.case_labels[1].kind == ClarkeCase::AboveUpper);
    VectorXd bu(4);
    bu << Gu.col(1), 0.0, 0.0;
    CHECK((clarke_col(el, 1) - bu).norm() < 1e-12);
  }
}

TEST_CASE("Jacobian consistency gap") {
  const auto P = moving_problem();
  const VectorXd x = vec({0.5, 0.5});
  SUBCASE("interior point: gap decays with mu") {
    const VectorXd y = vec({0.3, 0.8});
    double prev = INFINITY;
    for (double mu : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
      const double g = jacobian_consistency_gap(kChks, P, x, y, mu);
      CHECK(g <= prev);
      prev = g;
    }
    CHECK(prev < 1e-6);
  }
  SUBCASE("tie: optimized gap never exceeds any fixed weight") {
    VectorXd y = vec({P.omega.l(x)(0), 0.8});
    for (int k = 0; k < 500; ++k) y = vec({P.omega.l(x)(0), 0.8}) + P.delta * P.F(x, y);
    const auto best = best_clarke_element(kChks, P, x, y, 1e-3);
    const auto jac = psi_mu_jacobian(kChks, P, x, y, 1e-3);
    MatrixXd smoothed(4, 2);
    smoothed << jac.d_psi_dx.transpose(), jac.d_psi_dy.transpose();
    for (double c : {0.0, 0.3, 0.5, 1.0}) {
      ClarkeSelection<double> sel;
      sel.cbar = vec({c, 0.0});
      const auto el = clarke_element(P, x, y, sel);
      MatrixXd G(4, 2);
      G << el.gamma_x, el.gamma_y;
      const double fixed_gap =
          Eigen::JacobiSVD<MatrixXd>(smoothed - G).singularValues()(0);
      CHECK(best.gap <= fixed_gap + 1e-12);
    }
    CHECK(best.gap < 1e-3);
  }
}

TEST_CASE("custom density kernel is validated") {
  auto bad_cdf = [](double t) { return t < 0 ? 0.6 : 0.4; };
  CHECK_THROWS_AS(SmoothingKernel<double>::from_density(
                      [](double) { return 0.0; }, bad_cdf, [](double) { return 0.0; }, 0.0, 1.0),
                  ArgumentError);
  // the uniform density built by hand matches the builtin
  const auto k = SmoothingKernel<double>::from_density(
      kUniform.density, kUniform.cdf, kUniform.partial_moment, 0.25, 1.0);
  CHECK(detail::smoothed_mid(k, 0.0, 1.0, 0.02, 0.1) ==
        detail::smoothed_mid(kUniform, 0.0, 1.0, 0.02, 0.1));
}
