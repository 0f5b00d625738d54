#include "siga/portfolio/model.hpp"

#include <cmath>

namespace siga::portfolio {

Eigen::VectorXd PortfolioModel::pack(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                     double eta) const {
  detail::require_size(a.size(), assets, "pack a");
  detail::require_size(b.size(), assets, "pack b");
  Eigen::VectorXd x(m());
  x << a, b, eta;
  return x;
}

Eigen::VectorXd PortfolioModel::default_x0() const {
  Eigen::VectorXd x = pvi.domain.midpoint();
  x(m() - 1) = 1.0;
  return x;
}

Eigen::VectorXd PortfolioModel::default_y0() const {
  return Eigen::VectorXd::Constant(assets, 1.0 / double(assets));
}

PortfolioModel build_model(const Moments& moments, double nu, double delta) {
  const Index n = moments.mean.size();
  if (n < 2) throw ModelError("build_model: at least two assets are required");
  if (moments.covariance.rows() != n || moments.covariance.cols() != n) {
    throw ModelError("build_model: covariance shape does not match the mean");
  }
  if (!(nu > 0.0)) throw ArgumentError("build_model: nu must be positive");
  const Eigen::MatrixXd sigma = moments.covariance;
  const Eigen::VectorXd r = moments.mean;
  if (!sigma.isApprox(sigma.transpose(), 1e-12) || sigma.llt().info() != Eigen::Success) {
    throw ModelError("build_model: covariance is not symmetric positive definite");
  }

  const Index m = 2 * n + 1;
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd jac_y = sigma + nu * e * e.transpose();
  Eigen::MatrixXd jac_x = Eigen::MatrixXd::Zero(n, m);
  jac_x.col(m - 1) = -r;

  auto F = [sigma, r, nu, n](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return (sigma * y - x(2 * n) * r + nu * (y.sum() - 1.0) * Eigen::VectorXd::Ones(n)).eval();
  };

  MovingBox<double> omega;
  omega.l = [n](const Eigen::VectorXd& x) { return x.head(n).eval(); };
  omega.u = [n](const Eigen::VectorXd& x) { return x.segment(n, n).eval(); };
  Eigen::MatrixXd select_l = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd select_u = Eigen::MatrixXd::Zero(m, n);
  select_l.topRows(n).setIdentity();
  select_u.middleRows(n, n).setIdentity();
  omega.grad_l = [select_l](const Eigen::VectorXd&) { return select_l; };
  omega.grad_u = [select_u](const Eigen::VectorXd&) { return select_u; };
  omega.lipschitz_l = 1.0;
  omega.lipschitz_u = 1.0;

  Eigen::VectorXd lo(m), hi(m);
  lo << Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, 1.0 / double(n - 1)), 0.0;
  hi << Eigen::VectorXd::Constant(n, 1.0 / double(n + 1)), Eigen::VectorXd::Ones(n), 1e8;

  PviProblem<double> pvi(
      n, m, F, [jac_x](const Eigen::VectorXd&, const Eigen::VectorXd&) { return jac_x; },
      [jac_y](const Eigen::VectorXd&, const Eigen::VectorXd&) { return jac_y; }, delta,
      std::move(omega), FeasibleBox<double>(lo, hi));

  UpperObjective<double> objective;
  objective.f = [sigma, r](const Eigen::VectorXd&, const Eigen::VectorXd& y) {
    return -r.dot(y) / std::sqrt(y.dot(sigma * y));
  };
  objective.grad_f_x = [m](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(m).eval();
  };
  objective.grad_f_y = [sigma, r](const Eigen::VectorXd&, const Eigen::VectorXd& y) {
    const Eigen::VectorXd sy = sigma * y;
    const double s = std::sqrt(y.dot(sy));
    return (-r / s + r.dot(y) * sy / (s * s * s)).eval();
  };

  return PortfolioModel{std::move(pvi), std::move(objective), moments, nu, n};
}

SigaConfig<double> default_siga_config(const PortfolioModel& model) {
  SigaConfig<double> config;
  config.x0 = model.default_x0();
  config.y0 = model.default_y0();
  config.max_inner_iters = 100000;
  return config;
}

double sharpe_ratio(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& covariance) {
  const double var = y.dot(covariance * y);
  if (!(var > 0.0)) return std::nan("");
  return mean.dot(y) / std::sqrt(var);
}

}  // namespace siga::portfolio
