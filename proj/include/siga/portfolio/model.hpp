#ifndef SIGA_PORTFOLIO_MODEL_HPP
#define SIGA_PORTFOLIO_MODEL_HPP

#include <siga/portfolio/market_data.hpp>
#include <siga/pvi.hpp>
#include <siga/solver.hpp>

namespace siga::portfolio {

/// Parameter-selection model for mean-variance portfolios.
///
/// Upper variable x = (a, b, eta) in R^{2n+1}; the lower level is the
/// penalized mean-variance VI on the moving box [a, b] with
///   F(x, y) = Sigma y - eta r + nu (e'y - 1) e,
/// and the upper objective is the negative Sharpe ratio -r'y / sqrt(y' Sigma y).
struct PortfolioModel {
  PviProblem<double> pvi;
  UpperObjective<double> objective;
  Moments moments;
  double nu;
  Index assets;

  Index m() const { return 2 * assets + 1; }

  /// x = (a, b, eta) from its blocks.
  Eigen::VectorXd pack(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double eta) const;
  /// Midpoint of the a and b ranges with eta = 1.
  Eigen::VectorXd default_x0() const;
  /// Equal weights e / n.
  Eigen::VectorXd default_y0() const;
};

/// Assembles the model. X = [0, 1/(n+1)]^n x [1/(n-1), 1]^n x [0, 1e8].
/// Requires n >= 2 and a positive definite covariance.
PortfolioModel build_model(const Moments& moments, double nu = 1.0, double delta = 0.001);

/// SIGA settings for the portfolio experiments, starting at default_x0 / default_y0.
SigaConfig<double> default_siga_config(const PortfolioModel& model);

double sharpe_ratio(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& covariance);

}  // namespace siga::portfolio

#endif  // SIGA_PORTFOLIO_MODEL_HPP
