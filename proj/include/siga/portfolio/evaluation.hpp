#ifndef SIGA_PORTFOLIO_EVALUATION_HPP
#define SIGA_PORTFOLIO_EVALUATION_HPP

#include <siga/portfolio/model.hpp>

#include <optional>
#include <string>

namespace siga::portfolio {

enum class Method { Naive, Fix, SIGA };

std::string to_string(Method m);
/// "naive", "fix", "siga" (case-insensitive).
Method method_from_string(const std::string& s);

struct Metrics {
  double sr_in = 0.0;
  double sr_out = 0.0;
  double cr_out = 0.0;
  Eigen::VectorXd y_normalized;
};

/// Normalizes y by e'y, then in-sample SR on the training moments and
/// out-of-sample SR/CR on the test returns (test covariance centred by the
/// test mean, no ridge). sr_out is NaN when the test window has fewer than
/// two rows or zero portfolio variance.
Metrics evaluate(const Eigen::VectorXd& y, const Moments& train, const Eigen::MatrixXd& test);

struct EvaluationReport {
  Method method = Method::Naive;
  double sr_in = 0.0;
  double sr_out = 0.0;
  double cr_out = 0.0;
  Eigen::VectorXd y_star;  // normalized
  Eigen::VectorXd y_raw;   // before normalization
  bool converged = true;
  double residual = 0.0;
  long iterations = 0;
  Eigen::VectorXd x_star;      // SIGA only
  Eigen::VectorXd y_smoothed;  // SIGA only: fixed point of the last smoothed map
};

EvaluationReport run_naive(const PortfolioModel& model, const Eigen::MatrixXd& test);

struct FixConfig {
  double tolerance = 1e-10;
  long max_iters = 100000;
};

/// Lower-level fixed point at a = 0, b = e, eta = 1 from y = e/n. If the
/// iteration cap is reached the last iterate is reported with
/// converged = false.
EvaluationReport run_fix(const PortfolioModel& model, const Eigen::MatrixXd& test,
                         const FixConfig& config = {});

struct SigaPortfolioResult {
  EvaluationReport report;
  SigaResult<double> run;
};

/// SIGA with the CHKS kernel. The reported y is re-solved at mu = 0 from the
/// final smoothed iterate at the final x, with tolerance tau_T.
SigaPortfolioResult run_siga_portfolio(const PortfolioModel& model, const Eigen::MatrixXd& test,
                                       const SigaConfig<double>& config);

struct DatasetOptions {
  double train_frac = 0.9;
  double ridge = 1e-4;
  std::optional<double> zero_frac_max;  // apply filter_liquid when set
  std::optional<Index> top_k;           // apply top_k_by_mean when set
  double nu = 1.0;
  double delta = 0.001;
};

struct PreparedDataset {
  ReturnMatrix returns;  // after filtering
  SplitResult split;
  PortfolioModel model;
};

PreparedDataset prepare_dataset(const PriceMatrix& prices, const DatasetOptions& options = {});

}  // namespace siga::portfolio

#endif  // SIGA_PORTFOLIO_EVALUATION_HPP
