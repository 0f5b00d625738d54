#include "siga/portfolio/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace siga::portfolio {

std::string to_string(Method m) {
  switch (m) {
    case Method::Naive: return "naive";
    case Method::Fix: return "fix";
    case Method::SIGA: return "siga";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "naive") return Method::Naive;
  if (lower == "fix") return Method::Fix;
  if (lower == "siga") return Method::SIGA;
  throw ArgumentError("unknown method '" + s + "' (expected naive, fix or siga)");
}

Metrics evaluate(const Eigen::VectorXd& y, const Moments& train, const Eigen::MatrixXd& test) {
  detail::require_size(y.size(), train.mean.size(), "evaluate y");
  if (test.cols() != y.size()) throw ArgumentError("evaluate: test returns have the wrong width");
  const double total = y.sum();
  if (total == 0.0 || !std::isfinite(total)) {
    throw EvaluationError("evaluate: weights sum to zero");
  }
  Metrics out;
  out.y_normalized = y / total;
  const double var_in = out.y_normalized.dot(train.covariance * out.y_normalized);
  if (!(var_in > 0.0)) throw EvaluationError("evaluate: in-sample portfolio variance is not positive");
  out.sr_in = train.mean.dot(out.y_normalized) / std::sqrt(var_in);

  const Eigen::VectorXd portfolio = test * out.y_normalized;
  out.cr_out = portfolio.sum();
  out.sr_out = std::nan("");
  if (test.rows() >= 2) {
    const Eigen::VectorXd mean = test.colwise().mean().transpose();
    const Eigen::MatrixXd centred = test.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = centred.transpose() * centred / double(test.rows() - 1);
    const double var_out = out.y_normalized.dot(cov * out.y_normalized);
    if (var_out > 0.0) out.sr_out = mean.dot(out.y_normalized) / std::sqrt(var_out);
  }
  return out;
}

namespace {

EvaluationReport make_report(Method method, const Eigen::VectorXd& y, const PortfolioModel& model,
                             const Eigen::MatrixXd& test) {
  const Metrics m = evaluate(y, model.moments, test);
  EvaluationReport r;
  r.method = method;
  r.sr_in = m.sr_in;
  r.sr_out = m.sr_out;
  r.cr_out = m.cr_out;
  r.y_star = m.y_normalized;
  r.y_raw = y;
  return r;
}

}  // namespace

EvaluationReport run_naive(const PortfolioModel& model, const Eigen::MatrixXd& test) {
  return make_report(Method::Naive, model.default_y0(), model, test);
}

EvaluationReport run_fix(const PortfolioModel& model, const Eigen::MatrixXd& test,
                         const FixConfig& config) {
  const Index n = model.assets;
  const Eigen::VectorXd x =
      model.pack(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n), 1.0);
  const auto kernel = SmoothingKernel<double>::chks();
  const auto fp = picard_iterate(kernel, model.pvi, x, 0.0, config.tolerance, model.default_y0(),
                                 config.max_iters);
  EvaluationReport r = make_report(Method::Fix, fp.y, model, test);
  r.converged = fp.converged;
  r.residual = fp.residual;
  r.iterations = fp.iterations;
  return r;
}

SigaPortfolioResult run_siga_portfolio(const PortfolioModel& model, const Eigen::MatrixXd& test,
                                       const SigaConfig<double>& config) {
  const auto kernel = SmoothingKernel<double>::chks();
  SigaPortfolioResult out;
  out.run = run_siga(kernel, model.pvi, model.objective, config);
  const auto& s = out.run.state;
  const double tau = s.tau > 0.0 ? s.tau : config.tau0;
  const auto fp = picard_iterate(kernel, model.pvi, s.x, 0.0, tau, s.y, config.max_inner_iters);
  out.report = make_report(Method::SIGA, fp.y, model, test);
  out.report.converged = fp.converged;
  out.report.residual = fp.residual;
  out.report.iterations = static_cast<long>(out.run.trace.records.size());
  out.report.x_star = s.x;
  out.report.y_smoothed = s.y;
  return out;
}

PreparedDataset prepare_dataset(const PriceMatrix& prices, const DatasetOptions& options) {
  ReturnMatrix returns = log_returns(prices);
  if (options.zero_frac_max) returns = filter_liquid(returns, *options.zero_frac_max).returns;
  if (options.top_k && *options.top_k < returns.cols()) {
    returns = top_k_by_mean(returns, *options.top_k).returns;
  }
  SplitResult split = split_and_moments(returns, options.train_frac, options.ridge);
  PortfolioModel model = build_model(split.train, options.nu, options.delta);
  return PreparedDataset{std::move(returns), std::move(split), std::move(model)};
}

}  // namespace siga::portfolio
