#ifndef SIGA_PORTFOLIO_MARKET_DATA_HPP
#define SIGA_PORTFOLIO_MARKET_DATA_HPP

#include <siga/core.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace siga::portfolio {

enum class PriceFormat { CSV, ORLibraryIndtrack };

/// Closing prices, rows = time, columns = assets. All entries are positive
/// and there are at least three rows.
struct PriceMatrix {
  Eigen::MatrixXd prices;
  std::vector<std::string> labels;
  std::string frequency = "unknown";

  Index periods() const { return prices.rows(); }
  Index assets() const { return prices.cols(); }
};

PriceMatrix make_price_matrix(Eigen::MatrixXd prices, std::vector<std::string> labels = {},
                              std::string frequency = "unknown");

/// CSV: optional header row (first token non-numeric), then one row of n
/// prices per period.
///
/// ORLibraryIndtrack: whitespace-separated tokens. The first token is the
/// asset count N, followed by N + 1 equal-length series; the final series
/// (the market index) is discarded.
PriceMatrix parse_prices(std::istream& in, PriceFormat format);
PriceMatrix parse_prices_file(const std::string& path, PriceFormat format);

/// ".csv" selects CSV, anything else the indtrack layout.
PriceFormat format_from_path(const std::string& path);

/// Loads a dataset by path, or generates one for "synthetic:N:J:SEED".
PriceMatrix load_prices(const std::string& source, PriceFormat format);
bool is_synthetic_source(const std::string& source);

void write_prices_csv(std::ostream& out, const PriceMatrix& prices);

/// Log returns (J - 1) x n. `source_columns` maps each column back to the
/// asset index of the original price matrix.
struct ReturnMatrix {
  Eigen::MatrixXd returns;
  std::vector<Index> source_columns;
  std::vector<std::string> labels;

  Index rows() const { return returns.rows(); }
  Index cols() const { return returns.cols(); }
};

ReturnMatrix log_returns(const PriceMatrix& prices);

struct ColumnSelection {
  ReturnMatrix returns;
  std::vector<Index> kept;  // indices into the input columns, ascending
};

/// Keeps columns whose fraction of exactly-zero returns is <= zero_frac_max.
ColumnSelection filter_liquid(const ReturnMatrix& returns, double zero_frac_max = 0.05);

/// Keeps the k columns with the largest means (ties to the lower index),
/// preserving the original column order.
ColumnSelection top_k_by_mean(const ReturnMatrix& returns, Index k);

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Column means and the mean-centred covariance with divisor rows - 1,
/// plus ridge * I.
Moments sample_moments(const Eigen::MatrixXd& returns, double ridge = 0.0);

struct SplitResult {
  Moments train;
  ReturnMatrix train_returns;
  ReturnMatrix test;
};

/// First floor(train_frac * rows) rows train, the rest test.
SplitResult split_and_moments(const ReturnMatrix& returns, double train_frac = 0.9,
                              double ridge = 1e-4);

/// One-factor log-return model with weekly-scale volatility; deterministic
/// for a given seed.
PriceMatrix synthetic_prices(Index assets, Index periods, std::uint64_t seed);

}  // namespace siga::portfolio

#endif  // SIGA_PORTFOLIO_MARKET_DATA_HPP
