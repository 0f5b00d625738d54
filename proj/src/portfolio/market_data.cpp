#include "siga/portfolio/market_data.hpp"

#include "siga/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace siga::portfolio {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& token, double& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::string> default_labels(Index n) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels.push_back("asset" + std::to_string(i + 1));
  return labels;
}

PriceMatrix parse_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::string line;
  long line_no = 0;
  std::size_t width = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
      line.erase(0, 3);
    }
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (first_content) {
      first_content = false;
      double probe;
      if (!parse_double(cells.front(), probe)) {
        labels = cells;
        width = cells.size();
        continue;
      }
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ParseError("ragged CSV row: expected " + std::to_string(width) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no, static_cast<long>(std::min(cells.size(), width)) + 1);
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_double(cells[c], values[c])) {
        throw ParseError("not a decimal number: '" + cells[c] + "'", line_no, static_cast<long>(c) + 1);
      }
      if (!(values[c] > 0.0) || !std::isfinite(values[c])) {
        throw ParseError("price must be positive and finite", line_no, static_cast<long>(c) + 1);
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError("no price rows", line_no, 0);
  Eigen::MatrixXd prices(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) prices(Index(r), Index(c)) = rows[r][c];
  }
  return make_price_matrix(std::move(prices), std::move(labels));
}

PriceMatrix parse_indtrack(std::istream& in) {
  struct Token {
    std::string text;
    long line;
    long column;
  };
  std::vector<Token> tokens;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    long col = 0;
    while (ss >> tok) tokens.push_back({tok, line_no, ++col});
  }
  if (tokens.empty()) throw ParseError("empty indtrack stream", 0, 0);

  double count_value;
  if (!parse_double(tokens[0].text, count_value) || count_value < 1 ||
      count_value != std::floor(count_value)) {
    throw ParseError("first token must be a positive asset count", tokens[0].line, tokens[0].column);
  }
  const auto assets = static_cast<std::size_t>(count_value);
  const std::size_t body = tokens.size() - 1;
  if (body == 0 || body % (assets + 1) != 0) {
    throw ParseError("asset count mismatch: " + std::to_string(body) +
                         " price tokens do not form " + std::to_string(assets + 1) +
                         " equal-length series",
                     tokens.back().line, tokens.back().column);
  }
  const std::size_t length = body / (assets + 1);
  Eigen::MatrixXd prices(static_cast<Index>(length), static_cast<Index>(assets));
  for (std::size_t a = 0; a < assets; ++a) {
    for (std::size_t t = 0; t < length; ++t) {
      const Token& tok = tokens[1 + a * length + t];
      double v;
      if (!parse_double(tok.text, v)) {
        throw ParseError("not a decimal number: '" + tok.text + "'", tok.line, tok.column);
      }
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParseError("price must be positive and finite", tok.line, tok.column);
      }
      prices(Index(t), Index(a)) = v;
    }
  }
  return make_price_matrix(std::move(prices), {}, "weekly");
}

}  // namespace

PriceMatrix make_price_matrix(Eigen::MatrixXd prices, std::vector<std::string> labels,
                              std::string frequency) {
  if (prices.rows() < 3) throw ModelError("price matrix needs at least 3 periods");
  if (prices.cols() < 1) throw ModelError("price matrix needs at least one asset");
  if (!prices.allFinite() || (prices.array() <= 0.0).any()) {
    throw ModelError("prices must be positive and finite");
  }
  if (labels.empty()) labels = default_labels(prices.cols());
  if (static_cast<Index>(labels.size()) != prices.cols()) {
    throw ModelError("label count does not match asset count");
  }
  return {std::move(prices), std::move(labels), std::move(frequency)};
}

PriceMatrix parse_prices(std::istream& in, PriceFormat format) {
  return format == PriceFormat::CSV ? parse_csv(in) : parse_indtrack(in);
}

PriceMatrix parse_prices_file(const std::string& path, PriceFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return parse_prices(in, format);
}

PriceFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == "csv") return PriceFormat::CSV;
  }
  return PriceFormat::ORLibraryIndtrack;
}

bool is_synthetic_source(const std::string& source) { return source.rfind("synthetic:", 0) == 0; }

PriceMatrix load_prices(const std::string& source, PriceFormat format) {
  if (is_synthetic_source(source)) {
    std::istringstream ss(source.substr(10));
    std::string part;
    std::vector<long> fields;
    while (std::getline(ss, part, ':')) {
      try {
        fields.push_back(std::stol(part));
      } catch (const std::exception&) {
        throw ArgumentError("synthetic source must look like synthetic:N:J:SEED");
      }
    }
    if (fields.size() != 3 || fields[0] < 1 || fields[1] < 3 || fields[2] < 0) {
      throw ArgumentError("synthetic source must look like synthetic:N:J:SEED");
    }
    return synthetic_prices(fields[0], fields[1], static_cast<std::uint64_t>(fields[2]));
  }
  return parse_prices_file(source, format);
}

void write_prices_csv(std::ostream& out, const PriceMatrix& p) {
  for (std::size_t i = 0; i < p.labels.size(); ++i) out << (i ? "," : "") << p.labels[i];
  out << '\n';
  for (Index r = 0; r < p.prices.rows(); ++r) {
    for (Index c = 0; c < p.prices.cols(); ++c) {
      out << (c ? "," : "") << io::format_number(p.prices(r, c));
    }
    out << '\n';
  }
}

ReturnMatrix log_returns(const PriceMatrix& prices) {
  const Index J = prices.prices.rows(), n = prices.prices.cols();
  ReturnMatrix out;
  out.returns.resize(J - 1, n);
  for (Index j = 0; j + 1 < J; ++j) {
    for (Index i = 0; i < n; ++i) {
      out.returns(j, i) = std::log(prices.prices(j + 1, i) / prices.prices(j, i));
    }
  }
  out.source_columns.resize(static_cast<std::size_t>(n));
  std::iota(out.source_columns.begin(), out.source_columns.end(), Index(0));
  out.labels = prices.labels;
  return out;
}

namespace {

ColumnSelection select_columns(const ReturnMatrix& in, std::vector<Index> kept) {
  ColumnSelection sel;
  sel.returns.returns.resize(in.rows(), static_cast<Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    sel.returns.returns.col(Index(c)) = in.returns.col(kept[c]);
    sel.returns.source_columns.push_back(in.source_columns[static_cast<std::size_t>(kept[c])]);
    sel.returns.labels.push_back(in.labels[static_cast<std::size_t>(kept[c])]);
  }
  sel.kept = std::move(kept);
  return sel;
}

}  // namespace

ColumnSelection filter_liquid(const ReturnMatrix& returns, double zero_frac_max) {
  if (!(zero_frac_max >= 0.0 && zero_frac_max <= 1.0)) {
    throw ArgumentError("filter_liquid: zero_frac_max must lie in [0, 1]");
  }
  std::vector<Index> kept;
  const double rows = static_cast<double>(returns.rows());
  for (Index c = 0; c < returns.cols(); ++c) {
    const double zeros = static_cast<double>((returns.returns.col(c).array() == 0.0).count());
    if (zeros / rows <= zero_frac_max) kept.push_back(c);
  }
  if (kept.empty()) throw ModelError("filter_liquid: every column was removed");
  return select_columns(returns, std::move(kept));
}

ColumnSelection top_k_by_mean(const ReturnMatrix& returns, Index k) {
  if (k <= 0) throw ArgumentError("top_k_by_mean: k must be positive");
  if (k > returns.cols()) throw ArgumentError("top_k_by_mean: k exceeds the column count");
  const Eigen::VectorXd means = returns.returns.colwise().mean().transpose();
  std::vector<Index> order(static_cast<std::size_t>(returns.cols()));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return means(a) > means(b); });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return select_columns(returns, std::move(order));
}

Moments sample_moments(const Eigen::MatrixXd& returns, double ridge) {
  const Index rows = returns.rows(), n = returns.cols();
  Moments m;
  m.mean = returns.colwise().mean().transpose();
  if (rows < 2) {
    m.covariance = Eigen::MatrixXd::Zero(n, n);
  } else {
    const Eigen::MatrixXd centered = returns.rowwise() - m.mean.transpose();
    m.covariance = (centered.transpose() * centered) / double(rows - 1);
    m.covariance = (0.5 * (m.covariance + m.covariance.transpose())).eval();
  }
  m.covariance.diagonal().array() += ridge;
  return m;
}

SplitResult split_and_moments(const ReturnMatrix& returns, double train_frac, double ridge) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ArgumentError("split_and_moments: train_frac must lie in (0, 1)");
  }
  if (ridge < 0.0) throw ArgumentError("split_and_moments: ridge must be nonnegative");
  const Index rows = returns.rows();
  const auto train_rows = static_cast<Index>(std::floor(train_frac * double(rows) + 1e-9));
  if (train_rows < 2) throw ModelError("split_and_moments: fewer than 2 training rows");

  SplitResult out;
  out.train_returns.returns = returns.returns.topRows(train_rows);
  out.train_returns.source_columns = returns.source_columns;
  out.train_returns.labels = returns.labels;
  out.test.returns = returns.returns.bottomRows(rows - train_rows);
  out.test.source_columns = returns.source_columns;
  out.test.labels = returns.labels;
  out.train = sample_moments(out.train_returns.returns, ridge);
  return out;
}

PriceMatrix synthetic_prices(Index assets, Index periods, std::uint64_t seed) {
  if (assets < 1 || periods < 3) throw ArgumentError("synthetic_prices: need >= 1 asset and >= 3 periods");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd alpha(assets), beta(assets), vol(assets), start(assets);
  for (Index i = 0; i < assets; ++i) {
    alpha(i) = -0.002 + 0.006 * unif(rng);
    beta(i) = 0.5 + unif(rng);
    vol(i) = 0.02 + 0.03 * unif(rng);
    start(i) = 20.0 + 180.0 * unif(rng);
  }
  Eigen::MatrixXd prices(periods, assets);
  prices.row(0) = start.transpose();
  for (Index j = 1; j < periods; ++j) {
    const double factor = 0.02 * normal(rng);
    for (Index i = 0; i < assets; ++i) {
      const double r = alpha(i) + beta(i) * factor + vol(i) * normal(rng);
      prices(j, i) = prices(j - 1, i) * std::exp(r);
    }
  }
  return make_price_matrix(std::move(prices), {}, "weekly");
}

}  // namespace siga::portfolio
