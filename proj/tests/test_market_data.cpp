#include <doctest.h>

#include "helpers.hpp"

#include <siga/portfolio/market_data.hpp>

#include <sstream>

using namespace siga;
using namespace siga::portfolio;
using Eigen::MatrixXd;

namespace {

PriceMatrix parse(const std::string& text, PriceFormat format) {
  std::istringstream in(text);
  return parse_prices(in, format);
}

ReturnMatrix returns_of(const MatrixXd& r) {
  ReturnMatrix out;
  out.returns = r;
  for (Index c = 0; c < r.cols(); ++c) {
    out.source_columns.push_back(c);
    out.labels.push_back("s" + std::to_string(c));
  }
  return out;
}

}  // namespace

TEST_CASE("CSV prices") {
  const auto p = parse("a,b\n1,2\n2,4\n4,8\n", PriceFormat::CSV);
  MatrixXd expect(3, 2);
  expect << 1, 2, 2, 4, 4, 8;
  CHECK(p.prices == expect);
  CHECK(p.labels == std::vector<std::string>{"a", "b"});

  const auto headless = parse("1,2\n2,4\n4,8\n", PriceFormat::CSV);
  CHECK(headless.prices == expect);

  CHECK_THROWS_AS(parse("a,b\n1,2\n2,0\n4,8\n", PriceFormat::CSV), ParseError);
  CHECK_THROWS_AS(parse("a,b\n1,2\n2\n4,8\n", PriceFormat::CSV), ParseError);
  CHECK_THROWS_AS(parse("a,b\n1,2\n2,x\n4,8\n", PriceFormat::CSV), ParseError);
  CHECK_THROWS_AS(parse("a,b\n1,2\n2,-3\n4,8\n", PriceFormat::CSV), ParseError);
}

TEST_CASE("ParseError carries the location") {
  try {
    parse("a,b\n1,2\n2,0\n4,8\n", PriceFormat::CSV);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
  }
}

TEST_CASE("OR-library indtrack prices") {
  const auto p = parse("1 10 20 40 5 5 5", PriceFormat::ORLibraryIndtrack);
  REQUIRE(p.assets() == 1);
  REQUIRE(p.periods() == 3);
  CHECK(p.prices(0, 0) == 10);
  CHECK(p.prices(2, 0) == 40);

  const auto two = parse("2\n1 2 3\n4 5 6\n7 8 9\n", PriceFormat::ORLibraryIndtrack);
  CHECK(two.assets() == 2);
  CHECK(two.prices(1, 1) == 5);

  // 7 body tokens cannot form 2 equal series
  CHECK_THROWS_AS(parse("1 10 20 40 5 5 5 5", PriceFormat::ORLibraryIndtrack), ParseError);
  CHECK_THROWS_AS(parse("1 10 0 40 5 5 5", PriceFormat::ORLibraryIndtrack), ParseError);
  CHECK_THROWS_AS(parse("", PriceFormat::ORLibraryIndtrack), ParseError);
}

TEST_CASE("log returns") {
  MatrixXd prices(3, 1);
  prices << 1, 2, 4;
  const auto r = log_returns(make_price_matrix(prices));
  CHECK(r.rows() == 2);
  CHECK(r.returns(0, 0) == std::log(2.0));
  CHECK(r.returns(1, 0) == std::log(2.0));

  const auto flat = log_returns(make_price_matrix(MatrixXd::Constant(5, 3, 7.5)));
  CHECK(flat.returns.isZero(0.0));

  MatrixXd two(3, 2);
  two << 1, 2, 2, 4, 4, 8;
  const auto r2 = log_returns(make_price_matrix(two));
  CHECK(r2.returns.isApprox(MatrixXd::Constant(2, 2, std::log(2.0))));

  CHECK_THROWS_AS(make_price_matrix(MatrixXd::Ones(2, 2)), ModelError);
}

TEST_CASE("filter_liquid") {
  MatrixXd r = MatrixXd::Constant(20, 3, 0.01);
  r.col(1).setZero();
  r(4, 2) = 0.0;  // exactly 5% zeros
  const auto sel = filter_liquid(returns_of(r), 0.05);
  CHECK(sel.kept == std::vector<Index>{0, 2});
  CHECK(sel.returns.cols() == 2);
  CHECK(sel.returns.source_columns == std::vector<Index>{0, 2});

  r(5, 2) = 0.0;  // 10%
  CHECK(filter_liquid(returns_of(r), 0.05).kept == std::vector<Index>{0});
  CHECK_THROWS_AS(filter_liquid(returns_of(MatrixXd::Zero(20, 2)), 0.05), ModelError);
  CHECK_THROWS_AS(filter_liquid(returns_of(r), 1.5), ArgumentError);
}

TEST_CASE("top_k_by_mean") {
  MatrixXd r(2, 3);
  r << 0.1, 0.3, 0.2, 0.1, 0.3, 0.2;
  const auto sel = top_k_by_mean(returns_of(r), 2);
  CHECK(sel.kept == std::vector<Index>{1, 2});
  CHECK(sel.returns.returns.col(0) == r.col(1));

  CHECK(top_k_by_mean(returns_of(r), 3).kept == std::vector<Index>{0, 1, 2});
  CHECK(top_k_by_mean(returns_of(MatrixXd::Constant(2, 3, 0.5)), 1).kept == std::vector<Index>{0});
  CHECK_THROWS_AS(top_k_by_mean(returns_of(r), 0), ArgumentError);
  CHECK_THROWS_AS(top_k_by_mean(returns_of(r), 4), ArgumentError);
}

TEST_CASE("filter then top_k composes the column maps") {
  // column means 0.05 * (c + 1); columns 1 and 3 are illiquid
  MatrixXd r(20, 5);
  for (Index c = 0; c < 5; ++c) r.col(c).setConstant(0.05 * double(c + 1));
  r.col(1).head(5).setZero();
  r.col(3).head(5).setZero();
  const auto liquid = filter_liquid(returns_of(r), 0.05);
  REQUIRE(liquid.kept == std::vector<Index>{0, 2, 4});
  const auto top = top_k_by_mean(liquid.returns, 2);
  CHECK(top.kept == std::vector<Index>{1, 2});
  CHECK(top.returns.source_columns == std::vector<Index>{2, 4});
  CHECK(top.returns.returns.col(1) == r.col(4));
}

TEST_CASE("split and moments") {
  MatrixXd r(10, 2);
  for (Index j = 0; j < 10; ++j) r.row(j) << 0.01 * double(j), -0.02 * double(j * j % 7);
  const auto s = split_and_moments(returns_of(r), 0.9, 1e-4);
  CHECK(s.train_returns.rows() == 9);
  CHECK(s.test.rows() == 1);
  CHECK(s.test.returns.row(0) == r.row(9));

  // oracle: textbook sample covariance of the first 9 rows
  const MatrixXd train = r.topRows(9);
  const Eigen::VectorXd mean = train.colwise().mean();
  const MatrixXd centred = train.rowwise() - mean.transpose();
  const MatrixXd cov = centred.transpose() * centred / 8.0 + 1e-4 * MatrixXd::Identity(2, 2);
  CHECK(s.train.mean.isApprox(mean, 1e-14));
  CHECK(s.train.covariance.isApprox(cov, 1e-14));
  CHECK((s.train.covariance - s.train.covariance.transpose()).norm() <= 1e-12);

  const auto same = split_and_moments(returns_of(MatrixXd::Constant(10, 3, 0.02)), 0.9, 1e-4);
  CHECK(same.train.covariance == 1e-4 * MatrixXd::Identity(3, 3));

  const auto again = split_and_moments(returns_of(r), 0.9, 1e-4);
  CHECK(again.train.covariance == s.train.covariance);
  CHECK(again.train.mean == s.train.mean);

  CHECK_THROWS_AS(split_and_moments(returns_of(r), 0.1, 1e-4), ModelError);
  CHECK_THROWS_AS(split_and_moments(returns_of(r), 1.0, 1e-4), ArgumentError);
  CHECK_THROWS_AS(split_and_moments(returns_of(r), 0.9, -1.0), ArgumentError);
}

TEST_CASE("ridge floor on random data") {
  const auto prices = synthetic_prices(6, 40, 11);
  const auto s = split_and_moments(log_returns(prices), 0.9, 1e-4);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(s.train.covariance);
  CHECK(eig.eigenvalues().minCoeff() >= 1e-4 * (1 - 1e-10));
}

TEST_CASE("synthetic prices") {
  const auto a = synthetic_prices(5, 30, 7);
  const auto b = synthetic_prices(5, 30, 7);
  CHECK(a.prices == b.prices);
  CHECK(a.prices.minCoeff() > 0.0);
  CHECK(a.periods() == 30);
  CHECK(synthetic_prices(5, 30, 8).prices != a.prices);

  const auto loaded = load_prices("synthetic:5:30:7", PriceFormat::CSV);
  CHECK(loaded.prices == a.prices);
  CHECK(is_synthetic_source("synthetic:5:30:7"));
  CHECK_FALSE(is_synthetic_source("data/prices.csv"));
  CHECK_THROWS_AS(load_prices("synthetic:5:x:7", PriceFormat::CSV), ArgumentError);
}

TEST_CASE("CSV round trip") {
  const auto a = synthetic_prices(3, 10, 1);
  std::ostringstream out;
  write_prices_csv(out, a);
  const auto b = parse(out.str(), PriceFormat::CSV);
  CHECK(b.prices.isApprox(a.prices, 1e-15));
  CHECK(b.labels == a.labels);
  CHECK(format_from_path("x/y.csv") == PriceFormat::CSV);
  CHECK(format_from_path("x/indtrack1.txt") == PriceFormat::ORLibraryIndtrack);
}
