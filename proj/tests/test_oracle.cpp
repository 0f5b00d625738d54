#include <doctest.h>

#include "helpers.hpp"

#include <siga/builtin.hpp>
#include <siga/oracle.hpp>

using namespace siga;
using testing::vec;
using Eigen::VectorXd;

namespace {
const auto kChks = SmoothingKernel<double>::chks();
}

TEST_CASE("finite differences on analytic functions") {
  const std::function<double(const VectorXd&)> sq = [](const VectorXd& x) { return x(0) * x(0); };
  CHECK(oracle::finite_diff_gradient(sq, vec({3.0}), 1e-5)(0) == doctest::Approx(6.0).epsilon(1e-8));

  const std::function<double(const VectorXd&)> c = [](const VectorXd&) { return 4.2; };
  CHECK(oracle::finite_diff_gradient(c, vec({1.0, 2.0})).isZero());

  const std::function<double(const VectorXd&)> norm2 = [](const VectorXd& x) { return x.squaredNorm(); };
  const VectorXd g = oracle::finite_diff_gradient(norm2, vec({1.0, 2.0, 3.0}));
  CHECK(oracle::relative_error(g, vec({2.0, 4.0, 6.0})) <= 1e-6);

  const std::function<double(const VectorXd&)> trig = [](const VectorXd& x) {
    return std::sin(x(0)) * std::exp(x(1));
  };
  const VectorXd x = vec({0.7, -0.2});
  const VectorXd exact = vec({std::cos(0.7) * std::exp(-0.2), std::sin(0.7) * std::exp(-0.2)});
  CHECK(oracle::relative_error(oracle::finite_diff_gradient(trig, x), exact) <= 1e-6);

  const std::function<double(const VectorXd&)> bad = [](const VectorXd& x) {
    return x(0) > 0 ? NAN : 0.0;
  };
  CHECK_THROWS_AS(oracle::finite_diff_gradient(bad, vec({0.0})), NumericalError);
}

TEST_CASE("finite-difference Jacobian") {
  const std::function<VectorXd(const VectorXd&)> g = [](const VectorXd& x) {
    return vec({x(0) * x(1), x(0) + 3 * x(1), std::sin(x(0))});
  };
  Eigen::MatrixXd J(3, 2);
  J << 2.0, 1.0, 1.0, 3.0, std::cos(1.0), 0.0;
  CHECK(oracle::relative_error(oracle::finite_diff_jacobian(g, vec({1.0, 2.0})), J) <= 1e-8);
}

TEST_CASE("grid search on the toy") {
  const auto bp = toy1d();
  const auto r = oracle::grid_search_reduced(kChks, bp.problem, bp.objective, {{1001}});
  CHECK(std::abs(r.x_best(0) - 0.8 / 1.1) <= r.spacing(0));
  CHECK(r.evaluated == 1001);

  const auto smooth = oracle::grid_search_reduced(kChks, bp.problem, bp.objective, {{1001}}, 1e-4);
  CHECK(std::abs(smooth.x_best(0) - r.x_best(0)) <= r.spacing(0) + 1e-15);
}

TEST_CASE("grid search tie rule and guards") {
  auto bp = toy1d();
  bp.objective.f = [](const VectorXd&, const VectorXd&) { return 1.0; };
  const auto r = oracle::grid_search_reduced(kChks, bp.problem, bp.objective, {{11}});
  CHECK(r.x_best(0) == 0.0);

  CHECK_THROWS_AS(oracle::grid_search_reduced(kChks, bp.problem, bp.objective, {{10'000'001}}),
                  ArgumentError);
  CHECK_THROWS_AS(oracle::grid_search_reduced(kChks, bp.problem, bp.objective, {{5, 5}}),
                  ArgumentError);
}

TEST_CASE("grid search on box2d agrees with SIGA within the grid resolution") {
  const auto bp = box2d();
  const auto grid = oracle::grid_search_reduced(kChks, bp.problem, bp.objective, {{61, 61}});
  SigaConfig<double> config;
  config.x0 = bp.x0;
  config.y0 = bp.y0;
  const auto res = run_siga(kChks, bp.problem, bp.objective, config);
  const double h_siga = oracle::reduced_objective(kChks, bp.problem, bp.objective, res.state.x, 0.0);
  // local Lipschitz estimate of h from finite differences at the SIGA point
  const std::function<double(const VectorXd&)> h = [&](const VectorXd& x) {
    return oracle::reduced_objective(kChks, bp.problem, bp.objective, x, 0.0);
  };
  const double lip = oracle::finite_diff_gradient(h, res.state.x, 1e-4).norm() + 1.0;
  CHECK(grid.h_best >= h_siga - grid.spacing.norm() * lip);
}

TEST_CASE("Lipschitz probes") {
  const std::function<VectorXd(const VectorXd&)> id = [](const VectorXd& x) { return x; };
  const auto sampler = oracle::uniform_box_sampler<double>(vec({0.0, 0.0}), vec({1.0, 1.0}));
  const auto r = oracle::lipschitz_probe<double>(id, sampler, 100, 42, 1.0 + 1e-12);
  CHECK(r.max_observed == doctest::Approx(1.0));
  CHECK(r.pass);

  const auto bp = toy1d();
  const std::function<VectorXd(const VectorXd&)> ymap = [&](const VectorXd& x) {
    return fixed_point_solve(kChks, bp.problem, x, 0.0, 1e-13, vec({0.5}), 1000).y;
  };
  const auto s = oracle::lipschitz_probe<double>(
      ymap, oracle::uniform_box_sampler<double>(vec({0.0}), vec({1.0})), 200, 42, 1.0 + 1e-6);
  CHECK(s.max_observed == doctest::Approx(1.0).epsilon(1e-6));

  const auto c = oracle::psi_contraction_probe(bp.problem, 2000, 42, 0.5 + 1e-6);
  CHECK(c.pass);

  // determinism
  const auto c2 = oracle::psi_contraction_probe(bp.problem, 2000, 42, 0.5 + 1e-6);
  CHECK(c.max_observed == c2.max_observed);
  CHECK_THROWS_AS(oracle::lipschitz_probe<double>(id, sampler, 0, 42, 1.0), ArgumentError);
}

TEST_CASE("ProbeReport pass flag") {
  CHECK(oracle::make_report("q", 3, 1.0, 1.0).pass);
  CHECK_FALSE(oracle::make_report("q", 3, 1.0 + 1e-15, 1.0).pass);
}
