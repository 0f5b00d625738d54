#include "siga/builtin.hpp"

#include "siga/portfolio/model.hpp"

#include <cmath>

namespace siga {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

BuiltinProblem make_toy(const std::string& name, double jac_y_scale) {
  const VectorXd zero = vec({0.0}), one = vec({1.0});
  PviProblem<double> pvi(
      1, 1, [](const VectorXd& x, const VectorXd& y) { return (y - x).eval(); },
      [](const VectorXd&, const VectorXd&) { return MatrixXd::Constant(1, 1, -1.0); },
      [jac_y_scale](const VectorXd&, const VectorXd&) {
        return MatrixXd::Constant(1, 1, jac_y_scale);
      },
      0.5, MovingBox<double>::fixed(zero, one, 1), FeasibleBox<double>(zero, one));

  UpperObjective<double> f;
  f.f = [](const VectorXd& x, const VectorXd& y) {
    return (y(0) - 0.8) * (y(0) - 0.8) + 0.1 * x(0) * x(0);
  };
  f.grad_f_x = [](const VectorXd& x, const VectorXd&) { return (0.2 * x).eval(); };
  f.grad_f_y = [](const VectorXd&, const VectorXd& y) { return vec({2.0 * (y(0) - 0.8)}); };

  return BuiltinProblem{name,          std::move(pvi), std::move(f),
                        vec({0.5}),    vec({0.5}),     FeasibleBox<double>(zero, one),
                        vec({0.8 / 1.1})};
}

}  // namespace

BuiltinProblem toy1d() { return make_toy("toy1d", 1.0); }

BuiltinProblem corrupted() { return make_toy("corrupted", 2.0); }

BuiltinProblem box2d() {
  MatrixXd A(2, 2), B(2, 2);
  A << 2.0, 0.5, -0.3, 1.5;
  B << 1.0, 0.5, 0.3, 2.0;
  const VectorXd c = vec({0.5, 0.2});

  auto F = [A, B, c](const VectorXd& x, const VectorXd& y) {
    return (A * y + 0.2 * y.array().tanh().matrix() - B * x - c).eval();
  };
  auto jac_x = [B](const VectorXd&, const VectorXd&) { return (-B).eval(); };
  auto jac_y = [A](const VectorXd&, const VectorXd& y) {
    const VectorXd t = y.array().tanh();
    MatrixXd J = A;
    J.diagonal().array() += 0.2 * (1.0 - t.array().square());
    return J;
  };

  MovingBox<double> omega;
  omega.l = [](const VectorXd& x) { return vec({0.2 + 0.3 * x(0), -0.5 + 0.4 * x(0) * x(1)}); };
  omega.u = [](const VectorXd& x) {
    return vec({0.8 + 0.2 * std::sin(x(1)), 0.3 + 0.5 * x(1) * x(1)});
  };
  // column i is the gradient of the i-th bound
  omega.grad_l = [](const VectorXd& x) {
    MatrixXd g(2, 2);
    g << 0.3, 0.4 * x(1), 0.0, 0.4 * x(0);
    return g;
  };
  omega.grad_u = [](const VectorXd& x) {
    MatrixXd g(2, 2);
    g << 0.0, 0.0, 0.2 * std::cos(x(1)), x(1);
    return g;
  };
  omega.lipschitz_l = 0.7;
  omega.lipschitz_u = 1.1;

  const FeasibleBox<double> X(VectorXd::Zero(2), VectorXd::Ones(2));
  PviProblem<double> pvi(2, 2, F, jac_x, jac_y, 0.25, std::move(omega), X);

  UpperObjective<double> f;
  f.f = [](const VectorXd& x, const VectorXd& y) {
    return (y(0) - 0.9) * (y(0) - 0.9) + 0.5 * (y(1) - 0.4) * (y(1) - 0.4) + 0.1 * x(0) * x(1) +
           0.05 * x.squaredNorm();
  };
  f.grad_f_x = [](const VectorXd& x, const VectorXd&) {
    return vec({0.1 * x(1) + 0.1 * x(0), 0.1 * x(0) + 0.1 * x(1)});
  };
  f.grad_f_y = [](const VectorXd&, const VectorXd& y) {
    return vec({2.0 * (y(0) - 0.9), y(1) - 0.4});
  };

  return BuiltinProblem{"box2d",         std::move(pvi), std::move(f), vec({0.5, 0.5}),
                        vec({0.5, 0.0}), X,              std::nullopt};
}

BuiltinProblem portfolio3() {
  portfolio::Moments mom;
  mom.covariance.resize(3, 3);
  mom.covariance << 1.0, 0.2, 0.1, 0.2, 0.8, 0.15, 0.1, 0.15, 0.6;
  mom.mean = vec({0.5, 0.35, 0.2});
  auto model = portfolio::build_model(mom, 1.0, 0.05);

  VectorXd lo = model.pvi.domain.lower(), hi = model.pvi.domain.upper();
  lo(6) = 0.0;
  hi(6) = 2.0;
  const VectorXd x0 = model.default_x0();
  const VectorXd y0 = model.default_y0();
  return BuiltinProblem{"portfolio3", std::move(model.pvi), std::move(model.objective), x0, y0,
                        FeasibleBox<double>(lo, hi), std::nullopt};
}

std::vector<std::string> builtin_names() { return {"toy1d", "box2d", "portfolio3"}; }

BuiltinProblem builtin_by_name(const std::string& name) {
  if (name == "toy1d" || name == "toy") return toy1d();
  if (name == "box2d") return box2d();
  if (name == "portfolio3") return portfolio3();
  if (name == "corrupted") return corrupted();
  throw ArgumentError("unknown builtin problem '" + name + "'");
}

}  // namespace siga
