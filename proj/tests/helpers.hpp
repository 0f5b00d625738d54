#ifndef SIGA_TESTS_HELPERS_HPP
#define SIGA_TESTS_HELPERS_HPP

#include <siga/core.hpp>

#include <cmath>
#include <functional>
#include <initializer_list>

namespace testing {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

// int_{-inf}^{inf} g(t) rho(t) dt for rho(t) = 2 / (t^2 + 4)^{3/2}, the
// density whose convolution with the clamp gives the CHKS formula.
// With t = 2 tan(theta), rho dt = cos(theta) / 2 dtheta.
inline double chks_density_integral(const std::function<double(double)>& g, int panels = 200000) {
  const double a = -M_PI / 2, b = M_PI / 2;
  const double h = (b - a) / panels;
  auto w = [&](double th) {
    const double c = std::cos(th);
    return c <= 0.0 ? 0.0 : g(2.0 * std::tan(th)) * c / 2.0;
  };
  double s = w(a) + w(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * w(a + k * h);
  return s * h / 3.0;
}

// int g(t) dt over [-1/2, 1/2] by composite Simpson.
inline double uniform_density_integral(const std::function<double(double)>& g, int panels = 20000) {
  const double a = -0.5, b = 0.5, h = (b - a) / panels;
  double s = g(a) + g(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * g(a + k * h);
  return s * h / 3.0;
}

inline double clamp_mid(double l, double u, double p) { return std::min(std::max(p, l), u); }

}  // namespace testing

#endif  // SIGA_TESTS_HELPERS_HPP
