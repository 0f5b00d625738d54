#ifndef SIGA_BOX_HPP
#define SIGA_BOX_HPP

#include <siga/core.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

namespace siga {

/// Axis-aligned box {x : lower <= x <= upper} with finite bounds.
template <typename Scalar>
class FeasibleBox {
 public:
  FeasibleBox(Vector<Scalar> lower, Vector<Scalar> upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    detail::require_size(upper_.size(), lower_.size(), "FeasibleBox upper");
    if (!lower_.allFinite() || !upper_.allFinite()) {
      throw ArgumentError("FeasibleBox: bounds must be finite");
    }
    if ((lower_.array() > upper_.array()).any()) {
      throw ArgumentError("FeasibleBox: lower bound exceeds upper bound");
    }
  }

  Index dim() const { return lower_.size(); }
  const Vector<Scalar>& lower() const { return lower_; }
  const Vector<Scalar>& upper() const { return upper_; }

  Vector<Scalar> project(const Vector<Scalar>& x) const {
    detail::require_size(x.size(), dim(), "FeasibleBox::project");
    return x.cwiseMax(lower_).cwiseMin(upper_);
  }

  bool contains(const Vector<Scalar>& x) const {
    return x.size() == dim() && (x.array() >= lower_.array()).all() &&
           (x.array() <= upper_.array()).all();
  }

  Vector<Scalar> midpoint() const { return (lower_ + upper_) / Scalar(2); }

  Scalar diameter() const { return (upper_ - lower_).norm(); }

 private:
  Vector<Scalar> lower_;
  Vector<Scalar> upper_;
};

/// Box Omega(x) = {y : l(x) <= y <= u(x)} whose bounds move with the
/// upper-level variable x.
///
/// Gradients are m x n matrices whose column i is the gradient of the
/// i-th bound component with respect to x.
template <typename Scalar>
struct MovingBox {
  using VecFn = std::function<Vector<Scalar>(const Vector<Scalar>&)>;
  using MatFn = std::function<Matrix<Scalar>(const Vector<Scalar>&)>;

  VecFn l;
  VecFn u;
  MatFn grad_l;
  MatFn grad_u;
  Scalar lipschitz_l = Scalar(0);
  Scalar lipschitz_u = Scalar(0);

  /// Box that does not depend on x.
  static MovingBox fixed(const Vector<Scalar>& lower, const Vector<Scalar>& upper, Index m) {
    detail::require_size(upper.size(), lower.size(), "MovingBox::fixed upper");
    const Index n = lower.size();
    MovingBox box;
    box.l = [lower](const Vector<Scalar>&) { return lower; };
    box.u = [upper](const Vector<Scalar>&) { return upper; };
    box.grad_l = [m, n](const Vector<Scalar>&) { return Matrix<Scalar>::Zero(m, n).eval(); };
    box.grad_u = box.grad_l;
    return box;
  }

  /// Gradients by central differences with step 1e-6 * (1 + |x_j|).
  static MovingBox with_finite_difference_gradients(VecFn l, VecFn u, Scalar lipschitz_l,
                                                    Scalar lipschitz_u) {
    MovingBox box;
    box.l = l;
    box.u = u;
    box.grad_l = [l](const Vector<Scalar>& x) { return central_jacobian_t(l, x); };
    box.grad_u = [u](const Vector<Scalar>& x) { return central_jacobian_t(u, x); };
    box.lipschitz_l = lipschitz_l;
    box.lipschitz_u = lipschitz_u;
    return box;
  }

 private:
  static Matrix<Scalar> central_jacobian_t(const VecFn& g, const Vector<Scalar>& x) {
    const Vector<Scalar> g0 = g(x);
    Matrix<Scalar> out(x.size(), g0.size());
    Vector<Scalar> xp = x;
    for (Index j = 0; j < x.size(); ++j) {
      const Scalar h = Scalar(1e-6) * (Scalar(1) + std::abs(x(j)));
      xp(j) = x(j) + h;
      const Vector<Scalar> gp = g(xp);
      xp(j) = x(j) - h;
      const Vector<Scalar> gm = g(xp);
      xp(j) = x(j);
      out.row(j) = ((gp - gm) / (Scalar(2) * h)).transpose();
    }
    return out;
  }
};

/// Componentwise median mid{lo, hi, v}; equals the projection of v onto
/// [lo, hi] whenever lo <= hi.
template <typename Scalar>
Vector<Scalar> componentwise_mid(const Vector<Scalar>& lo, const Vector<Scalar>& hi,
                                 const Vector<Scalar>& v) {
  detail::require_size(hi.size(), lo.size(), "mid upper");
  detail::require_size(v.size(), lo.size(), "mid argument");
  Vector<Scalar> out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const Scalar a = lo(i), b = hi(i), c = v(i);
    out(i) = std::max(std::min(a, b), std::min(std::max(a, b), c));
  }
  return out;
}

/// Projection of v onto Omega(x).
template <typename Scalar>
Vector<Scalar> project_moving_box(const MovingBox<Scalar>& omega, const Vector<Scalar>& x,
                                  const Vector<Scalar>& v) {
  const Vector<Scalar> lo = omega.l(x);
  const Vector<Scalar> hi = omega.u(x);
  detail::require_size(v.size(), lo.size(), "project_moving_box");
  return componentwise_mid(lo, hi, v);
}

}  // namespace siga

#endif  // SIGA_BOX_HPP
