#pragma once

// Second-order forward-mode automatic differentiation.
//
// A Jet carries the value, gradient and Hessian of a quantity with respect to
// up to kMaxJetDim independent variables. Arithmetic propagates all three
// exactly (product and chain rules), so fields built from Jets deliver partial
// derivatives to order two without finite differencing. This is the
// multivariate generalisation of a hyper-dual number.

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

namespace soliton_lab {

inline constexpr int kMaxJetDim = 6;

class Jet {
 public:
  Jet() = default;
  Jet(double value) : value_(value) {}  // NOLINT: implicit constants are intended

  /// The independent variable number `index` evaluated at `value`.
  static Jet variable(double value, int index, int dim) {
    Jet j(value);
    j.dim_ = dim;
    j.grad_[index] = 1.0;
    return j;
  }

  int dim() const { return dim_; }
  double value() const { return value_; }
  double d(int i) const { return grad_[i]; }
  double dd(int i, int j) const { return hess_[i * kMaxJetDim + j]; }

  /// g(this) given g, g', g'' at value(): the chain rule to second order.
  Jet apply(double g0, double g1, double g2) const {
    Jet r(g0);
    r.dim_ = dim_;
    for (int i = 0; i < dim_; ++i) r.grad_[i] = g1 * grad_[i];
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) {
        const int ij = i * kMaxJetDim + j;
        r.hess_[ij] = g1 * hess_[ij] + g2 * grad_[i] * grad_[j];
      }
    }
    return r;
  }

  Jet operator-() const {
    Jet r(*this);
    r.value_ = -value_;
    for (int i = 0; i < dim_; ++i) r.grad_[i] = -grad_[i];
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r.hess_[i * kMaxJetDim + j] = -hess_[i * kMaxJetDim + j];
    return r;
  }

  Jet& operator+=(const Jet& o) {
    value_ += o.value_;
    dim_ = std::max(dim_, o.dim_);
    for (int i = 0; i < o.dim_; ++i) grad_[i] += o.grad_[i];
    for (int i = 0; i < o.dim_; ++i)
      for (int j = 0; j < o.dim_; ++j) hess_[i * kMaxJetDim + j] += o.hess_[i * kMaxJetDim + j];
    return *this;
  }

  Jet& operator-=(const Jet& o) {
    value_ -= o.value_;
    dim_ = std::max(dim_, o.dim_);
    for (int i = 0; i < o.dim_; ++i) grad_[i] -= o.grad_[i];
    for (int i = 0; i < o.dim_; ++i)
      for (int j = 0; j < o.dim_; ++j) hess_[i * kMaxJetDim + j] -= o.hess_[i * kMaxJetDim + j];
    return *this;
  }

  Jet& operator*=(const Jet& o) {
    const int n = std::max(dim_, o.dim_);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int ij = i * kMaxJetDim + j;
        hess_[ij] = hess_[ij] * o.value_ + value_ * o.hess_[ij] + grad_[i] * o.grad_[j] +
                    o.grad_[i] * grad_[j];
      }
    }
    for (int i = 0; i < n; ++i) grad_[i] = grad_[i] * o.value_ + value_ * o.grad_[i];
    value_ *= o.value_;
    dim_ = n;
    return *this;
  }

  Jet& operator/=(const Jet& o) {
    const double inv = 1.0 / o.value_;
    return *this *= o.apply(inv, -inv * inv, 2.0 * inv * inv * inv);
  }

  Jet& operator*=(double s) {
    value_ *= s;
    for (int i = 0; i < dim_; ++i) grad_[i] *= s;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) hess_[i * kMaxJetDim + j] *= s;
    return *this;
  }

  Jet& operator/=(double s) { return *this *= (1.0 / s); }
  Jet& operator+=(double s) {
    value_ += s;
    return *this;
  }
  Jet& operator-=(double s) {
    value_ -= s;
    return *this;
  }

 private:
  int dim_ = 0;
  double value_ = 0.0;
  std::array<double, kMaxJetDim> grad_{};
  std::array<double, kMaxJetDim * kMaxJetDim> hess_{};
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator+(Jet a, double b) { return a += b; }
inline Jet operator-(Jet a, double b) { return a -= b; }
inline Jet operator*(Jet a, double b) { return a *= b; }
inline Jet operator/(Jet a, double b) { return a /= b; }
inline Jet operator+(double a, Jet b) { return b += a; }
inline Jet operator-(double a, const Jet& b) { return (-b) += a; }
inline Jet operator*(double a, Jet b) { return b *= a; }
inline Jet operator/(double a, const Jet& b) {
  const double inv = 1.0 / b.value();
  return b.apply(a * inv, -a * inv * inv, 2.0 * a * inv * inv * inv);
}

inline Jet exp(const Jet& u) {
  const double e = std::exp(u.value());
  return u.apply(e, e, e);
}
inline Jet log(const Jet& u) {
  const double x = u.value();
  return u.apply(std::log(x), 1.0 / x, -1.0 / (x * x));
}
inline Jet sqrt(const Jet& u) {
  const double s = std::sqrt(u.value());
  return u.apply(s, 0.5 / s, -0.25 / (s * u.value()));
}
inline Jet pow(const Jet& u, double p) {
  const double x = u.value();
  const double xp = std::pow(x, p);
  return u.apply(xp, p * xp / x, p * (p - 1.0) * xp / (x * x));
}
inline Jet sin(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return u.apply(s, c, -s);
}
inline Jet cos(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return u.apply(c, -s, -c);
}
inline Jet square(const Jet& u) { return u * u; }
inline double square(double x) { return x * x; }
/// |u|, differentiated on the side of the current sign.
inline Jet abs(const Jet& u) { return u.value() < 0.0 ? -u : u; }

inline std::ostream& operator<<(std::ostream& os, const Jet& j) {
  return os << "Jet(" << j.value() << ")";
}

}  // namespace soliton_lab
