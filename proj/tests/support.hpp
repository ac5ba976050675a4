#pragma once

// Oracles and generated fixtures shared by the unit suites and the
// acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "soliton_lab/chart_tensor.hpp"
#include "soliton_lab/completeness.hpp"
#include "soliton_lab/skrp_family.hpp"
#include "soliton_lab/soliton_core.hpp"

namespace soliton_lab::testing {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr std::uint64_t kSeed = 20240917;

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double fd_step(double x) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(x));
}

// Second differences lose eps / h^2; the fourth root balances that against h^2.
inline double fd_step2(double x) {
  return std::pow(std::numeric_limits<double>::epsilon(), 0.25) * (1.0 + std::abs(x));
}

/// Central differences of the value channel only.
inline Vector fd_gradient(const ScalarField& f, const Point& p) {
  Vector g(p.size());
  for (int i = 0; i < p.size(); ++i) {
    const double h = fd_step(p[i]);
    Point a = p, b = p;
    a[i] += h;
    b[i] -= h;
    g[i] = (f.value(a) - f.value(b)) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_hessian(const ScalarField& f, const Point& p) {
  const int n = static_cast<int>(p.size());
  Matrix H(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double hi = fd_step2(p[i]), hj = fd_step2(p[j]);
      auto at = [&](double si, double sj) {
        Point q = p;
        q[i] += si * hi;
        q[j] += sj * hj;
        return f.value(q);
      };
      H(i, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
    }
  }
  return H;
}

inline Matrix metric_values(const MetricChart& g, const Point& p) {
  const std::vector<Jet> x = seed_point(p);
  const JetMatrix m = g.components(x);
  Matrix out(g.dim(), g.dim());
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) out(i, j) = m(i, j).value();
  return out;
}

/// Christoffel symbols from central differences of the metric values.
inline Christoffel fd_christoffel(const MetricChart& g, const Point& p) {
  const int n = g.dim();
  std::vector<Matrix> dg;
  for (int k = 0; k < n; ++k) {
    const double h = fd_step(p[k]);
    Point a = p, b = p;
    a[k] += h;
    b[k] -= h;
    dg.push_back((metric_values(g, a) - metric_values(g, b)) / (2.0 * h));
  }
  const Matrix ginv = metric_values(g, p).inverse();
  Christoffel gamma(static_cast<std::size_t>(n), Matrix::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          s += ginv(k, l) * (dg[static_cast<std::size_t>(i)](j, l) +
                             dg[static_cast<std::size_t>(j)](i, l) - dg[static_cast<std::size_t>(l)](i, j));
        }
        gamma[static_cast<std::size_t>(k)](i, j) = 0.5 * s;
      }
  return gamma;
}

/// Randomized smooth metric, conformal factor and potential on [-0.5, 0.5]^n.
struct ConformalFixture {
  std::string name;
  MetricChart g;
  ScalarField tau;
  ScalarField f;
  ProfileOfField tau_of_f;
};

inline ConformalFixture random_conformal_fixture(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto N = static_cast<std::size_t>(n);
  // g = e^{0.3 sin(b.x)} (I + eps (S0 + sum_k x_k S_k)), |eps S| < 1 on the box
  std::vector<Matrix> S(N + 1, Matrix::Zero(n, n));
  for (auto& M : S) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) M(i, j) = M(j, i) = U(rng);
  }
  std::vector<double> b(N), u(N), v(N), w(N);
  for (std::size_t i = 0; i < N; ++i) {
    b[i] = U(rng);
    u[i] = U(rng);
    v[i] = U(rng);
    w[i] = 2.0 * U(rng);
  }
  const double eps = 0.5 / (n * (1.0 + 0.5 * n));
  const Box box = Box::cube(n, -0.5, 0.5);
  auto dot = [N](const std::vector<double>& c, std::span<const Jet> x) {
    Jet s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += c[i] * x[i];
    return s;
  };
  MetricChart g("random-g" + std::to_string(n), box, [=](std::span<const Jet> x) {
    const Jet warp = exp(0.3 * sin(dot(b, x)));
    JetMatrix out(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet e = eps * S[0](i, j);
        for (std::size_t k = 0; k < N; ++k) e += eps * S[k + 1](i, j) * x[k];
        if (i == j) e += 1.0;
        out(i, j) = warp * e;
      }
    return out;
  });
  ScalarField tau(n, [=](std::span<const Jet> x) {
    return exp(dot(u, x) + 0.2 * x[0] * x[N - 1]);
  });
  ScalarField f(n, [=](std::span<const Jet> x) {
    return dot(v, x) + 0.3 * sin(dot(w, x)) + 0.25 * x[0] * x[1];
  });
  const double rate = U(rng);
  // h(t) = e^{rate t} (1.2 + 0.3 sin t) > 0
  Profile1D h = [rate](double t) {
    const double e = std::exp(rate * t);
    const double s = 1.2 + 0.3 * std::sin(t), s1 = 0.3 * std::cos(t), s2 = -0.3 * std::sin(t);
    return Derivs{e * s, e * (rate * s + s1), e * (rate * rate * s + 2.0 * rate * s1 + s2)};
  };
  return ConformalFixture{"random-n" + std::to_string(n) + "-" + std::to_string(seed), g, tau, f,
                          ProfileOfField{f, h}};
}

/// Five fixtures cycling through dimensions 3, 4, 5.
inline std::vector<ConformalFixture> conformal_fixtures() {
  std::vector<ConformalFixture> out;
  for (int i = 0; i < 5; ++i) out.push_back(random_conformal_fixture(3 + i % 3, kSeed + 17 * i));
  return out;
}

/// Canonical (e^{2f/(n-2)}, -f) with a random smooth perturbation of tau, k or both.
inline ProfilePair perturbed_profile(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(0.02, 0.5), freq(0.5, 3.0), phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> which(0, 2);
  const int mode = which(rng);
  const double ta = mode != 1 ? amp(rng) : 0.0, tw = freq(rng), tp = phase(rng);
  const double ka = mode != 0 ? amp(rng) : 0.0, kw = freq(rng), kp = phase(rng);
  const double r = 2.0 / (n - 2);
  Profile1D tau = [=](double f) {
    const double e = std::exp(r * f);
    const double s = 1.0 + 0.5 * ta * std::sin(tw * f + tp);
    const double s1 = 0.5 * ta * tw * std::cos(tw * f + tp);
    const double s2 = -0.5 * ta * tw * tw * std::sin(tw * f + tp);
    return Derivs{e * s, e * (r * s + s1), e * (r * r * s + 2.0 * r * s1 + s2)};
  };
  Profile1D k = [=](double f) {
    return Derivs{-f + ka * std::cos(kw * f + kp), -1.0 - ka * kw * std::sin(kw * f + kp),
                  -ka * kw * kw * std::cos(kw * f + kp)};
  };
  return ProfilePair{tau, k};
}

inline ProfilePair canonical_profile(int n, double k_shift = 0.0) {
  return ProfilePair{exponential_profile(2.0 / (n - 2)), affine_profile(k_shift, -1.0)};
}

/// The profile fixture grid m in {2, 3}, kappa in {0, +-1}, (A, B) in {(1,0), (0,1), (1,1)}.
inline std::vector<SkrpParams> profile_sweep() {
  std::vector<SkrpParams> out;
  for (int m : {2, 3})
    for (double kappa : {0.0, 1.0, -1.0})
      for (auto [A, B] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{1.0, 1.0}}) {
        SkrpParams p;
        p.m = m;
        p.kappa = kappa;
        p.A = A;
        p.B = B;
        p.c = 0.0;
        p.interval = Interval{-kInf, kInf};
        out.push_back(p);
      }
  return out;
}

inline std::string describe(const SkrpParams& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "m=%d kappa=%g A=%g B=%g", p.m, p.kappa, p.A, p.B);
  return buf;
}

/// Finite window of a component: infinite ends clipped at c -+ 12, then inset
/// by 1e-3 of the width, and by at least 0.05 at a pole, where the terms of the
/// profile identities grow like |f - c|^{-m-2}.
inline Interval finite_window(const QInterval& comp, double c) {
  const double lo = std::isfinite(comp.lo) ? comp.lo : c - 12.0;
  const double hi = std::isfinite(comp.hi) ? comp.hi : c + 12.0;
  const double inset = 1e-3 * (hi - lo);
  const double lo_inset = comp.lo_kind == EndKind::pole ? std::max(inset, c + 0.05 - lo) : inset;
  const double hi_inset = comp.hi_kind == EndKind::pole ? std::max(inset, hi - (c - 0.05)) : inset;
  return Interval{lo + lo_inset, hi - hi_inset};
}

inline std::vector<double> grid(const Interval& w, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(w.lo + (w.hi - w.lo) * k / (count - 1));
  return out;
}

inline double max_component_diff(const MetricChart& a, const MetricChart& b, const Point& p) {
  return max_abs(metric_values(a, p) - metric_values(b, p));
}

}  // namespace soliton_lab::testing
