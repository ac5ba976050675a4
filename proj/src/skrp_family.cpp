#include "soliton_lab/skrp_family.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "soliton_lab/errors.hpp"
#include "quadrature.hpp"

namespace soliton_lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

// sum_{k=0}^{m} x^{k-m} / k!, singular at 0
Derivs pole_part(int m, double x) {
  Derivs d;
  double fact = 1.0;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) fact *= k;
    const int e = k - m;
    d.value += std::pow(x, e) / fact;
    d.first += e * std::pow(x, e - 1) / fact;
    d.second += e * (e - 1) * std::pow(x, e - 2) / fact;
  }
  return d;
}

// x^{-m} (e^x - sum_{k<=m} x^k / k!) = sum_{j>=1} x^j / (m+j)!, entire; |x| <= 4
Derivs entire_part(int m, double x) {
  Derivs d;
  double coef = 1.0;  // 1 / (m+j)!
  for (int k = 2; k <= m + 1; ++k) coef /= k;
  double xp = 1.0;   // x^{j-1}
  double xpp = 0.0;  // x^{j-2}
  for (int j = 1; j <= 90; ++j) {
    if (j > 1) coef /= (m + j);
    d.value += coef * xp * x;
    d.first += j * coef * xp;
    d.second += j * (j - 1) * coef * xpp;
    xpp = xp;
    xp *= x;
    if (j > 8 && std::abs(coef * xp) * j * j < 1e-19 * (std::abs(d.value) + 1e-300)) break;
  }
  return d;
}

// x^{-m} e^x
Derivs exp_over_power(int m, double x) {
  const double v = std::pow(x, -m) * std::exp(x);
  const double r = 1.0 - m / x;
  return Derivs{v, v * r, v * (r * r + m / (x * x))};
}

double phi_only(const SkrpParams& params, double f, int branch) {
  return phi_closed(params, f, branch).value;
}

}  // namespace

bool Interval::finite() const { return std::isfinite(lo) && std::isfinite(hi); }

void SkrpParams::validate() const {
  if (m < 2) throw DomainError("m must be at least 2");
  if (s < 1) throw DomainError("bundle power s must be positive");
  if (a == 0.0 || p == 0.0) throw DomainError("fiber constants a, p must be nonzero");
  if (!(interval.lo < interval.hi)) throw DomainError("empty f interval");
  if (!std::isfinite(kappa) || !std::isfinite(c) || !std::isfinite(A) || !std::isfinite(B)) {
    throw DomainError("profile constants must be finite");
  }
}

Derivs phi_closed(const SkrpParams& params, double f, int branch) {
  const double x = f - params.c;
  const int m = params.m;
  const double pole_coef = params.A + params.B;
  int side = sign_of(x);
  if (side == 0) {
    if (pole_coef != 0.0) throw PoleError("f = c with A + B != 0");
    if (branch == 0 && params.kappa != 0.0) throw PoleError("f = c needs a branch");
    side = branch;
  }
  Derivs out;
  auto add = [&out](double w, const Derivs& d) {
    out.value += w * d.value;
    out.first += w * d.first;
    out.second += w * d.second;
  };
  if (params.B == 0.0 || std::abs(x) <= 4.0) {
    // (A + B) P + B E keeps the removable pole exact when A + B = 0
    if (pole_coef != 0.0) add(pole_coef, pole_part(m, x));
    if (params.B != 0.0) add(params.B, entire_part(m, x));
  } else {
    // A P + B x^{-m} e^x: the split above cancels catastrophically for x << 0
    if (params.A != 0.0) add(params.A, pole_part(m, x));
    add(params.B, exp_over_power(m, x));
  }
  out.value += side * params.kappa / (2.0 * m);
  return out;
}

double mek_residual(const SkrpParams& params, double alpha, double f, const Derivs& phi) {
  const double x = f - params.c;
  const int m = params.m;
  return x * x * phi.second + x * (m - x * alpha) * phi.first - m * phi.value +
         sign_of(phi.value) * params.kappa / 2.0;
}

double mek_term_scale(const SkrpParams& params, double alpha, double f, const Derivs& phi) {
  const double x = f - params.c;
  const int m = params.m;
  const double terms = std::abs(x * x * phi.second) + std::abs(x * (m - x * alpha) * phi.first) +
                       std::abs(m * phi.value) + std::abs(params.kappa) / 2.0;
  return std::max(1.0, terms);
}

double phi_ode_residual(const SkrpParams& params, double alpha, double f) {
  return mek_residual(params, alpha, f, phi_closed(params, f));
}

PhiState phi_ode_integrate(const SkrpParams& params, double alpha, double f0, double phi0,
                           double dphi0, double f, double tolerance) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;
  if (f == f0) return PhiState{phi0, dphi0};
  const double c = params.c;
  if ((f0 - c) * (f - c) <= 0.0) {
    throw IntegrationFailure("integration path reaches the pole f = c");
  }
  const int m = params.m;
  const double kappa = params.kappa;
  auto rhs = [&](const State& y, State& dy, double t) {
    const double x = t - c;
    dy[0] = y[1];
    dy[1] = (m * y[0] - x * (m - x * alpha) * y[1] - sign_of(y[0]) * kappa / 2.0) / (x * x);
  };
  if (phi0 == 0.0 && dphi0 == 0.0) return PhiState{};
  State y{phi0, dphi0};
  std::size_t steps = 0;
  auto observer = [&](const State& state, double) {
    if (++steps > 2'000'000 || !std::isfinite(state[0]) || !std::isfinite(state[1])) {
      throw IntegrationFailure("step budget exhausted or non-finite state");
    }
  };
  // absolute tolerance follows the initial state so decaying solutions stay resolved
  const double abs_tol = tolerance * 1e-6 * (std::abs(phi0) + std::abs(dphi0));
  auto stepper = odeint::make_controlled(abs_tol, tolerance, odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_adaptive(stepper, rhs, y, f0, f, (f - f0) / 64.0, observer);
  } catch (const odeint::step_adjustment_error& e) {
    throw IntegrationFailure(e.what());
  }
  return PhiState{y[0], y[1]};
}

double soliton_coeff_profile(const SkrpParams& params, double alpha, double f) {
  const Derivs phi = phi_closed(params, f);
  const double x = f - params.c;
  return alpha * phi.value + (alpha * x - (params.m + 1)) * phi.first - x * phi.second;
}

Derivs q_profile(const SkrpParams& params, double f, int branch) {
  const Derivs phi = phi_closed(params, f, branch);
  const double x = f - params.c;
  return Derivs{2.0 * x * phi.value, 2.0 * phi.value + 2.0 * x * phi.first,
                4.0 * phi.first + 2.0 * x * phi.second};
}

std::string to_string(EndKind k) {
  switch (k) {
    case EndKind::pole:
      return "pole";
    case EndKind::zero_of_fc:
      return "zero-of-fc";
    case EndKind::zero_of_phi:
      return "zero-of-phi";
    case EndKind::interval_bound:
      return "interval-bound";
    case EndKind::infinite:
      return "infinite";
  }
  return "interval-bound";
}

std::vector<QInterval> q_domain(const SkrpParams& params) {
  params.validate();
  const double c = params.c;
  const Interval& I = params.interval;
  const bool has_pole = params.A + params.B != 0.0;
  const double margin = 1e-6 * (I.finite() ? I.width() : std::max(1.0, std::abs(c)));
  // beyond |f - c| = 60 the sign of phi is fixed by its leading term
  constexpr double kScan = 60.0;

  struct Segment {
    double lo, hi;
    EndKind lo_kind, hi_kind;
    int side;
  };
  std::vector<Segment> segments;
  auto bound_kind = [](double v) { return std::isfinite(v) ? EndKind::interval_bound : EndKind::infinite; };
  const EndKind at_c = has_pole ? EndKind::pole : EndKind::zero_of_fc;
  if (I.lo < c && c < I.hi) {
    segments.push_back({I.lo, c, bound_kind(I.lo), at_c, -1});
    segments.push_back({c, I.hi, at_c, bound_kind(I.hi), 1});
  } else if (I.hi <= c) {
    segments.push_back({I.lo, I.hi, bound_kind(I.lo), I.hi == c ? at_c : bound_kind(I.hi), -1});
  } else {
    segments.push_back({I.lo, I.hi, I.lo == c ? at_c : bound_kind(I.lo), bound_kind(I.hi), 1});
  }

  std::vector<QInterval> out;
  for (const auto& seg : segments) {
    const int side = seg.side;
    const double scan_lo = std::isfinite(seg.lo) ? seg.lo : std::min(seg.hi, c) - kScan;
    const double scan_hi = std::isfinite(seg.hi) ? seg.hi : std::max(seg.lo, c) + kScan;
    // uniform grid plus geometric refinement toward f = c
    std::vector<double> grid;
    const int n_uniform = 2000;
    for (int i = 1; i < n_uniform; ++i) grid.push_back(scan_lo + (scan_hi - scan_lo) * i / n_uniform);
    const double near = side > 0 ? scan_lo : scan_hi;
    if (near == c) {
      const double span = scan_hi - scan_lo;
      for (int i = 0; i <= 600; ++i) {
        const double d = span * std::pow(10.0, -8.0 + 8.0 * i / 600.0);
        if (d < span) grid.push_back(c + side * d);
      }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> roots;
    double prev_f = grid.front();
    double prev = phi_only(params, prev_f, side);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double cur = phi_only(params, grid[i], side);
      if (prev == 0.0) {
        roots.push_back(prev_f);
      } else if (prev * cur < 0.0) {
        std::uintmax_t iters = 200;
        auto fn = [&](double f) { return phi_only(params, f, side); };
        const auto bracket = boost::math::tools::toms748_solve(
            fn, prev_f, grid[i], prev, cur, boost::math::tools::eps_tolerance<double>(52), iters);
        roots.push_back(0.5 * (bracket.first + bracket.second));
      }
      prev_f = grid[i];
      prev = cur;
    }

    std::vector<std::pair<double, EndKind>> breaks;
    breaks.emplace_back(seg.lo, seg.lo_kind);
    for (double r : roots) breaks.emplace_back(r, EndKind::zero_of_phi);
    breaks.emplace_back(seg.hi, seg.hi_kind);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      QInterval q{breaks[i].first, breaks[i + 1].first, breaks[i].second, breaks[i + 1].second};
      if (!(q.lo < q.hi)) continue;
      if (q.lo_kind == EndKind::pole) q.lo += margin;
      if (q.hi_kind == EndKind::pole) q.hi -= margin;
      const double probe_lo = std::isfinite(q.lo) ? q.lo : q.hi - 1.0;
      const double probe_hi = std::isfinite(q.hi) ? q.hi : q.lo + 1.0;
      const double mid = 0.5 * (probe_lo + probe_hi);
      if (q_profile(params, mid, side).value > 0.0) out.push_back(q);
    }
  }
  return out;
}

std::optional<QInterval> q_component(const SkrpParams& params, double f) {
  for (const auto& q : q_domain(params)) {
    if (q.contains(f)) return q;
  }
  return std::nullopt;
}

double default_anchor(const SkrpParams& params) {
  if (params.anchor) return *params.anchor;
  const auto comps = q_domain(params);
  if (comps.empty()) throw DomainSplit("no Q-positive interval");
  const QInterval& q = comps.front();
  if (std::isfinite(q.lo) && std::isfinite(q.hi)) return 0.5 * (q.lo + q.hi);
  if (std::isfinite(q.lo)) return q.lo + 1.0;
  if (std::isfinite(q.hi)) return q.hi - 1.0;
  return params.c + 1.0;
}

// ---------------------------------------------------------------------------
// EllMap

EllMap::EllMap(SkrpParams params, double f0, int table_size)
    : params_(std::move(params)), f0_(f0) {
  params_.validate();
  const auto comp = q_component(params_, f0_);
  if (!comp) throw DomainSplit("anchor f0 is not inside a Q-positive interval");
  component_ = *comp;
  branch_ = component_.branch(params_.c);

  const double width = std::isfinite(component_.hi - component_.lo) ? component_.hi - component_.lo : 1.0;
  const double inset = 1e-9 * std::max(1.0, width);
  const double w_lo = std::isfinite(component_.lo) ? component_.lo + inset : f0_ - 40.0;
  const double w_hi = std::isfinite(component_.hi) ? component_.hi - inset : f0_ + 40.0;

  const int half = std::max(8, table_size / 2);
  std::vector<double> left, right;
  for (int k = 1; k <= half; ++k) {
    const double u = static_cast<double>(k) / half;
    const double stretch = 1.0 - std::pow(1.0 - u, 3);
    left.push_back(f0_ + (w_lo - f0_) * stretch);
    right.push_back(f0_ + (w_hi - f0_) * stretch);
  }
  f_nodes_.assign(left.rbegin(), left.rend());
  f_nodes_.push_back(f0_);
  f_nodes_.insert(f_nodes_.end(), right.begin(), right.end());

  t_nodes_.assign(f_nodes_.size(), 0.0);
  const std::size_t mid = left.size();
  for (std::size_t i = mid + 1; i < f_nodes_.size(); ++i) {
    t_nodes_[i] = t_nodes_[i - 1] + integrate(f_nodes_[i - 1], f_nodes_[i]);
  }
  for (std::size_t i = mid; i-- > 0;) {
    t_nodes_[i] = t_nodes_[i + 1] - integrate(f_nodes_[i], f_nodes_[i + 1]);
  }
}

double EllMap::q(double f) const { return q_profile(params_, f, branch_).value; }
double EllMap::dq(double f) const { return q_profile(params_, f, branch_).first; }

double EllMap::integrate(double from, double to) const {
  if (from == to) return 0.0;
  const double a = params_.a;
  auto integrand = [&](double f) {
    const double qv = q(f);
    if (!(qv > 0.0)) throw DomainSplit("Q vanishes inside the integration range");
    return a / qv;
  };
  return detail::gk_integrate(integrand, from, to);
}

double EllMap::log_ell(double f) const {
  if (!component_.contains(f)) throw DomainSplit("f outside the anchor's Q-positive interval");
  const auto it = std::lower_bound(f_nodes_.begin(), f_nodes_.end(), f);
  std::size_t i = static_cast<std::size_t>(it - f_nodes_.begin());
  if (i == f_nodes_.size()) i = f_nodes_.size() - 1;
  if (i > 0 && std::abs(f_nodes_[i - 1] - f) < std::abs(f_nodes_[i] - f)) --i;
  return t_nodes_[i] + integrate(f_nodes_[i], f);
}

double EllMap::ell(double f) const { return std::exp(log_ell(f)); }

double EllMap::f_of_log_ell(double t) const {
  const bool increasing = params_.a > 0.0;
  const double t_first = t_nodes_.front(), t_last = t_nodes_.back();
  const double t_min = std::min(t_first, t_last), t_max = std::max(t_first, t_last);
  if (!(t >= t_min && t <= t_max)) {
    throw DomainError("log l = " + std::to_string(t) + " outside the attainable range");
  }
  // bracketing nodes
  std::size_t hi_idx;
  if (increasing) {
    hi_idx = static_cast<std::size_t>(std::lower_bound(t_nodes_.begin(), t_nodes_.end(), t) - t_nodes_.begin());
  } else {
    hi_idx = static_cast<std::size_t>(
        std::lower_bound(t_nodes_.begin(), t_nodes_.end(), t, std::greater<double>()) - t_nodes_.begin());
  }
  if (hi_idx == 0) hi_idx = 1;
  if (hi_idx >= f_nodes_.size()) hi_idx = f_nodes_.size() - 1;
  const std::size_t lo_idx = hi_idx - 1;
  const double f_lo = f_nodes_[lo_idx], f_hi = f_nodes_[hi_idx];
  const double t_lo = t_nodes_[lo_idx], t_hi = t_nodes_[hi_idx];
  if (t == t_lo) return f_lo;
  if (t == t_hi) return f_hi;
  double guess = f_lo + (f_hi - f_lo) * (t - t_lo) / (t_hi - t_lo);
  guess = std::clamp(guess, f_lo, f_hi);
  const double a = params_.a;
  auto fn = [&](double f) {
    return std::make_pair(t_lo + integrate(f_lo, f) - t, a / q(f));
  };
  std::uintmax_t iters = 100;
  return boost::math::tools::newton_raphson_iterate(fn, guess, f_lo, f_hi,
                                                    std::numeric_limits<double>::digits - 3, iters);
}

double EllMap::f_of_ell(double ell) const {
  if (!(ell > 0.0)) throw DomainError("fiber norm must be positive");
  return f_of_log_ell(std::log(ell));
}

EllMap ell_map(const SkrpParams& params, double f0) { return EllMap(params, f0); }

// ---------------------------------------------------------------------------
// Calabi assembly

MetricChart fubini_study_base(double lambda_h, double half_width) {
  return MetricChart("fubini-study", Box::cube(2, -half_width, half_width),
                     [lambda_h](std::span<const Jet> x) {
                       const Jet d = 1.0 + x[0] * x[0] + x[1] * x[1];
                       const Jet e = lambda_h / (d * d);
                       JetMatrix g(2);
                       g(0, 0) = e;
                       g(1, 1) = e;
                       return g;
                     });
}

Matrix standard_complex_structure(int real_dim) {
  Matrix j = Matrix::Zero(real_dim, real_dim);
  for (int k = 0; k + 1 < real_dim; k += 2) {
    j(k + 1, k) = 1.0;
    j(k, k + 1) = -1.0;
  }
  return j;
}

namespace {

struct CalabiData {
  SkrpParams params;
  double lambda_h;
  std::shared_ptr<const EllMap> ell;
};

Jet log_ell_jet(std::span<const Jet> x, int s) {
  const Jet w2 = x[2] * x[2] + x[3] * x[3];
  const Jet d = 1.0 + x[0] * x[0] + x[1] * x[1];
  return 0.5 * log(w2) + (0.5 * s) * log(d);
}

Jet f_jet(const EllMap& ell, const Jet& t) {
  const double f = ell.f_of_log_ell(t.value());
  const double q = ell.q(f), dq = ell.dq(f), a = ell.a();
  return t.apply(f, q / a, q * dq / (a * a));
}

// g = 2|f_c| lambda_h |dz|^2 / (1+|z|^2)^2 + Q / p^2 |xi|^2,
// xi = dw / w + s zbar dz / (1 + |z|^2); conformal_rate inserts e^{rate f}.
JetMatrix calabi_components(std::span<const Jet> x, const CalabiData& data, double conformal_rate) {
  const SkrpParams& prm = data.params;
  const Jet f = f_jet(*data.ell, log_ell_jet(x, prm.s));
  const Derivs q = q_profile(prm, f.value(), data.ell->component().branch(prm.c));
  const Jet qj = f.apply(q.value, q.first, q.second);

  const Jet d = 1.0 + x[0] * x[0] + x[1] * x[1];
  const Jet w2 = x[2] * x[2] + x[3] * x[3];
  const double s = prm.s;
  // Re xi and Im xi as real covectors
  const std::array<Jet, 4> re{s * x[0] / d, s * x[1] / d, x[2] / w2, x[3] / w2};
  const std::array<Jet, 4> im{-s * x[1] / d, s * x[0] / d, -x[3] / w2, x[2] / w2};

  Jet horizontal = 2.0 * abs(f - prm.c) * data.lambda_h / (d * d);
  Jet vertical = qj / (prm.p * prm.p);
  if (conformal_rate != 0.0) {
    const Jet factor = exp(conformal_rate * f);
    horizontal *= factor;
    vertical *= factor;
  }
  JetMatrix g(4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i; j < 4; ++j) {
      Jet e = vertical * (re[i] * re[j] + im[i] * im[j]);
      if (i == j && i < 2) e += horizontal;
      g(static_cast<int>(i), static_cast<int>(j)) = e;
      g(static_cast<int>(j), static_cast<int>(i)) = e;
    }
  }
  return g;
}

Interval chart_window(const QInterval& comp, double f0, const ChartWindow& window) {
  const double dist = std::min(f0 - comp.lo, comp.hi - f0);
  const double half = std::min(window.fraction * dist, 0.5);
  return Interval{f0 - half, f0 + half};
}

Box calabi_box(const EllMap& ell, const Interval& fw, int s) {
  const double t1 = ell.log_ell(fw.lo), t2 = ell.log_ell(fw.hi);
  const double t_lo = std::min(t1, t2), t_hi = std::max(t1, t2);
  const double span = t_hi - t_lo;
  const double zeta = std::sqrt((std::exp(span / (2.0 * s)) - 1.0) / 2.0);
  const double r1 = std::exp(t_lo);
  const double eta = r1 * std::min(0.25, 0.5 * std::sqrt(std::expm1(1.5 * span)));
  const double r2 = std::sqrt(std::exp(2.0 * (t_lo + 0.75 * span)) - eta * eta);
  Box box;
  box.lower = Vector(4);
  box.upper = Vector(4);
  box.lower << -zeta, -zeta, r1, -eta;
  box.upper << zeta, zeta, r2, eta;
  return box;
}

struct BuiltChart {
  CalabiData data;
  Interval window;
  MetricChart metric;
  ScalarField f;
};

BuiltChart build_chart(const SkrpParams& params, double lambda_h, double f0,
                       const ChartWindow& window) {
  auto ell = std::make_shared<const EllMap>(params, f0);
  CalabiData data{params, lambda_h, ell};
  const Interval fw = chart_window(ell->component(), f0, window);
  const Box box = calabi_box(*ell, fw, params.s);
  MetricChart metric("skrp-calabi", box,
                     [data](std::span<const Jet> x) { return calabi_components(x, data, 0.0); });
  ScalarField f(4, [ell, s = params.s](std::span<const Jet> x) {
    return f_jet(*ell, log_ell_jet(x, s));
  });
  return BuiltChart{data, fw, metric, f};
}

}  // namespace

double hermitian_residual(const MetricChart& g, const Matrix& J, const Point& p) {
  const Matrix gm = g.evaluate(p).g;
  return max_abs(J.transpose() * gm * J - gm);
}

double kahler_closedness_residual(const MetricChart& g, const Matrix& J, const Point& p) {
  const MetricData data = g.evaluate(p);
  const int n = g.dim();
  std::vector<Matrix> domega;
  domega.reserve(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) domega.push_back(J.transpose() * data.dg[static_cast<std::size_t>(a)]);
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) {
        const double v = domega[static_cast<std::size_t>(a)](b, c) +
                         domega[static_cast<std::size_t>(b)](c, a) +
                         domega[static_cast<std::size_t>(c)](a, b);
        worst = std::max(worst, std::abs(v));
      }
  return worst;
}

double hermitian_hessian_residual(const MetricChart& g, const ScalarField& f, const Matrix& J,
                                  const Point& p) {
  const Matrix h = LocalGeometry(g, p).hessian(f.evaluate(p));
  return max_abs(J.transpose() * h * J - h);
}

double killing_residual(const MetricChart& g, const ScalarField& f, const Matrix& J,
                        const Point& p) {
  const LocalGeometry geo(g, p);
  const FieldValue fv = f.evaluate(p);
  const int n = g.dim();
  const Matrix& gm = geo.metric();
  const Matrix& ginv = geo.inverse();
  const Vector grad = ginv * fv.gradient;
  const Vector u_low = gm * J * grad;  // u_b = g_bc (J grad f)^c

  Matrix du(n, n);  // du(a, b) = d_a u_b
  for (int a = 0; a < n; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const Matrix dginv = -ginv * geo.data().dg[ua] * ginv;
    const Vector dgrad = dginv * fv.gradient + ginv * fv.hessian.col(a);
    du.row(a) = (geo.data().dg[ua] * J * grad + gm * J * dgrad).transpose();
  }
  Matrix cov = du;
  for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
    cov -= geo.christoffel()[k] * u_low[static_cast<int>(k)];
  }
  return max_abs(cov + cov.transpose());
}

double hermitian_hessian_residual(const CalabiChart& chart, const Point& p) {
  return hermitian_hessian_residual(chart.metric, chart.f, chart.complex_structure, p);
}

double killing_residual(const CalabiChart& chart, const Point& p) {
  return killing_residual(chart.metric, chart.f, chart.complex_structure, p);
}

CalabiChart assemble_calabi_metric(const SkrpParams& params, const ChartWindow& window) {
  params.validate();
  if (params.m != 2) throw DomainError("the Calabi assembly is implemented for m = 2");
  if (!(params.kappa > 0.0)) {
    throw CalibrationFailure("a Fubini-Study base on CP^1 needs kappa > 0");
  }
  Calibration cal;
  cal.lambda_h = 4.0 / params.kappa;
  {
    const MetricChart base = fubini_study_base(cal.lambda_h);
    double worst = 0.0, measured = 0.0;
    for (const auto& p : sample_points(base.domain(), 8, 11)) {
      const LocalGeometry geo(base, p);
      measured = geo.ricci()(0, 0) / geo.metric()(0, 0);
      worst = std::max(worst, max_abs(geo.ricci() - params.kappa * geo.metric()));
    }
    if (worst > 1e-9 * std::max(1.0, params.kappa)) {
      throw CalibrationFailure("base metric is not Einstein with constant kappa");
    }
    cal.base_einstein_constant = measured;
  }

  const double f0 = default_anchor(params);
  const Matrix J = standard_complex_structure(4);
  const double ratios[] = {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  std::optional<BuiltChart> best;
  SkrpParams best_params = params;
  double best_res = kInf;
  for (double ratio : ratios) {
    SkrpParams cand = params;
    cand.a = ratio * params.s / cal.lambda_h;
    cand.p = cand.a;
    double res = kInf;
    std::optional<BuiltChart> built;
    try {
      built = build_chart(cand, cal.lambda_h, f0, window);
      res = 0.0;
      for (const auto& p : sample_points(built->metric.domain(), 6, 7)) {
        res = std::max(res, kahler_closedness_residual(built->metric, J, p));
      }
    } catch (const Error&) {
      res = kInf;
    }
    cal.sweep.push_back({ratio, res});
    if (res < best_res) {
      best_res = res;
      best = std::move(built);
      best_params = cand;
      cal.ratio = ratio;
    }
  }
  if (!best || !(best_res < 1e-8)) {
    throw CalibrationFailure("no fiber-constant candidate closes the Kahler form (best " +
                             std::to_string(best_res) + ")");
  }
  cal.a = best_params.a;
  cal.p = best_params.p;
  cal.closedness = best_res;

  CalabiChart chart{best_params, cal, best->data.ell, best->metric, best->f, J, best->window};
  return chart;
}

MetricChart dual_metric_direct(const CalabiChart& chart) {
  const CalabiData data{chart.params, chart.calibration.lambda_h, chart.ell};
  const double rate = -4.0 / (chart.params.real_dim() - 2);
  return MetricChart("dual-skrp-calabi", chart.metric.domain(),
                     [data, rate](std::span<const Jet> x) { return calabi_components(x, data, rate); });
}

}  // namespace soliton_lab
