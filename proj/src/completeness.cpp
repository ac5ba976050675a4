#include "soliton_lab/completeness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include "quadrature.hpp"
#include "soliton_lab/errors.hpp"

namespace soliton_lab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
// the fit window [1e-8, 1e-3] leaves an O(1e-3) bias in the slope
constexpr double kFitSlack = 0.01;

double partial_exp(int order, double x) {
  double term = 1.0, sum = 0.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) term *= x / k;
    sum += term;
  }
  return sum;
}

// log Q without forming e^{f_c} when the exponential term dominates
double skrp_log_q(const SkrpParams& p, int branch, double f) {
  const double x = f - p.c;
  if (p.B > 0.0 && x > 30.0) {
    const int m = p.m;
    const double rest = (p.A * partial_exp(m, x) + p.kappa * std::pow(x, m) / (2.0 * m)) *
                        std::exp(-x) / p.B;
    if (!(1.0 + rest > 0.0)) throw NonpositiveQ("Q <= 0 at f = " + std::to_string(f));
    return std::log(2.0 * p.B) + (1 - m) * std::log(x) + x + std::log1p(rest);
  }
  const double q = q_profile(p, f, branch).value;
  if (!(q > 0.0)) throw NonpositiveQ("Q <= 0 at f = " + std::to_string(f));
  return std::log(q);
}

double scale_of_q(const ArcProfile& profile) {
  const Interval& I = profile.interval;
  double lo = I.lo, hi = I.hi;
  if (!std::isfinite(lo) && !std::isfinite(hi)) {
    lo = profile.c - 10.0;
    hi = profile.c + 10.0;
  } else if (!std::isfinite(lo)) {
    lo = hi - 10.0;
  } else if (!std::isfinite(hi)) {
    hi = lo + 10.0;
  }
  double scale = 0.0;
  constexpr int kProbes = 64;
  for (int k = 0; k < kProbes; ++k) {
    const double f = lo + (hi - lo) * (k + 0.5) / kProbes;
    try {
      const double v = std::abs(profile.q(f).value);
      if (std::isfinite(v)) scale = std::max(scale, v);
    } catch (const Error&) {
    }
  }
  return scale > 0.0 ? scale : 1.0;
}

// distance from an end to the reference point used for the end's integral
double reach(const ArcProfile& profile) {
  const Interval& I = profile.interval;
  return I.finite() ? 0.5 * I.width() : 1.0;
}

}  // namespace

ArcProfile synthetic_arc_profile(std::string name, int n, Profile1D q, Interval interval,
                                 double c) {
  ArcProfile out;
  out.name = std::move(name);
  out.n = n;
  out.c = c;
  out.interval = interval;
  out.q = std::move(q);
  return out;
}

ArcProfile skrp_arc_profile(const SkrpParams& params, const QInterval& component) {
  ArcProfile out;
  out.name = "skrp";
  out.n = params.real_dim();
  out.c = params.c;
  out.interval = Interval{component.lo, component.hi};
  const int branch = component.branch(params.c);
  out.q = [params, branch](double f) { return q_profile(params, f, branch); };
  out.log_q = [params, branch](double f) { return skrp_log_q(params, branch, f); };
  out.skrp = params;
  return out;
}

double log_arc_integrand(const ArcProfile& profile, double f) {
  if (profile.n <= 2) throw DimensionTooSmall("arc integrand needs n > 2");
  double log_q;
  if (profile.log_q) {
    log_q = profile.log_q(f);
  } else {
    const double q = profile.q(f).value;
    if (!(q > 0.0)) throw NonpositiveQ("Q <= 0 at f = " + std::to_string(f));
    log_q = std::log(q);
  }
  return -2.0 * f / (profile.n - 2) - 0.5 * log_q;
}

double arc_integrand(const ArcProfile& profile, double f) {
  if (profile.n <= 2) throw DimensionTooSmall("arc integrand needs n > 2");
  const double q = profile.q(f).value;
  if (!(q > 0.0)) throw NonpositiveQ("Q <= 0 at f = " + std::to_string(f));
  return std::exp(-2.0 * f / (profile.n - 2)) / std::sqrt(q);
}

double arc_integrand(const SkrpParams& params, double f) {
  const double x = f - params.c;
  const int branch = x > 0.0 ? 1 : (x < 0.0 ? -1 : 0);
  const double q = q_profile(params, f, branch).value;
  if (!(q > 0.0)) throw NonpositiveQ("Q <= 0 at f = " + std::to_string(f));
  return std::exp(-2.0 * f / (params.real_dim() - 2)) / std::sqrt(q);
}

IntegralResult improper_integral_offset(const std::function<double(double)>& h, double d,
                                        const LadderSettings& ladder) {
  if (d == 0.0) return Converged{0.0, 0.0};
  if (!(d > 0.0)) throw DomainError("improper integral needs a < b");
  // values within 1e-14 d of the singular end carry no weight in a convergent integral
  const double negligible = 1e-14 * d;
  auto safe = [&](double x) -> double {
    double v;
    try {
      v = h(x);
    } catch (const NonpositiveQ&) {
      if (x < negligible) return 0.0;
      throw;
    }
    if (!std::isfinite(v) && x < negligible) return 0.0;
    return v;
  };

  const double base = std::min(1.0, d);
  std::vector<double> eps;
  for (int k = ladder.first_rung; k <= ladder.last_rung; ++k) eps.push_back(std::pow(10.0, -k) * base);
  std::vector<double> inc;
  bool overflow = false;
  for (std::size_t i = 0; i + 1 < eps.size(); ++i) {
    const double v = detail::gk_integrate(safe, eps[i + 1], eps[i]);
    if (std::isnan(v) || v < 0.0) throw OscillationDetected("non-positive ladder increment");
    if (std::isinf(v)) {
      overflow = true;
      break;
    }
    inc.push_back(v);
  }
  std::vector<double> ratios;
  for (std::size_t i = 0; i + 1 < inc.size(); ++i) {
    if (inc[i] == 0.0) {
      ratios.push_back(inc[i + 1] == 0.0 ? 0.0 : kInf);
    } else {
      ratios.push_back(inc[i + 1] / inc[i]);
    }
  }
  if (overflow) {
    const double rate = ratios.empty() || !std::isfinite(ratios.back()) ? -kInf
                                                                        : -std::log10(ratios.back());
    return Diverges{rate, true};
  }
  const auto window = static_cast<std::size_t>(std::max(1, ladder.window));
  if (ratios.size() >= window &&
      std::all_of(ratios.end() - static_cast<std::ptrdiff_t>(window), ratios.end(),
                  [&](double r) { return r >= 1.0 - ladder.slack; })) {
    return Diverges{-std::log10(ratios.back()), false};
  }

  try {
    boost::math::quadrature::tanh_sinh<double> ts;
    double err = 0.0, l1 = 0.0;
    // t^2 = x regularises inverse-square-root ends
    auto g = [&](double t) { return 2.0 * t * safe(t * t); };
    const double v = ts.integrate(g, 0.0, std::sqrt(d), 1e-14, &err, &l1);
    if (std::isfinite(v)) return Converged{v, err};
  } catch (const std::exception&) {
  }
  double sum = detail::gk_integrate(safe, eps.front(), d);
  for (double v : inc) sum += v;
  const double r = ratios.empty() ? 0.0 : ratios.back();
  const double tail = inc.empty() ? 0.0 : inc.back() * r / (1.0 - r);
  return Converged{sum + tail, std::abs(tail)};
}

IntegralResult improper_integral(const std::function<double(double)>& integrand, double a, double b,
                                 const LadderSettings& ladder) {
  if (!(a <= b)) throw DomainError("improper integral needs a < b");
  auto h = [&](double x) {
    const double f = a + x;
    if (f == a) return kInf;
    return integrand(f);
  };
  return improper_integral_offset(h, b - a, ladder);
}

ExponentFit exponent_fit(const std::function<double(double)>& integrand, double a, int direction) {
  constexpr int kPoints = 51;
  std::vector<double> xs, ys;
  for (int j = 0; j < kPoints; ++j) {
    const double x = std::pow(10.0, -8.0 + 5.0 * j / (kPoints - 1));
    const double v = integrand(a + direction * x);
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    xs.push_back(std::log(x));
    ys.push_back(std::log(v));
  }
  const auto count = static_cast<int>(xs.size());
  if (count < 3) throw DomainError("exponent fit needs positive finite integrand values");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < count; ++i) {
    mx += xs[static_cast<std::size_t>(i)];
    my += ys[static_cast<std::size_t>(i)];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto u = static_cast<std::size_t>(i);
    sxx += (xs[u] - mx) * (xs[u] - mx);
    sxy += (xs[u] - mx) * (ys[u] - my);
  }
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double r = ys[u] - fit.intercept - fit.slope * xs[u];
    sse += r * r;
  }
  fit.residual = std::sqrt(sse / count);
  const double se = std::sqrt(sse / (count - 2) / sxx);
  const boost::math::students_t dist(count - 2);
  const double t = boost::math::quantile(dist, 0.975);
  fit.ci_low = fit.slope - t * se;
  fit.ci_high = fit.slope + t * se;
  return fit;
}

std::string to_string(EndSide s) { return s == EndSide::lower ? "lower" : "upper"; }

std::string to_string(EndClass c) {
  switch (c) {
    case EndClass::smooth_cap:
      return "SmoothCap";
    case EndClass::infinite_end:
      return "InfiniteEnd";
    case EndClass::infinite_range_convergent:
      return "InfiniteRangeConvergent";
    case EndClass::infinite_range_divergent:
      return "InfiniteRangeDivergent";
    case EndClass::interior:
      return "Interior";
  }
  return "Interior";
}

std::string to_string(Overall o) {
  switch (o) {
    case Overall::complete:
      return "complete";
    case Overall::incomplete:
      return "incomplete";
    case Overall::complete_compact_extension:
      return "complete-compact-extension";
    case Overall::inconclusive_at_end:
      return "inconclusive-at-end";
  }
  return "inconclusive-at-end";
}

EndpointAnalysis classify_endpoint(const ArcProfile& profile, EndSide side) {
  const double a = side == EndSide::lower ? profile.interval.lo : profile.interval.hi;
  if (!std::isfinite(a)) return infinite_range_test(profile, side);
  const int dir = side == EndSide::lower ? 1 : -1;

  EndpointAnalysis out;
  out.side = side;
  out.endpoint = a;
  out.tolerance = 1e-9 * scale_of_q(profile);
  try {
    const Derivs qa = profile.q(a);
    out.q_value = qa.value;
    out.dq_value = qa.first;
  } catch (const PoleError&) {
    out.q_value = kInf;
    out.dq_value = kNaN;
  }
  const double tol = out.tolerance;
  if (std::abs(out.q_value) < tol) {
    const double dq = std::abs(out.dq_value);
    out.cls = dq > tol ? EndClass::smooth_cap : EndClass::infinite_end;
    out.ambiguous = dq > tol / 10.0 && dq < tol * 10.0;
  } else {
    out.cls = EndClass::interior;
  }

  auto h = [&](double x) { return arc_integrand(profile, a + dir * x); };
  out.evidence = improper_integral_offset(h, reach(profile));
  try {
    out.fit = exponent_fit([&](double f) { return arc_integrand(profile, f); }, a, dir);
  } catch (const Error&) {
    out.fit.reset();
  }

  switch (out.cls) {
    case EndClass::smooth_cap:
      out.consistent = converged(out.evidence) && out.fit &&
                       out.fit->slope > -1.0 + kFitSlack && out.fit->slope < 0.0;
      break;
    case EndClass::infinite_end:
      out.consistent = !converged(out.evidence) && out.fit && out.fit->slope <= -1.0 + kFitSlack;
      break;
    default:
      out.consistent = converged(out.evidence);
      break;
  }
  return out;
}

EndpointAnalysis infinite_range_test(const ArcProfile& profile, EndSide side) {
  const Interval& I = profile.interval;
  const double c = profile.c;
  const int dir = side == EndSide::upper ? 1 : -1;
  if (side == EndSide::upper ? std::isfinite(I.hi) : std::isfinite(I.lo)) {
    throw DomainError("infinite_range_test needs an infinite end");
  }
  EndpointAnalysis out;
  out.side = side;
  out.endpoint = dir * kInf;
  out.q_value = kNaN;
  out.dq_value = kNaN;
  out.tolerance = kNaN;

  double f1;
  if (dir > 0) {
    f1 = (std::isfinite(I.lo) ? std::max(I.lo, c) : c) + 1.0;
  } else {
    f1 = (std::isfinite(I.hi) ? std::min(I.hi, c) : c) - 1.0;
  }
  const double u1 = 1.0 / std::abs(f1 - c);
  // f = c + dir / u, |df| = du / u^2
  auto log_h = [&](double u) { return log_arc_integrand(profile, c + dir / u) - 2.0 * std::log(u); };
  out.evidence = improper_integral_offset([&](double u) { return std::exp(log_h(u)); }, u1);
  out.cls = converged(out.evidence) ? EndClass::infinite_range_convergent
                                    : EndClass::infinite_range_divergent;

  if (profile.skrp && dir > 0 && profile.skrp->B != 0.0) {
    const int m = profile.skrp->m;
    for (double u : {1e-2, 1e-3, 1e-4}) {
      const double log_asym =
          (-1.0 / (m - 1) - 0.5) / u - ((m - 1) / 2.0 + 2.0) * std::log(u);
      out.asymptote_ratios.push_back(std::exp(log_h(u) - log_asym));
    }
  }
  return out;
}

EndpointAnalysis infinite_range_test(const SkrpParams& params) {
  const auto comp = q_component(params, default_anchor(params));
  if (!comp) throw DomainSplit("anchor is not inside a Q-positive interval");
  if (std::isfinite(comp->hi)) throw DomainError("sup of the Q-positive interval is finite");
  return infinite_range_test(skrp_arc_profile(params, *comp), EndSide::upper);
}

double u_form_integral(const ArcProfile& profile, double f1, double F) {
  const double c = profile.c;
  if (!(c < f1 && f1 < F)) throw DomainError("u-form integral needs c < f1 < F");
  auto h = [&](double u) { return std::exp(log_arc_integrand(profile, c + 1.0 / u)) / (u * u); };
  return detail::gk_integrate(h, 1.0 / (F - c), 1.0 / (f1 - c));
}

double direct_integral(const ArcProfile& profile, double f1, double F) {
  return detail::gk_integrate([&](double f) { return arc_integrand(profile, f); }, f1, F);
}

Overall combine(const EndpointAnalysis& lower, const EndpointAnalysis& upper) {
  const EndpointAnalysis* ends[] = {&lower, &upper};
  for (const auto* e : ends) {
    if (e->cls == EndClass::infinite_range_convergent) return Overall::incomplete;
  }
  for (const auto* e : ends) {
    if (e->cls == EndClass::interior || e->ambiguous || !e->consistent) {
      return Overall::inconclusive_at_end;
    }
  }
  if (lower.cls == EndClass::smooth_cap && upper.cls == EndClass::smooth_cap) {
    return Overall::complete_compact_extension;
  }
  return Overall::complete;
}

CompletenessVerdict completeness_verdict(const ArcProfile& profile) {
  CompletenessVerdict v;
  v.lower = classify_endpoint(profile, EndSide::lower);
  v.upper = classify_endpoint(profile, EndSide::upper);
  v.overall = combine(v.lower, v.upper);
  return v;
}

CompletenessVerdict completeness_verdict(const SkrpParams& params) {
  const auto comp = q_component(params, default_anchor(params));
  if (!comp) throw DomainSplit("anchor is not inside a Q-positive interval");
  return completeness_verdict(skrp_arc_profile(params, *comp));
}

FlowLength gradient_flow_length_crosscheck(const CalabiChart& chart, double f1, double f2) {
  namespace odeint = boost::numeric::odeint;
  FlowLength out;
  if (f1 == f2) return out;
  const Box& box = chart.metric.domain();
  Point start(4);
  start << 0.0, 0.0, chart.ell->ell(f1), 0.0;
  if (!box.contains(start)) throw DomainExit("flow start lies outside the chart box");
  const MetricChart dual = dual_metric_direct(chart);

  using State = std::array<double, 5>;  // x1, y1, x2, y2, length
  auto rhs = [&](const State& y, State& dy, double) {
    Point p(4);
    p << y[0], y[1], y[2], y[3];
    if (!box.contains(p)) throw DomainExit("gradient flow left the chart box");
    const Matrix g = chart.metric.evaluate(p).g;
    const Vector df = chart.f.evaluate(p).gradient;
    const Vector v = g.ldlt().solve(df);
    const Vector xdot = v / df.dot(v);
    const Matrix ghat = dual.evaluate(p).g;
    for (int i = 0; i < 4; ++i) dy[static_cast<std::size_t>(i)] = xdot[i];
    dy[4] = std::sqrt(xdot.dot(ghat * xdot));
  };
  State y{start[0], start[1], start[2], start[3], 0.0};
  auto stepper = odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(stepper, rhs, y, f1, f2, (f2 - f1) / 32.0);
  out.flow_length = std::abs(y[4]);

  const ArcProfile profile = skrp_arc_profile(chart.params, chart.ell->component());
  out.reduced_length = std::abs(
      detail::gk_integrate([&](double f) { return arc_integrand(profile, f); }, f1, f2));
  out.relative_error = std::abs(out.flow_length - out.reduced_length) / out.reduced_length;
  return out;
}

}  // namespace soliton_lab
