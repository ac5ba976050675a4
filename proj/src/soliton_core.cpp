#include "soliton_lab/soliton_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "soliton_lab/errors.hpp"

namespace soliton_lab {

CoefficientSample extract_coefficient(const SolitonPair& pair, const Point& p) {
  const LocalGeometry geo(pair.metric, p);
  const Matrix t = geo.ricci() + geo.hessian(pair.f.evaluate(p));
  CoefficientSample out;
  out.coefficient = (geo.inverse().cwiseProduct(t)).sum() / pair.dim();
  out.residual = geo.form_norm(t - out.coefficient * geo.metric());
  return out;
}

double relative_variation(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  return (*hi - *lo) / (1.0 + scale);
}

ResidualReport residual_report(const SolitonPair& pair, const std::vector<Point>& sample) {
  ResidualReport report;
  report.points = sample;
  report.coefficients.reserve(sample.size());
  report.residuals.reserve(sample.size());
  report.grad_norm_sq.reserve(sample.size());
  for (const auto& p : sample) {
    const LocalGeometry geo(pair.metric, p);
    const FieldValue fv = pair.f.evaluate(p);
    const Matrix t = geo.ricci() + geo.hessian(fv);
    const double c = (geo.inverse().cwiseProduct(t)).sum() / pair.dim();
    const double r = geo.form_norm(t - c * geo.metric());
    const double gn = geo.inner(fv.gradient, fv.gradient);
    report.coefficients.push_back(c);
    report.residuals.push_back(r);
    report.grad_norm_sq.push_back(gn);
    report.max_residual = std::max(report.max_residual, r);
    report.max_grad_norm_sq = std::max(report.max_grad_norm_sq, gn);
  }
  report.coefficient_variation = relative_variation(report.coefficients);
  return report;
}

std::string to_string(SolitonClass c) {
  switch (c) {
    case SolitonClass::trivial:
      return "trivial";
    case SolitonClass::gradient_ricci_soliton:
      return "gradient-Ricci-soliton";
    case SolitonClass::almost_soliton:
      return "almost-soliton";
    case SolitonClass::none:
      return "none";
  }
  return "none";
}

SolitonClass classify(const ResidualReport& report, const ClassifyTolerances& tol) {
  if (report.points.empty()) throw EmptySample("classify needs at least one point");
  if (!(report.max_residual < tol.residual)) return SolitonClass::none;
  if (!(report.coefficient_variation < tol.coefficient)) return SolitonClass::almost_soliton;
  if (report.max_grad_norm_sq < tol.gradient) return SolitonClass::trivial;
  return SolitonClass::gradient_ricci_soliton;
}

SolitonClass classify(const SolitonPair& pair, const std::vector<Point>& sample,
                      const ClassifyTolerances& tol) {
  if (sample.empty()) throw EmptySample("classify needs at least one point");
  return classify(residual_report(pair, sample), tol);
}

SolitonPair dualize(const SolitonPair& pair) {
  const int n = pair.dim();
  if (n <= 2) throw DimensionTooSmall("duality needs n > 2, got n = " + std::to_string(n));
  const double rate = -4.0 / (n - 2);
  const ScalarField f = pair.f;
  const ScalarField factor(n, [f, rate](std::span<const Jet> x) { return exp(rate * f(x)); });
  const ScalarField minus_f(n, [f](std::span<const Jet> x) { return -f(x); });
  return SolitonPair{pair.metric.scaled(factor, "dual(" + pair.metric.name() + ")"), minus_f,
                     "dual(" + pair.name + ")"};
}

double dual_coefficient(const SolitonPair& pair, const Point& p, DualCoefficientMethod method,
                        double max_residual) {
  const int n = pair.dim();
  if (n <= 2) throw DimensionTooSmall("duality needs n > 2");
  const LocalGeometry geo(pair.metric, p);
  const FieldValue fv = pair.f.evaluate(p);
  const Matrix t = geo.ricci() + geo.hessian(fv);
  const double c = (geo.inverse().cwiseProduct(t)).sum() / n;
  const double residual = geo.form_norm(t - c * geo.metric());
  if (!(residual <= max_residual)) {
    throw NotASoliton("almost-soliton residual " + std::to_string(residual) + " at sample point");
  }

  const double grad_sq = geo.inner(fv.gradient, fv.gradient);
  if (method == DualCoefficientMethod::closed) {
    return std::exp(4.0 * fv.value / (n - 2)) *
           (c + 2.0 / (n - 2) * (geo.laplacian(fv) - grad_sq));
  }

  const double rate = 2.0 / (n - 2);
  const ScalarField tau = compose(exponential_profile(rate), pair.f);
  const FieldValue tv = tau.evaluate(p);
  const double tau_prime = rate * tv.value;
  const double beta = geo.laplacian(tv) / tv.value -
                      (n - 1) * geo.inner(tv.gradient, tv.gradient) / (tv.value * tv.value);
  const double delta = tau_prime / tv.value * grad_sq;
  return tv.value * tv.value * (c + beta + delta);
}

double hamilton_invariant(const SolitonPair& pair, double c, const Point& p) {
  const LocalGeometry geo(pair.metric, p);
  const FieldValue fv = pair.f.evaluate(p);
  return geo.laplacian(fv) - geo.inner(fv.gradient, fv.gradient) + 2.0 * c * fv.value;
}

double steady_obstruction(const SolitonPair& pair, const Point& p) {
  const LocalGeometry geo(pair.metric, p);
  const FieldValue fv = pair.f.evaluate(p);
  return -geo.scalar_curvature() - geo.inner(fv.gradient, fv.gradient);
}

SolitonPair old_dualize(const SolitonPair& pair, int probe_points) {
  const int n = pair.dim();
  const Box& box = pair.metric.domain();
  auto probes = sample_points(box, probe_points, 0x5eedULL, 0.0);
  for (int mask = 0; mask < (1 << n); ++mask) {
    Point corner(n);
    for (int i = 0; i < n; ++i) corner[i] = (mask >> i & 1) ? box.upper[i] : box.lower[i];
    probes.push_back(corner);
  }
  double sign = 0.0, scale = 0.0, smallest = std::numeric_limits<double>::infinity();
  Point nearest;
  for (const auto& p : probes) {
    const double v = pair.f.value(p);
    if (v == 0.0 || (sign != 0.0 && v * sign < 0.0)) {
      throw ZeroCrossing("soliton function vanishes on the domain of " + pair.name);
    }
    sign = v > 0.0 ? 1.0 : -1.0;
    scale = std::max(scale, std::abs(v));
    if (std::abs(v) < smallest) {
      smallest = std::abs(v);
      nearest = p;
    }
  }
  // a zero without sign change sits at a critical point; Newton on grad f = 0
  // from the probe of least |f| finds it
  Point x = nearest;
  for (int it = 0; it < 30; ++it) {
    const FieldValue v = pair.f.evaluate(x);
    if (std::abs(v.value) <= 1e-12 * scale) {
      throw ZeroCrossing("soliton function touches zero on the domain of " + pair.name);
    }
    const Eigen::FullPivLU<Matrix> lu(v.hessian);
    if (!lu.isInvertible()) break;
    const Point next = x - lu.solve(v.gradient);
    if (!box.contains(next) || (next - x).norm() < 1e-15 * (1.0 + x.norm())) break;
    x = next;
  }
  const ScalarField f = pair.f;
  const ScalarField factor(n, [f](std::span<const Jet> x) {
    const Jet v = f(x);
    if (v.value() == 0.0) throw ZeroCrossing("soliton function vanishes");
    return 1.0 / (v * v);
  });
  const ScalarField inverse(n, [f](std::span<const Jet> x) { return 1.0 / f(x); });
  return SolitonPair{pair.metric.scaled(factor, "old_dual(" + pair.metric.name() + ")"), inverse,
                     "old_dual(" + pair.name + ")"};
}

RicciHessianFit ricci_hessian_fit(const SolitonPair& pair, const Point& p) {
  const LocalGeometry geo(pair.metric, p);
  const Matrix h = geo.hessian(pair.f.evaluate(p));
  const Matrix& r = geo.ricci();
  const Matrix& g = geo.metric();
  const double hh = geo.form_inner(h, h);
  const double hg = geo.form_inner(h, g);
  const double gg = geo.form_inner(g, g);  // = n
  const double rh = geo.form_inner(r, h);
  const double rg = geo.form_inner(r, g);

  RicciHessianFit fit;
  const double gram = hh * gg - hg * hg;
  if (!(gram > 1e-10 * hh * gg)) {
    // hess f ~ g: fit c alone with alpha = 0
    fit.ill_conditioned = true;
    fit.alpha = 0.0;
    fit.coefficient = rg / gg;
  } else {
    // normal equations of min |R + alpha H - c g|^2
    fit.alpha = (hg * rg - gg * rh) / gram;
    fit.coefficient = (rg + fit.alpha * hg) / gg;
  }
  fit.residual = geo.form_norm(r + fit.alpha * h - fit.coefficient * g);
  return fit;
}

UniquenessResiduals uniqueness_residuals(const ProfilePair& profile, int n, double f) {
  const Derivs tau = profile.tau(f);
  if (!(tau.value > 0.0)) throw DomainError("tau(f) must be positive");
  const Derivs k = profile.k(f);
  const double log_rate = tau.first / tau.value;
  UniquenessResiduals out;
  out.r1 = (n - 2) * log_rate + k.first - 1.0;
  out.r2 = (n - 2) * tau.second / tau.value + k.second + 2.0 * log_rate * k.first;
  return out;
}

double nonhermitian_coefficient(const Profile1D& tau, int n, double f) {
  const Derivs t = tau(f);
  if (t.value == 0.0) throw DomainError("tau(f) vanishes");
  return (n - 2) * t.second / t.value + 2.0 * t.first / t.value;
}

Profile1D exponential_profile(double rate, double scale) {
  return [rate, scale](double f) {
    const double v = scale * std::exp(rate * f);
    return Derivs{v, rate * v, rate * rate * v};
  };
}

Profile1D affine_profile(double intercept, double slope) {
  return [intercept, slope](double f) { return Derivs{intercept + slope * f, slope, 0.0}; };
}

}  // namespace soliton_lab
