#include "soliton_lab/chart_tensor.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "soliton_lab/errors.hpp"

namespace soliton_lab {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

double radical_inverse(std::uint64_t index, int base) {
  double inv_base = 1.0 / base;
  double factor = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += factor * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    factor *= inv_base;
  }
  return result;
}

void check_dim(const Point& p, int dim, const char* what) {
  if (p.size() != dim) {
    throw DimensionMismatch(std::string(what) + ": point has " + std::to_string(p.size()) +
                            " coordinates, chart has " + std::to_string(dim));
  }
}

}  // namespace

Box Box::cube(int dim, double lo, double hi) {
  return Box{Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
}

bool Box::contains(const Point& p) const {
  if (p.size() != lower.size()) return false;
  for (int i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < lower[i] || p[i] > upper[i]) return false;
  }
  return true;
}

std::vector<Point> sample_points(const Box& box, int count, std::uint64_t seed, double margin) {
  const int n = box.dim();
  if (n > static_cast<int>(std::size(kPrimes))) {
    throw DimensionMismatch("sample_points supports at most 8 dimensions");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> shift(static_cast<std::size_t>(n));
  for (auto& s : shift) s = unif(rng);

  std::vector<Point> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Point p(n);
    for (int d = 0; d < n; ++d) {
      double u = radical_inverse(static_cast<std::uint64_t>(i) + 1, kPrimes[d]) + shift[static_cast<std::size_t>(d)];
      u -= std::floor(u);
      const double width = box.upper[d] - box.lower[d];
      p[d] = box.lower[d] + width * (margin + (1.0 - 2.0 * margin) * u);
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<Jet> seed_point(const Point& p) {
  const int n = static_cast<int>(p.size());
  if (n > kMaxJetDim) throw DimensionMismatch("chart dimension exceeds Jet capacity");
  std::vector<Jet> x;
  x.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x.push_back(Jet::variable(p[i], i, n));
  return x;
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(int dim, Function fn) : dim_(dim), fn_(std::move(fn)) {}

ScalarField ScalarField::constant(int dim, double c) {
  return ScalarField(dim, [c](std::span<const Jet>) { return Jet(c); });
}

ScalarField ScalarField::coordinate(int dim, int index) {
  return ScalarField(dim, [index](std::span<const Jet> x) { return x[static_cast<std::size_t>(index)]; });
}

FieldValue ScalarField::evaluate(const Point& p) const {
  check_dim(p, dim_, "ScalarField::evaluate");
  const auto x = seed_point(p);
  const Jet j = fn_(x);
  FieldValue out;
  out.value = j.value();
  out.gradient.resize(dim_);
  out.hessian.resize(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    out.gradient[i] = j.d(i);
    for (int k = 0; k < dim_; ++k) out.hessian(i, k) = j.dd(i, k);
  }
  return out;
}

double ScalarField::value(const Point& p) const {
  check_dim(p, dim_, "ScalarField::value");
  std::vector<Jet> x;
  x.reserve(static_cast<std::size_t>(p.size()));
  for (int i = 0; i < p.size(); ++i) x.emplace_back(p[i]);
  return fn_(x).value();
}

ScalarField compose(const Profile1D& h, const ScalarField& f) {
  return ScalarField(f.dim(), [h, f](std::span<const Jet> x) {
    const Jet u = f(x);
    const Derivs d = h(u.value());
    return u.apply(d.value, d.first, d.second);
  });
}

// ---------------------------------------------------------------------------
// MetricChart

MetricChart::MetricChart(std::string name, Box domain, Function fn)
    : name_(std::move(name)), domain_(std::move(domain)), fn_(std::move(fn)) {}

MetricChart MetricChart::euclidean(int dim, Box domain) {
  return MetricChart("euclidean", std::move(domain), [dim](std::span<const Jet>) {
    JetMatrix g(dim);
    for (int i = 0; i < dim; ++i) g(i, i) = Jet(1.0);
    return g;
  });
}

MetricData MetricChart::evaluate(const Point& p) const {
  const int n = dim();
  check_dim(p, n, "MetricChart::evaluate");
  const auto x = seed_point(p);
  const JetMatrix comp = fn_(x);
  if (comp.size() != n) throw DimensionMismatch("metric function returned wrong size");

  MetricData out;
  out.g.resize(n, n);
  out.dg.assign(static_cast<std::size_t>(n), Matrix::Zero(n, n));
  out.ddg.assign(static_cast<std::size_t>(n),
                 std::vector<Matrix>(static_cast<std::size_t>(n), Matrix::Zero(n, n)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Jet& e = comp(i, j);
      out.g(i, j) = e.value();
      for (int k = 0; k < n; ++k) {
        out.dg[static_cast<std::size_t>(k)](i, j) = e.d(k);
        for (int l = 0; l < n; ++l) out.ddg[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)](i, j) = e.dd(k, l);
      }
    }
  }
  if (!out.g.allFinite()) throw SingularMetric(name_ + ": non-finite metric components");
  if (asymmetry(out.g) > 1e-12) throw SingularMetric(name_ + ": metric matrix not symmetric");
  Eigen::LLT<Matrix> llt(out.g);
  if (llt.info() != Eigen::Success) {
    throw SingularMetric(name_ + ": metric not positive definite");
  }
  return out;
}

MetricChart MetricChart::scaled(const ScalarField& factor, std::string name) const {
  auto fn = fn_;
  return MetricChart(std::move(name), domain_, [fn, factor](std::span<const Jet> x) {
    JetMatrix g = fn(x);
    const Jet s = factor(x);
    for (int i = 0; i < g.size(); ++i)
      for (int j = 0; j < g.size(); ++j) g(i, j) *= s;
    return g;
  });
}

MetricChart MetricChart::with_domain(Box domain) const {
  return MetricChart(name_, std::move(domain), fn_);
}

MetricChart conformal_metric(const MetricChart& g, const ScalarField& tau) {
  const ScalarField inv_sq(tau.dim(), [tau](std::span<const Jet> x) {
    const Jet t = tau(x);
    if (t.value() == 0.0) throw DegenerateConformalFactor("tau vanishes");
    return 1.0 / (t * t);
  });
  return g.scaled(inv_sq, g.name() + "/tau^2");
}

// ---------------------------------------------------------------------------
// LocalGeometry

LocalGeometry::LocalGeometry(const MetricChart& metric, const Point& p)
    : data_(metric.evaluate(p)) {
  const int n = metric.dim();
  const auto un = static_cast<std::size_t>(n);
  g_ = data_.g;
  ginv_ = g_.llt().solve(Matrix::Identity(n, n));
  ginv_ = 0.5 * (ginv_ + ginv_.transpose());

  dginv_.resize(un);
  for (std::size_t k = 0; k < un; ++k) dginv_[k] = -ginv_ * data_.dg[k] * ginv_;

  // first-kind symbols T[l](i,j) = d_i g_jl + d_j g_il - d_l g_ij and their partials
  std::vector<Matrix> first(un, Matrix::Zero(n, n));
  std::vector<std::vector<Matrix>> dfirst(un, std::vector<Matrix>(un, Matrix::Zero(n, n)));
  for (int l = 0; l < n; ++l) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j),
                   ul = static_cast<std::size_t>(l);
        first[ul](i, j) = data_.dg[ui](j, l) + data_.dg[uj](i, l) - data_.dg[ul](i, j);
        for (std::size_t m = 0; m < un; ++m) {
          dfirst[m][ul](i, j) =
              data_.ddg[m][ui](j, l) + data_.ddg[m][uj](i, l) - data_.ddg[m][ul](i, j);
        }
      }
    }
  }

  gamma_.assign(un, Matrix::Zero(n, n));
  dgamma_.assign(un, Christoffel(un, Matrix::Zero(n, n)));
  for (std::size_t k = 0; k < un; ++k) {
    for (std::size_t l = 0; l < un; ++l) {
      const double gkl = ginv_(static_cast<int>(k), static_cast<int>(l));
      gamma_[k] += 0.5 * gkl * first[l];
      for (std::size_t m = 0; m < un; ++m) {
        dgamma_[m][k] += 0.5 * (dginv_[m](static_cast<int>(k), static_cast<int>(l)) * first[l] +
                                gkl * dfirst[m][l]);
      }
    }
  }

  // R_ij = d_k G^k_ij - d_i G^k_kj + G^k_kl G^l_ij - G^k_il G^l_kj
  ricci_ = Matrix::Zero(n, n);
  Vector trace_gamma = Vector::Zero(n);  // G^k_kl
  for (int l = 0; l < n; ++l)
    for (std::size_t k = 0; k < un; ++k) trace_gamma[l] += gamma_[k](static_cast<int>(k), l);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double r = 0.0;
      for (int k = 0; k < n; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        r += dgamma_[uk][uk](i, j);
        r -= dgamma_[static_cast<std::size_t>(i)][uk](k, j);
        for (int l = 0; l < n; ++l) {
          const auto ul = static_cast<std::size_t>(l);
          r -= gamma_[uk](i, l) * gamma_[ul](k, j);
        }
      }
      for (int l = 0; l < n; ++l) r += trace_gamma[l] * gamma_[static_cast<std::size_t>(l)](i, j);
      ricci_(i, j) = r;
    }
  }
}

double LocalGeometry::scalar_curvature() const { return (ginv_.cwiseProduct(ricci_)).sum(); }

Matrix LocalGeometry::hessian(const FieldValue& f) const {
  Matrix h = f.hessian;
  for (std::size_t k = 0; k < gamma_.size(); ++k) h -= gamma_[k] * f.gradient[static_cast<int>(k)];
  return h;
}

Vector LocalGeometry::gradient(const FieldValue& f) const { return ginv_ * f.gradient; }

double LocalGeometry::inner(const Vector& a, const Vector& b) const { return a.dot(ginv_ * b); }

double LocalGeometry::laplacian(const FieldValue& f) const {
  return (ginv_.cwiseProduct(hessian(f))).sum();
}

double LocalGeometry::laplacian_divergence(const FieldValue& f) const {
  const int n = dim();
  double lap = (ginv_.cwiseProduct(f.hessian)).sum();
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double dlogdet = (ginv_.cwiseProduct(data_.dg[ui])).sum();
    for (int j = 0; j < n; ++j) {
      lap += dginv_[ui](i, j) * f.gradient[j];
      lap += 0.5 * dlogdet * ginv_(i, j) * f.gradient[j];
    }
  }
  return lap;
}

double LocalGeometry::form_inner(const Matrix& a, const Matrix& b) const {
  return (ginv_ * a * ginv_).cwiseProduct(b).sum();
}

double LocalGeometry::form_norm(const Matrix& t) const {
  return std::sqrt(std::max(0.0, form_inner(t, t)));
}

// ---------------------------------------------------------------------------
// Free functions

Christoffel christoffel(const MetricChart& g, const Point& p) {
  return LocalGeometry(g, p).christoffel();
}

Matrix ricci(const MetricChart& g, const Point& p) { return LocalGeometry(g, p).ricci(); }

double scalar_curvature(const MetricChart& g, const Point& p) {
  return LocalGeometry(g, p).scalar_curvature();
}

Matrix hessian(const MetricChart& g, const ScalarField& f, const Point& p) {
  return LocalGeometry(g, p).hessian(f.evaluate(p));
}

Vector gradient(const MetricChart& g, const ScalarField& f, const Point& p) {
  return LocalGeometry(g, p).gradient(f.evaluate(p));
}

double grad_norm_sq(const MetricChart& g, const ScalarField& f, const Point& p) {
  const auto fv = f.evaluate(p);
  return LocalGeometry(g, p).inner(fv.gradient, fv.gradient);
}

double laplacian(const MetricChart& g, const ScalarField& f, const Point& p) {
  return LocalGeometry(g, p).laplacian(f.evaluate(p));
}

double conformal_hessian_check(const MetricChart& g, const ScalarField& tau,
                               const ScalarField& f, const Point& p) {
  const FieldValue tv = tau.evaluate(p);
  if (tv.value == 0.0) throw DegenerateConformalFactor("tau(p) = 0");
  const FieldValue fv = f.evaluate(p);
  const LocalGeometry base(g, p);
  const LocalGeometry hat(conformal_metric(g, tau), p);

  const Matrix direct = hat.hessian(fv);
  const Matrix sym = tv.gradient * fv.gradient.transpose() + fv.gradient * tv.gradient.transpose();
  const Matrix formula =
      base.hessian(fv) + (sym - base.inner(tv.gradient, fv.gradient) * base.metric()) / tv.value;
  return max_abs(direct - formula);
}

namespace {

ConformalRicciResidual ricci_check_impl(const MetricChart& g, const ScalarField& tau,
                                        const ProfileOfField* profile, const Point& p) {
  const FieldValue tv = tau.evaluate(p);
  if (tv.value == 0.0) throw DegenerateConformalFactor("tau(p) = 0");
  const int n = g.dim();
  const LocalGeometry base(g, p);
  const LocalGeometry hat(conformal_metric(g, tau), p);

  const double t = tv.value;
  const double beta =
      base.laplacian(tv) / t - (n - 1) * base.inner(tv.gradient, tv.gradient) / (t * t);
  const Matrix direct = hat.ricci();
  const Matrix general = base.ricci() + (n - 2) * base.hessian(tv) / t + beta * base.metric();

  ConformalRicciResidual out;
  out.general = max_abs(direct - general);
  if (profile != nullptr) {
    const FieldValue fv = profile->f.evaluate(p);
    const Derivs h = profile->tau_of_f(fv.value);
    const Matrix hess_tau =
        h.first * base.hessian(fv) + h.second * fv.gradient * fv.gradient.transpose();
    const Matrix via_profile = base.ricci() + (n - 2) * hess_tau / t + beta * base.metric();
    out.profile_form = max_abs(direct - via_profile);
  }
  return out;
}

}  // namespace

ConformalRicciResidual conformal_ricci_check(const MetricChart& g, const ScalarField& tau,
                                             const Point& p) {
  return ricci_check_impl(g, tau, nullptr, p);
}

ConformalRicciResidual conformal_ricci_check(const MetricChart& g, const ProfileOfField& tau,
                                             const Point& p) {
  return ricci_check_impl(g, compose(tau.tau_of_f, tau.f), &tau, p);
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double asymmetry(const Matrix& m) {
  const double scale = max_abs(m);
  const double diff = max_abs(m - m.transpose());
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace soliton_lab
