#pragma once

// Differential geometry on a single coordinate chart: metrics, Levi-Civita
// connection, Ricci curvature, Hessians, and the conformal-change identities
// for a metric g/tau^2. All derivative data comes from the Jet engine.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "soliton_lab/jet.hpp"

namespace soliton_lab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point = Eigen::VectorXd;

/// Axis-aligned box of chart coordinates.
struct Box {
  Vector lower;
  Vector upper;

  static Box cube(int dim, double lo, double hi);
  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Point& p) const;
};

/// Low-discrepancy (Halton, randomly shifted by `seed`) points inside `box`,
/// keeping `margin` (fraction of each edge) away from the faces.
std::vector<Point> sample_points(const Box& box, int count, std::uint64_t seed,
                                 double margin = 0.05);

/// Chart coordinates of `p` as independent Jet variables.
std::vector<Jet> seed_point(const Point& p);

struct FieldValue {
  double value = 0.0;
  Vector gradient;  // coordinate partials
  Matrix hessian;   // coordinate second partials
};

/// A smooth real function of the chart coordinates.
class ScalarField {
 public:
  using Function = std::function<Jet(std::span<const Jet>)>;

  ScalarField(int dim, Function fn);

  static ScalarField constant(int dim, double c);
  static ScalarField coordinate(int dim, int index);

  int dim() const { return dim_; }
  Jet operator()(std::span<const Jet> x) const { return fn_(x); }
  FieldValue evaluate(const Point& p) const;
  double value(const Point& p) const;

 private:
  int dim_;
  Function fn_;
};

/// One-variable profile h(f) with its first two derivatives.
struct Derivs {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};
using Profile1D = std::function<Derivs(double)>;

/// h o f as a field, propagated through the chain rule.
ScalarField compose(const Profile1D& h, const ScalarField& f);

/// Square matrix of Jets, row-major.
class JetMatrix {
 public:
  explicit JetMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n * n)) {}
  int size() const { return n_; }
  Jet& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * n_ + j)]; }
  const Jet& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * n_ + j)]; }

 private:
  int n_;
  std::vector<Jet> data_;
};

/// Metric components and their coordinate partials at a point.
struct MetricData {
  Matrix g;
  std::vector<Matrix> dg;                // dg[k](i,j) = d_k g_ij
  std::vector<std::vector<Matrix>> ddg;  // ddg[k][l](i,j) = d_k d_l g_ij
};

/// A Riemannian metric on a box-shaped chart domain.
class MetricChart {
 public:
  using Function = std::function<JetMatrix(std::span<const Jet>)>;

  MetricChart(std::string name, Box domain, Function fn);

  static MetricChart euclidean(int dim, Box domain);

  const std::string& name() const { return name_; }
  int dim() const { return domain_.dim(); }
  const Box& domain() const { return domain_; }

  JetMatrix components(std::span<const Jet> x) const { return fn_(x); }

  /// Throws SingularMetric when the matrix is not symmetric positive definite.
  MetricData evaluate(const Point& p) const;

  /// factor * g, with derivative data propagated analytically.
  MetricChart scaled(const ScalarField& factor, std::string name) const;
  MetricChart with_domain(Box domain) const;

 private:
  std::string name_;
  Box domain_;
  Function fn_;
};

/// Gamma[k](i,j) = Christoffel symbol of the second kind.
using Christoffel = std::vector<Matrix>;

/// Connection and curvature of a metric at one point; all quantities are
/// computed once on construction.
class LocalGeometry {
 public:
  LocalGeometry(const MetricChart& metric, const Point& p);

  int dim() const { return static_cast<int>(g_.rows()); }
  const Matrix& metric() const { return g_; }
  const Matrix& inverse() const { return ginv_; }
  const MetricData& data() const { return data_; }
  const Christoffel& christoffel() const { return gamma_; }
  /// dgamma[m][k](i,j) = d_m Gamma^k_ij
  const std::vector<Christoffel>& christoffel_derivative() const { return dgamma_; }
  const Matrix& ricci() const { return ricci_; }
  double scalar_curvature() const;

  Matrix hessian(const FieldValue& f) const;
  Vector gradient(const FieldValue& f) const;
  double inner(const Vector& df1, const Vector& df2) const;
  double laplacian(const FieldValue& f) const;
  /// Laplacian in divergence form, |g|^-1/2 d_i(|g|^1/2 g^ij d_j f).
  double laplacian_divergence(const FieldValue& f) const;
  /// g-norm of a covariant 2-tensor.
  double form_norm(const Matrix& t) const;
  double form_inner(const Matrix& a, const Matrix& b) const;

 private:
  MetricData data_;
  Matrix g_;
  Matrix ginv_;
  std::vector<Matrix> dginv_;  // dginv_[k] = d_k g^ij
  Christoffel gamma_;
  std::vector<Christoffel> dgamma_;
  Matrix ricci_;
};

Christoffel christoffel(const MetricChart& g, const Point& p);
Matrix ricci(const MetricChart& g, const Point& p);
double scalar_curvature(const MetricChart& g, const Point& p);
Matrix hessian(const MetricChart& g, const ScalarField& f, const Point& p);
Vector gradient(const MetricChart& g, const ScalarField& f, const Point& p);
double grad_norm_sq(const MetricChart& g, const ScalarField& f, const Point& p);
double laplacian(const MetricChart& g, const ScalarField& f, const Point& p);

/// g / tau^2. Throws DegenerateConformalFactor at evaluation where tau = 0.
MetricChart conformal_metric(const MetricChart& g, const ScalarField& tau);

/// Max-norm difference between the Hessian of f for g/tau^2 computed directly
/// and via the conformal-change formula
///   hess_hat f = hess f + tau^-1 (2 dtau (.) df - g(grad tau, grad f) g).
double conformal_hessian_check(const MetricChart& g, const ScalarField& tau,
                               const ScalarField& f, const Point& p);

/// tau given as a profile of a soliton function f.
struct ProfileOfField {
  ScalarField f;
  Profile1D tau_of_f;
};

struct ConformalRicciResidual {
  double general = 0.0;                  // direct vs the tau-form of the identity
  std::optional<double> profile_form;    // direct vs the tau(f)-form, when requested
};

/// Compares the Ricci tensor of g/tau^2 computed directly with
///   Ric + (n-2) tau^-1 hess tau + [tau^-1 lap tau - (n-1) tau^-2 |grad tau|^2] g
/// and, when tau = h(f) is supplied, with hess tau expanded as
///   h' hess f + h'' df (x) df.
ConformalRicciResidual conformal_ricci_check(const MetricChart& g, const ScalarField& tau,
                                             const Point& p);
ConformalRicciResidual conformal_ricci_check(const MetricChart& g, const ProfileOfField& tau,
                                             const Point& p);

double max_abs(const Matrix& m);
/// max |A - A^T| relative to max |A| (absolute when A vanishes).
double asymmetry(const Matrix& m);

}  // namespace soliton_lab
