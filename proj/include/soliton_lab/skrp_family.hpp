#pragma once

// Gradient Kahler-Ricci solitons with a special Kahler-Ricci potential
// (Koiso-Cao type): the closed-form profile phi(f), its ODE, Q(f) = 2 f_c phi(f),
// the fiber-norm map l(f), and the explicit Calabi-ansatz 4-metric over the
// affine chart of CP^1 with the line bundle metric (1 + |z|^2)^s.

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "soliton_lab/chart_tensor.hpp"
#include "soliton_lab/soliton_core.hpp"

namespace soliton_lab {

/// Open interval of f values; either end may be infinite.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double f) const { return f > lo && f < hi; }
  bool finite() const;
  double width() const { return hi - lo; }
};

struct SkrpParams {
  int m = 2;           // complex dimension of the total space
  double kappa = 0.0;  // Einstein constant of the base metric h
  double c = 0.0;      // shift, f_c = f - c
  double A = 1.0;
  double B = 0.0;
  Interval interval;   // f values of interest
  int s = 1;           // line bundle power, h_L = (1 + |z|^2)^s
  double a = 1.0;      // (a / Q) df = d log l
  double p = 1.0;      // vertical block Q / (p l)^2
  std::optional<double> anchor;  // f0 with l(f0) = 1

  int real_dim() const { return 2 * m; }
  /// Throws DomainError for m < 2, s < 1, a = 0, p = 0 or an empty interval.
  void validate() const;
};

/// phi, phi', phi'' of the closed-form profile
///   f_c^-m (A sum_{k<=m} f_c^k / k! + B e^{f_c}) + sgn(f_c) kappa / (2m).
/// At f = c (only regular when A + B = 0) `branch` (+1 or -1) selects the
/// one-sided limit of the constant term. Throws PoleError at f = c otherwise.
Derivs phi_closed(const SkrpParams& params, double f, int branch = 0);

/// f_c^2 phi'' + f_c (m - f_c alpha) phi' - m phi + sgn(phi) kappa / 2 for an
/// arbitrary profile value.
double mek_residual(const SkrpParams& params, double alpha, double f, const Derivs& phi);
/// Sum of the magnitudes of the residual's terms, floored at 1; divides the
/// residual where the pole part of phi is large.
double mek_term_scale(const SkrpParams& params, double alpha, double f, const Derivs& phi);
/// The same residual for the closed-form profile.
double phi_ode_residual(const SkrpParams& params, double alpha, double f);

struct PhiState {
  double phi = 0.0;
  double dphi = 0.0;
};

/// Integrates the profile ODE from (f0, phi0, dphi0) to f with an adaptive
/// Dormand-Prince scheme. Throws IntegrationFailure near poles or on step
/// exhaustion.
PhiState phi_ode_integrate(const SkrpParams& params, double alpha, double f0, double phi0,
                           double dphi0, double f, double tolerance = 1e-13);

/// alpha phi + (alpha f_c - (m+1)) phi' - f_c phi''.
double soliton_coeff_profile(const SkrpParams& params, double alpha, double f);

/// Q = 2 f_c phi with Q' and Q''.
Derivs q_profile(const SkrpParams& params, double f, int branch = 0);

enum class EndKind { pole, zero_of_fc, zero_of_phi, interval_bound, infinite };
std::string to_string(EndKind k);

/// Maximal open sub-interval of the parameter interval on which Q > 0.
struct QInterval {
  double lo = 0.0;
  double hi = 0.0;
  EndKind lo_kind = EndKind::interval_bound;
  EndKind hi_kind = EndKind::interval_bound;

  bool contains(double f) const { return f > lo && f < hi; }
  /// Side of f = c the interval lies on (+1 or -1).
  int branch(double c) const { return lo >= c ? 1 : -1; }
};

/// Q-positive components, found by bracketing sign changes of phi and f_c.
/// Pole ends are pulled in by 1e-6 |I| (or 1e-6 max(1, |c|) for infinite I).
std::vector<QInterval> q_domain(const SkrpParams& params);

/// The component containing f, if any.
std::optional<QInterval> q_component(const SkrpParams& params, double f);

/// Default anchor: params.anchor, else an interior point of the first component.
double default_anchor(const SkrpParams& params);

/// log l(f) = int_{f0}^f a / Q, tabulated once and inverted by safeguarded
/// Newton iteration on exact quadrature.
class EllMap {
 public:
  EllMap(SkrpParams params, double f0, int table_size = 257);

  double anchor() const { return f0_; }
  const QInterval& component() const { return component_; }
  double log_ell(double f) const;
  double ell(double f) const;
  /// Inverse of log_ell. Throws DomainError outside the attainable range.
  double f_of_log_ell(double t) const;
  double f_of_ell(double ell) const;
  double q(double f) const;
  double dq(double f) const;
  double a() const { return params_.a; }

 private:
  double integrate(double from, double to) const;

  SkrpParams params_;
  double f0_;
  int branch_;
  QInterval component_;
  std::vector<double> f_nodes_;
  std::vector<double> t_nodes_;
};

EllMap ell_map(const SkrpParams& params, double f0);

/// lambda_h delta / (1 + |z|^2)^2 on a box around the origin of the affine
/// chart of CP^1; its Ricci tensor is (4 / lambda_h) h.
MetricChart fubini_study_base(double lambda_h, double half_width = 0.8);

struct CalibrationCandidate {
  double ratio = 0.0;  // a lambda_h / s
  double closedness = 0.0;
};

struct Calibration {
  double lambda_h = 0.0;
  double base_einstein_constant = 0.0;  // measured from ricci(h) = kappa h
  double ratio = 0.0;
  double a = 0.0;
  double p = 0.0;
  double closedness = 0.0;
  std::vector<CalibrationCandidate> sweep;
};

struct ChartWindow {
  /// Half-width of the f range covered by the chart, as a fraction of the
  /// distance from the anchor to the nearest component end (capped at 0.5).
  double fraction = 0.3;
};

/// Real chart (x1, y1, x2, y2) with z = x1 + i y1 on CP^1 and fiber coordinate
/// w = x2 + i y2, carrying the assembled metric, f(l(z, w)), and J.
struct CalabiChart {
  SkrpParams params;  // with calibrated a, p
  Calibration calibration;
  std::shared_ptr<const EllMap> ell;
  MetricChart metric;
  ScalarField f;
  Matrix complex_structure;
  Interval f_window;

  SolitonPair pair() const { return SolitonPair{metric, f, "skrp-calabi"}; }
};

/// Assembles the m = 2 Calabi-ansatz metric
///   g|_H = 2 |f_c| pi^* h,  g|_V = Q(f) / (p l)^2 Re<.,.>,
/// calibrating a, p by a sweep over a lambda_h / s in {+-1/2, +-1, +-2} that
/// minimises the Kahler-form closedness residual.
/// Throws CalibrationFailure when no candidate closes the Kahler form.
CalabiChart assemble_calabi_metric(const SkrpParams& params, const ChartWindow& window = {});

/// Same chart with the conformal factor e^{-4f/(n-2)} inserted block by block.
MetricChart dual_metric_direct(const CalabiChart& chart);

/// max |g(J., J.) - g|.
double hermitian_residual(const MetricChart& g, const Matrix& J, const Point& p);
/// max |d omega| for omega(X, Y) = g(JX, Y).
double kahler_closedness_residual(const MetricChart& g, const Matrix& J, const Point& p);
/// max |hess f(J., J.) - hess f|.
double hermitian_hessian_residual(const MetricChart& g, const ScalarField& f, const Matrix& J,
                                  const Point& p);
/// max |L_u g| for u = J grad f.
double killing_residual(const MetricChart& g, const ScalarField& f, const Matrix& J,
                        const Point& p);

double hermitian_hessian_residual(const CalabiChart& chart, const Point& p);
double killing_residual(const CalabiChart& chart, const Point& p);

/// Standard complex structure on R^{2k}: J d/dx = d/dy in each (x, y) pair.
Matrix standard_complex_structure(int real_dim);

}  // namespace soliton_lab
