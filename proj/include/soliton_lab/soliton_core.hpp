#pragma once

// Almost-soliton verification on a chart, the duality (g, f) -> (e^{-4f/(n-2)} g, -f),
// Hamilton's first integral, the comparison involution (g, f) -> (f^-2 g, 1/f),
// and the ODE residuals that single out the duality among conformal maps
// depending on f alone.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "soliton_lab/chart_tensor.hpp"

namespace soliton_lab {

/// (g, f): a metric with a candidate soliton function.
struct SolitonPair {
  MetricChart metric;
  ScalarField f;
  std::string name;

  int dim() const { return metric.dim(); }
};

struct CoefficientSample {
  double coefficient = 0.0;  // c = tr_g(Ric + hess f) / n
  double residual = 0.0;     // |Ric + hess f - c g|_g
};

/// Pointwise coefficient of Ric + hess f = c g and the failure of that equation.
CoefficientSample extract_coefficient(const SolitonPair& pair, const Point& p);

/// Relative spread of a sampled field: (max - min) / (1 + max |v|).
double relative_variation(const std::vector<double>& values);

struct ResidualReport {
  std::vector<Point> points;
  std::vector<double> coefficients;
  std::vector<double> residuals;
  std::vector<double> grad_norm_sq;
  double max_residual = 0.0;
  double coefficient_variation = 0.0;
  double max_grad_norm_sq = 0.0;
};

ResidualReport residual_report(const SolitonPair& pair, const std::vector<Point>& sample);

enum class SolitonClass { trivial, gradient_ricci_soliton, almost_soliton, none };
std::string to_string(SolitonClass c);

struct ClassifyTolerances {
  double residual = 1e-6;     // almost-soliton equation residual
  double coefficient = 1e-6;  // relative variation below which c is constant
  double gradient = 1e-20;    // |grad f|^2 below which f is constant
};

SolitonClass classify(const ResidualReport& report, const ClassifyTolerances& tol = {});
/// Throws EmptySample for an empty sample.
SolitonClass classify(const SolitonPair& pair, const std::vector<Point>& sample,
                      const ClassifyTolerances& tol = {});

/// (e^{-4f/(n-2)} g, -f). Throws DimensionTooSmall for n <= 2.
SolitonPair dualize(const SolitonPair& pair);

enum class DualCoefficientMethod { direct, closed };

/// Metric coefficient of the dual pair at p, either assembled from
/// tau = e^{2f/(n-2)} as tau^2 (c + beta + delta) or from the closed form
/// e^{4f/(n-2)} (c + 2/(n-2) (lap f - |grad f|^2)).
/// Throws NotASoliton when the almost-soliton residual at p exceeds `max_residual`.
double dual_coefficient(const SolitonPair& pair, const Point& p, DualCoefficientMethod method,
                        double max_residual = 1e-6);

/// lap f - |grad f|^2 + 2 c f; constant over the chart for a genuine soliton.
double hamilton_invariant(const SolitonPair& pair, double c, const Point& p);

/// -R - |grad f|^2.
double steady_obstruction(const SolitonPair& pair, const Point& p);

/// (f^-2 g, 1/f). Throws ZeroCrossing when f is found to vanish on the domain
/// (sign changes on a dense low-discrepancy sample and the box corners, and
/// tangential zeros by Newton refinement toward a critical point).
SolitonPair old_dualize(const SolitonPair& pair, int probe_points = 4096);

struct RicciHessianFit {
  double alpha = 0.0;
  double coefficient = 0.0;
  double residual = 0.0;
  /// hess f numerically proportional to g: alpha is unidentifiable, reported as 0.
  bool ill_conditioned = false;
};

/// Pointwise least squares for Ric + alpha hess f = c g in (alpha, c).
RicciHessianFit ricci_hessian_fit(const SolitonPair& pair, const Point& p);

/// A pair of one-variable functions (tau(f), k(f)) with two derivatives each.
struct ProfilePair {
  Profile1D tau;
  Profile1D k;
};

struct UniquenessResiduals {
  double r1 = 0.0;  // coefficient of hess f
  double r2 = 0.0;  // coefficient of df (x) df
};

/// R1 = (n-2) tau'/tau + k' - 1,  R2 = (n-2) tau''/tau + k'' + 2 (tau'/tau) k'.
/// Throws DomainError when tau(f) <= 0.
UniquenessResiduals uniqueness_residuals(const ProfilePair& profile, int n, double f);

/// (n-2) tau''/tau + 2 tau'/tau; vanishes identically iff tau = C e^{-2f/(n-2)}.
double nonhermitian_coefficient(const Profile1D& tau, int n, double f);

/// C e^{rate f} and a + b f as profiles.
Profile1D exponential_profile(double rate, double scale = 1.0);
Profile1D affine_profile(double intercept, double slope);

}  // namespace soliton_lab
