#pragma once

// Completeness of the dual metric along gradient-flow curves: the arc-length
// integrand e^{-2f/(n-2)} / sqrt(Q), improper-integral tests at the ends of a
// Q-positive interval, and the endpoint case analysis that combines them.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "soliton_lab/skrp_family.hpp"

namespace soliton_lab {

/// A one-variable reduction: Q(f) > 0 on an open interval, in real dimension n.
struct ArcProfile {
  std::string name;
  int n = 4;
  double c = 0.0;  // centre of the u = 1 / (f - c) substitution at infinite ends
  Interval interval;
  std::function<Derivs(double)> q;
  /// Optional overflow-safe log Q; defaults to log(q(f).value).
  std::function<double(double)> log_q;
  std::optional<SkrpParams> skrp;
};

ArcProfile synthetic_arc_profile(std::string name, int n, Profile1D q, Interval interval,
                                 double c = 0.0);
/// The reduction of an SKRP pair on one of its Q-positive components.
ArcProfile skrp_arc_profile(const SkrpParams& params, const QInterval& component);

/// e^{-2f/(n-2)} / sqrt(Q(f)). Throws NonpositiveQ when Q(f) <= 0.
double arc_integrand(const ArcProfile& profile, double f);
double log_arc_integrand(const ArcProfile& profile, double f);
/// SKRP form with n = 2m; the branch at f = c follows the sign of f - c.
double arc_integrand(const SkrpParams& params, double f);

struct Converged {
  double value = 0.0;
  double error = 0.0;
};
struct Diverges {
  /// -log10 of the late increment ratio: 0 for logarithmic growth, -p for eps^-p.
  double rate = 0.0;
  bool overflow = false;
};
using IntegralResult = std::variant<Converged, Diverges>;

inline bool converged(const IntegralResult& r) { return std::holds_alternative<Converged>(r); }

struct LadderSettings {
  int first_rung = 2;    // eps_k = 10^-k min(1, b - a)
  int last_rung = 10;
  int window = 3;        // trailing increment ratios inspected
  double slack = 1e-3;   // ratio >= 1 - slack counts as non-decreasing
};

/// int_0^d h(x) dx for h possibly singular at x = 0. Divergence is decided on the
/// geometric ladder of truncations; convergent values come from tanh-sinh
/// quadrature after x = t^2. Throws OscillationDetected on negative increments.
IntegralResult improper_integral_offset(const std::function<double(double)>& h, double d,
                                        const LadderSettings& ladder = {});
/// int_a^b integrand(f) df, singular at most at a.
IntegralResult improper_integral(const std::function<double(double)>& integrand, double a, double b,
                                 const LadderSettings& ladder = {});

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of the log-log fit
  double ci_low = 0.0;    // 95% interval for the slope
  double ci_high = 0.0;
};

/// Least-squares slope of log integrand(a + direction x) against log x on a
/// geometric grid x in [1e-8, 1e-3].
ExponentFit exponent_fit(const std::function<double(double)>& integrand, double a,
                         int direction = 1);

enum class EndSide { lower, upper };
enum class EndClass {
  smooth_cap,
  infinite_end,
  infinite_range_convergent,
  infinite_range_divergent,
  interior
};
std::string to_string(EndSide s);
std::string to_string(EndClass c);

struct EndpointAnalysis {
  EndSide side = EndSide::lower;
  double endpoint = 0.0;  // may be +-inf
  EndClass cls = EndClass::interior;
  double q_value = 0.0;
  double dq_value = 0.0;
  double tolerance = 0.0;
  /// |Q'(a)| within a factor 10 of the tolerance: the class is reported but not trusted.
  bool ambiguous = false;
  /// Class agrees with the integral evidence and the exponent fit.
  bool consistent = true;
  IntegralResult evidence = Converged{};
  std::optional<ExponentFit> fit;
  /// integrand / stated asymptote at u = 1e-2, 1e-3, 1e-4 (B != 0 upper tails).
  std::vector<double> asymptote_ratios;
};

/// Finite end: Q(a), Q'(a) against tol = 1e-9 max|Q| on the interval, corroborated
/// by improper_integral and exponent_fit. Infinite ends are delegated to
/// infinite_range_test.
EndpointAnalysis classify_endpoint(const ArcProfile& profile, EndSide side);

/// Infinite end: the tail integral in u = 1 / (f - c) over (0, u1].
EndpointAnalysis infinite_range_test(const ArcProfile& profile, EndSide side);
/// Upper end of the anchor component of an SKRP family; requires sup = +inf.
EndpointAnalysis infinite_range_test(const SkrpParams& params);

/// int_{f1}^{F} integrand df rewritten in u = 1 / (f - c); requires c < f1 < F.
double u_form_integral(const ArcProfile& profile, double f1, double F);
/// The same integral by direct quadrature in f.
double direct_integral(const ArcProfile& profile, double f1, double F);

enum class Overall { complete, incomplete, complete_compact_extension, inconclusive_at_end };
std::string to_string(Overall o);

struct CompletenessVerdict {
  EndpointAnalysis lower;
  EndpointAnalysis upper;
  Overall overall = Overall::inconclusive_at_end;
};

/// Any convergent infinite tail: incomplete. Otherwise any interior, ambiguous
/// or inconsistent end: inconclusive-at-end. Two smooth caps: compact
/// extension. Remaining combinations of smooth caps and divergent ends: complete.
Overall combine(const EndpointAnalysis& lower, const EndpointAnalysis& upper);
CompletenessVerdict completeness_verdict(const ArcProfile& profile);
/// Uses the Q-positive component containing the default anchor.
CompletenessVerdict completeness_verdict(const SkrpParams& params);

struct FlowLength {
  double flow_length = 0.0;     // dual-metric length of the integrated curve
  double reduced_length = 0.0;  // |int_{f1}^{f2} arc_integrand df|
  double relative_error = 0.0;
};

/// Integrates dx/df = grad f / |grad f|^2 inside the assembled chart from the
/// point z = 0, w = l(f1) and accumulates the dual-metric length up to f2.
/// Throws DomainExit when the curve leaves the chart box.
FlowLength gradient_flow_length_crosscheck(const CalabiChart& chart, double f1, double f2);

}  // namespace soliton_lab
