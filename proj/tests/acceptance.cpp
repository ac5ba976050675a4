// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "soliton_lab/cli.hpp"
#include "soliton_lab/errors.hpp"
#include "soliton_lab/fixtures.hpp"
#include "support.hpp"

namespace sl = soliton_lab;
using namespace soliton_lab::testing;

namespace {

/// Worst measured value against its bound; `above` flips the comparison.
struct Measure {
  std::string what;
  double value = 0.0;
  double bound = 0.0;
  bool above = false;

  bool ok() const { return above ? value > bound : value < bound; }
};

struct Outcome {
  std::vector<Measure> measures;
  std::vector<std::pair<std::string, bool>> facts;

  Measure& track(const std::string& what, double bound, bool above = false) {
    for (auto& m : measures)
      if (m.what == what) return m;
    measures.push_back(Measure{what, above ? std::numeric_limits<double>::infinity() : 0.0, bound, above});
    return measures.back();
  }
  void worst(const std::string& what, double v, double bound) {
    Measure& m = track(what, bound);
    m.value = std::max(m.value, std::isnan(v) ? std::numeric_limits<double>::infinity() : v);
  }
  void least(const std::string& what, double v, double bound) {
    Measure& m = track(what, bound, true);
    m.value = std::min(m.value, std::isnan(v) ? -std::numeric_limits<double>::infinity() : v);
  }
  void fact(const std::string& what, bool holds) { facts.emplace_back(what, holds); }

  bool ok() const {
    return std::all_of(measures.begin(), measures.end(), [](const Measure& m) { return m.ok(); }) &&
           std::all_of(facts.begin(), facts.end(), [](const auto& f) { return f.second; });
  }
};

std::vector<sl::Point> sample(const sl::Box& box, int count) { return sl::sample_points(box, count, kSeed); }

Outcome conformal_identities() {
  Outcome o;
  for (const auto& fx : conformal_fixtures()) {
    for (const auto& p : sample(fx.g.domain(), 100)) {
      o.worst("hessian identity", sl::conformal_hessian_check(fx.g, fx.tau, fx.f, p), 1e-9);
      o.worst("ricci identity", sl::conformal_ricci_check(fx.g, fx.tau, p).general, 1e-9);
      const auto prof = sl::conformal_ricci_check(fx.g, fx.tau_of_f, p);
      o.worst("ricci identity, tau(f)", prof.profile_form.value_or(kInf), 1e-9);
    }
  }
  return o;
}

const std::vector<std::string> kDualityFixtures{"gaussian-soliton", "gaussian-soliton-n4", "gaussian-soliton-n5",
                                                "sphere-trivial", "koiso-m2-A1B0", "koiso-m2-compact"};

Outcome duality() {
  Outcome o;
  for (const auto& name : kDualityFixtures) {
    const auto pair = sl::fixtures::pair(name);
    const auto dual = sl::dualize(pair);
    const auto pts = sample(pair.metric.domain(), 60);
    o.worst("dual almost-soliton residual", sl::residual_report(dual, pts).max_residual, 1e-8);
    const auto twice = sl::dualize(dual);
    for (const auto& p : pts) {
      const double scale = sl::max_abs(metric_values(pair.metric, p));
      o.worst("involution round trip", max_component_diff(pair.metric, twice.metric, p) / scale, 1e-12);
      o.worst("involution round trip", rel_err(twice.f.value(p), pair.f.value(p)), 1e-12);
    }
  }
  return o;
}

Outcome coefficient_agreement() {
  Outcome o;
  for (const auto& name : kDualityFixtures) {
    const auto pair = sl::fixtures::pair(name);
    const auto dual = sl::dualize(pair);
    for (const auto& p : sample(pair.metric.domain(), 40)) {
      const double d = sl::dual_coefficient(pair, p, sl::DualCoefficientMethod::direct);
      const double c = sl::dual_coefficient(pair, p, sl::DualCoefficientMethod::closed);
      const double e = sl::extract_coefficient(dual, p).coefficient;
      o.worst("direct vs closed form", std::abs(d - c) / std::max(1.0, std::abs(c)), 1e-9);
      o.worst("closed form vs extracted", std::abs(e - c) / std::max(1.0, std::abs(c)), 1e-8);
    }
  }
  const auto gauss = sl::fixtures::pair("gaussian-soliton");
  const double at_origin = sl::dual_coefficient(gauss, sl::Point::Zero(3), sl::DualCoefficientMethod::closed);
  o.worst("dual coefficient at origin - 7", std::abs(at_origin - 7.0), 1e-12);
  return o;
}

Outcome hamilton() {
  Outcome o;
  for (const auto& name : kDualityFixtures) {
    const auto pair = sl::fixtures::pair(name);
    const auto pts = sample(pair.metric.domain(), 100);
    const double c = sl::extract_coefficient(pair, pts[0]).coefficient;
    std::vector<double> k;
    for (const auto& p : pts) k.push_back(sl::hamilton_invariant(pair, c, p));
    o.worst("invariant variation on solitons", sl::relative_variation(k), 1e-9);
  }
  const auto gauss = sl::fixtures::pair("gaussian-soliton");
  for (const auto& p : sample(gauss.metric.domain(), 100)) {
    o.worst("gaussian invariant - 3", std::abs(sl::hamilton_invariant(gauss, 1.0, p) - 3.0), 1e-12);
  }
  const auto dual = sl::dualize(gauss);
  std::vector<double> k;
  for (const auto& p : sample(dual.metric.domain(), 100)) {
    k.push_back(sl::hamilton_invariant(dual, sl::extract_coefficient(dual, p).coefficient, p));
  }
  o.least("invariant variation on gaussian dual", sl::relative_variation(k), 0.1);
  return o;
}

Outcome uniqueness() {
  Outcome o;
  for (int n = 3; n <= 6; ++n) {
    const auto prof = canonical_profile(n);
    for (double f = -2.0; f <= 2.0 + 1e-12; f += 0.01) {
      const auto r = sl::uniqueness_residuals(prof, n, f);
      o.worst("canonical residual", std::max(std::abs(r.r1), std::abs(r.r2)), 1e-12);
    }
  }
  std::mt19937_64 rng(kSeed);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 4;
    const auto prof = perturbed_profile(n, rng);
    double worst = 0.0;
    for (double f = -2.0; f <= 2.0 + 1e-12; f += 0.01) {
      const auto r = sl::uniqueness_residuals(prof, n, f);
      worst = std::max({worst, std::abs(r.r1), std::abs(r.r2)});
    }
    o.least("weakest violation over 50 perturbations", worst, 1e-3);
  }
  return o;
}

std::vector<sl::SkrpParams> profile_cases() {
  std::vector<sl::SkrpParams> out = profile_sweep();
  for (const auto& name : sl::fixtures::skrp_names()) out.push_back(sl::fixtures::skrp(name));
  return out;
}

Outcome skrp_profile() {
  Outcome o;
  for (const auto& p : profile_cases()) {
    for (const auto& comp : sl::q_domain(p)) {
      const sl::Interval w = finite_window(comp, p.c);
      const int branch = comp.branch(p.c);
      const auto fs = grid(w, 200);
      for (double f : fs) {
        const auto d = sl::phi_closed(p, f, branch);
        o.worst("profile equation residual", std::abs(sl::mek_residual(p, 1.0, f, d)) / sl::mek_term_scale(p, 1.0, f, d),
                1e-10);
      }
      const double f0 = 0.5 * (w.lo + w.hi);
      const auto d0 = sl::phi_closed(p, f0, branch);
      for (double f : grid(w, 9)) {
        const auto s = sl::phi_ode_integrate(p, 1.0, f0, d0.value, d0.first, f);
        const double want = sl::phi_closed(p, f, branch).value;
        o.worst("ODE oracle vs closed form", std::abs(s.phi - want) / std::abs(want), 1e-6);
      }
      auto variation = [&](double alpha) {
        std::vector<double> v;
        for (double f : fs) v.push_back(sl::soliton_coeff_profile(p, alpha, f));
        return sl::relative_variation(v);
      };
      o.worst("coefficient variation at alpha = 1", variation(1.0), 1e-8);
      if (p.A != 0.0 || p.B != 0.0) o.least("coefficient variation at alpha = 1.1", variation(1.1), 1e-3);
    }
  }
  return o;
}

Outcome calabi() {
  Outcome o;
  for (const auto& name : sl::fixtures::skrp_names()) {
    const auto chart = sl::fixtures::calabi(name);
    const auto pair = chart.pair();
    const sl::Matrix& J = chart.complex_structure;
    for (const auto& p : sample(chart.metric.domain(), 200)) {
      o.worst("hermitian", sl::hermitian_residual(chart.metric, J, p), 1e-10);
      o.worst("kahler closedness", sl::kahler_closedness_residual(chart.metric, J, p), 1e-8);
      o.worst("soliton residual", sl::extract_coefficient(pair, p).residual, 1e-6);
      o.worst("killing", sl::killing_residual(chart, p), 1e-6);
      o.worst("|fitted alpha - 1|", std::abs(sl::ricci_hessian_fit(pair, p).alpha - 1.0), 1e-5);
    }
  }
  return o;
}

sl::ArcProfile synthetic(sl::Profile1D q) {
  return sl::synthetic_arc_profile("synthetic", 4, std::move(q), sl::Interval{0.5, 1.5});
}

Outcome trichotomy() {
  Outcome o;
  // simple and double zeros at a = 0.5
  const auto simple = synthetic([](double f) { return sl::Derivs{f - 0.5, 1.0, 0.0}; });
  const auto dbl = synthetic([](double f) { return sl::Derivs{(f - 0.5) * (f - 0.5), 2.0 * (f - 0.5), 2.0}; });
  const auto se = sl::classify_endpoint(simple, sl::EndSide::lower);
  o.fact("simple zero: finite integral", sl::converged(se.evidence));
  o.fact("simple zero: smooth cap", se.cls == sl::EndClass::smooth_cap);
  o.worst("simple zero: |exponent + 0.5|", se.fit ? std::abs(se.fit->slope + 0.5) : kInf, 0.05);
  const auto de = sl::classify_endpoint(dbl, sl::EndSide::lower);
  o.fact("double zero: divergence detected", !sl::converged(de.evidence));
  o.fact("double zero: infinite end", de.cls == sl::EndClass::infinite_end);

  const auto params = sl::fixtures::skrp("koiso-m2-A0B1");
  const auto tail = sl::infinite_range_test(params);
  o.fact("m = 2, B != 0: tail converges", sl::converged(tail.evidence));
  o.fact("m = 2, B != 0: verdict incomplete",
         sl::completeness_verdict(params).overall == sl::Overall::incomplete);
  o.fact("both ends divergent: verdict complete",
         sl::completeness_verdict(sl::fixtures::arc("synthetic-double-zero")).overall == sl::Overall::complete);
  return o;
}

Outcome flow_reduction() {
  Outcome o;
  for (const auto& name : sl::fixtures::skrp_names()) {
    const auto chart = sl::fixtures::calabi(name);
    const sl::Box& box = chart.metric.domain();
    const double t_lo = std::log(box.lower[2]), span = std::log(box.upper[2]) - t_lo;
    const double f1 = chart.ell->f_of_log_ell(t_lo + 0.1 * span);
    const double f2 = chart.ell->f_of_log_ell(t_lo + 0.9 * span);
    o.worst("flow length vs reduced integral",
            sl::gradient_flow_length_crosscheck(chart, f1, f2).relative_error, 1e-6);
  }
  return o;
}

std::string cli_json(const std::vector<std::string>& args) {
  std::vector<std::string> storage{"soliton-lab"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  std::ostringstream out, err;
  sl::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

Outcome determinism() {
  Outcome o;
  const std::vector<std::vector<std::string>> runs{
      {"verify", "--fixture", "gaussian-soliton"},
      {"dualize", "--fixture", "koiso-m2-A1B0", "--samples", "40"},
      {"skrp", "--fixture", "koiso-m2-compact"},
      {"completeness", "--fixture", "koiso-m2-A0B1"},
  };
  for (const auto& args : runs) {
    const std::string a = cli_json(args), b = cli_json(args);
    o.fact(args[0] + " " + args[2] + ": byte-identical", !a.empty() && a == b);
  }
  return o;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "conformal Hessian and Ricci identities", conformal_identities},
      {2, "dual of a soliton is an almost soliton; involution", duality},
      {3, "dual coefficient forms agree", coefficient_agreement},
      {4, "Hamilton invariant", hamilton},
      {5, "uniqueness of the conformal profile", uniqueness},
      {6, "SKRP profile equation, ODE oracle, coefficient constancy", skrp_profile},
      {7, "Calabi assembly at m = 2", calabi},
      {8, "completeness trichotomy", trichotomy},
      {9, "gradient-flow length equals the reduced integral", flow_reduction},
      {10, "deterministic JSON reports", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      const Outcome o = c.run();
      ok = o.ok();
      for (const auto& m : o.measures) {
        detail += "\n    " + std::string(m.ok() ? "ok   " : "FAIL ") + m.what + ": " + fmt(m.value) +
                  (m.above ? " > " : " < ") + fmt(m.bound);
      }
      for (const auto& [what, holds] : o.facts) detail += "\n    " + std::string(holds ? "ok   " : "FAIL ") + what;
    } catch (const std::exception& e) {
      detail = std::string("\n    error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!ok) ++failures;
    std::printf("%s criterion %d: %s (%.1f s)%s\n", ok ? "PASS" : "FAIL", c.id, c.title, secs, detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
