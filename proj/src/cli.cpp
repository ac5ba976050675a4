#include "soliton_lab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "soliton_lab/completeness.hpp"
#include "soliton_lab/errors.hpp"
#include "soliton_lab/fixtures.hpp"
#include "soliton_lab/soliton_core.hpp"

#ifndef SOLITON_LAB_VERSION
#define SOLITON_LAB_VERSION "0.0.0-unknown"
#endif

namespace soliton_lab::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double read_number(const Json& v) {
  if (v.is_null()) return kNaN;
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
    if (s == "-inf" || s == "-infinity") return -kInf;
  }
  throw ConfigError("expected a number, got " + v.dump());
}

Json interval_json(double lo, double hi) {
  auto end = [](double v) -> Json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  return Json::array({end(lo), end(hi)});
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

CheckRecord check_below(std::string name, double measured, double tolerance) {
  return CheckRecord{std::move(name), measured < tolerance ? "pass" : "fail", measured, tolerance};
}

class Stopwatch {
 public:
  explicit Stopwatch(std::map<std::string, double>& sink, std::string key)
      : sink_(sink), key_(std::move(key)), start_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    sink_[key_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::map<std::string, double>& sink_;
  std::string key_;
  std::chrono::steady_clock::time_point start_;
};

struct Subject {
  SolitonPair pair;
  std::optional<CalabiChart> chart;
};

Subject resolve_pair(const RunConfig& config) {
  if (config.params) {
    CalabiChart chart = assemble_calabi_metric(*config.params);
    SolitonPair p = chart.pair();
    return Subject{p, chart};
  }
  if (!config.fixture) throw ConfigError("either --fixture or a config with parameters is required");
  const std::string& name = *config.fixture;
  if (fixtures::is_skrp(name)) {
    CalabiChart chart = fixtures::calabi(name);
    SolitonPair p = chart.pair();
    p.name = name;
    return Subject{p, chart};
  }
  return Subject{fixtures::pair(name), std::nullopt};
}

SkrpParams resolve_params(const RunConfig& config) {
  if (config.params) return *config.params;
  if (!config.fixture) throw ConfigError("either --fixture or a config with parameters is required");
  return fixtures::skrp(*config.fixture);
}

ArcProfile resolve_arc(const RunConfig& config) {
  if (config.params) {
    const SkrpParams& p = *config.params;
    const auto comp = q_component(p, default_anchor(p));
    if (!comp) throw DomainSplit("anchor is not inside a Q-positive interval");
    return skrp_arc_profile(p, *comp);
  }
  if (!config.fixture) throw ConfigError("either --fixture or a config with parameters is required");
  return fixtures::arc(*config.fixture);
}

Json report_summary(const ResidualReport& r, SolitonClass cls) {
  double mean = 0.0;
  for (double c : r.coefficients) mean += c;
  if (!r.coefficients.empty()) mean /= static_cast<double>(r.coefficients.size());
  Json j = Json::object();
  j["classification"] = to_string(cls);
  j["points"] = r.points.size();
  j["max_residual"] = num(r.max_residual);
  j["coefficient_mean"] = num(mean);
  j["coefficient_min"] = num(r.coefficients.empty() ? kNaN : *std::min_element(r.coefficients.begin(), r.coefficients.end()));
  j["coefficient_max"] = num(r.coefficients.empty() ? kNaN : *std::max_element(r.coefficients.begin(), r.coefficients.end()));
  j["coefficient_variation"] = num(r.coefficient_variation);
  j["max_grad_norm_sq"] = num(r.max_grad_norm_sq);
  return j;
}

ClassifyTolerances tolerances(const RunConfig& config) {
  ClassifyTolerances t;
  t.residual = config.tol_residual;
  t.coefficient = config.tol_coefficient;
  return t;
}

Json calibration_json(const Calibration& c) {
  Json j = Json::object();
  j["lambda_h"] = num(c.lambda_h);
  j["base_einstein_constant"] = num(c.base_einstein_constant);
  j["ratio"] = num(c.ratio);
  j["a"] = num(c.a);
  j["p"] = num(c.p);
  j["closedness"] = num(c.closedness);
  Json sweep = Json::array();
  for (const auto& s : c.sweep) sweep.push_back(Json{{"ratio", num(s.ratio)}, {"closedness", num(s.closedness)}});
  j["sweep"] = sweep;
  return j;
}

Json evidence_json(const IntegralResult& r) {
  if (const auto* c = std::get_if<Converged>(&r)) {
    return Json{{"kind", "converged"}, {"value", num(c->value)}, {"error", num(c->error)}};
  }
  const auto& d = std::get<Diverges>(r);
  return Json{{"kind", "diverges"}, {"rate", num(d.rate)}, {"overflow", d.overflow}};
}

Json endpoint_json(const EndpointAnalysis& e) {
  Json j = Json::object();
  j["side"] = to_string(e.side);
  j["endpoint"] = std::isfinite(e.endpoint) ? Json(e.endpoint) : Json(e.endpoint > 0 ? "inf" : "-inf");
  j["class"] = to_string(e.cls);
  j["q"] = num(e.q_value);
  j["dq"] = num(e.dq_value);
  j["tolerance"] = num(e.tolerance);
  j["ambiguous"] = e.ambiguous;
  j["consistent"] = e.consistent;
  j["evidence"] = evidence_json(e.evidence);
  if (e.fit) {
    j["exponent_fit"] = Json{{"slope", num(e.fit->slope)},
                             {"ci_low", num(e.fit->ci_low)},
                             {"ci_high", num(e.fit->ci_high)},
                             {"residual", num(e.fit->residual)}};
  } else {
    j["exponent_fit"] = nullptr;
  }
  Json ratios = Json::array();
  for (double r : e.asymptote_ratios) ratios.push_back(num(r));
  j["asymptote_ratios"] = ratios;
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char* env = std::getenv("SOLITON_LAB_SEED");
  if (env == nullptr || *env == '\0') return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 0);
  if (end == env || *end != '\0') throw ConfigError("SOLITON_LAB_SEED is not an unsigned integer");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

void RunConfig::validate() const {
  if (samples < 10) throw ConfigError("sample count must be at least 10");
  if (!(tol_residual > 0.0) || !(tol_coefficient > 0.0) || !(tol_dual > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (format != "json" && format != "csv" && format != "text") {
    throw ConfigError("unknown format '" + format + "'");
  }
  if (fixture && params) throw ConfigError("give either a fixture or inline parameters, not both");
}

Json params_to_json(const SkrpParams& p) {
  Json j = Json::object();
  j["m"] = p.m;
  j["kappa"] = num(p.kappa);
  j["c"] = num(p.c);
  j["A"] = num(p.A);
  j["B"] = num(p.B);
  j["interval"] = interval_json(p.interval.lo, p.interval.hi);
  j["s"] = p.s;
  j["a"] = num(p.a);
  j["p"] = num(p.p);
  j["anchor"] = p.anchor ? num(*p.anchor) : Json(nullptr);
  return j;
}

SkrpParams params_from_json(const Json& doc, SkrpParams base) {
  if (!doc.is_object()) throw ConfigError("parameter block must be an object");
  SkrpParams p = std::move(base);
  if (doc.contains("m")) p.m = doc.at("m").get<int>();
  if (doc.contains("kappa")) p.kappa = read_number(doc.at("kappa"));
  if (doc.contains("c")) p.c = read_number(doc.at("c"));
  if (doc.contains("A")) p.A = read_number(doc.at("A"));
  if (doc.contains("B")) p.B = read_number(doc.at("B"));
  if (doc.contains("s")) p.s = doc.at("s").get<int>();
  if (doc.contains("a")) p.a = read_number(doc.at("a"));
  if (doc.contains("p")) p.p = read_number(doc.at("p"));
  if (doc.contains("anchor") && !doc.at("anchor").is_null()) p.anchor = read_number(doc.at("anchor"));
  if (doc.contains("interval")) {
    const Json& iv = doc.at("interval");
    if (!iv.is_array() || iv.size() != 2) throw ConfigError("interval must be [lo, hi]");
    const double lo = iv[0].is_null() ? -kInf : read_number(iv[0]);
    const double hi = iv[1].is_null() ? kInf : read_number(iv[1]);
    p.interval = Interval{lo, hi};
  }
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

RunConfig config_from_json(const Json& doc, RunConfig base) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  RunConfig c = std::move(base);
  try {
    if (doc.contains("command")) c.command = doc.at("command").get<std::string>();
    if (doc.contains("fixture") && !doc.at("fixture").is_null()) c.fixture = doc.at("fixture").get<std::string>();
    if (doc.contains("samples")) c.samples = doc.at("samples").get<int>();
    if (doc.contains("tol_residual")) c.tol_residual = read_number(doc.at("tol_residual"));
    if (doc.contains("tol_coefficient")) c.tol_coefficient = read_number(doc.at("tol_coefficient"));
    if (doc.contains("tol_dual")) c.tol_dual = read_number(doc.at("tol_dual"));
    if (doc.contains("format")) c.format = doc.at("format").get<std::string>();
    if (doc.contains("out") && !doc.at("out").is_null()) c.out = doc.at("out").get<std::string>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("f_min")) c.f_min = read_number(doc.at("f_min"));
    if (doc.contains("f_max")) c.f_max = read_number(doc.at("f_max"));
    static const char* kParamKeys[] = {"m", "kappa", "c", "A", "B", "interval", "s", "a", "p", "anchor"};
    bool top_level = false;
    for (const char* k : kParamKeys) top_level = top_level || doc.contains(k);
    if (doc.contains("params")) {
      c.params = params_from_json(doc.at("params"));
    } else if (top_level) {
      c.params = params_from_json(doc);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string Report::status() const {
  bool inconclusive = false;
  for (const auto& c : checks) {
    if (c.status == "fail") return "fail";
    if (c.status == "inconclusive") inconclusive = true;
  }
  return inconclusive ? "inconclusive" : "pass";
}

std::string artifact_version() { return SOLITON_LAB_VERSION; }

Report cmd_verify(const RunConfig& config) {
  Report r{config, artifact_version(), {}, Json::object(), {}, {}};
  Subject subject = [&] {
    Stopwatch sw(r.timings, "setup");
    return resolve_pair(config);
  }();
  const auto sample = sample_points(subject.pair.metric.domain(), config.samples, config.seed);

  ResidualReport report;
  {
    Stopwatch sw(r.timings, "residuals");
    report = residual_report(subject.pair, sample);
  }
  const SolitonClass cls = classify(report, tolerances(config));
  r.checks.push_back(check_below("almost-soliton-residual", report.max_residual, config.tol_residual));
  r.checks.push_back(check_below("coefficient-constancy", report.coefficient_variation, config.tol_coefficient));

  std::vector<double> k;
  double mean_c = 0.0;
  for (double c : report.coefficients) mean_c += c;
  mean_c /= static_cast<double>(report.coefficients.size());
  for (const auto& p : sample) k.push_back(hamilton_invariant(subject.pair, mean_c, p));
  r.checks.push_back(check_below("hamilton-invariant-constancy", relative_variation(k), 1e-9));

  r.data["pair"] = subject.pair.name;
  r.data["dimension"] = subject.pair.dim();
  r.data["summary"] = report_summary(report, cls);
  r.data["hamilton_invariant_mean"] = num([&] {
    double s = 0.0;
    for (double v : k) s += v;
    return s / static_cast<double>(k.size());
  }());

  if (subject.chart) {
    Stopwatch sw(r.timings, "kahler");
    const CalabiChart& chart = *subject.chart;
    double alpha_err = 0.0, herm = 0.0, closed = 0.0, killing = 0.0;
    for (const auto& p : sample) {
      alpha_err = std::max(alpha_err, std::abs(ricci_hessian_fit(subject.pair, p).alpha - 1.0));
      herm = std::max(herm, hermitian_residual(chart.metric, chart.complex_structure, p));
      closed = std::max(closed, kahler_closedness_residual(chart.metric, chart.complex_structure, p));
      killing = std::max(killing, killing_residual(chart, p));
    }
    r.checks.push_back(check_below("ricci-hessian-alpha", alpha_err, 1e-5));
    r.checks.push_back(check_below("hermitian", herm, 1e-10));
    r.checks.push_back(check_below("kahler-closedness", closed, 1e-8));
    r.checks.push_back(check_below("killing", killing, 1e-6));
    r.data["params"] = params_to_json(chart.params);
    r.data["calibration"] = calibration_json(chart.calibration);
  }
  return r;
}

Report cmd_dualize(const RunConfig& config) {
  Report r{config, artifact_version(), {}, Json::object(), {}, {}};
  Subject subject = [&] {
    Stopwatch sw(r.timings, "setup");
    return resolve_pair(config);
  }();
  const SolitonPair& pair = subject.pair;
  const auto sample = sample_points(pair.metric.domain(), config.samples, config.seed);
  r.data["pair"] = pair.name;
  r.data["dimension"] = pair.dim();

  const ResidualReport source = residual_report(pair, sample);
  r.checks.push_back(check_below("source-almost-soliton-residual", source.max_residual, config.tol_residual));
  r.data["source"] = report_summary(source, classify(source, tolerances(config)));
  if (r.checks.back().status != "pass") return r;

  Stopwatch sw(r.timings, "dual");
  const SolitonPair dual = dualize(pair);
  const ResidualReport dual_report = residual_report(dual, sample);
  const SolitonClass dual_cls = classify(dual_report, tolerances(config));
  r.checks.push_back(check_below("dual-almost-soliton-residual", dual_report.max_residual, config.tol_dual));
  r.data["dual"] = report_summary(dual_report, dual_cls);

  const SolitonPair twice = dualize(dual);
  double round_trip = 0.0, metric_change = 0.0, direct_vs_closed = 0.0, closed_vs_extracted = 0.0;
  std::vector<double> dual_k;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Point& p = sample[i];
    const Matrix g = pair.metric.evaluate(p).g;
    const Matrix g2 = twice.metric.evaluate(p).g;
    const Matrix gd = dual.metric.evaluate(p).g;
    round_trip = std::max(round_trip, max_abs(g2 - g) / std::max(1.0, max_abs(g)));
    round_trip = std::max(round_trip, std::abs(twice.f.value(p) - pair.f.value(p)));
    metric_change = std::max(metric_change, max_abs(gd - g));
    const double direct = dual_coefficient(pair, p, DualCoefficientMethod::direct, config.tol_residual);
    const double closed = dual_coefficient(pair, p, DualCoefficientMethod::closed, config.tol_residual);
    direct_vs_closed = std::max(direct_vs_closed, rel_diff(direct, closed));
    closed_vs_extracted = std::max(closed_vs_extracted, rel_diff(closed, dual_report.coefficients[i]));
    dual_k.push_back(hamilton_invariant(dual, dual_report.coefficients[i], p));
  }
  r.checks.push_back(check_below("involution-round-trip", round_trip, 1e-12));
  r.checks.push_back(check_below("dual-coefficient-direct-vs-closed", direct_vs_closed, 1e-9));
  r.checks.push_back(check_below("dual-coefficient-closed-vs-extracted", closed_vs_extracted, 1e-8));
  r.data["dual_coefficient_variation"] = num(dual_report.coefficient_variation);
  r.data["dual_hamilton_variation"] = num(relative_variation(dual_k));
  r.data["max_metric_change"] = num(metric_change);

  if (subject.chart) {
    const MetricChart direct = dual_metric_direct(*subject.chart);
    double diff = 0.0;
    for (const auto& p : sample) diff = std::max(diff, max_abs(direct.evaluate(p).g - dual.metric.evaluate(p).g));
    r.checks.push_back(check_below("dual-direct-assembly-match", diff, 1e-10));
    r.data["params"] = params_to_json(subject.chart->params);
  }
  return r;
}

Report cmd_skrp(const RunConfig& config) {
  Report r{config, artifact_version(), {}, Json::object(), {}, {}};
  const SkrpParams params = resolve_params(config);
  r.table.columns = {"f", "phi", "dphi", "Q", "ell", "integrand"};
  r.data["params"] = params_to_json(params);

  const auto comps = q_domain(params);
  Json comp_json = Json::array();
  for (const auto& q : comps) {
    comp_json.push_back(Json{{"interval", interval_json(q.lo, q.hi)},
                             {"lo_kind", to_string(q.lo_kind)},
                             {"hi_kind", to_string(q.hi_kind)}});
  }
  r.data["components"] = comp_json;
  if (comps.empty()) {
    r.checks.push_back(CheckRecord{"q-domain", "inconclusive", 0.0, 0.0});
    r.data["diagnostic"] = "Q = 2 (f - c) phi(f) is not positive anywhere on the interval";
    return r;
  }
  r.checks.push_back(CheckRecord{"q-domain", "pass", static_cast<double>(comps.size()), 0.0});

  const double anchor = default_anchor(params);
  const auto comp = q_component(params, anchor);
  if (!comp) throw DomainSplit("anchor is not inside a Q-positive interval");
  r.data["anchor"] = num(anchor);
  r.data["component"] = interval_json(comp->lo, comp->hi);
  const int branch = comp->branch(params.c);

  double lo = std::isfinite(comp->lo) ? comp->lo : anchor - 4.0;
  double hi = std::isfinite(comp->hi) ? comp->hi : anchor + 4.0;
  const double inset = 1e-3 * (hi - lo);
  if (std::isfinite(comp->lo)) lo += inset;
  if (std::isfinite(comp->hi)) hi -= inset;
  if (config.f_min) lo = *config.f_min;
  if (config.f_max) hi = *config.f_max;
  if (!(lo < hi) || !comp->contains(lo) || !comp->contains(hi)) {
    throw ConfigError("profile grid must lie inside the anchor's Q-positive interval");
  }

  Stopwatch sw(r.timings, "profile");
  const EllMap ell(params, anchor);
  const ArcProfile arc = skrp_arc_profile(params, *comp);
  const int n = config.samples;
  double mek = 0.0, q_min = kInf;
  std::vector<double> coeffs;
  for (int k = 0; k < n; ++k) {
    const double f = (lo * (n - 1 - k) + hi * k) / (n - 1);
    const Derivs phi = phi_closed(params, f, branch);
    const Derivs q = q_profile(params, f, branch);
    mek = std::max(mek, std::abs(mek_residual(params, 1.0, f, phi)) /
                            mek_term_scale(params, 1.0, f, phi));
    q_min = std::min(q_min, q.value);
    coeffs.push_back(soliton_coeff_profile(params, 1.0, f));
    r.table.rows.push_back({f, phi.value, phi.first, q.value, ell.ell(f), arc_integrand(arc, f)});
  }
  r.checks.push_back(check_below("profile-ode-residual", mek, 1e-10));
  r.checks.push_back(check_below("soliton-coefficient-constancy", relative_variation(coeffs), 1e-8));
  r.checks.push_back(CheckRecord{"q-positive", q_min > 0.0 ? "pass" : "fail", q_min, 0.0});
  r.data["soliton_coefficient"] = num(coeffs.front());

  // independent integration of the profile ODE from the anchor; targets stay
  // within kOracleReach of it, where the e^f homogeneous mode grows by at most e^8
  constexpr double kOracleReach = 8.0;
  const double o_lo = std::max(lo, anchor - kOracleReach), o_hi = std::min(hi, anchor + kOracleReach);
  const Derivs phi0 = phi_closed(params, anchor, branch);
  double ode_dev = 0.0;
  for (double target : {o_lo, 0.5 * (o_lo + anchor), 0.5 * (anchor + o_hi), o_hi}) {
    const PhiState s = phi_ode_integrate(params, 1.0, anchor, phi0.value, phi0.first, target);
    const double ref = phi_closed(params, target, branch).value;
    ode_dev = std::max(ode_dev, std::abs(s.phi - ref) / std::max(std::abs(ref), 1e-300));
  }
  r.checks.push_back(check_below("ode-oracle", ode_dev, 1e-6));

  if (params.m == 2 && params.kappa > 0.0) {
    try {
      const CalabiChart chart = assemble_calabi_metric(params);
      r.checks.push_back(check_below("kahler-closedness", chart.calibration.closedness, 1e-8));
      r.data["calibration"] = calibration_json(chart.calibration);
    } catch (const CalibrationFailure& e) {
      r.checks.push_back(CheckRecord{"calabi-assembly", "inconclusive", kNaN, 1e-8});
      r.data["calibration_diagnostic"] = e.what();
    }
  }
  return r;
}

Report cmd_completeness(const RunConfig& config) {
  Report r{config, artifact_version(), {}, Json::object(), {}, {}};
  const ArcProfile arc = resolve_arc(config);
  r.data["profile"] = arc.name;
  r.data["dimension"] = arc.n;
  r.data["interval"] = interval_json(arc.interval.lo, arc.interval.hi);

  CompletenessVerdict verdict;
  {
    Stopwatch sw(r.timings, "verdict");
    verdict = completeness_verdict(arc);
  }
  for (const EndpointAnalysis* e : {&verdict.lower, &verdict.upper}) {
    const bool trusted = e->consistent && !e->ambiguous;
    double measured = kNaN;
    if (const auto* c = std::get_if<Converged>(&e->evidence)) {
      measured = c->value;
    } else {
      measured = std::get<Diverges>(e->evidence).rate;
    }
    r.checks.push_back(CheckRecord{to_string(e->side) + "-end", trusted ? "pass" : "inconclusive",
                                   measured, e->tolerance});
  }
  r.checks.push_back(CheckRecord{"verdict",
                                 verdict.overall == Overall::inconclusive_at_end ? "inconclusive" : "pass",
                                 kNaN, kNaN});
  r.data["lower"] = endpoint_json(verdict.lower);
  r.data["upper"] = endpoint_json(verdict.upper);
  r.data["verdict"] = to_string(verdict.overall);

  if (arc.skrp && arc.skrp->m == 2 && arc.skrp->kappa > 0.0) {
    Stopwatch sw(r.timings, "flow");
    const CalabiChart chart = assemble_calabi_metric(*arc.skrp);
    // the flow runs along the x2 axis, where log ell = log x2
    const Box& box = chart.metric.domain();
    const double t_lo = std::log(box.lower[2]), span = std::log(box.upper[2]) - t_lo;
    const double f1 = chart.ell->f_of_log_ell(t_lo + 0.1 * span);
    const double f2 = chart.ell->f_of_log_ell(t_lo + 0.9 * span);
    const FlowLength fl = gradient_flow_length_crosscheck(chart, f1, f2);
    r.checks.push_back(check_below("flow-length-crosscheck", fl.relative_error, 1e-6));
    r.data["flow_length"] = Json{{"f1", num(f1)},
                                 {"f2", num(f2)},
                                 {"flow", num(fl.flow_length)},
                                 {"reduced", num(fl.reduced_length)}};
  }

  // integrand near each end, for plotting
  r.table.label_column = "side";
  r.table.columns = {"offset", "f", "integrand"};
  for (const EndpointAnalysis* e : {&verdict.lower, &verdict.upper}) {
    const int dir = e->side == EndSide::lower ? 1 : -1;
    for (int k = 0; k <= 28; ++k) {
      const double offset = std::pow(10.0, -8.0 + 0.25 * k);
      double f, value;
      if (std::isfinite(e->endpoint)) {
        f = e->endpoint + dir * offset;
      } else {
        f = arc.c - dir / offset;  // offset is u = 1 / |f - c|
      }
      if (!arc.interval.contains(f)) continue;
      try {
        value = std::exp(log_arc_integrand(arc, f));
      } catch (const NonpositiveQ&) {
        continue;
      }
      r.table.labels.push_back(to_string(e->side));
      r.table.rows.push_back({offset, f, value});
    }
  }
  return r;
}

Report run_command(const RunConfig& config) {
  config.validate();
  if (config.command == "verify") return cmd_verify(config);
  if (config.command == "dualize") return cmd_dualize(config);
  if (config.command == "skrp") return cmd_skrp(config);
  if (config.command == "completeness") return cmd_completeness(config);
  throw ConfigError("unknown command '" + config.command + "'");
}

std::string render_json(const Report& report) {
  const RunConfig& c = report.config;
  Json cfg = Json::object();
  cfg["command"] = c.command;
  cfg["fixture"] = c.fixture ? Json(*c.fixture) : Json(nullptr);
  cfg["params"] = c.params ? params_to_json(*c.params) : Json(nullptr);
  cfg["samples"] = c.samples;
  cfg["tol_residual"] = num(c.tol_residual);
  cfg["tol_coefficient"] = num(c.tol_coefficient);
  cfg["tol_dual"] = num(c.tol_dual);
  cfg["seed"] = c.seed;
  if (c.f_min) cfg["f_min"] = num(*c.f_min);
  if (c.f_max) cfg["f_max"] = num(*c.f_max);

  Json j = Json::object();
  j["tool"] = "soliton-lab";
  j["version"] = report.version;
  j["command"] = c.command;
  j["status"] = report.status();
  j["config"] = cfg;
  Json checks = Json::array();
  for (const auto& ch : report.checks) {
    checks.push_back(Json{{"name", ch.name},
                          {"status", ch.status},
                          {"measured", num(ch.measured)},
                          {"tolerance", num(ch.tolerance)}});
  }
  j["checks"] = checks;
  j["data"] = report.data;
  if (!report.table.columns.empty()) {
    Json table = Json::object();
    Json cols = Json::array();
    if (!report.table.label_column.empty()) cols.push_back(report.table.label_column);
    for (const auto& col : report.table.columns) cols.push_back(col);
    table["columns"] = cols;
    Json rows = Json::array();
    for (std::size_t i = 0; i < report.table.rows.size(); ++i) {
      Json row = Json::array();
      if (!report.table.label_column.empty()) row.push_back(report.table.labels[i]);
      for (double v : report.table.rows[i]) row.push_back(num(v));
      rows.push_back(row);
    }
    table["rows"] = rows;
    j["table"] = table;
  }
  return j.dump(2) + "\n";
}

std::string render_csv(const Report& report) {
  std::ostringstream os;
  const Table& t = report.table;
  if (!t.columns.empty()) {
    std::vector<std::string> header;
    if (!t.label_column.empty()) header.push_back(t.label_column);
    header.insert(header.end(), t.columns.begin(), t.columns.end());
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_field(header[i]);
    os << "\r\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      bool first = true;
      if (!t.label_column.empty()) {
        os << csv_field(t.labels[r]);
        first = false;
      }
      for (double v : t.rows[r]) {
        os << (first ? "" : ",") << format_double(v);
        first = false;
      }
      os << "\r\n";
    }
    return os.str();
  }
  os << "name,status,measured,tolerance\r\n";
  for (const auto& c : report.checks) {
    os << csv_field(c.name) << ',' << c.status << ',' << format_double(c.measured) << ','
       << format_double(c.tolerance) << "\r\n";
  }
  return os.str();
}

std::string render_text(const Report& report) {
  std::ostringstream os;
  const RunConfig& c = report.config;
  os << "soliton-lab " << report.version << "  " << c.command;
  if (c.fixture) os << "  fixture=" << *c.fixture;
  if (c.params) os << "  params=" << params_to_json(*c.params).dump();
  os << "\nstatus: " << report.status() << "\n";
  for (const auto& ch : report.checks) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-40s %-13s %-24s tol %s\n", ch.name.c_str(), ch.status.c_str(),
                  format_double(ch.measured).c_str(), format_double(ch.tolerance).c_str());
    os << line;
  }
  if (report.data.contains("verdict")) os << "verdict: " << report.data["verdict"].get<std::string>() << "\n";
  if (report.data.contains("summary")) {
    os << "classification: " << report.data["summary"]["classification"].get<std::string>() << "\n";
  }
  if (report.data.contains("dual")) {
    os << "dual classification: " << report.data["dual"]["classification"].get<std::string>() << "\n";
  }
  if (!report.table.rows.empty()) os << "table rows: " << report.table.rows.size() << "\n";
  for (const auto& [k, v] : report.timings) {
    char line[96];
    std::snprintf(line, sizeof line, "  time %-12s %.3f s\n", k.c_str(), v);
    os << line;
  }
  return os.str();
}

std::string render(const Report& report) {
  if (report.config.format == "csv") return render_csv(report);
  if (report.config.format == "text") return render_text(report);
  return render_json(report);
}

int exit_code(const Report& report) { return report.status() == "pass" ? 0 : 1; }

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
    os << content;
    if (!os.flush()) throw ConfigError("cannot write '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("cannot move output into place at '" + path + "'");
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical checks for gradient Ricci solitons and their duals", "soliton-lab"};
  std::string command, fixture, config_path, format, out_path;
  int samples = 0;
  double tol_residual = 0.0;
  app.add_option("command", command, "verify | dualize | skrp | completeness")
      ->required()
      ->check(CLI::IsMember({"verify", "dualize", "skrp", "completeness"}));
  auto* fixture_opt = app.add_option("--fixture", fixture, "named fixture");
  auto* config_opt = app.add_option("--config", config_path, "JSON run configuration");
  fixture_opt->excludes(config_opt);
  auto* samples_opt = app.add_option("--samples", samples, "sample count (>= 10)");
  auto* tol_opt = app.add_option("--tol-residual", tol_residual, "almost-soliton residual tolerance");
  auto* format_opt = app.add_option("--format", format, "json | csv | text")
                         ->check(CLI::IsMember({"json", "csv", "text"}));
  auto* out_opt = app.add_option("--out", out_path, "output file (written atomically)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  RunConfig config;
  std::string rendered;
  int rc = 0;
  try {
    if (*config_opt) {
      std::ifstream is(config_path);
      if (!is) throw ConfigError("cannot read config file '" + config_path + "'");
      Json doc;
      try {
        doc = Json::parse(is);
      } catch (const Json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      config = config_from_json(doc);
    }
    config.command = command;
    if (*fixture_opt) config.fixture = fixture;
    if (*samples_opt) config.samples = samples;
    if (*tol_opt) config.tol_residual = tol_residual;
    if (*format_opt) config.format = format;
    if (*out_opt) config.out = out_path;
    config.seed = seed_from_env(config.seed);
    config.validate();

    const Report report = run_command(config);
    rendered = render(report);
    rc = exit_code(report);
  } catch (const UnknownFixture& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    const std::string what = e.what();
    const auto colon = what.find(':');
    Json diag = Json::object();
    diag["tool"] = "soliton-lab";
    diag["version"] = artifact_version();
    diag["command"] = config.command;
    diag["status"] = "error";
    diag["error"] = Json{{"type", colon == std::string::npos ? "Error" : what.substr(0, colon)},
                         {"message", what}};
    rendered = diag.dump(2) + "\n";
    err << what << "\n";
    rc = 3;
  }

  try {
    if (config.out) {
      write_atomic(*config.out, rendered);
    } else {
      out << rendered;
    }
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 2;
  }
  return rc;
}

}  // namespace soliton_lab::cli
