#include "soliton_lab/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "soliton_lab/errors.hpp"

namespace soliton_lab::fixtures {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class Names>
bool listed(const Names& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

MetricChart round_sphere(int n) {
  return MetricChart("sphere" + std::to_string(n) + "-stereo", Box::cube(n, -0.8, 0.8),
                     [n](std::span<const Jet> x) {
                       Jet r2 = 0.0;
                       for (int i = 0; i < n; ++i) r2 += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
                       const Jet d = 1.0 + r2;
                       const Jet e = 4.0 / (d * d);
                       JetMatrix g(n);
                       for (int i = 0; i < n; ++i) g(i, i) = e;
                       return g;
                     });
}

MetricChart metric(const std::string& name) {
  if (name == "euclidean") return MetricChart::euclidean(3, Box::cube(3, -1.0, 1.0));
  if (name == "polar") {
    Box box;
    box.lower = Vector(2);
    box.upper = Vector(2);
    box.lower << 0.5, -1.0;
    box.upper << 3.0, 1.0;
    return MetricChart("polar", box, [](std::span<const Jet> x) {
      JetMatrix g(2);
      g(0, 0) = 1.0;
      g(1, 1) = x[0] * x[0];
      return g;
    });
  }
  if (name == "sphere2-stereo") return round_sphere(2);
  if (name == "sphere3-stereo") return round_sphere(3);
  if (name == "hyperbolic2") {
    Box box;
    box.lower = Vector(2);
    box.upper = Vector(2);
    box.lower << -1.0, 0.5;
    box.upper << 1.0, 2.0;
    return MetricChart("hyperbolic2", box, [](std::span<const Jet> x) {
      const Jet e = 1.0 / (x[1] * x[1]);
      JetMatrix g(2);
      g(0, 0) = e;
      g(1, 1) = e;
      return g;
    });
  }
  throw UnknownFixture("no metric fixture named '" + name + "'");
}

std::vector<std::string> metric_names() {
  return {"euclidean", "polar", "sphere2-stereo", "sphere3-stereo", "hyperbolic2"};
}

SolitonPair gaussian(int n, double lambda) {
  const ScalarField f(n, [n, lambda](std::span<const Jet> x) {
    Jet r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    return 0.5 * lambda * r2;
  });
  const std::string name = n == 3 ? "gaussian-soliton" : "gaussian-soliton-n" + std::to_string(n);
  return SolitonPair{MetricChart::euclidean(n, Box::cube(n, -1.0, 1.0)), f, name};
}

SolitonPair pair(const std::string& name) {
  if (name == "gaussian-soliton") return gaussian(3);
  if (name == "gaussian-soliton-n4") return gaussian(4);
  if (name == "gaussian-soliton-n5") return gaussian(5);
  if (name == "sphere-trivial") return SolitonPair{round_sphere(3), ScalarField::constant(3, 0.0), name};
  if (name == "non-soliton-cubic") {
    const ScalarField f(3, [](std::span<const Jet> x) { return x[0] * x[0] * x[0]; });
    return SolitonPair{MetricChart::euclidean(3, Box::cube(3, -1.0, 1.0)), f, name};
  }
  if (is_skrp(name)) {
    SolitonPair p = calabi(name).pair();
    p.name = name;
    return p;
  }
  throw UnknownFixture("no soliton pair fixture named '" + name + "'");
}

std::vector<std::string> pair_names() {
  return {"gaussian-soliton", "gaussian-soliton-n4", "gaussian-soliton-n5", "sphere-trivial",
          "non-soliton-cubic", "koiso-m2-A1B0",      "koiso-m2-compact"};
}

SkrpParams skrp(const std::string& name) {
  SkrpParams p;
  p.m = 2;
  p.c = 0.0;
  if (name == "koiso-m2-A1B0") {
    p.kappa = 4.0;
    p.A = 1.0;
    p.B = 0.0;
    p.interval = Interval{0.0, kInf};
    p.anchor = 1.5;
    return p;
  }
  if (name == "koiso-m2-compact") {
    // phi < 0 between its root near -0.93 and f = c, where A + B = 0 leaves no pole
    p.kappa = 1.0;
    p.A = 2.0;
    p.B = -2.0;
    p.interval = Interval{-kInf, 0.0};
    p.anchor = -0.5;
    return p;
  }
  if (name == "koiso-m2-A0B1") {
    p.kappa = 1.0;
    p.A = 0.0;
    p.B = 1.0;
    p.interval = Interval{0.0, kInf};
    p.anchor = 1.0;
    return p;
  }
  if (name == "koiso-m2-A0B1-lower") {
    p.kappa = 1.0;
    p.A = 0.0;
    p.B = 1.0;
    p.interval = Interval{-kInf, 0.0};
    p.anchor = -2.0;
    return p;
  }
  throw UnknownFixture("no SKRP fixture named '" + name + "'");
}

std::vector<std::string> skrp_names() {
  return {"koiso-m2-A1B0", "koiso-m2-compact", "koiso-m2-A0B1", "koiso-m2-A0B1-lower"};
}

bool is_skrp(const std::string& name) { return listed(skrp_names(), name); }

CalabiChart calabi(const std::string& name) { return assemble_calabi_metric(skrp(name)); }

ArcProfile arc(const std::string& name) {
  if (name == "synthetic-simple-zero") {
    return synthetic_arc_profile(name, 4, [](double f) { return Derivs{f, 1.0, 0.0}; },
                                 Interval{0.0, 1.0});
  }
  if (name == "synthetic-two-caps") {
    return synthetic_arc_profile(
        name, 4, [](double f) { return Derivs{f * (1.0 - f), 1.0 - 2.0 * f, -2.0}; },
        Interval{0.0, 1.0});
  }
  if (name == "synthetic-double-zero") {
    return synthetic_arc_profile(
        name, 4,
        [](double f) {
          const double u = f * (1.0 - f);
          const double du = 1.0 - 2.0 * f;
          return Derivs{u * u, 2.0 * u * du, 2.0 * du * du - 4.0 * u};
        },
        Interval{0.0, 1.0});
  }
  if (is_skrp(name)) {
    const SkrpParams p = skrp(name);
    const auto comp = q_component(p, default_anchor(p));
    if (!comp) throw DomainSplit("fixture anchor outside every Q-positive interval");
    ArcProfile out = skrp_arc_profile(p, *comp);
    out.name = name;
    return out;
  }
  throw UnknownFixture("no arc-profile fixture named '" + name + "'");
}

std::vector<std::string> arc_names() {
  std::vector<std::string> names{"synthetic-simple-zero", "synthetic-two-caps",
                                 "synthetic-double-zero"};
  for (auto& n : skrp_names()) names.push_back(n);
  return names;
}

}  // namespace soliton_lab::fixtures
