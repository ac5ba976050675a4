#include <cmath>

#include <gtest/gtest.h>

#include "soliton_lab/chart_tensor.hpp"
#include "soliton_lab/errors.hpp"
#include "soliton_lab/fixtures.hpp"
#include "support.hpp"

namespace sl = soliton_lab;
using namespace soliton_lab::testing;

namespace {

sl::Point at(std::initializer_list<double> xs) {
  sl::Point p(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

sl::ScalarField half_square(int n) {
  return sl::ScalarField(n, [n](std::span<const sl::Jet> x) {
    sl::Jet s = 0.0;
    for (int i = 0; i < n; ++i) s += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    return 0.5 * s;
  });
}

}  // namespace

TEST(Jet, ElementaryRulesMatchHandDerivatives) {
  const sl::Jet x = sl::Jet::variable(0.7, 0, 2);
  const sl::Jet y = sl::Jet::variable(-0.4, 1, 2);
  const sl::Jet r = x * x * y + sl::exp(y) / x + sl::sin(x * y);
  const double X = 0.7, Y = -0.4;
  const double c = std::cos(X * Y), s = std::sin(X * Y);
  EXPECT_NEAR(r.value(), X * X * Y + std::exp(Y) / X + s, 1e-15);
  EXPECT_NEAR(r.d(0), 2 * X * Y - std::exp(Y) / (X * X) + Y * c, 1e-14);
  EXPECT_NEAR(r.d(1), X * X + std::exp(Y) / X + X * c, 1e-14);
  EXPECT_NEAR(r.dd(0, 0), 2 * Y + 2 * std::exp(Y) / (X * X * X) - Y * Y * s, 1e-13);
  EXPECT_NEAR(r.dd(0, 1), 2 * X - std::exp(Y) / (X * X) + c - X * Y * s, 1e-13);
  EXPECT_NEAR(r.dd(1, 0), r.dd(0, 1), 1e-15);
  EXPECT_NEAR(r.dd(1, 1), std::exp(Y) / X - X * X * s, 1e-13);
}

TEST(Jet, PowSqrtLogAgree) {
  const sl::Jet x = sl::Jet::variable(1.9, 0, 1);
  const sl::Jet a = sl::pow(x, 0.5), b = sl::sqrt(x), c = sl::exp(0.5 * sl::log(x));
  EXPECT_NEAR(a.value(), b.value(), 1e-15);
  EXPECT_NEAR(a.d(0), b.d(0), 1e-15);
  EXPECT_NEAR(a.dd(0, 0), b.dd(0, 0), 1e-15);
  EXPECT_NEAR(c.dd(0, 0), b.dd(0, 0), 1e-15);
}

TEST(ScalarField, DerivativesMatchFiniteDifferencesOfValueChannel) {
  for (const auto& fx : conformal_fixtures()) {
    for (const sl::ScalarField* field : {&fx.f, &fx.tau}) {
      for (const auto& p : sl::sample_points(fx.g.domain(), 20, kSeed)) {
        const sl::FieldValue v = field->evaluate(p);
        const sl::Vector g = fd_gradient(*field, p);
        const sl::Matrix H = fd_hessian(*field, p);
        EXPECT_LT((v.gradient - g).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()), 1e-6)
            << fx.name;
        EXPECT_LT(sl::max_abs(v.hessian - H) / std::max(1.0, sl::max_abs(H)), 1e-6) << fx.name;
      }
    }
  }
}

TEST(ScalarField, ComposeFollowsChainRule) {
  const sl::ScalarField f = sl::ScalarField::coordinate(2, 1);
  const sl::ScalarField h = sl::compose(sl::exponential_profile(2.0, 3.0), f);
  const sl::FieldValue v = h.evaluate(at({0.1, 0.4}));
  EXPECT_NEAR(v.value, 3.0 * std::exp(0.8), 1e-14);
  EXPECT_NEAR(v.gradient[1], 6.0 * std::exp(0.8), 1e-13);
  EXPECT_NEAR(v.hessian(1, 1), 12.0 * std::exp(0.8), 1e-12);
  EXPECT_EQ(v.gradient[0], 0.0);
}

TEST(SamplePoints, DeterministicInsideMargin) {
  const sl::Box box = sl::Box::cube(3, -1.0, 1.0);
  const auto a = sl::sample_points(box, 100, 42), b = sl::sample_points(box, 100, 42);
  const auto c = sl::sample_points(box, 100, 43);
  ASSERT_EQ(a.size(), 100u);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    differs = differs || a[i] != c[i];
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(a[i][k], -0.9);
      EXPECT_LE(a[i][k], 0.9);
    }
  }
  EXPECT_TRUE(differs);
}

TEST(Curvature, FlatMetricVanishes) {
  const sl::MetricChart g = sl::fixtures::metric("euclidean");
  for (const auto& p : sl::sample_points(g.domain(), 10, kSeed)) {
    for (const auto& G : sl::christoffel(g, p)) EXPECT_LT(sl::max_abs(G), 1e-13);
    EXPECT_LT(sl::max_abs(sl::ricci(g, p)), 1e-13);
    EXPECT_LT(std::abs(sl::scalar_curvature(g, p)), 1e-13);
  }
}

TEST(Curvature, RoundSphereIsEinstein) {
  for (int n : {2, 3}) {
    const sl::MetricChart g = sl::fixtures::round_sphere(n);
    for (const auto& p : sl::sample_points(g.domain(), 25, kSeed)) {
      const sl::LocalGeometry geo(g, p);
      EXPECT_LT(sl::max_abs(geo.ricci() - (n - 1) * geo.metric()) / sl::max_abs(geo.metric()), 1e-9);
      EXPECT_NEAR(geo.scalar_curvature(), n * (n - 1), 1e-9);
    }
  }
}

TEST(Curvature, HyperbolicPlaneHasRicciMinusG) {
  const sl::MetricChart g = sl::fixtures::metric("hyperbolic2");
  for (const auto& p : sl::sample_points(g.domain(), 25, kSeed)) {
    const sl::LocalGeometry geo(g, p);
    EXPECT_LT(sl::max_abs(geo.ricci() + geo.metric()) / sl::max_abs(geo.metric()), 1e-9);
    EXPECT_NEAR(geo.scalar_curvature(), -2.0, 1e-9);
  }
}

TEST(Curvature, SphereTimesLineHasScalarTwo) {
  const sl::MetricChart g("s2xR", sl::Box::cube(3, -0.8, 0.8), [](std::span<const sl::Jet> x) {
    const sl::Jet d = 1.0 + x[0] * x[0] + x[1] * x[1];
    sl::JetMatrix m(3);
    m(0, 0) = m(1, 1) = 4.0 / (d * d);
    m(2, 2) = 1.0;
    return m;
  });
  for (const auto& p : sl::sample_points(g.domain(), 10, kSeed)) EXPECT_NEAR(sl::scalar_curvature(g, p), 2.0, 1e-9);
}

TEST(Curvature, ChristoffelMatchesFiniteDifferenceOracle) {
  std::vector<sl::MetricChart> metrics;
  for (const auto& name : sl::fixtures::metric_names()) metrics.push_back(sl::fixtures::metric(name));
  for (const auto& fx : conformal_fixtures()) metrics.push_back(fx.g);
  for (const auto& g : metrics) {
    for (const auto& p : sl::sample_points(g.domain(), 8, kSeed)) {
      const sl::Christoffel ad = sl::christoffel(g, p), fd = fd_christoffel(g, p);
      for (std::size_t k = 0; k < ad.size(); ++k) EXPECT_LT(sl::max_abs(ad[k] - fd[k]), 1e-7) << g.name();
    }
  }
}

TEST(Curvature, RicciAndHessianAreSymmetric) {
  for (const auto& fx : conformal_fixtures()) {
    for (const auto& p : sl::sample_points(fx.g.domain(), 20, kSeed)) {
      EXPECT_LT(sl::asymmetry(sl::ricci(fx.g, p)), 1e-12);
      EXPECT_LT(sl::asymmetry(sl::hessian(fx.g, fx.f, p)), 1e-12);
    }
  }
}

TEST(Hessian, FlatExamples) {
  const sl::MetricChart g = sl::fixtures::metric("euclidean");
  const sl::Point p = at({0.3, -0.2, 0.5});
  EXPECT_LT(sl::max_abs(sl::hessian(g, half_square(3), p) - sl::Matrix::Identity(3, 3)), 1e-15);
  const sl::ScalarField lin(3, [](std::span<const sl::Jet> x) { return 2.0 * x[0] - x[2] + 1.0; });
  EXPECT_LT(sl::max_abs(sl::hessian(g, lin, p)), 1e-15);
}

TEST(Hessian, PolarRadiusHasThetaThetaEqualR) {
  const sl::MetricChart g = sl::fixtures::metric("polar");
  const sl::ScalarField r = sl::ScalarField::coordinate(2, 0);
  for (double rr : {0.7, 1.3, 2.4}) {
    const sl::Matrix H = sl::hessian(g, r, at({rr, 0.2}));
    EXPECT_NEAR(H(1, 1), rr, 1e-14);
    EXPECT_NEAR(H(0, 0), 0.0, 1e-14);
    EXPECT_NEAR(H(0, 1), 0.0, 1e-14);
  }
}

TEST(Laplacian, FlatExamples) {
  for (int n : {2, 3, 5}) {
    const sl::MetricChart g = sl::MetricChart::euclidean(n, sl::Box::cube(n, -1, 1));
    EXPECT_NEAR(sl::laplacian(g, half_square(n), sl::Point::Constant(n, 0.3)), n, 1e-14);
  }
  const sl::MetricChart g = sl::fixtures::metric("euclidean");
  EXPECT_NEAR(sl::grad_norm_sq(g, sl::ScalarField::coordinate(3, 0), at({0.1, 0.2, 0.3})), 1.0, 1e-15);
}

TEST(Laplacian, TraceAndDivergenceFormsAgree) {
  const sl::MetricChart g = sl::fixtures::round_sphere(2);
  const sl::ScalarField f = sl::ScalarField::coordinate(2, 0);
  std::vector<sl::Point> pts{at({0.0, 0.0})};
  for (const auto& p : sl::sample_points(g.domain(), 20, kSeed)) pts.push_back(p);
  for (const auto& p : pts) {
    const sl::LocalGeometry geo(g, p);
    const sl::FieldValue v = f.evaluate(p);
    EXPECT_NEAR(geo.laplacian(v), geo.laplacian_divergence(v), 1e-10);
  }
  for (const auto& fx : conformal_fixtures()) {
    for (const auto& p : sl::sample_points(fx.g.domain(), 10, kSeed)) {
      const sl::LocalGeometry geo(fx.g, p);
      const sl::FieldValue v = fx.f.evaluate(p);
      EXPECT_NEAR(geo.laplacian(v), geo.laplacian_divergence(v), 1e-10) << fx.name;
    }
  }
}

TEST(Conformal, UnitFactorGivesZeroResidual) {
  const auto fx = random_conformal_fixture(3, kSeed);
  const sl::ScalarField one = sl::ScalarField::constant(3, 1.0);
  const sl::Point p = sl::sample_points(fx.g.domain(), 1, kSeed)[0];
  EXPECT_EQ(sl::conformal_hessian_check(fx.g, one, fx.f, p), 0.0);
  EXPECT_LT(sl::conformal_ricci_check(fx.g, one, p).general, 1e-13);
}

TEST(Conformal, ConstantFactorLeavesRicciUnchanged) {
  const sl::MetricChart g = sl::fixtures::round_sphere(3);
  const sl::ScalarField tau = sl::ScalarField::constant(3, 2.5);
  for (const auto& p : sl::sample_points(g.domain(), 10, kSeed)) {
    EXPECT_LT(sl::max_abs(sl::ricci(sl::conformal_metric(g, tau), p) - sl::ricci(g, p)), 1e-12);
    EXPECT_LT(sl::conformal_ricci_check(g, tau, p).general, 1e-12);
  }
}

TEST(Conformal, FlatWithExponentialFactor) {
  const sl::MetricChart g = sl::fixtures::metric("euclidean");
  const sl::ScalarField tau(3, [](std::span<const sl::Jet> x) { return sl::exp(x[0]); });
  for (const auto& p : sl::sample_points(g.domain(), 20, kSeed))
    EXPECT_LT(sl::conformal_ricci_check(g, tau, p).general, 1e-9);
}

TEST(Conformal, DualityFactorOnGaussian) {
  const sl::MetricChart g = sl::fixtures::metric("euclidean");
  const sl::ScalarField f = half_square(3);
  const sl::ScalarField tau = sl::compose(sl::exponential_profile(2.0), f);
  for (const auto& p : sl::sample_points(g.domain(), 20, kSeed)) {
    EXPECT_LT(sl::conformal_hessian_check(g, tau, f, p), 1e-9);
    const auto r = sl::conformal_ricci_check(g, sl::ProfileOfField{f, sl::exponential_profile(2.0)}, p);
    EXPECT_LT(r.general, 1e-9);
    ASSERT_TRUE(r.profile_form.has_value());
    EXPECT_LT(*r.profile_form, 1e-9);
  }
}

TEST(Conformal, RandomFixturesSatisfyBothIdentities) {
  for (const auto& fx : conformal_fixtures()) {
    double worst = 0.0;
    for (const auto& p : sl::sample_points(fx.g.domain(), 100, kSeed)) {
      worst = std::max(worst, sl::conformal_hessian_check(fx.g, fx.tau, fx.f, p));
      worst = std::max(worst, sl::conformal_ricci_check(fx.g, fx.tau, p).general);
      const auto r = sl::conformal_ricci_check(fx.g, fx.tau_of_f, p);
      worst = std::max({worst, r.general, r.profile_form.value_or(1.0)});
    }
    EXPECT_LT(worst, 1e-9) << fx.name;
  }
}

TEST(Conformal, VanishingFactorIsRejected) {
  const sl::MetricChart g = sl::fixtures::metric("euclidean");
  const sl::ScalarField tau = sl::ScalarField::coordinate(3, 0);
  EXPECT_THROW(sl::conformal_metric(g, tau).evaluate(at({0.0, 0.1, 0.1})), sl::DegenerateConformalFactor);
}

TEST(Metric, IndefiniteComponentsAreRejected) {
  const sl::MetricChart g("indefinite", sl::Box::cube(2, -1, 1), [](std::span<const sl::Jet>) {
    sl::JetMatrix m(2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
  });
  EXPECT_THROW(g.evaluate(at({0.0, 0.0})), sl::SingularMetric);
}

TEST(Metric, ScaledCarriesAnalyticDerivatives) {
  const sl::MetricChart g = sl::fixtures::round_sphere(2);
  const sl::ScalarField k(2, [](std::span<const sl::Jet> x) { return sl::exp(x[0] - 0.5 * x[1]); });
  const sl::MetricChart h = g.scaled(k, "scaled");
  const sl::Point p = at({0.2, -0.3});
  const sl::MetricData d = h.evaluate(p);
  for (int a = 0; a < 2; ++a) {
    const double step = fd_step(p[a]);
    sl::Point u = p, v = p;
    u[a] += step;
    v[a] -= step;
    EXPECT_LT(sl::max_abs(d.dg[static_cast<std::size_t>(a)] - (metric_values(h, u) - metric_values(h, v)) / (2 * step)),
              1e-8);
  }
}
