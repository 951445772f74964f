#include <gtest/gtest.h>

#include <cmath>

#include "strictlyap/systems.hpp"

using namespace strictlyap;

namespace {

TimeVaryingSystem scalar_system(std::function<double(double, double, double)> f) {
  TimeVaryingSystem sys;
  sys.dim = 1;
  sys.f = [f](const Vector& x, double t, double tau) { return Vector::Constant(1, f(x(0), t, tau)); };
  return sys;
}

SampleGrid small_grid(int dim) { return default_grid(dim, 1.0, 42, GridOptions{.per_decade = 4, .n_times = 5, .n_fast_times = 5}); }

}  // namespace

TEST(ValidateSystem, CubicWithFastOscillationIsNull) {
  auto sys = scalar_system([](double x, double, double tau) {
    return -x * x * x + 10.0 * std::cos(tau) * x * x * x / (1.0 + x * x);
  });
  const auto report = validate_system(sys, small_grid(1));
  EXPECT_TRUE(report.passed) << report.diagnostic;
}

TEST(ValidateSystem, AffineOffsetFailsAtOrigin) {
  auto sys = scalar_system([](double x, double, double) { return x + 1.0; });
  const auto report = validate_system(sys, small_grid(1));
  EXPECT_FALSE(report.passed);
  ASSERT_EQ(report.worst_point.state.size(), 1);
  EXPECT_EQ(report.worst_point.state(0), 0.0);
  ASSERT_FALSE(report.parts.empty());
  EXPECT_EQ(report.parts.front().check_name, "nullness");
  EXPECT_DOUBLE_EQ(report.parts.front().worst_margin, 1.0);
}

TEST(ValidateSystem, NonFiniteOutputFails) {
  auto sys = scalar_system([](double x, double t, double) { return t > 5.0 ? std::log(-1.0) : -x; });
  const auto report = validate_system(sys, small_grid(1));
  EXPECT_FALSE(report.passed);
}

TEST(ValidateSystem, WrongJacobianIsCaught) {
  auto sys = scalar_system([](double x, double, double) { return -x * x * x; });
  sys.jac_x = [](const Vector& x, double, double) { return Matrix::Constant(1, 1, -2.0 * x(0) * x(0)); };
  EXPECT_FALSE(validate_system(sys, small_grid(1)).passed);
  sys.jac_x = [](const Vector& x, double, double) { return Matrix::Constant(1, 1, -3.0 * x(0) * x(0)); };
  EXPECT_TRUE(validate_system(sys, small_grid(1)).passed);
}

TEST(ValidateSystem, Idempotent) {
  auto sys = scalar_system([](double x, double t, double) { return x * std::sin(t) + 1e-3; });
  const auto grid = small_grid(1);
  const auto a = validate_system(sys, grid);
  const auto b = validate_system(sys, grid);
  EXPECT_EQ(a.passed, b.passed);
  EXPECT_EQ(a.worst_margin, b.worst_margin);
  EXPECT_EQ(a.samples_total, b.samples_total);
  EXPECT_EQ(a.worst_point.t, b.worst_point.t);
}

TEST(ValidateSystem, EmptyGridRejected) {
  auto sys = scalar_system([](double x, double, double) { return -x; });
  EXPECT_THROW((void)validate_system(sys, SampleGrid{}), std::invalid_argument);
}

TEST(GaugeClassCheck, InverseSquareIsClassM) {
  Gauge N{[](double eta) { return 60.0 / (eta * eta); }, GaugeClass::M, "60/eta^2"};
  EXPECT_TRUE(gauge_class_check(N, geometric_grid(1.0, 1e4, 64)).passed);
}

TEST(GaugeClassCheck, InverseIsNotClassM) {
  Gauge N{[](double eta) { return 1.0 / eta; }, GaugeClass::M, "1/eta"};
  EXPECT_FALSE(gauge_class_check(N, geometric_grid(1.0, 1e4, 64)).passed);
}

TEST(GaugeClassCheck, ScaledArctanIsClassK) {
  Gauge delta{[](double s) { return 33.0 * std::atan(2.0 * s); }, GaugeClass::K, "33 atan(2s)"};
  EXPECT_TRUE(gauge_class_check(delta, geometric_grid(1e-4, 1e4, 64)).passed);
}

TEST(GaugeClassCheck, DecreasingFunctionIsNotClassK) {
  Gauge g{[](double s) { return s / (1.0 + s * s); }, GaugeClass::K, "bump"};
  EXPECT_FALSE(gauge_class_check(g, geometric_grid(1e-2, 1e2, 64)).passed);
}

TEST(GaugeClassCheck, NegativeValueFails) {
  Gauge g{[](double s) { return s - 1.0; }, GaugeClass::positive_definite, "shifted"};
  EXPECT_FALSE(gauge_class_check(g, geometric_grid(1e-2, 1e2, 64)).passed);
}

TEST(GaugeClassCheck, ShortOrUnsortedGridRejected) {
  Gauge g{[](double s) { return s; }, GaugeClass::K, "id"};
  EXPECT_THROW((void)gauge_class_check(g, geometric_grid(1.0, 2.0, 16)), std::invalid_argument);
  auto grid = geometric_grid(1.0, 2.0, 40);
  std::swap(grid[3], grid[4]);
  EXPECT_THROW((void)gauge_class_check(g, grid), std::invalid_argument);
}

TEST(GaugeClassCheck, KInfinityGaugesPassClassKCheck) {
  const std::vector<Gauge> gauges{
      {[](double s) { return s; }, GaugeClass::K_infinity, "s"},
      {[](double s) { return 4.0 * s * s; }, GaugeClass::K_infinity, "4s^2"},
      {[](double s) { return std::log1p(s); }, GaugeClass::K_infinity, "ln(1+s)"},
      {[](double s) { return std::sinh(s / 100.0); }, GaugeClass::K_infinity, "sinh"},
  };
  const auto grid = geometric_grid(1e-4, 1e4, 64);
  for (const auto& g : gauges) {
    ASSERT_TRUE(gauge_class_check(g, grid).passed) << g.label;
    Gauge as_k = g;
    as_k.declared_class = GaugeClass::K;
    EXPECT_TRUE(gauge_class_check(as_k, grid).passed) << g.label;
  }
}

TEST(CompatibilityConstants, Invariants) {
  EXPECT_NO_THROW(CompatibilityConstants{}.validate());
  EXPECT_THROW((CompatibilityConstants{.c_bar = 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((CompatibilityConstants{.c_bbar = 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((CompatibilityConstants{.K = 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((CompatibilityConstants{.eta_0 = 0.0}.validate()), std::invalid_argument);
}

TEST(Candidate, QuadraticPassesValidation) {
  LyapunovCandidate V;
  V.value = [](const Vector& x, double t) { return (2.0 + std::sin(t)) * x.squaredNorm(); };
  V.grad_x = [](const Vector& x, double t) { return Vector(2.0 * (2.0 + std::sin(t)) * x); };
  V.dt = [](const Vector& x, double t) { return std::cos(t) * x.squaredNorm(); };
  EXPECT_TRUE(validate_candidate(V, small_grid(2)).passed);
}

TEST(Candidate, WrongGradientFailsValidation) {
  LyapunovCandidate V;
  V.value = [](const Vector& x, double) { return x.squaredNorm(); };
  V.grad_x = [](const Vector& x, double) { return Vector(x); };
  EXPECT_FALSE(validate_candidate(V, small_grid(2)).passed);
}

TEST(Candidate, IndefiniteFunctionFailsValidation) {
  LyapunovCandidate V;
  V.value = [](const Vector& x, double) { return x(0) * x(0) - x(1) * x(1); };
  EXPECT_FALSE(validate_candidate(V, small_grid(2)).passed);
}

TEST(Candidate, GradientErrorShrinksQuadraticallyInStep) {
  LyapunovCandidate V;
  V.value = [](const Vector& x, double) { return std::exp(x(0)) * std::sin(x(1)) + x(0) * x(0) * x(1); };
  V.grad_x = [](const Vector& x, double) {
    Vector g(2);
    g << std::exp(x(0)) * std::sin(x(1)) + 2.0 * x(0) * x(1), std::exp(x(0)) * std::cos(x(1)) + x(0) * x(0);
    return g;
  };
  Vector x(2);
  x << 0.7, 1.3;
  // Large steps so truncation dominates roundoff.
  const double e1 = gradient_consistency(V, x, 0.0, 4e4);
  const double e2 = gradient_consistency(V, x, 0.0, 2e4);
  const double e3 = gradient_consistency(V, x, 0.0, 1e4);
  EXPECT_NEAR(e1 / e2, 4.0, 0.4);
  EXPECT_NEAR(e2 / e3, 4.0, 0.4);
}

TEST(Plumbing, ClosedRhsAddsInput) {
  TimeVaryingSystem sys;
  sys.dim = 2;
  sys.f = [](const Vector& x, double, double) { return Vector(-x); };
  Vector x(2), u(2);
  x << 1.0, 2.0;
  u << 0.5, -0.5;
  const Vector r = closed_rhs(sys, x, 0.0, 3.0, &u);
  EXPECT_DOUBLE_EQ(r(0), -0.5);
  EXPECT_DOUBLE_EQ(r(1), -2.5);
  sys.input_map = [](const Vector&, double, double) { return Matrix::Constant(2, 1, 2.0); };
  sys.input_dim = 1;
  Vector u1 = Vector::Constant(1, 0.25);
  const Vector r1 = closed_rhs(sys, x, 0.0, 3.0, &u1);
  EXPECT_DOUBLE_EQ(r1(0), -0.5);
  EXPECT_DOUBLE_EQ(r1(1), -1.5);
}

TEST(Plumbing, SpectralNorm) {
  Matrix m(2, 2);
  m << 3.0, 0.0, 4.0, 5.0;
  EXPECT_NEAR(spectral_norm(m), std::sqrt(45.0), 1e-12);
}

TEST(Sampling, DefaultGridShape) {
  const auto g = default_grid(2, 10.0);
  EXPECT_EQ(g.times.size(), 21u);
  EXPECT_DOUBLE_EQ(g.times.back(), 20.0);
  EXPECT_DOUBLE_EQ(g.fast_times.back(), 200.0);
  // 4 decades at 16 per decade plus the end point, 8 directions.
  EXPECT_EQ(g.states.size(), 65u * 8u);
  for (const auto& x : g.states) {
    EXPECT_GE(x.norm(), 1e-2 * (1 - 1e-12));
    EXPECT_LE(x.norm(), 1e2 * (1 + 1e-12));
  }
}

TEST(Sampling, SeededStreamReproducible) {
  SeededStream a(7), b(7), c(8);
  for (int i = 0; i < 10; ++i) {
    const double va = a.uniform();
    EXPECT_EQ(va, b.uniform());
    EXPECT_NE(va, c.uniform());
    EXPECT_GE(va, 0.0);
    EXPECT_LT(va, 1.0);
  }
}
