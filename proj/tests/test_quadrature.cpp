#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "strictlyap/quadrature.hpp"
#include "strictlyap/sampling.hpp"

using namespace strictlyap;

namespace {

constexpr double kPi = std::numbers::pi;

Vector scalar(double v) { return Vector::Constant(1, v); }

/// Random trig polynomial c0 + sum_k a_k cos(k l) + b_k sin(k l), k <= 8.
struct TrigPoly {
  double c0 = 0.0;
  std::vector<double> a, b;

  double operator()(double l) const {
    double v = c0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      v += a[k] * std::cos((k + 1) * l) + b[k] * std::sin((k + 1) * l);
    }
    return v;
  }
};

TrigPoly random_poly(SeededStream& rng) {
  TrigPoly p;
  p.c0 = rng.uniform(1.0, 2.0);
  const int order = 1 + static_cast<int>(rng.uniform() * 8.0);
  for (int k = 0; k < order; ++k) {
    p.a.push_back(rng.uniform(-1.0, 1.0));
    p.b.push_back(rng.uniform(-1.0, 1.0));
  }
  return p;
}

/// Composite Simpson over s in [t - tau, t] of composite Simpson over l in [s, t].
double nested_simpson(const std::function<double(double)>& p, double t, double tau, int n) {
  auto simpson = [n](const std::function<double(double)>& g, double a, double b) {
    if (b <= a) return 0.0;
    const double h = (b - a) / n;
    double acc = g(a) + g(b);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
    return acc * h / 3.0;
  };
  return simpson([&](double s) { return simpson(p, s, t); }, t - tau, t);
}

}  // namespace

TEST(SingleIntegral, ZeroIntegrand) {
  EXPECT_EQ(integrate_scalar([](double) { return 0.0; }, 0.0, 3.0), 0.0);
}

TEST(SingleIntegral, CosineOverFullPeriodVanishes) {
  EXPECT_NEAR(integrate_scalar([](double l) { return 10.0 * std::cos(l); }, 0.0, 2.0 * kPi), 0.0, 1e-10);
}

TEST(SingleIntegral, CosineOverUnitInterval) {
  EXPECT_NEAR(integrate_scalar([](double l) { return 10.0 * std::cos(l); }, 0.0, 1.0), 10.0 * std::sin(1.0), 1e-10);
}

TEST(SingleIntegral, VectorValued) {
  const Vector v = weighted_single_integral(
      [](double l) {
        Vector r(2);
        r << l, l * l;
        return r;
      },
      0.0, 3.0);
  EXPECT_NEAR(v(0), 4.5, 1e-12);
  EXPECT_NEAR(v(1), 9.0, 1e-12);
}

TEST(SingleIntegral, ReversedIntervalRejected) {
  EXPECT_THROW((void)integrate_scalar([](double l) { return l; }, 1.0, 0.0), std::invalid_argument);
}

TEST(SingleIntegral, NonConvergenceCarriesEstimates) {
  QuadratureConfig cfg;
  cfg.panels = 8;
  cfg.refine_limit = 1;
  try {
    (void)integrate_scalar([](double l) { return std::sin(400.0 * l); }, 0.0, 1.3, cfg);
    FAIL() << "expected QuadratureError";
  } catch (const QuadratureError& e) {
    EXPECT_EQ(e.last_estimate().size(), 1);
    EXPECT_EQ(e.previous_estimate().size(), 1);
  }
}

TEST(SingleIntegral, NonFiniteIntegrandRaises) {
  EXPECT_THROW((void)integrate_scalar([](double l) { return 1.0 / (l - 0.5); }, 0.0, 1.0), QuadratureError);
}

TEST(QuadratureConfig, Invariants) {
  EXPECT_NO_THROW(QuadratureConfig{}.validate());
  EXPECT_THROW((QuadratureConfig{.panels = 6}.validate()), std::invalid_argument);
  EXPECT_THROW((QuadratureConfig{.panels = 65}.validate()), std::invalid_argument);
  EXPECT_THROW((QuadratureConfig{.abs_tol = 0.0}.validate()), std::invalid_argument);
}

TEST(OscillationPanels, Rule) {
  EXPECT_EQ(oscillation_panels(1.0, 1.0), 64);
  EXPECT_EQ(oscillation_panels(0.02, 1e4), 2000);
  EXPECT_EQ(oscillation_panels(1.0, 1e3), 10000);
  EXPECT_EQ(oscillation_panels(0.1, 333.0) % 2, 0);
}

TEST(DoubleIntegral, ZeroIntegrand) {
  EXPECT_EQ(double_time_integral_scalar([](double) { return 0.0; }, 1.0, 2.0), 0.0);
}

TEST(DoubleIntegral, ConstantGivesTriangleArea) {
  for (double t : {-3.0, 0.0, 7.5}) {
    const Vector v = double_time_integral(
        [](double) {
          Vector c(2);
          c << 3.0, -1.5;
          return c;
        },
        t, 0.8);
    EXPECT_NEAR(v(0), 3.0 * 0.32, 1e-14);
    EXPECT_NEAR(v(1), -1.5 * 0.32, 1e-14);
  }
}

TEST(DoubleIntegral, CosineClosedForm) {
  EXPECT_NEAR(double_time_integral_scalar([](double l) { return 10.0 * std::cos(l); }, 0.0, 1.0),
              10.0 * (1.0 - std::cos(1.0)), 1e-10);
}

TEST(DoubleIntegral, MatchesNestedSimpsonOnTrigPolynomials) {
  SeededStream rng(42);
  for (int i = 0; i < 20; ++i) {
    const TrigPoly p = random_poly(rng);
    const double t = rng.uniform(-5.0, 5.0);
    const double tau = rng.uniform(0.2, 3.0);
    const double fubini = double_time_integral_scalar(p, t, tau);
    const double brute = nested_simpson(p, t, tau, 400);
    EXPECT_NEAR(fubini, brute, 1e-8 * std::abs(brute)) << "case " << i;
  }
}

TEST(DoubleIntegral, FubiniBoundHoldsOnRandomIntegrands) {
  SeededStream rng(7);
  for (int i = 0; i < 50; ++i) {
    const TrigPoly p = random_poly(rng);
    const double t = rng.uniform(-5.0, 5.0);
    const double tau = rng.uniform(0.1, 4.0);
    double max_p = 0.0;
    for (double l : linspace(t - tau, t, 2001)) max_p = std::max(max_p, std::abs(p(l)));
    const double v = double_time_integral_scalar(p, t, tau);
    EXPECT_LE(std::abs(v), 0.5 * tau * tau * max_p + 1e-10);
  }
}

TEST(DerivativeIdentity, ConstantIntegrand) {
  const double m = double_integral_derivative_check([](double) { return scalar(2.5); }, 1.0, 0.6, 1e-4);
  EXPECT_LE(m, 1e-8);
}

TEST(DerivativeIdentity, Cosine) {
  const double m =
      double_integral_derivative_check([](double l) { return scalar(10.0 * std::cos(l)); }, 0.7, 1.0, 1e-4);
  EXPECT_LE(m, 1e-6);
}

TEST(DerivativeIdentity, Sine3) {
  const double m = double_integral_derivative_check([](double l) { return scalar(std::sin(3.0 * l)); }, 2.0, 0.5, 1e-4);
  EXPECT_LE(m, 1e-6);
}

TEST(DerivativeIdentity, RateMatchesClosedForm) {
  // d/dt of int_{t-tau}^t int_s^t cos = tau cos(t) - (sin t - sin(t - tau)).
  const double t = 0.7, tau = 1.0;
  const Vector r = double_integral_rate([](double l) { return scalar(std::cos(l)); }, t, tau, 1e-4);
  EXPECT_NEAR(r(0), tau * std::cos(t) - (std::sin(t) - std::sin(t - tau)), 1e-7);
}
