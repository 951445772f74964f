#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "strictlyap/verifiers.hpp"

using namespace strictlyap;

namespace {

constexpr double kPi = std::numbers::pi;

Vector vec1(double v) { return Vector::Constant(1, v); }

TimeVaryingSystem scalar_system(std::function<double(double, double, double)> f) {
  TimeVaryingSystem sys;
  sys.dim = 1;
  sys.f = [f](const Vector& x, double t, double tau) { return vec1(f(x(0), t, tau)); };
  return sys;
}

LimitingSystem scalar_limit(std::function<double(double, double)> f) {
  LimitingSystem lim;
  lim.dim = 1;
  lim.fbar = [f](const Vector& x, double t) { return vec1(f(x(0), t)); };
  return lim;
}

LyapunovCandidate half_square() {
  LyapunovCandidate V;
  V.value = [](const Vector& x, double) { return 0.5 * x.squaredNorm(); };
  V.grad_x = [](const Vector& x, double) { return Vector(x); };
  V.dt = [](const Vector&, double) { return 0.0; };
  return V;
}

Gauge linear_gauge(double k) { return Gauge{[k](double s) { return k * s; }, GaugeClass::K_infinity, "ks"}; }

SampleGrid grid1(int radius_max_exp = 2, int per_decade = 8) {
  GridOptions o;
  o.radius_max_exp = radius_max_exp;
  o.per_decade = per_decade;
  o.n_times = 5;
  o.n_fast_times = 9;
  return default_grid(1, 1.0, 42, o);
}

ConstructedLyapunov closed_form(std::function<double(const Vector&, double)> fn, double alpha) {
  return ConstructedLyapunov(std::move(fn), alpha, Construction::closed_form, nullptr);
}

/// Nonstrict data of x' = -x^3 + p(alpha t) x^3/(1 + x^2) with p = 10 cos.
StrictificationData cubic_data() {
  StrictificationData sd;
  sd.V.value = [](const Vector& x, double) { return std::pow(x(0), 4) / 4.0; };
  sd.V.grad_x = [](const Vector& x, double) { return vec1(std::pow(x(0), 3)); };
  sd.V.dt = [](const Vector&, double) { return 0.0; };
  sd.W = [](const Vector& x, double) { return std::pow(x(0), 6); };
  sd.theta = [](const Vector& x, double) { return std::pow(x(0), 6) / (1.0 + x(0) * x(0)); };
  sd.theta_grad = [](const Vector& x, double) {
    const double v = x(0), q = 1.0 + v * v;
    return vec1((6.0 * std::pow(v, 5) + 4.0 * std::pow(v, 7)) / (q * q));
  };
  sd.theta_dt = [](const Vector&, double) { return 0.0; };
  sd.p = [](double tau) { return 10.0 * std::cos(tau); };
  sd.period = 2.0 * kPi;
  sd.p_max = 10.0;
  return sd;
}

TimeVaryingSystem cubic_system() {
  return scalar_system([](double x, double, double tau) {
    return -x * x * x + 10.0 * std::cos(tau) * x * x * x / (1.0 + x * x);
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Compatibility
// ---------------------------------------------------------------------------

TEST(Compatibility, LinearExamplePassesWithAdmissibleConstants) {
  // V = x^2/2, fbar = -x, delta = 2s: P1 needs c_bar <= 1/4, P3 needs c_bbar >= 2.
  const auto report = check_compatibility(half_square(), scalar_limit([](double x, double) { return -x; }),
                                          linear_gauge(2.0), {.c_bar = 0.2, .c_bbar = 2.0}, grid1());
  EXPECT_TRUE(report.passed) << report.diagnostic;
  ASSERT_EQ(report.parts.size(), 3u);
  EXPECT_EQ(report.parts[0].check_name, "compatibility.P1");
}

TEST(Compatibility, TooLargeDecayConstantFailsP1) {
  const auto report = check_compatibility(half_square(), scalar_limit([](double x, double) { return -x; }),
                                          linear_gauge(2.0), {.c_bar = 0.3, .c_bbar = 2.0}, grid1());
  EXPECT_FALSE(report.passed);
  EXPECT_FALSE(report.parts[0].passed);
  EXPECT_TRUE(report.parts[1].passed);
  EXPECT_TRUE(report.parts[2].passed);
}

TEST(Compatibility, TooSmallLinearBoundFailsP3) {
  const auto report = check_compatibility(half_square(), scalar_limit([](double x, double) { return -x; }),
                                          linear_gauge(2.0), {.c_bar = 0.2, .c_bbar = 1.9}, grid1());
  EXPECT_FALSE(report.parts[2].passed);
  // delta(s) - 1.9 s = 0.1 s, worst at the largest radius.
  EXPECT_NEAR(report.parts[2].worst_margin, 0.1 * 100.0 / 190.0, 1e-12);
}

TEST(Compatibility, FastFieldFailsP2) {
  const auto report = check_compatibility(half_square(), scalar_limit([](double x, double) { return -3.0 * x; }),
                                          linear_gauge(2.0), {.c_bar = 0.2, .c_bbar = 2.0}, grid1());
  EXPECT_FALSE(report.parts[1].passed);
}

// ---------------------------------------------------------------------------
// Averaging bound
// ---------------------------------------------------------------------------

namespace {

// f - fbar = x cos(tau): the window integral is x [sin(eta^2 r + eta) - sin(eta^2 r - eta)] / eta^2.
double relate_lhs(double x, double r, double eta) {
  const double a = eta * eta;
  return std::abs(x * (std::sin(a * r + eta) - std::sin(a * r - eta)) / a);
}

}  // namespace

TEST(Relate, ClosedFormBoundPasses) {
  const auto sys = scalar_system([](double x, double, double tau) { return -x + x * std::cos(tau); });
  const auto lim = scalar_limit([](double x, double) { return -x; });
  const Gauge N{[](double eta) { return 2.0 / (eta * eta); }, GaugeClass::M, "2/eta^2"};
  const auto grid = relate_grid(1, 1.0, 100.0);
  const auto out = check_relate(sys, lim, linear_gauge(2.0), N, grid);
  EXPECT_TRUE(out.report.passed) << out.report.worst_margin;
  EXPECT_LE(out.worst_ratio, 1.0 + 1e-9);
  for (double e : out.eta0_per_state) EXPECT_EQ(e, grid.eta_values.front());
}

TEST(Relate, Eta0MatchesClosedForm) {
  const auto sys = scalar_system([](double x, double, double tau) { return -x + x * std::cos(tau); });
  const auto lim = scalar_limit([](double x, double) { return -x; });
  const Gauge N{[](double eta) { return 0.2 / eta; }, GaugeClass::M, "0.2/eta"};
  const auto grid = relate_grid(1, 1.0, 100.0, 42, 2, 5, 17);
  const auto out = check_relate(sys, lim, linear_gauge(2.0), N, grid);
  ASSERT_EQ(out.eta0_per_state.size(), grid.states.size());
  for (std::size_t i = 0; i < grid.states.size(); ++i) {
    const double x = grid.states[i](0);
    double expected = kInf;
    for (std::size_t j = grid.eta_values.size(); j-- > 0;) {
      const double eta = grid.eta_values[j];
      double worst = 0.0;
      for (double r : grid.r_values) worst = std::max(worst, relate_lhs(x, r, eta) / (std::abs(x) * N(eta)));
      if (worst - 1.0 > 1e-3) break;
      expected = eta;
    }
    EXPECT_EQ(out.eta0_per_state[i], expected) << "state " << x;
  }
  EXPECT_GT(out.empirical_eta0, 1.0);
  EXPECT_LE(out.empirical_eta0, 10.0 + 1e-9);
  EXPECT_FALSE(out.report.passed);
}

TEST(Relate, GridBelowEta0Rejected) {
  RelateCheckGrid g{{vec1(1.0)}, {0.0}, {0.5, 1.0}};
  EXPECT_THROW(g.validate(1.0), std::invalid_argument);
  EXPECT_NO_THROW(g.validate(0.5));
}

// ---------------------------------------------------------------------------
// Jacobian and growth bounds
// ---------------------------------------------------------------------------

TEST(M16, CubicWithinUnitBallPasses) {
  const auto sys = scalar_system([](double x, double, double) { return -x * x * x; });
  const auto lim = scalar_limit([](double x, double) { return -x * x * x; });
  const Gauge delta{[](double s) { return 8.0 * s * s * s; }, GaugeClass::K_infinity, "8s^3"};
  EXPECT_TRUE(check_m16(sys, lim, delta, 3.0, grid1(0)).passed);
}

TEST(M16, CubicOnLargeGridFailsAnyFiniteK) {
  const auto sys = cubic_system();
  const auto lim = scalar_limit([](double x, double) { return -x * x * x; });
  const Gauge delta{[](double s) { return 88.0 * s * s * s; }, GaugeClass::K_infinity, "88s^3"};
  for (double K : {10.0, 1e3}) {
    const auto r = check_m16(sys, lim, delta, K, grid1(2));
    EXPECT_FALSE(r.passed);
    EXPECT_FALSE(r.parts[0].passed);
    EXPECT_TRUE(r.parts[2].passed);
  }
}

// ---------------------------------------------------------------------------
// Relaxed averaging rate
// ---------------------------------------------------------------------------

TEST(RelaxedN, BoundArithmetic) {
  // K = 2, lambda = 1, D = 2: Theta = 2 sqrt 2, bound = 1 / (22 (2 sqrt 2 - 1)).
  EXPECT_NEAR(relaxed_N_bound({}), 1.0 / (22.0 * (2.0 * std::sqrt(2.0) - 1.0)), 1e-15);
  EXPECT_THROW((void)relaxed_N_bound({.K = 1.0}), std::invalid_argument);
}

TEST(RelaxedN, InverseSquareNeedsLargeEtaStar) {
  const Gauge N{[](double eta) { return 60.0 / (eta * eta); }, GaugeClass::M, "60/eta^2"};
  const auto at10 = check_relaxed_N(N, {}, 10.0);
  EXPECT_FALSE(at10.passed);
  EXPECT_DOUBLE_EQ(at10.worst_point.aux, 10.0);
  EXPECT_NEAR(at10.worst_margin, 6.0 - relaxed_N_bound({}), 1e-12);
  EXPECT_FALSE(check_relaxed_N(N, {}, 1e3).passed);
  EXPECT_TRUE(check_relaxed_N(N, {}, 1e4).passed);
}

// ---------------------------------------------------------------------------
// Strictification hypotheses
// ---------------------------------------------------------------------------

TEST(AssumptionH, CubicExampleHolds) {
  const auto out = check_assumption_H(cubic_data(), cubic_system(), grid1(1, 16));
  EXPECT_TRUE(out.report.passed) << out.report.diagnostic;
  // V/|Theta| = (1 + x^2)/(4 x^2) > 1/4 bounds c from above.
  EXPECT_GT(out.derived_c, 0.0);
  EXPECT_LT(out.derived_c, 0.25);
  EXPECT_NEAR(out.alpha_bound, 8.0 * 2.0 * kPi * 10.0 / out.derived_c, 1e-9 * out.alpha_bound);
}

TEST(AssumptionH, DerivedConstantStableUnderRefinement) {
  const auto coarse = check_assumption_H(cubic_data(), cubic_system(), grid1(1, 16));
  AssumptionHOptions fine_opts;
  fine_opts.tau_per_period = 65;
  const auto fine = check_assumption_H(cubic_data(), cubic_system(), grid1(1, 32), fine_opts);
  EXPECT_LE(std::abs(fine.derived_c - coarse.derived_c), 0.05 * coarse.derived_c);
}

TEST(AssumptionH, DeclaredConstantAboveDerivedFails) {
  auto sd = cubic_data();
  const double c = check_assumption_H(sd, cubic_system(), grid1(1)).derived_c;
  sd.c = 0.5 * c;
  const auto ok = check_assumption_H(sd, cubic_system(), grid1(1));
  EXPECT_TRUE(ok.report.passed);
  EXPECT_NEAR(ok.alpha_bound, 8.0 * 2.0 * kPi * 10.0 / (0.5 * c), 1e-9 * ok.alpha_bound);
  sd.c = 2.0 * c;
  EXPECT_FALSE(check_assumption_H(sd, cubic_system(), grid1(1)).report.passed);
}

TEST(AssumptionH, OverstatedWFailsH1) {
  auto sd = cubic_data();
  sd.W = [](const Vector& x, double) { return 2.0 * std::pow(x(0), 6); };
  const auto out = check_assumption_H(sd, cubic_system(), grid1(1));
  EXPECT_FALSE(out.report.parts[0].passed);
}

TEST(AssumptionH, NonzeroMeanFailsH2) {
  auto sd = cubic_data();
  sd.p = [](double tau) { return 0.1 + 10.0 * std::cos(tau); };
  const auto out = check_assumption_H(sd, cubic_system(), grid1(1));
  EXPECT_FALSE(out.report.parts[1].passed);
  EXPECT_NEAR(out.report.parts[1].worst_margin, 0.2 * kPi, 1e-9);
}

TEST(Bounda, CosineAndSquareWavePass) {
  const auto ts = linspace(0.0, 5.0, 7);
  EXPECT_TRUE(check_bounda([](double u) { return 10.0 * std::cos(u); }, 2.0 * kPi, 10.0, 1e3, ts, 33).passed);
  const auto square = [](double u) { return std::sin(u) >= 0.0 ? 1.0 : -1.0; };
  const auto r = check_bounda(square, 2.0 * kPi, 1.0, 1e3, ts, 33);
  EXPECT_TRUE(r.passed);
  // |int p| never exceeds pi; the jumps inflate the margin slightly.
  EXPECT_LE(r.worst_margin, kPi + 0.5 - 4.0 * kPi);
}

TEST(Bounda, NonzeroMeanFails) {
  const auto r = check_bounda([](double) { return 1.0; }, 2.0 * kPi, 1.0, 1e3, {1.0}, 9);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.worst_margin, 1e3 - 4.0 * kPi, 1e-8);
}

// ---------------------------------------------------------------------------
// Decay along trajectories
// ---------------------------------------------------------------------------

namespace {

TimeVaryingSystem linear(double rate) {
  return scalar_system([rate](double x, double, double) { return -rate * x; });
}

ScalarFieldFn half_square_field() {
  return [](const Vector& x, double) { return 0.5 * x.squaredNorm(); };
}

}  // namespace

TEST(TrajectoryRate, FivePointAccuracy) {
  const auto traj = integrate(linear(1.0), 1.0, vec1(2.0), 0.0, 3.0);
  for (std::size_t i : {2ul, 100ul, traj.size() - 3}) {
    const double x = traj.states[i](0);
    EXPECT_NEAR(trajectory_rate(traj, half_square_field(), i), -x * x, 1e-7 * x * x);
  }
  EXPECT_NEAR(trajectory_rate(traj, half_square_field(), 0), -4.0, 0.1);
}

TEST(CertifyDecay, LinearDecayMeetsHalfRate) {
  const auto traj = integrate(linear(1.0), 1.0, vec1(1.0), 0.0, 20.0);
  const DecayFloor half_w = [](const Vector& x, double) { return 0.5 * x.squaredNorm(); };
  const auto report = certify_decay(traj, half_square_field(), half_w);
  EXPECT_TRUE(report.passed);
  EXPECT_GT(report.samples_total, 100);
  // e^{-t} <= 1e-4 after t = ln 1e4, so later samples are skipped.
  EXPECT_LT(report.samples_total, static_cast<std::int64_t>(0.5 * traj.size()));
}

TEST(CertifyDecay, TooStrongFloorFails) {
  const auto traj = integrate(linear(1.0), 1.0, vec1(1.0), 0.0, 5.0);
  const DecayFloor floor = [](const Vector& x, double) { return 2.0 * x.squaredNorm(); };
  const auto report = certify_decay(traj, half_square_field(), floor);
  EXPECT_FALSE(report.passed);
  EXPECT_NEAR(report.worst_margin, traj.states[2].squaredNorm(), 1e-6);
}

TEST(CertifyDecay, AlphaMismatchRejected) {
  const auto traj = integrate(linear(1.0), 2.0, vec1(1.0), 0.0, 1.0);
  const auto L = closed_form(half_square_field(), 3.0);
  EXPECT_THROW((void)certify_decay(traj, L, strictification_floor(half_square_field())), std::invalid_argument);
}

TEST(CertifyDecay, DivergenceIsAFailedVerdict) {
  const auto sys = scalar_system([](double x, double, double) { return x * x; });
  const auto L = closed_form(half_square_field(), 1.0);
  const auto report = certify_decay_at(sys, L, {vec1(1.0)}, strictification_floor(half_square_field()), {.t_end = 5.0});
  EXPECT_FALSE(report.passed);
  EXPECT_NE(report.diagnostic.find("blow-up"), std::string::npos);
}

TEST(Sweep, IdenticalFieldsPassEverywhere) {
  const auto sys = linear(1.0);
  const auto lim = scalar_limit([](double x, double) { return -x; });
  const auto builder = [&](double alpha) { return v_alpha(half_square(), sys, lim, alpha); };
  const auto grid = alpha_grid(1.0, 8.0);
  ASSERT_EQ(grid.size(), 4u);
  DecayOptions opts;
  opts.max_samples = 50;
  const auto out = sweep_alpha(builder, sys, {vec1(1.0), vec1(-2.0)}, grid, limiting_shift_floor(linear_gauge(2.0), 0.2),
                               {.t_end = 3.0}, opts);
  ASSERT_TRUE(out.threshold.has_value());
  EXPECT_EQ(*out.threshold, 1.0);
  EXPECT_TRUE(out.monotone);
}

TEST(Sweep, ThresholdNeedsTwoPassingSuccessors) {
  // L = (x^2/2) e^{k t} along x' = -x with floor x^2/2 passes iff k <= 1.
  const auto sys = linear(1.0);
  auto make = [](double k, double alpha) {
    return closed_form([k](const Vector& x, double t) { return 0.5 * x.squaredNorm() * std::exp(k * t); }, alpha);
  };
  const DecayFloor floor = [](const Vector& x, double) { return 0.5 * x.squaredNorm(); };
  DecayOptions opts;
  opts.max_samples = 40;
  const auto grid = alpha_grid(1.0, 256.0);

  const auto monotone = sweep_alpha([&](double a) { return make(8.0 / a, a); }, sys, {vec1(1.0)}, grid, floor,
                                    {.t_end = 2.0}, opts);
  ASSERT_TRUE(monotone.threshold.has_value());
  EXPECT_EQ(*monotone.threshold, 8.0);
  EXPECT_TRUE(monotone.monotone);
  EXPECT_EQ(monotone.verdicts[3].worst_point.aux, 8.0);

  const auto broken = sweep_alpha([&](double a) { return make(a == 32.0 ? 8.0 : 8.0 / a, a); }, sys, {vec1(1.0)},
                                  grid, floor, {.t_end = 2.0}, opts);
  ASSERT_TRUE(broken.threshold.has_value());
  EXPECT_EQ(*broken.threshold, 64.0);
  EXPECT_FALSE(broken.monotone);
}

// ---------------------------------------------------------------------------
// Input-to-state certificates
// ---------------------------------------------------------------------------

TEST(Iss, GainConditionImpliesDecay) {
  // x' = -x + u with |u| <= |x|/4 gives V' <= -(3/4) x^2.
  const auto sys = linear(1.0);
  const auto L = closed_form(half_square_field(), 1.0);
  const Gauge chi{[](double s) { return 0.25 * s; }, GaugeClass::K_infinity, "s/4"};
  const InputSignal u = [](double t) { return vec1(0.3 * std::sin(3.0 * t)); };
  const auto out = iss_gain_test(sys, L, chi, strictification_floor(half_square_field()), {u},
                                 {vec1(1.0), vec1(-2.0), vec1(0.5)}, {.t_end = 8.0});
  EXPECT_TRUE(out.report.passed);
  EXPECT_GT(out.decay_evaluations, 0);
  EXPECT_GT(out.gain_excluded, 0);
  EXPECT_EQ(out.evaluated_outside_gain, 0);
  EXPECT_EQ(out.report.samples_total, out.decay_evaluations);
}

TEST(Iss, GenerousGainIsRefuted) {
  const auto sys = linear(1.0);
  const auto L = closed_form(half_square_field(), 1.0);
  const Gauge chi{[](double s) { return 4.0 * s; }, GaugeClass::K_infinity, "4s"};
  const InputSignal u = [](double) { return vec1(1.0); };
  const auto out = iss_gain_test(sys, L, chi, strictification_floor(half_square_field()), {u}, {vec1(1.0)},
                                 {.t_end = 5.0});
  EXPECT_FALSE(out.report.passed);
}

TEST(Iiss, YoungInequalityBound) {
  // V' = -x^2 + x u <= -x^2/2 + u^2/2, so r_bar <= 1/2.
  const auto sys = linear(1.0);
  const Gauge nu{[](double s) { return 0.5 * s * s; }, GaugeClass::K_infinity, "s^2/2"};
  std::vector<DrivenTrajectory> runs;
  for (double amp : {0.5, 2.0}) {
    const InputSignal u = [amp](double t) { return vec1(amp * std::cos(t)); };
    runs.push_back({integrate(sys, 1.0, vec1(1.0), 0.0, 10.0, u), u});
  }
  const auto est = iiss_estimate(half_square_field(), nu, runs);
  EXPECT_GT(est.samples_used, 0);
  EXPECT_LE(est.r_bar, 0.5 + 1e-6);
  EXPECT_GT(est.r_bar, 0.0);
}

// ---------------------------------------------------------------------------
// Envelope fitting
// ---------------------------------------------------------------------------

TEST(Envelope, LinearDecayRecoversRate) {
  std::vector<Trajectory> trajs;
  for (double x0 : {1.0, -3.0, 0.2}) trajs.push_back(integrate(linear(2.0), 1.0, vec1(x0), 0.0, 10.0));
  const auto fit = fit_envelope(trajs);
  EXPECT_NEAR(fit.lambda, 2.0, 1e-3);
  EXPECT_GE(fit.D, 1.0);
  EXPECT_LE(fit.D, 1.01);
  EXPECT_LE(fit.residual, 1e-12);
}

TEST(Envelope, DampedOscillatorEnvelopeHolds) {
  TimeVaryingSystem sys;
  sys.dim = 2;
  sys.f = [](const Vector& x, double, double) {
    Vector r(2);
    r << -0.1 * x(0) + 2.0 * x(1), -0.5 * x(0) - 0.1 * x(1);
    return r;
  };
  Vector x0(2);
  x0 << 1.0, 0.0;
  const auto traj = integrate(sys, 1.0, x0, 0.0, 200.0);
  const auto fit = fit_envelope({traj});
  EXPECT_NEAR(fit.lambda, 0.1, 0.01);
  EXPECT_GE(fit.D, 1.0);
  EXPECT_LE(fit.residual, 1e-12);
}

TEST(Envelope, RefusesAlgebraicDecay) {
  const auto traj = integrate(scalar_system([](double x, double, double) { return -x * x * x; }), 1.0, vec1(1.0), 0.0,
                              20.0);
  EXPECT_THROW((void)fit_envelope({traj}), EnvelopeRefusal);
}

TEST(Envelope, FixedRateConstantGrowsWithSupersets) {
  const auto sys = scalar_system([](double x, double t, double) { return -(1.0 + 0.8 * std::sin(t)) * x; });
  std::vector<Trajectory> trajs;
  EnvelopeOptions opts;
  opts.fixed_lambda = 0.9;
  double prev = 0.0;
  SeededStream rng(42);
  for (int i = 0; i < 6; ++i) {
    trajs.push_back(integrate(sys, 1.0, vec1(rng.uniform(-2.0, 2.0)), rng.uniform(0.0, 6.0) , 25.0));
    const auto fit = fit_envelope(trajs, opts);
    EXPECT_GE(fit.D, prev);
    EXPECT_LE(fit.residual, 1e-12);
    prev = fit.D;
  }
}
