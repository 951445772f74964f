/**
 * @file verifiers.hpp
 * @brief Falsification checks of the construction hypotheses, decay and ISS
 *        certification along simulated trajectories, envelope fitting and
 *        alpha sweeps.
 *
 * Every check samples a universally quantified inequality LHS <= RHS and
 * reports the largest sampled LHS - RHS (scaled where stated) together with
 * the point where it occurs. A pass means "not refuted on this grid".
 */
#pragma once

#include <optional>
#include <vector>

#include "strictlyap/constructors.hpp"
#include "strictlyap/ode.hpp"
#include "strictlyap/quadrature.hpp"
#include "strictlyap/sampling.hpp"
#include "strictlyap/systems.hpp"

namespace strictlyap {

/// Margin of a bound LHS <= RHS scaled by max(1, |RHS|).
[[nodiscard]] inline double scaled_margin(double lhs, double rhs) {
  return (lhs - rhs) / std::max(1.0, std::abs(rhs));
}

/// Default tolerance on scaled margins of pointwise hypotheses.
inline constexpr double kHypothesisTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Limiting-shift hypotheses
// ---------------------------------------------------------------------------

/// P1: V_t + V_x fbar <= -c_bar delta^2(|x|); P2: |V_x| <= delta(|x|) and
/// |fbar| <= delta(|x|/2); P3: delta(s) <= c_bbar s.
[[nodiscard]] CertificateReport check_compatibility(const LyapunovCandidate& V, const LimitingSystem& lim,
                                                    const Gauge& delta, const CompatibilityConstants& consts,
                                                    const SampleGrid& grid);

struct RelateCheckGrid {
  std::vector<Vector> states;
  std::vector<double> r_values;
  std::vector<double> eta_values;

  /// Throws std::invalid_argument when empty or some eta < eta_0.
  void validate(double eta_0) const;
};

/// Log-radial states, r on [0, r_max] and a geometric eta grid on [eta_lo, eta_hi].
[[nodiscard]] RelateCheckGrid relate_grid(int dim, double eta_lo, double eta_hi, std::uint64_t seed = 42,
                                          int per_decade = 4, int n_r = 5, int n_eta = 13, double r_max = 20.0);

struct RelateReport {
  /// Margin is the worst ratio LHS/RHS minus one.
  CertificateReport report;
  double worst_ratio = 0.0;
  /// Per state: smallest sampled eta from which the bound holds at every larger
  /// sampled eta (+inf if it fails at the largest).
  std::vector<double> eta0_per_state;
  /// Largest entry of eta0_per_state.
  double empirical_eta0 = kInf;
};

/// |int_{r-1/eta}^{r+1/eta} (f(x, l, eta^2 l) - fbar(x, l)) dl| <= delta(|x|/2) N(eta).
/// States with delta(|x|/2) N(eta) = 0 are skipped when the LHS vanishes and
/// fail otherwise.
[[nodiscard]] RelateReport check_relate(const TimeVaryingSystem& sys, const LimitingSystem& lim, const Gauge& delta,
                                        const Gauge& N, const RelateCheckGrid& grid,
                                        const QuadratureConfig& cfg = construction_quadrature(),
                                        double tolerance = 1e-3);

/// |df/dx| <= K, |dfbar/dx| <= K (spectral norm) and |f(x, t, tau)| <= delta(|x|/2).
[[nodiscard]] CertificateReport check_m16(const TimeVaryingSystem& sys, const LimitingSystem& lim, const Gauge& delta,
                                          double K, const SampleGrid& grid);

struct RelaxedNConstants {
  double K = 2.0;
  double lambda = 1.0;
  double D = 2.0;
  double c_bbar = 1.0;
};

/// (K - lambda) / (11 D (Theta - 1) c_bbar) with Theta = (sqrt(2) D)^(K/lambda - 1).
[[nodiscard]] double relaxed_N_bound(const RelaxedNConstants& c);

/// sup_{eta >= eta_star} eta N(eta) < relaxed_N_bound, sampled on a geometric
/// grid [eta_star, eta_star * 10^decades].
[[nodiscard]] CertificateReport check_relaxed_N(const Gauge& N, const RelaxedNConstants& consts, double eta_star,
                                                int decades = 6, int per_decade = 16);

// ---------------------------------------------------------------------------
// Strictification hypotheses
// ---------------------------------------------------------------------------

struct AssumptionHReport {
  CertificateReport report;
  /// min over the grid of V/|Theta|, W/|Theta| and W/|Theta_t + Theta_x f|.
  double derived_c = 0.0;
  /// 8 T p_max / c with c the declared constant when present, derived_c otherwise.
  double alpha_bound = kInf;
};

struct AssumptionHOptions {
  /// Fast times sampled over one period of p, in addition to grid.fast_times.
  int tau_per_period = 33;
  /// Tolerance on |int_{kT}^{(k+1)T} p|.
  double h2_tolerance = 1e-10;
};

/// H1 on states x times x fast times, H2 for k in {-2..2}, H3 via derived_c.
[[nodiscard]] AssumptionHReport check_assumption_H(const StrictificationData& sd, const TimeVaryingSystem& sys,
                                                   const SampleGrid& grid, const AssumptionHOptions& options = {});

/// |int_s^{alpha t} p| <= 2 T p_max for s in [alpha t - alpha, alpha t]. When
/// the quadrature does not converge the last estimate is used and the margin is
/// inflated by the gap between the last two estimates.
[[nodiscard]] CertificateReport check_bounda(const ScalarFn& p, double period, double p_max, double alpha,
                                             const std::vector<double>& t_samples, int s_per_t,
                                             const QuadratureConfig& cfg = {});

// ---------------------------------------------------------------------------
// Trajectory certificates
// ---------------------------------------------------------------------------

/// Required decay rate as a function of (x, t).
using DecayFloor = std::function<double(const Vector& x, double t)>;

/// (c_bar/2) delta^2(|x|/2).
[[nodiscard]] DecayFloor limiting_shift_floor(const Gauge& delta, double c_bar);

/// W(x, t)/2.
[[nodiscard]] DecayFloor strictification_floor(const ScalarFieldFn& W);

struct DecayOptions {
  /// Samples with |x| <= r_stop_fraction |x0| are skipped.
  double r_stop_fraction = 1e-4;
  double tolerance = 1e-6;
  /// Upper bound on evaluated samples per trajectory (a stride is chosen).
  std::size_t max_samples = 2000;
};

/// Rate of V along the stored samples at index i by the five-point centered
/// difference (three-point next to the ends). Requires uniform steps.
[[nodiscard]] double trajectory_rate(const Trajectory& traj, const ScalarFieldFn& V, std::size_t i);

/// V' + floor(x, t) <= tolerance at strided interior samples outside the stop ball.
[[nodiscard]] CertificateReport certify_decay(const Trajectory& traj, const ScalarFieldFn& V,
                                              const DecayFloor& decay_floor, const DecayOptions& options = {});

/// As above; throws std::invalid_argument when the trajectory and L use different alpha.
[[nodiscard]] CertificateReport certify_decay(const Trajectory& traj, const ConstructedLyapunov& L,
                                              const DecayFloor& decay_floor, const DecayOptions& options = {});

struct SimulationOptions {
  double t0 = 0.0;
  double t_end = 10.0;
  StepConfig step{};
};

using LyapunovBuilder = std::function<ConstructedLyapunov(double alpha)>;

/// Decay certificate over several initial conditions at one alpha. Divergence
/// makes the verdict fail with a diagnostic.
[[nodiscard]] CertificateReport certify_decay_at(const TimeVaryingSystem& sys, const ConstructedLyapunov& L,
                                                 const std::vector<Vector>& initial_conditions,
                                                 const DecayFloor& decay_floor, const SimulationOptions& sim = {},
                                                 const DecayOptions& options = {});

struct SweepResult {
  std::vector<double> alphas;
  std::vector<CertificateReport> verdicts;
  /// Smallest alpha that passes together with its two grid successors.
  std::optional<double> threshold;
  /// False when some alpha passes but a later one fails.
  bool monotone = true;
};

/// Geometric grid lo, lo*factor, ... <= hi.
[[nodiscard]] std::vector<double> alpha_grid(double lo = 1.0, double hi = 65536.0, double factor = 2.0);

[[nodiscard]] SweepResult sweep_alpha(const LyapunovBuilder& builder, const TimeVaryingSystem& sys,
                                      const std::vector<Vector>& initial_conditions,
                                      const std::vector<double>& alphas, const DecayFloor& decay_floor,
                                      const SimulationOptions& sim = {}, const DecayOptions& options = {});

struct IssReport {
  CertificateReport report;
  /// Samples where the decay inequality was evaluated.
  std::int64_t decay_evaluations = 0;
  /// Samples skipped because |u(t)| > chi(|x(t)|).
  std::int64_t gain_excluded = 0;
  /// Decay evaluations at samples violating the gain condition (always 0).
  std::int64_t evaluated_outside_gain = 0;
};

/// Pointwise implication |u(t)| <= chi(|x(t)|)  =>  V' <= -floor(x, t) along
/// trajectories of x' = f + g u driven by each signal from each initial condition.
[[nodiscard]] IssReport iss_gain_test(const TimeVaryingSystem& sys, const ConstructedLyapunov& L, const Gauge& chi,
                                      const DecayFloor& decay_floor, const std::vector<InputSignal>& inputs,
                                      const std::vector<Vector>& initial_conditions, const SimulationOptions& sim = {},
                                      const DecayOptions& options = {});

struct DrivenTrajectory {
  Trajectory traj;
  InputSignal u;
};

struct IissEstimate {
  double r_bar = 0.0;
  std::int64_t samples_used = 0;
  SamplePoint worst_point;
};

/// Smallest r_bar with V' <= -nu(|x|) + r_bar |u|^2 on the samples (u != 0),
/// clamped below at 0.
[[nodiscard]] IissEstimate iiss_estimate(const ScalarFieldFn& V, const Gauge& nu,
                                         const std::vector<DrivenTrajectory>& runs,
                                         const DecayOptions& options = {});

class EnvelopeRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnvelopeOptions {
  /// Trajectories must fall below decay_level |x0| within their horizon.
  double decay_level = 1e-6;
  int windows = 20;
  /// When set, lambda is fixed and only D is fitted.
  std::optional<double> fixed_lambda;
};

/// lambda by least squares on log windowed peaks of |x(t)|/|x0| (pooled over
/// trajectories), then the smallest D >= 1 making the envelope hold on every
/// sample.
[[nodiscard]] EnvelopeFit fit_envelope(const std::vector<Trajectory>& trajs, const EnvelopeOptions& options = {});

}  // namespace strictlyap
