/**
 * @file examples.hpp
 * @brief Registry of the worked example systems, each bundled with its
 *        limiting dynamics, Lyapunov ingredients, gauges and the list of
 *        checks it is expected to pass.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "strictlyap/constructors.hpp"
#include "strictlyap/params.hpp"
#include "strictlyap/verifiers.hpp"

namespace strictlyap {

/// Comparison functions and constants attached to a bundle.
struct GaugeSet {
  std::optional<Gauge> delta;
  std::optional<Gauge> N;
  std::optional<Gauge> chi;
  /// iISS decay nu(s) = delta^2(s/2) c_bar / 4.
  std::optional<Gauge> nu;
  std::optional<CompatibilityConstants> constants;
  /// Constant c_o of the input-map bound ||g|| <= c_o + sqrt(delta(|x|/2)).
  std::optional<double> c_o;
};

/// Check names understood by run_check.
namespace checks {
inline constexpr const char* validate_system = "validate_system";
inline constexpr const char* compatibility = "compatibility";
inline constexpr const char* relate = "relate";
inline constexpr const char* m16 = "m16";
inline constexpr const char* assumption_H = "assumption_H";
inline constexpr const char* bounda = "bounda";
inline constexpr const char* limiting_decay = "limiting_decay";
inline constexpr const char* decay = "decay";
inline constexpr const char* iss = "iss";
inline constexpr const char* iiss = "iiss";
inline constexpr const char* envelope = "envelope";
}  // namespace checks

struct ExampleBundle {
  std::string name;
  std::string description;
  TimeVaryingSystem sys;
  std::optional<LimitingSystem> lim;
  LyapunovCandidate V;
  GaugeSet gauges;
  std::optional<StrictificationData> strictification;
  Construction route = Construction::limiting_shift;
  LyapunovBuilder builder;
  DecayFloor decay_floor;
  /// Decay floor of the limiting system, used by the limiting_decay check.
  DecayFloor limiting_floor;

  std::optional<FrictionParams> friction;
  std::optional<IdentificationParams> identification;
  std::optional<SaturatedFeedbackParams> saturated_feedback;

  /// Checks this bundle should pass on default grids and seeds.
  std::vector<std::string> expected;
  /// Parameter sanity checks run at construction (they do not throw).
  std::vector<CertificateReport> preconditions;
  std::vector<std::string> notes;

  /// Simulation defaults.
  double alpha_default = 1e3;
  /// Construction requires alpha > alpha_floor.
  double alpha_floor = 0.0;
  double ic_lo = -2.0;
  double ic_hi = 2.0;
  double t_end = 10.0;
  /// Amplitude of the probing input eps sin(t) used by the iss check.
  double iss_epsilon = 0.0;
  /// Jacobian bound K used by the m16 check.
  double K = 0.0;
  /// Upper end of the eta range of the relate check.
  double relate_eta_max = 1e3;
};

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

struct NonUgesOptions {
  ScalarFn sigma1_prime;
  ScalarFn sigma2_prime;
  CompatibilityConstants constants{.c_bar = 2e-4, .c_bbar = 66.0, .K = 51.0, .eta_0 = 1.0};
  /// Declared bound on |sigma1'| + |sigma1 sigma2'| checked on the grid.
  double derivative_bound = 10.0;
  /// Class of delta(s) = 33 sigma1(2s).
  GaugeClass delta_class = GaugeClass::K;
  std::string name = "nonuges";
};

/// x' = -sigma1(x) [2 + sin(t + cos(sigma2(x)))] {1 + 10 sin(alpha t)} (+ u).
[[nodiscard]] ExampleBundle example_non_uges(const ScalarFn& sigma1, const ScalarFn& sigma2,
                                             const NonUgesOptions& options = {});

/// sigma1 = sigma2 = atan.
[[nodiscard]] ExampleBundle example_non_uges();

/// sgn(s) ln(1 + |s|) for |s| >= 1 and the odd cubic a s + b s^3 matching
/// value and slope at |s| = 1 inside.
[[nodiscard]] double sigma_lnk(double s);
[[nodiscard]] double sigma_lnk_prime(double s);

/// sigma1 = sigma_lnk, sigma2 = atan; delta is of class K_infinity.
[[nodiscard]] ExampleBundle example_non_uges_lnk();

/// x' = f(alpha t) m m^T x + g u with V = 2 x^T P x / alpha'.
[[nodiscard]] ExampleBundle example_identification(const IdentificationParams& params = IdentificationParams::defaults());

/// Mass-spring system with fast friction coefficients.
[[nodiscard]] ExampleBundle example_friction(const FrictionParams& params = FrictionParams::defaults());

/// Closed form of V^[alpha] when sigma_2, sigma_3 are constant:
/// V(xi_1, xi_2 (1 + (sqrt(alpha)/2) int int (sigma_1(alpha l) - sigma~_1)), t).
[[nodiscard]] ConstructedLyapunov friction_const_v_alpha(const FrictionParams& params, double alpha,
                                                         const QuadratureConfig& cfg = construction_quadrature());

/// x' = -x^3 + 10 cos(alpha t) x^3/(1 + x^2).
[[nodiscard]] ExampleBundle example_ngs();

/// x' = p(alpha t) x^2/(1 + x^2) - u_m atan(R x).
[[nodiscard]] ExampleBundle example_saturated_feedback(
    const SaturatedFeedbackParams& params = SaturatedFeedbackParams{});

// ---------------------------------------------------------------------------
// Registry and pipeline
// ---------------------------------------------------------------------------

struct BundleInfo {
  std::string name;
  std::string description;
};

[[nodiscard]] std::vector<BundleInfo> list_bundles();

class UnknownBundle : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Builds a registered bundle; throws UnknownBundle for other names.
[[nodiscard]] ExampleBundle make_bundle(const std::string& name);

/// Bundle from a JSON description whose formulas are expression strings (see
/// expression.hpp). Keys: name, description, dim, f[], fbar[], V, delta (in s),
/// N (in eta), constants{c_bar, c_bbar, K, eta_0}, K, strictification{V, W,
/// theta, p (in tau), period, p_max, c}, alpha, ic[lo, hi], t_end.
/// Throws std::invalid_argument on malformed descriptions.
[[nodiscard]] ExampleBundle custom_bundle_from_json(const std::string& text);
[[nodiscard]] ExampleBundle load_custom_bundle(const std::string& path);

struct RunOptions {
  double alpha = 1e3;
  std::uint64_t seed = 42;
  int n_initial = 10;
  /// Overrides the bundle's horizon when set.
  std::optional<double> t_end;
  GridOptions grid{};
  DecayOptions decay{};
  StepConfig step{};
  /// Number of eta samples in the relate check.
  int relate_eta_samples = 13;
};

/// Seeded initial conditions of the bundle's dimension in [ic_lo, ic_hi].
[[nodiscard]] std::vector<Vector> bundle_initial_conditions(const ExampleBundle& b, int count, std::uint64_t seed);

/// Runs one named check. Throws std::invalid_argument for names that do not
/// apply to the bundle.
[[nodiscard]] CertificateReport run_check(const ExampleBundle& b, const std::string& check, const RunOptions& opts);

/// True when `check` can be run on the bundle.
[[nodiscard]] bool check_applies(const ExampleBundle& b, const std::string& check);

}  // namespace strictlyap
