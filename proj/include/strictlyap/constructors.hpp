/**
 * @file constructors.hpp
 * @brief Explicit strict Lyapunov functions for x' = f(x, t, alpha t).
 *
 * Two constructions are provided:
 *  - limiting shift: V^[alpha](xi, t) = V(xi + R_alpha(xi, t), t), where V is a
 *    Lyapunov function of the limiting dynamics and
 *    R_alpha(xi, t) = -(eta/2) int_{t-2/eta}^{t} int_{s}^{t} [f(xi, l, eta^2 l) - fbar(xi, l)] dl ds,
 *    eta = sqrt(alpha);
 *  - strictification: U^[alpha](x, t) = V(x, t) - Phi_alpha(t) Theta(x, t), with
 *    Phi_alpha(t) = int_{t-1}^{t} int_{s}^{t} p(alpha l) dl ds.
 */
#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "strictlyap/params.hpp"
#include "strictlyap/quadrature.hpp"
#include "strictlyap/systems.hpp"

namespace strictlyap {

enum class Construction { limiting_shift, strictification, closed_form };

[[nodiscard]] const char* to_string(Construction c);

/// Quadrature settings used inside constructed functions.
[[nodiscard]] QuadratureConfig construction_quadrature();

/// Source objects a constructed function was built from.
struct Ingredients {
  std::optional<LyapunovCandidate> V;
  std::optional<TimeVaryingSystem> sys;
  std::optional<LimitingSystem> lim;
  std::optional<StrictificationData> strictification;
};

/// An explicit Lyapunov function for a fixed alpha. Derivatives are central
/// differences on the evaluation.
class ConstructedLyapunov {
 public:
  using EvalFn = std::function<double(const Vector&, double)>;

  ConstructedLyapunov(EvalFn eval, double alpha, Construction kind, std::shared_ptr<const Ingredients> ingredients);

  double operator()(const Vector& x, double t) const { return eval_(x, t); }
  [[nodiscard]] Vector grad_x(const Vector& x, double t) const;
  [[nodiscard]] double dt(const Vector& x, double t) const;

  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] Construction construction() const { return kind_; }
  [[nodiscard]] const Ingredients& ingredients() const { return *ingredients_; }

  [[nodiscard]] ScalarFieldFn as_field() const { return eval_; }
  [[nodiscard]] LyapunovCandidate as_candidate() const;

 private:
  EvalFn eval_;
  double alpha_;
  Construction kind_;
  std::shared_ptr<const Ingredients> ingredients_;
};

/// Displacement R_alpha(x, t) with x frozen inside the integrand.
[[nodiscard]] Vector r_alpha(const Vector& x, double t, double alpha, const TimeVaryingSystem& sys,
                             const LimitingSystem& lim, const QuadratureConfig& cfg = construction_quadrature());

[[nodiscard]] ConstructedLyapunov v_alpha(const LyapunovCandidate& V, const TimeVaryingSystem& sys,
                                          const LimitingSystem& lim, double alpha,
                                          const QuadratureConfig& cfg = construction_quadrature());

/// Phi_alpha(t) = int_{t-1}^{t} int_{s}^{t} p(alpha l) dl ds by one Fubini
/// quadrature over the whole window.
[[nodiscard]] double strictification_weight_direct(const ScalarFn& p, double period, double alpha, double t,
                                                   const QuadratureConfig& cfg = construction_quadrature());

/// int_0^T p and int_0^T v p(v) dv.
struct PeriodMoments {
  double mean_integral = 0.0;
  double first_moment = 0.0;
};

[[nodiscard]] PeriodMoments period_moments(const ScalarFn& p, double period,
                                           const QuadratureConfig& cfg = construction_quadrature());

/// Phi_alpha(t) for a T-periodic p. Once the window alpha covers four periods,
/// whole periods are summed from the moments and only the two partial periods
/// are integrated, so the cost does not grow with alpha.
[[nodiscard]] double strictification_weight(const ScalarFn& p, double period, double alpha, double t,
                                            const PeriodMoments& moments,
                                            const QuadratureConfig& cfg = construction_quadrature());
[[nodiscard]] double strictification_weight(const ScalarFn& p, double period, double alpha, double t,
                                            const QuadratureConfig& cfg = construction_quadrature());

/// U^[alpha]. Phi_alpha depends on t only and is memoised per exact t value;
/// the memo is shared by copies and guarded by a mutex.
[[nodiscard]] ConstructedLyapunov u_alpha(const StrictificationData& sd, double alpha,
                                          const QuadratureConfig& cfg = construction_quadrature());

/// chi(s) = (c_bar/4) delta(s/2).
[[nodiscard]] Gauge chi_gain(const Gauge& delta, double c_bar);

/// chi(s) = c_bar delta(s/2) / (4 (c_o + sqrt(delta(s/2)))) for input maps with
/// ||g(x, t, tau)|| <= c_o + sqrt(delta(|x|/2)).
[[nodiscard]] Gauge chi_gain_with_g(const Gauge& delta, double c_bar, double c_o);

class ExcitationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// kappa = c~/(2|f*|) + c~^4 |f*| / (4 alpha').
[[nodiscard]] double pe_kappa(double f_star, double c_tilde, double alpha_prime);

/// int_{t}^{t + c~} m m^T.
[[nodiscard]] Matrix excitation_gram(const SignalFn& m, double t, double c_tilde,
                                     const QuadratureConfig& cfg = construction_quadrature());

/// P(t) = kappa I + int_{t-c~}^{t} int_{s}^{t} m m^T dl ds.
[[nodiscard]] Matrix pe_matrix(const SignalFn& m, double c_tilde, double kappa, double t,
                               const QuadratureConfig& cfg = construction_quadrature());

/// V(x, t) = x^T P(t) x with gradient 2 P(t) x and V_t = x^T P'(t) x.
/// Throws ExcitationError when the sampled Gram matrix drops below alpha' I.
[[nodiscard]] LyapunovCandidate pe_lyapunov(const SignalFn& m, double f_star, double c_tilde, double alpha_prime,
                                            const QuadratureConfig& cfg = construction_quadrature());

struct FrictionLyapunov {
  LyapunovCandidate V;
  double A = 0.0;
  double S = 0.0;
  double b = 0.0;
};

/// V(x, t) = A (k(t) x1^2 + x2^2) + x1 x2 with
/// S = s~1 + (s~2 + s~3) beta2, A = 1 + 1/k_o + (1 + S^2/k_o)/s~1, b = min(k_o/2, A s~1 - 1/2).
[[nodiscard]] FrictionLyapunov friction_lyapunov(const FrictionParams& params);

}  // namespace strictlyap
