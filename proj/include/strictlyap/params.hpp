#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "strictlyap/systems.hpp"

namespace strictlyap {

/// Mass-spring system with time-varying viscous, Coulomb and static friction.
/// Defaults are artifact choices; the model leaves them free.
struct FrictionParams {
  std::array<double, 3> sigma_tilde{1.0, 0.5, 0.3};
  double beta1 = 1.0;
  double beta2 = 10.0;
  /// Stribeck shape, positive definite with bounded derivative.
  ScalarFn mu = [](double v) { return v * v / (1.0 + v * v); };
  ScalarFn mu_prime = [](double v) { return 2.0 * v / ((1.0 + v * v) * (1.0 + v * v)); };
  /// Spring stiffness k(t) in [k_o, k_bar], nonincreasing.
  ScalarFn k = [](double t) { return 1.0 + std::exp(-t); };
  ScalarFn k_prime = [](double t) { return -std::exp(-t); };
  double k_o = 1.0;
  double k_bar = 2.0;
  /// Fast coefficients sigma_i(tau); default sigma~_i (1 + sin(tau) / 2).
  std::array<ScalarFn, 3> sigma{};
  /// True when sigma_2 and sigma_3 are the constants sigma~_2, sigma~_3.
  bool constant_coulomb_static = false;

  [[nodiscard]] static FrictionParams defaults();
  [[nodiscard]] static FrictionParams constant_coulomb_static_defaults();

  [[nodiscard]] double sat(double v) const { return std::tanh(beta2 * v); }

  /// Throws std::invalid_argument on sampled violations (k bounds, k' > 0,
  /// nonpositive sigma~_1, saturation properties).
  void validate() const;
};

/// Linear regression-type system x' = f(alpha t) m(t) m(t)^T x + g u.
struct IdentificationParams {
  ScalarFn f_fast = [](double tau) { return -1.0 + 2.0 * std::sin(tau); };
  double f_star = -1.0;
  SignalFn m = [](double t) {
    Vector v(2);
    v << std::cos(t), std::sin(t);
    return v;
  };
  double c_tilde = 2.0 * std::numbers::pi;
  double alpha_prime = std::numbers::pi;
  double beta_prime = std::numbers::pi;
  /// Input map with ||g|| <= beta' (1 + sqrt|x|); empty disables the input.
  JacobianFn g;
  int input_dim = 0;

  [[nodiscard]] static IdentificationParams defaults();

  /// Throws std::invalid_argument when f_star >= 0, |m| != 1, the sampled
  /// mean of f_fast misses f_star, or the input bound fails on samples.
  void validate() const;
};

/// x' = p(alpha t) x^2/(1+x^2) + u closed with u = -u_m atan(R x).
struct SaturatedFeedbackParams {
  ScalarFn p = [](double tau) { return 10.0 * std::cos(tau); };
  double period = 2.0 * std::numbers::pi;
  double a_m = 10.0;
  double u_m = 2.0;
  double gain = 1.0;

  void validate() const;
};

}  // namespace strictlyap
