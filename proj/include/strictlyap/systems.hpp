/**
 * @file systems.hpp
 * @brief Domain types for rapidly time-varying dynamics x' = f(x, t, alpha*t),
 *        their limiting dynamics, Lyapunov candidates and comparison functions.
 *
 * The fast time tau = alpha*t is always passed as a separate argument so a
 * single right-hand side serves every alpha of a sweep.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "strictlyap/certificate.hpp"
#include "strictlyap/sampling.hpp"

namespace strictlyap {

using DynamicsFn = std::function<Vector(const Vector& x, double t, double tau)>;
using JacobianFn = std::function<Matrix(const Vector& x, double t, double tau)>;
using LimitingFn = std::function<Vector(const Vector& x, double t)>;
using LimitingJacobianFn = std::function<Matrix(const Vector& x, double t)>;
using ScalarFieldFn = std::function<double(const Vector& x, double t)>;
using GradientFn = std::function<Vector(const Vector& x, double t)>;
using ScalarFn = std::function<double(double)>;
using SignalFn = std::function<Vector(double)>;

/// Dynamics f(x, t, tau) with optional Jacobian and input map g(x, t, tau).
/// When `input_map` is empty, inputs enter additively (u has dimension `dim`).
struct TimeVaryingSystem {
  int dim = 0;
  DynamicsFn f;
  JacobianFn jac_x;
  JacobianFn input_map;
  int input_dim = 0;

  [[nodiscard]] bool has_input_map() const { return static_cast<bool>(input_map); }
  [[nodiscard]] int effective_input_dim() const { return has_input_map() ? input_dim : dim; }
};

struct LimitingSystem {
  int dim = 0;
  LimitingFn fbar;
  LimitingJacobianFn jac_x;
};

enum class GaugeClass { K, K_infinity, M, positive_definite };

[[nodiscard]] const char* to_string(GaugeClass c);

/// Scalar comparison function with a declared (trusted) class annotation.
struct Gauge {
  ScalarFn eval;
  GaugeClass declared_class = GaugeClass::K;
  std::string label;

  double operator()(double s) const { return eval(s); }
};

/// V(x, t) with optional analytic partial derivatives and (L1) sandwich bounds.
struct LyapunovCandidate {
  ScalarFieldFn value;
  GradientFn grad_x;
  ScalarFieldFn dt;
  std::optional<std::pair<Gauge, Gauge>> bounds;

  double operator()(const Vector& x, double t) const { return value(x, t); }
};

/// Constants of the delta-compatibility condition plus the Jacobian bound K
/// and the fast-scale lower bound eta_0.
struct CompatibilityConstants {
  double c_bar = 0.5;
  double c_bbar = 1.0;
  double K = 2.0;
  double eta_0 = 1.0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Ingredients of a nonstrict Lyapunov function: V' <= -W + p(alpha t) Theta.
struct StrictificationData {
  LyapunovCandidate V;
  ScalarFieldFn W;
  ScalarFieldFn theta;
  GradientFn theta_grad;
  ScalarFieldFn theta_dt;
  ScalarFn p;
  double period = 0.0;
  double p_max = 0.0;
  /// Declared H3 constant; empty means "derive from the grid".
  std::optional<double> c;
};

/// Exponential envelope |x(t)| <= D |x0| exp(-lambda (t - t0)).
struct EnvelopeFit {
  double D = 1.0;
  double lambda = 0.0;
  double residual = 0.0;
};

// ---------------------------------------------------------------------------
// Finite-difference plumbing
// ---------------------------------------------------------------------------

/// Central-difference step used for all gradient consistency checks.
[[nodiscard]] inline double fd_step(double scale) { return 1e-6 * std::max(1.0, std::abs(scale)); }

[[nodiscard]] Vector fd_gradient(const ScalarFieldFn& fn, const Vector& x, double t, double h_scale = 1.0);
[[nodiscard]] double fd_time_derivative(const ScalarFieldFn& fn, const Vector& x, double t);
[[nodiscard]] Matrix fd_jacobian(const DynamicsFn& f, const Vector& x, double t, double tau);
[[nodiscard]] Matrix fd_jacobian(const LimitingFn& f, const Vector& x, double t);

/// Analytic Jacobian when supplied, finite differences otherwise.
[[nodiscard]] Matrix jacobian(const TimeVaryingSystem& sys, const Vector& x, double t, double tau);
[[nodiscard]] Matrix jacobian(const LimitingSystem& lim, const Vector& x, double t);

[[nodiscard]] Vector gradient(const LyapunovCandidate& V, const Vector& x, double t);
[[nodiscard]] double time_partial(const LyapunovCandidate& V, const Vector& x, double t);

/// V_t + V_x * velocity.
[[nodiscard]] double orbital_derivative(const LyapunovCandidate& V, const Vector& x, double t,
                                        const Vector& velocity);

/// Largest singular value.
[[nodiscard]] double spectral_norm(const Matrix& m);

/// Right-hand side f(x, t, alpha t) + g(x, t, alpha t) u (or + u without g).
[[nodiscard]] Vector closed_rhs(const TimeVaryingSystem& sys, const Vector& x, double t, double alpha,
                                const Vector* u);

/// Wraps a limiting system as a fast-time-independent TimeVaryingSystem.
[[nodiscard]] TimeVaryingSystem as_time_varying(const LimitingSystem& lim);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Nullness f(0, t, tau) = 0 over the grid times, plus analytic-Jacobian
/// consistency (relative 1e-5) on grid states when a Jacobian is supplied.
[[nodiscard]] CertificateReport validate_system(const TimeVaryingSystem& sys, const SampleGrid& grid,
                                                double tolerance = 1e-12);

/// Falsification check of the declared gauge class on a strictly increasing
/// sample of (0, inf) with at least 32 points.
[[nodiscard]] CertificateReport gauge_class_check(const Gauge& g, const std::vector<double>& grid);

/// Relative mismatch between an analytic gradient and central differences,
/// with the difference step scaled by `h_scale`.
[[nodiscard]] double gradient_consistency(const LyapunovCandidate& V, const Vector& x, double t,
                                          double h_scale = 1.0);

/// Positive definiteness and gradient consistency of a candidate on grid states.
[[nodiscard]] CertificateReport validate_candidate(const LyapunovCandidate& V, const SampleGrid& grid);

}  // namespace strictlyap
