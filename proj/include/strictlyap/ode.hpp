/**
 * @file ode.hpp
 * @brief Fixed-step classical RK4 for x' = f(x, t, alpha t) (+ input), with
 *        the step capped to resolve the fast time scale.
 */
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "strictlyap/systems.hpp"

namespace strictlyap {

using InputSignal = std::function<Vector(double)>;

struct StepConfig {
  double h_base = 1e-2;
  /// Fraction of a fast period 2 pi / alpha allowed per step.
  double phase_fraction = 0.05;
  double blowup = 1e8;
};

/// Step actually used: min(h_base, phase_fraction * 2 pi / alpha).
[[nodiscard]] double max_step(double alpha, const StepConfig& cfg);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  double alpha = 1.0;
  double t0 = 0.0;
  Vector x0;

  [[nodiscard]] std::size_t size() const { return times.size(); }
};

/// Thrown when |x| exceeds the blow-up bound or becomes non-finite. Carries the
/// trajectory up to the last finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

[[nodiscard]] Trajectory integrate(const TimeVaryingSystem& sys, double alpha, const Vector& x0, double t0,
                                   double t_end, const InputSignal& u = {}, const StepConfig& cfg = {});

struct LyapunovSample {
  double t = 0.0;
  double value = 0.0;
  double rate = 0.0;
};

/// Centered-difference rate of V at sample i (one-sided at the ends).
[[nodiscard]] double lyapunov_rate_at(const Trajectory& traj, const ScalarFieldFn& V, std::size_t i);

/// V and its numeric time derivative along the stored samples.
[[nodiscard]] std::vector<LyapunovSample> lyapunov_along_trajectory(const Trajectory& traj,
                                                                    const ScalarFieldFn& V);

/// Interior sample indices visited with the given stride (always includes the
/// first and last interior index).
[[nodiscard]] std::vector<std::size_t> strided_interior(std::size_t n_samples, std::size_t stride);

}  // namespace strictlyap
