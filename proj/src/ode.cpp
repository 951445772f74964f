#include "strictlyap/ode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace strictlyap {

double max_step(double alpha, const StepConfig& cfg) {
  return std::min(cfg.h_base, cfg.phase_fraction * 2.0 * std::numbers::pi / alpha);
}

Trajectory integrate(const TimeVaryingSystem& sys, double alpha, const Vector& x0, double t0, double t_end,
                     const InputSignal& u, const StepConfig& cfg) {
  if (!(t_end > t0)) throw std::invalid_argument("integrate: t_end must exceed t0");
  if (!(alpha > 0.0)) throw std::invalid_argument("integrate: alpha must be positive");
  if (x0.size() != sys.dim) throw std::invalid_argument("integrate: initial state has wrong dimension");
  if (!(cfg.h_base > 0.0) || !(cfg.phase_fraction > 0.0)) throw std::invalid_argument("integrate: bad step config");

  const double span = t_end - t0;
  const auto steps = static_cast<std::size_t>(std::ceil(span / max_step(alpha, cfg) - 1e-9));
  const double h = span / static_cast<double>(steps);

  Trajectory traj;
  traj.alpha = alpha;
  traj.t0 = t0;
  traj.x0 = x0;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(t0);
  traj.states.push_back(x0);

  auto rhs = [&](const Vector& x, double t) {
    if (u) {
      const Vector ut = u(t);
      return closed_rhs(sys, x, t, alpha, &ut);
    }
    return closed_rhs(sys, x, t, alpha, nullptr);
  };

  Vector x = x0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t0 + h * static_cast<double>(i);
    const Vector k1 = rhs(x, t);
    const Vector k2 = rhs(x + 0.5 * h * k1, t + 0.5 * h);
    const Vector k3 = rhs(x + 0.5 * h * k2, t + 0.5 * h);
    const Vector k4 = rhs(x + h * k3, t + h);
    Vector next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite() || next.norm() > cfg.blowup) {
      throw DivergenceError("integrate: state exceeded blow-up bound near t = " + std::to_string(t + h),
                            std::move(traj));
    }
    x = std::move(next);
    traj.times.push_back(i + 1 == steps ? t_end : t0 + h * static_cast<double>(i + 1));
    traj.states.push_back(x);
  }
  return traj;
}

double lyapunov_rate_at(const Trajectory& traj, const ScalarFieldFn& V, std::size_t i) {
  const std::size_t n = traj.size();
  if (n < 2) throw std::invalid_argument("lyapunov_rate_at: need at least two samples");
  if (i == 0) {
    return (V(traj.states[1], traj.times[1]) - V(traj.states[0], traj.times[0])) / (traj.times[1] - traj.times[0]);
  }
  if (i + 1 == n) {
    return (V(traj.states[i], traj.times[i]) - V(traj.states[i - 1], traj.times[i - 1])) /
           (traj.times[i] - traj.times[i - 1]);
  }
  return (V(traj.states[i + 1], traj.times[i + 1]) - V(traj.states[i - 1], traj.times[i - 1])) /
         (traj.times[i + 1] - traj.times[i - 1]);
}

std::vector<LyapunovSample> lyapunov_along_trajectory(const Trajectory& traj, const ScalarFieldFn& V) {
  const std::size_t n = traj.size();
  if (n < 3) throw std::invalid_argument("lyapunov_along_trajectory: need at least three samples");
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = V(traj.states[i], traj.times[i]);
  std::vector<LyapunovSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double rate = 0.0;
    if (i == 0) {
      rate = (values[1] - values[0]) / (traj.times[1] - traj.times[0]);
    } else if (i + 1 == n) {
      rate = (values[i] - values[i - 1]) / (traj.times[i] - traj.times[i - 1]);
    } else {
      rate = (values[i + 1] - values[i - 1]) / (traj.times[i + 1] - traj.times[i - 1]);
    }
    out[i] = LyapunovSample{traj.times[i], values[i], rate};
  }
  return out;
}

std::vector<std::size_t> strided_interior(std::size_t n_samples, std::size_t stride) {
  std::vector<std::size_t> out;
  if (n_samples < 3) return out;
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t i = 1; i + 1 < n_samples; i += stride) out.push_back(i);
  if (out.back() != n_samples - 2) out.push_back(n_samples - 2);
  return out;
}

}  // namespace strictlyap
