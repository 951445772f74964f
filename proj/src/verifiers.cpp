#include "strictlyap/verifiers.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace strictlyap {

namespace {

void require_grid(const SampleGrid& grid, const char* who) {
  if (grid.empty()) throw std::invalid_argument(fmt::format("{}: empty sample grid", who));
}

std::vector<double> fast_samples(const SampleGrid& grid, double period, int per_period) {
  std::vector<double> taus = grid.fast_times;
  if (period > 0.0 && per_period > 1) {
    for (double tau : linspace(0.0, period, per_period)) taus.push_back(tau);
  }
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  return taus;
}

double x_norm_at(const Trajectory& traj, std::size_t i) { return traj.states[i].norm(); }

/// Interior sample indices used for rates: away from both ends so the
/// five-point stencil applies, at most `max_samples` of them.
std::vector<std::size_t> rate_indices(std::size_t n, std::size_t max_samples) {
  std::vector<std::size_t> idx;
  if (n < 3) return idx;
  const std::size_t lo = n >= 5 ? 2 : 1;
  const std::size_t hi = n >= 5 ? n - 3 : n - 2;
  if (hi < lo) return idx;
  const std::size_t count = hi - lo + 1;
  const std::size_t stride = std::max<std::size_t>(1, (count + max_samples - 1) / std::max<std::size_t>(1, max_samples));
  for (std::size_t i = lo; i <= hi; i += stride) idx.push_back(i);
  if (idx.back() != hi) idx.push_back(hi);
  return idx;
}

double stop_radius(const Trajectory& traj, const DecayOptions& options) {
  const Vector& x0 = traj.x0.size() > 0 ? traj.x0 : traj.states.front();
  return options.r_stop_fraction * x0.norm();
}

}  // namespace

// ---------------------------------------------------------------------------
// Limiting-shift hypotheses
// ---------------------------------------------------------------------------

CertificateReport check_compatibility(const LyapunovCandidate& V, const LimitingSystem& lim, const Gauge& delta,
                                      const CompatibilityConstants& consts, const SampleGrid& grid) {
  require_grid(grid, "check_compatibility");
  consts.validate();
  if (!V.value || !lim.fbar || !delta.eval) throw std::invalid_argument("check_compatibility: missing V, fbar or delta");
  MarginTracker p1("compatibility.P1", kHypothesisTolerance);
  MarginTracker p2("compatibility.P2", kHypothesisTolerance);
  MarginTracker p3("compatibility.P3", kHypothesisTolerance);
  for (const auto& x : grid.states) {
    const double s = x.norm();
    const double d = delta(s);
    const double d_half = delta(0.5 * s);
    p3.add(scaled_margin(d, consts.c_bbar * s), x, kNaN);
    for (double t : grid.times) {
      const Vector g = gradient(V, x, t);
      const Vector fb = lim.fbar(x, t);
      p1.add(scaled_margin(time_partial(V, x, t) + g.dot(fb), -consts.c_bar * d * d), x, t);
      p2.add(std::max(scaled_margin(g.norm(), d), scaled_margin(fb.norm(), d_half)), x, t);
    }
  }
  return combine("compatibility", {p1.finish(), p2.finish(), p3.finish()});
}

void RelateCheckGrid::validate(double eta_0) const {
  if (states.empty() || r_values.empty() || eta_values.empty()) {
    throw std::invalid_argument("RelateCheckGrid: states, r and eta samples must be non-empty");
  }
  for (double eta : eta_values) {
    if (!(eta >= eta_0)) throw std::invalid_argument(fmt::format("RelateCheckGrid: eta = {} below eta_0 = {}", eta, eta_0));
  }
  if (!std::is_sorted(eta_values.begin(), eta_values.end())) {
    throw std::invalid_argument("RelateCheckGrid: eta samples must be increasing");
  }
}

RelateCheckGrid relate_grid(int dim, double eta_lo, double eta_hi, std::uint64_t seed, int per_decade, int n_r,
                            int n_eta, double r_max) {
  if (!(eta_lo > 0.0) || !(eta_hi > eta_lo)) throw std::invalid_argument("relate_grid: need 0 < eta_lo < eta_hi");
  GridOptions opts;
  opts.per_decade = per_decade;
  opts.n_times = 2;
  opts.n_fast_times = 2;
  RelateCheckGrid g;
  g.states = default_grid(dim, 1.0, seed, opts).states;
  g.r_values = linspace(0.0, r_max, n_r);
  g.eta_values = geometric_grid(eta_lo, eta_hi, n_eta);
  return g;
}

RelateReport check_relate(const TimeVaryingSystem& sys, const LimitingSystem& lim, const Gauge& delta, const Gauge& N,
                          const RelateCheckGrid& grid, const QuadratureConfig& cfg, double tolerance) {
  grid.validate(grid.eta_values.empty() ? 0.0 : grid.eta_values.front());
  if (!sys.f || !lim.fbar || !delta.eval || !N.eval) throw std::invalid_argument("check_relate: missing f, fbar, delta or N");
  MarginTracker tracker("relate", tolerance);
  RelateReport out;
  out.eta0_per_state.reserve(grid.states.size());
  double worst_ratio = 0.0;
  for (const auto& x : grid.states) {
    const double d_half = delta(0.5 * x.norm());
    // Worst ratio per eta, in eta order.
    std::vector<double> per_eta(grid.eta_values.size(), 0.0);
    for (std::size_t j = 0; j < grid.eta_values.size(); ++j) {
      const double eta = grid.eta_values[j];
      const double alpha = eta * eta;
      const double rhs = d_half * N(eta);
      QuadratureConfig local = cfg;
      local.panels = oscillation_panels(2.0 / eta, alpha, cfg.panels);
      for (double r : grid.r_values) {
        const auto diff = [&](double l) -> Vector { return sys.f(x, l, alpha * l) - lim.fbar(x, l); };
        const double lhs = weighted_single_integral(diff, r - 1.0 / eta, r + 1.0 / eta, local).norm();
        double ratio = 0.0;
        if (rhs > 0.0) {
          ratio = lhs / rhs;
        } else if (lhs > 0.0) {
          ratio = kInf;
        }
        per_eta[j] = std::max(per_eta[j], ratio);
        worst_ratio = std::max(worst_ratio, ratio);
        if (std::isinf(ratio)) {
          tracker.add_failure(fmt::format("nonzero left side {} against zero bound", lhs), x, r, eta);
        } else {
          tracker.add(ratio - 1.0, x, r, eta);
        }
      }
    }
    double eta0 = kInf;
    for (std::size_t j = grid.eta_values.size(); j-- > 0;) {
      if (per_eta[j] - 1.0 > tolerance) break;
      eta0 = grid.eta_values[j];
    }
    out.eta0_per_state.push_back(eta0);
  }
  out.report = tracker.finish();
  out.worst_ratio = worst_ratio;
  out.empirical_eta0 = *std::max_element(out.eta0_per_state.begin(), out.eta0_per_state.end());
  return out;
}

CertificateReport check_m16(const TimeVaryingSystem& sys, const LimitingSystem& lim, const Gauge& delta, double K,
                            const SampleGrid& grid) {
  require_grid(grid, "check_m16");
  if (!(K > 0.0)) throw std::invalid_argument("check_m16: K must be positive");
  MarginTracker jf("m16.jacobian_f", kHypothesisTolerance);
  MarginTracker jfb("m16.jacobian_fbar", kHypothesisTolerance);
  MarginTracker growth("m16.growth", kHypothesisTolerance);
  for (const auto& x : grid.states) {
    const double d_half = delta(0.5 * x.norm());
    for (double t : grid.times) {
      jfb.add(scaled_margin(spectral_norm(jacobian(lim, x, t)), K), x, t);
      for (double tau : grid.fast_times) {
        jf.add(scaled_margin(spectral_norm(jacobian(sys, x, t, tau)), K), x, t, tau);
        growth.add(scaled_margin(sys.f(x, t, tau).norm(), d_half), x, t, tau);
      }
    }
  }
  return combine("m16", {jf.finish(), jfb.finish(), growth.finish()});
}

double relaxed_N_bound(const RelaxedNConstants& c) {
  if (!(c.lambda > 0.0) || !(c.K > c.lambda)) throw std::invalid_argument("relaxed_N_bound: need K > lambda > 0");
  if (!(c.D >= 1.0) || !(c.c_bbar > 0.0)) throw std::invalid_argument("relaxed_N_bound: need D >= 1 and c_bbar > 0");
  const double theta = std::pow(std::sqrt(2.0) * c.D, c.K / c.lambda - 1.0);
  return (c.K - c.lambda) / (11.0 * c.D * (theta - 1.0) * c.c_bbar);
}

CertificateReport check_relaxed_N(const Gauge& N, const RelaxedNConstants& consts, double eta_star, int decades,
                                  int per_decade) {
  if (!(eta_star > 0.0) || decades < 1 || per_decade < 1) throw std::invalid_argument("check_relaxed_N: bad sampling");
  const double bound = relaxed_N_bound(consts);
  // The inequality is strict.
  MarginTracker tracker("relaxed_N", -std::numeric_limits<double>::denorm_min());
  for (double eta : geometric_grid(eta_star, eta_star * std::pow(10.0, decades), decades * per_decade + 1)) {
    tracker.add(eta * N(eta) - bound, Vector(), kNaN, eta);
  }
  auto report = tracker.finish();
  report.diagnostic = fmt::format("bound {:.17g}", bound);
  return report;
}

// ---------------------------------------------------------------------------
// Strictification hypotheses
// ---------------------------------------------------------------------------

AssumptionHReport check_assumption_H(const StrictificationData& sd, const TimeVaryingSystem& sys,
                                     const SampleGrid& grid, const AssumptionHOptions& options) {
  require_grid(grid, "check_assumption_H");
  if (!sd.V.value || !sd.W || !sd.theta || !sd.p || !sys.f) {
    throw std::invalid_argument("check_assumption_H: V, W, Theta, p and f must be set");
  }
  if (!(sd.period > 0.0) || !(sd.p_max > 0.0)) throw std::invalid_argument("check_assumption_H: need T > 0 and p_max > 0");
  if (sd.c && !(*sd.c > 0.0)) throw std::invalid_argument("check_assumption_H: declared c must be positive");

  const auto taus = fast_samples(grid, sd.period, options.tau_per_period);
  MarginTracker h1("H.1", kHypothesisTolerance);
  double derived_c = kInf;
  SamplePoint c_point;
  auto consider = [&](double ratio, const Vector& x, double t, double tau) {
    if (ratio < derived_c) {
      derived_c = ratio;
      c_point = {x, t, tau};
    }
  };
  for (const auto& x : grid.states) {
    for (double t : grid.times) {
      const Vector g = gradient(sd.V, x, t);
      const double vt = time_partial(sd.V, x, t);
      const double v = sd.V.value(x, t);
      const double w = sd.W(x, t);
      const double theta = sd.theta(x, t);
      const Vector theta_x = sd.theta_grad ? sd.theta_grad(x, t) : fd_gradient(sd.theta, x, t);
      const double theta_t = sd.theta_dt ? sd.theta_dt(x, t) : fd_time_derivative(sd.theta, x, t);
      if (theta != 0.0) {
        consider(v / std::abs(theta), x, t, kNaN);
        consider(w / std::abs(theta), x, t, kNaN);
      }
      for (double tau : taus) {
        const Vector f = sys.f(x, t, tau);
        const double pt = sd.p(tau) * theta;
        h1.add((vt + g.dot(f) + w - pt) / std::max(1.0, std::abs(w) + std::abs(pt)), x, t, tau);
        const double theta_rate = theta_t + theta_x.dot(f);
        if (theta_rate != 0.0) consider(w / std::abs(theta_rate), x, t, tau);
      }
    }
  }

  MarginTracker h2("H.2", options.h2_tolerance);
  QuadratureConfig qc;
  qc.panels = oscillation_panels(sd.period, 2.0 * std::numbers::pi / sd.period);
  for (int k = -2; k <= 2; ++k) {
    const double a = k * sd.period;
    h2.add(std::abs(integrate_scalar(sd.p, a, a + sd.period, qc)), Vector(), a);
  }

  AssumptionHReport out;
  out.derived_c = std::isfinite(derived_c) ? derived_c : 0.0;
  CertificateReport h3;
  h3.check_name = "H.3";
  h3.samples_total = h1.count();
  h3.worst_point = c_point;
  if (sd.c) {
    h3.tolerance = 1e-9 * *sd.c;
    h3.worst_margin = *sd.c - out.derived_c;
    h3.diagnostic = fmt::format("declared c {:.17g}, derived c {:.17g}", *sd.c, out.derived_c);
  } else {
    h3.tolerance = 0.0;
    h3.worst_margin = -out.derived_c;
    h3.diagnostic = fmt::format("derived c {:.17g}", out.derived_c);
  }
  h3.passed = sd.c ? h3.worst_margin <= h3.tolerance : out.derived_c > 0.0;
  const double c_used = sd.c ? *sd.c : out.derived_c;
  out.alpha_bound = c_used > 0.0 ? 8.0 * sd.period * sd.p_max / c_used : kInf;
  out.report = combine("assumption_H", {h1.finish(), h2.finish(), h3});
  return out;
}

CertificateReport check_bounda(const ScalarFn& p, double period, double p_max, double alpha,
                               const std::vector<double>& t_samples, int s_per_t, const QuadratureConfig& cfg) {
  if (!(period > 0.0) || !(p_max > 0.0) || !(alpha > 0.0)) {
    throw std::invalid_argument("check_bounda: need T, p_max and alpha positive");
  }
  if (t_samples.empty() || s_per_t < 2) throw std::invalid_argument("check_bounda: need t samples and s_per_t >= 2");
  const double bound = 2.0 * period * p_max;
  const double freq = 2.0 * std::numbers::pi / period;
  MarginTracker tracker("bounda", 0.0);
  for (double t : t_samples) {
    const double b = alpha * t;
    const auto s_values = linspace(b - alpha, b, s_per_t);
    double integral = 0.0;
    double error = 0.0;
    tracker.add(-bound, Vector(), t, b);
    for (std::size_t j = s_values.size() - 1; j-- > 0;) {
      const double lo = s_values[j];
      const double hi = s_values[j + 1];
      QuadratureConfig local = cfg;
      local.panels = oscillation_panels(hi - lo, freq, cfg.panels);
      try {
        integral += integrate_scalar(p, lo, hi, local);
      } catch (const QuadratureError& e) {
        integral += e.last_estimate()(0);
        error += std::abs(e.last_estimate()(0) - e.previous_estimate()(0));
      }
      tracker.add(std::abs(integral) + error - bound, Vector(), t, lo);
    }
  }
  return tracker.finish();
}

// ---------------------------------------------------------------------------
// Trajectory certificates
// ---------------------------------------------------------------------------

DecayFloor limiting_shift_floor(const Gauge& delta, double c_bar) {
  auto d = delta.eval;
  return [d, c_bar](const Vector& x, double) {
    const double v = d(0.5 * x.norm());
    return 0.5 * c_bar * v * v;
  };
}

DecayFloor strictification_floor(const ScalarFieldFn& W) {
  return [W](const Vector& x, double t) { return 0.5 * W(x, t); };
}

double trajectory_rate(const Trajectory& traj, const ScalarFieldFn& V, std::size_t i) {
  const std::size_t n = traj.size();
  if (i >= n) throw std::out_of_range("trajectory_rate: index out of range");
  if (i >= 2 && i + 2 < n) {
    const auto& t = traj.times;
    const double h = (t[i + 2] - t[i - 2]) / 4.0;
    const double uneven = std::abs((t[i + 2] - t[i + 1]) - (t[i - 1] - t[i - 2]));
    if (uneven <= 1e-9 * h) {
      const double vm2 = V(traj.states[i - 2], t[i - 2]);
      const double vm1 = V(traj.states[i - 1], t[i - 1]);
      const double vp1 = V(traj.states[i + 1], t[i + 1]);
      const double vp2 = V(traj.states[i + 2], t[i + 2]);
      return (vm2 - 8.0 * vm1 + 8.0 * vp1 - vp2) / (12.0 * h);
    }
  }
  return lyapunov_rate_at(traj, V, i);
}

CertificateReport certify_decay(const Trajectory& traj, const ScalarFieldFn& V, const DecayFloor& decay_floor,
                                const DecayOptions& options) {
  if (traj.size() < 3) throw std::invalid_argument("certify_decay: need at least three samples");
  if (!V || !decay_floor) throw std::invalid_argument("certify_decay: missing V or decay floor");
  const double r_stop = stop_radius(traj, options);
  MarginTracker tracker("decay", options.tolerance);
  for (std::size_t i : rate_indices(traj.size(), options.max_samples)) {
    const Vector& x = traj.states[i];
    if (x_norm_at(traj, i) <= r_stop) continue;
    const double t = traj.times[i];
    tracker.add(trajectory_rate(traj, V, i) + decay_floor(x, t), x, t, traj.alpha);
  }
  auto report = tracker.finish();
  if (report.samples_total == 0) report.diagnostic = "no samples outside the stop ball";
  return report;
}

CertificateReport certify_decay(const Trajectory& traj, const ConstructedLyapunov& L, const DecayFloor& decay_floor,
                                const DecayOptions& options) {
  if (traj.alpha != L.alpha()) {
    throw std::invalid_argument(
        fmt::format("certify_decay: trajectory alpha {} differs from Lyapunov alpha {}", traj.alpha, L.alpha()));
  }
  return certify_decay(traj, L.as_field(), decay_floor, options);
}

CertificateReport certify_decay_at(const TimeVaryingSystem& sys, const ConstructedLyapunov& L,
                                   const std::vector<Vector>& initial_conditions, const DecayFloor& decay_floor,
                                   const SimulationOptions& sim, const DecayOptions& options) {
  if (initial_conditions.empty()) throw std::invalid_argument("certify_decay_at: no initial conditions");
  std::vector<CertificateReport> reports;
  reports.reserve(initial_conditions.size());
  for (const auto& x0 : initial_conditions) {
    try {
      const auto traj = integrate(sys, L.alpha(), x0, sim.t0, sim.t_end, {}, sim.step);
      reports.push_back(certify_decay(traj, L, decay_floor, options));
    } catch (const DivergenceError& e) {
      MarginTracker failed("decay", options.tolerance);
      const auto& part = e.partial();
      failed.add_failure(e.what(), part.states.empty() ? x0 : part.states.back(),
                         part.times.empty() ? sim.t0 : part.times.back(), L.alpha());
      reports.push_back(failed.finish());
    }
  }
  return merge_same("decay", reports);
}

std::vector<double> alpha_grid(double lo, double hi, double factor) {
  if (!(lo > 0.0) || !(hi >= lo) || !(factor > 1.0)) throw std::invalid_argument("alpha_grid: need 0 < lo <= hi, factor > 1");
  std::vector<double> out;
  for (double a = lo; a <= hi * (1.0 + 1e-12); a *= factor) out.push_back(a);
  return out;
}

SweepResult sweep_alpha(const LyapunovBuilder& builder, const TimeVaryingSystem& sys,
                        const std::vector<Vector>& initial_conditions, const std::vector<double>& alphas,
                        const DecayFloor& decay_floor, const SimulationOptions& sim, const DecayOptions& options) {
  if (alphas.empty()) throw std::invalid_argument("sweep_alpha: empty alpha grid");
  if (!std::is_sorted(alphas.begin(), alphas.end())) throw std::invalid_argument("sweep_alpha: alphas must increase");
  SweepResult out;
  out.alphas = alphas;
  for (double alpha : alphas) {
    const auto L = builder(alpha);
    auto verdict = certify_decay_at(sys, L, initial_conditions, decay_floor, sim, options);
    verdict.worst_point.aux = alpha;
    out.verdicts.push_back(std::move(verdict));
  }
  const std::size_t n = alphas.size();
  for (std::size_t i = 0; i + 2 < n; ++i) {
    if (out.verdicts[i].passed && out.verdicts[i + 1].passed && out.verdicts[i + 2].passed) {
      out.threshold = alphas[i];
      break;
    }
  }
  bool seen_pass = false;
  for (const auto& v : out.verdicts) {
    if (v.passed) seen_pass = true;
    else if (seen_pass) out.monotone = false;
  }
  return out;
}

IssReport iss_gain_test(const TimeVaryingSystem& sys, const ConstructedLyapunov& L, const Gauge& chi,
                        const DecayFloor& decay_floor, const std::vector<InputSignal>& inputs,
                        const std::vector<Vector>& initial_conditions, const SimulationOptions& sim,
                        const DecayOptions& options) {
  if (inputs.empty() || initial_conditions.empty()) throw std::invalid_argument("iss_gain_test: no inputs or initial conditions");
  if (!chi.eval) throw std::invalid_argument("iss_gain_test: missing gain");
  IssReport out;
  MarginTracker tracker("iss", options.tolerance);
  const ScalarFieldFn V = L.as_field();
  for (const auto& u : inputs) {
    for (const auto& x0 : initial_conditions) {
      Trajectory traj;
      try {
        traj = integrate(sys, L.alpha(), x0, sim.t0, sim.t_end, u, sim.step);
      } catch (const DivergenceError& e) {
        tracker.add_failure(e.what(), x0, sim.t0, L.alpha());
        continue;
      }
      const double r_stop = stop_radius(traj, options);
      for (std::size_t i : rate_indices(traj.size(), options.max_samples)) {
        const Vector& x = traj.states[i];
        const double xn = x.norm();
        if (xn <= r_stop) continue;
        const double t = traj.times[i];
        const bool within_gain = u(t).norm() <= chi(xn);
        if (!within_gain) {
          ++out.gain_excluded;
          continue;
        }
        ++out.decay_evaluations;
        if (!(u(t).norm() <= chi(xn))) ++out.evaluated_outside_gain;
        tracker.add(trajectory_rate(traj, V, i) + decay_floor(x, t), x, t, L.alpha());
      }
    }
  }
  out.report = tracker.finish();
  if (out.decay_evaluations == 0 && out.report.passed) out.report.diagnostic = "gain condition held at no sample";
  return out;
}

IissEstimate iiss_estimate(const ScalarFieldFn& V, const Gauge& nu, const std::vector<DrivenTrajectory>& runs,
                           const DecayOptions& options) {
  if (runs.empty()) throw std::invalid_argument("iiss_estimate: no runs");
  IissEstimate out;
  double worst = -kInf;
  for (const auto& run : runs) {
    if (!run.u) throw std::invalid_argument("iiss_estimate: run without input signal");
    const double r_stop = stop_radius(run.traj, options);
    for (std::size_t i : rate_indices(run.traj.size(), options.max_samples)) {
      const Vector& x = run.traj.states[i];
      if (x.norm() <= r_stop) continue;
      const double t = run.traj.times[i];
      const double u2 = run.u(t).squaredNorm();
      if (u2 == 0.0) continue;
      const double r = (trajectory_rate(run.traj, V, i) + nu(x.norm())) / u2;
      ++out.samples_used;
      if (r > worst) {
        worst = r;
        out.worst_point = {x, t, run.traj.alpha};
      }
    }
  }
  out.r_bar = std::max(0.0, worst);
  return out;
}

EnvelopeFit fit_envelope(const std::vector<Trajectory>& trajs, const EnvelopeOptions& options) {
  if (trajs.empty()) throw std::invalid_argument("fit_envelope: no trajectories");
  if (options.windows < 2) throw std::invalid_argument("fit_envelope: need at least two windows");
  if (options.fixed_lambda && !(*options.fixed_lambda > 0.0)) {
    throw std::invalid_argument("fit_envelope: fixed lambda must be positive");
  }
  std::vector<double> ts, logs;
  for (const auto& traj : trajs) {
    if (traj.size() < 2) throw std::invalid_argument("fit_envelope: trajectory too short");
    const Vector& x0 = traj.x0.size() > 0 ? traj.x0 : traj.states.front();
    const double n0 = x0.norm();
    if (!(n0 > 0.0)) throw EnvelopeRefusal("fit_envelope: trajectory starts at the origin");
    std::size_t end = traj.size();
    for (std::size_t i = 0; i < traj.size(); ++i) {
      if (traj.states[i].norm() <= options.decay_level * n0) {
        end = i + 1;
        break;
      }
    }
    if (end == traj.size() && traj.states.back().norm() > options.decay_level * n0) {
      throw EnvelopeRefusal(fmt::format("fit_envelope: |x| stays above {} |x0| up to t = {}", options.decay_level,
                                        traj.times.back()));
    }
    const double horizon = traj.times[end - 1] - traj.t0;
    const double width = horizon / options.windows;
    for (int w = 0; w < options.windows; ++w) {
      double peak = -1.0, t_peak = 0.0;
      for (std::size_t i = 0; i < end; ++i) {
        const double rel = traj.times[i] - traj.t0;
        const bool inside = rel >= w * width && (rel < (w + 1) * width || (w + 1 == options.windows && i + 1 == end));
        if (!inside) continue;
        const double y = traj.states[i].norm() / n0;
        if (y > peak) {
          peak = y;
          t_peak = rel;
        }
      }
      if (peak > 0.0) {
        ts.push_back(t_peak);
        logs.push_back(std::log(peak));
      }
    }
  }
  double lambda = 0.0;
  if (options.fixed_lambda) {
    lambda = *options.fixed_lambda;
  } else {
    if (ts.size() < 2) throw EnvelopeRefusal("fit_envelope: too few window peaks");
    const double n = static_cast<double>(ts.size());
    double mt = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      mt += ts[i] / n;
      ml += logs[i] / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sxx += (ts[i] - mt) * (ts[i] - mt);
      sxy += (ts[i] - mt) * (logs[i] - ml);
    }
    if (!(sxx > 0.0)) throw EnvelopeRefusal("fit_envelope: window peaks share one time");
    lambda = -sxy / sxx;
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw EnvelopeRefusal(fmt::format("fit_envelope: fitted rate {} is not positive", lambda));
    }
  }
  EnvelopeFit fit;
  fit.lambda = lambda;
  fit.D = 1.0;
  for (const auto& traj : trajs) {
    const double n0 = (traj.x0.size() > 0 ? traj.x0 : traj.states.front()).norm();
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double rel = traj.times[i] - traj.t0;
      fit.D = std::max(fit.D, traj.states[i].norm() / n0 * std::exp(lambda * rel));
    }
  }
  if (!std::isfinite(fit.D)) throw EnvelopeRefusal("fit_envelope: envelope constant overflows");
  auto residual = [&] {
    double r = -kInf;
    for (const auto& traj : trajs) {
      const double n0 = (traj.x0.size() > 0 ? traj.x0 : traj.states.front()).norm();
      for (std::size_t i = 0; i < traj.size(); ++i) {
        const double rel = traj.times[i] - traj.t0;
        r = std::max(r, traj.states[i].norm() - fit.D * n0 * std::exp(-lambda * rel));
      }
    }
    return r;
  };
  fit.residual = residual();
  // D was taken as a maximum, so a positive residual here is rounding only.
  for (int k = 0; k < 8 && fit.residual > 0.0; ++k) {
    fit.D *= 1.0 + 8.0 * std::numeric_limits<double>::epsilon();
    fit.residual = residual();
  }
  return fit;
}

}  // namespace strictlyap
