#include "strictlyap/constructors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

#include "strictlyap/sampling.hpp"
#include "time_memo.hpp"

namespace strictlyap {

const char* to_string(Construction c) {
  switch (c) {
    case Construction::limiting_shift: return "limiting_shift";
    case Construction::strictification: return "strictification";
    case Construction::closed_form: return "closed_form";
  }
  return "unknown";
}

QuadratureConfig construction_quadrature() {
  QuadratureConfig cfg;
  cfg.panels = 64;
  cfg.refine_limit = 12;
  cfg.abs_tol = 1e-13;
  cfg.rel_tol = 1e-11;
  return cfg;
}

ConstructedLyapunov::ConstructedLyapunov(EvalFn eval, double alpha, Construction kind,
                                         std::shared_ptr<const Ingredients> ingredients)
    : eval_(std::move(eval)), alpha_(alpha), kind_(kind), ingredients_(std::move(ingredients)) {
  if (!eval_) throw std::invalid_argument("ConstructedLyapunov: empty evaluation");
  if (!ingredients_) ingredients_ = std::make_shared<const Ingredients>();
}

Vector ConstructedLyapunov::grad_x(const Vector& x, double t) const { return fd_gradient(eval_, x, t); }

double ConstructedLyapunov::dt(const Vector& x, double t) const { return fd_time_derivative(eval_, x, t); }

LyapunovCandidate ConstructedLyapunov::as_candidate() const {
  LyapunovCandidate c;
  c.value = eval_;
  auto eval = eval_;
  c.grad_x = [eval](const Vector& x, double t) { return fd_gradient(eval, x, t); };
  c.dt = [eval](const Vector& x, double t) { return fd_time_derivative(eval, x, t); };
  return c;
}

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument(fmt::format("alpha must be positive and finite (got {})", alpha));
  }
}

}  // namespace

Vector r_alpha(const Vector& x, double t, double alpha, const TimeVaryingSystem& sys, const LimitingSystem& lim,
               const QuadratureConfig& cfg) {
  require_alpha(alpha);
  const double eta = std::sqrt(alpha);
  const double tau = 2.0 / eta;
  QuadratureConfig local = cfg;
  local.panels = oscillation_panels(tau, alpha, cfg.panels);
  const auto diff = [&](double l) -> Vector { return sys.f(x, l, alpha * l) - lim.fbar(x, l); };
  return -(eta / 2.0) * double_time_integral(diff, t, tau, local);
}

ConstructedLyapunov v_alpha(const LyapunovCandidate& V, const TimeVaryingSystem& sys, const LimitingSystem& lim,
                            double alpha, const QuadratureConfig& cfg) {
  require_alpha(alpha);
  if (!V.value || !sys.f || !lim.fbar) throw std::invalid_argument("v_alpha: V, f and fbar must be set");
  if (sys.dim != lim.dim) throw std::invalid_argument("v_alpha: system and limiting dimensions differ");
  auto ingredients = std::make_shared<Ingredients>();
  ingredients->V = V;
  ingredients->sys = sys;
  ingredients->lim = lim;
  auto eval = [ingredients, alpha, cfg](const Vector& xi, double t) {
    const Vector shift = r_alpha(xi, t, alpha, *ingredients->sys, *ingredients->lim, cfg);
    return ingredients->V->value(xi + shift, t);
  };
  return {eval, alpha, Construction::limiting_shift, ingredients};
}

double strictification_weight_direct(const ScalarFn& p, double period, double alpha, double t,
                                     const QuadratureConfig& cfg) {
  require_alpha(alpha);
  if (!(period > 0.0)) throw std::invalid_argument("strictification_weight: period must be positive");
  QuadratureConfig local = cfg;
  local.panels = oscillation_panels(1.0, alpha * 2.0 * std::numbers::pi / period, cfg.panels);
  return double_time_integral_scalar([&](double l) { return p(alpha * l); }, t, 1.0, local);
}

PeriodMoments period_moments(const ScalarFn& p, double period, const QuadratureConfig& cfg) {
  if (!(period > 0.0)) throw std::invalid_argument("period_moments: period must be positive");
  QuadratureConfig local = cfg;
  local.panels = oscillation_panels(period, 2.0 * std::numbers::pi / period, cfg.panels);
  return {integrate_scalar(p, 0.0, period, local),
          integrate_scalar([&](double v) { return v * p(v); }, 0.0, period, local)};
}

double strictification_weight(const ScalarFn& p, double period, double alpha, double t, const PeriodMoments& m,
                              const QuadratureConfig& cfg) {
  require_alpha(alpha);
  if (!(period > 0.0)) throw std::invalid_argument("strictification_weight: period must be positive");
  if (alpha < 4.0 * period) return strictification_weight_direct(p, period, alpha, t, cfg);
  // Phi = alpha^-2 int_a^b (u - a) p(u) du with a = alpha (t - 1), b = alpha t;
  // whole periods [kT, (k+1)T] contribute (kT - a) P0 + M1.
  const double a = alpha * (t - 1.0);
  const double b = alpha * t;
  const double k0 = std::ceil(a / period);
  const double k1 = std::floor(b / period);
  const double u0 = k0 * period;
  const double u1 = k1 * period;
  const double n = k1 - k0;
  QuadratureConfig local = cfg;
  const double freq = 2.0 * std::numbers::pi / period;
  auto piece = [&](double lo, double hi, double shift) {
    if (hi <= lo) return 0.0;
    local.panels = oscillation_panels(hi - lo, freq, cfg.panels);
    return integrate_scalar([&](double u) { return (u - shift) * p(u); }, lo, hi, local);
  };
  const double head = piece(a, u0, a);
  double tail = piece(u1, b, u1);
  if (b > u1) {
    local.panels = oscillation_panels(b - u1, freq, cfg.panels);
    tail += (u1 - a) * integrate_scalar(p, u1, b, local);
  }
  const double blocks = m.mean_integral * (n * (u0 - a) + period * n * (n - 1.0) / 2.0) + n * m.first_moment;
  return (head + blocks + tail) / (alpha * alpha);
}

double strictification_weight(const ScalarFn& p, double period, double alpha, double t, const QuadratureConfig& cfg) {
  return strictification_weight(p, period, alpha, t, period_moments(p, period, cfg), cfg);
}

ConstructedLyapunov u_alpha(const StrictificationData& sd, double alpha, const QuadratureConfig& cfg) {
  require_alpha(alpha);
  if (!sd.V.value || !sd.theta || !sd.p) throw std::invalid_argument("u_alpha: V, Theta and p must be set");
  auto ingredients = std::make_shared<Ingredients>();
  ingredients->strictification = sd;
  const ScalarFn p = sd.p;
  const double period = sd.period;
  if (!(period > 0.0)) throw std::invalid_argument("u_alpha: period must be positive");
  const PeriodMoments moments = period_moments(p, period, cfg);
  auto weight = detail::make_memo<double>(
      [p, period, alpha, moments, cfg](double t) { return strictification_weight(p, period, alpha, t, moments, cfg); });
  auto eval = [ingredients, weight](const Vector& x, double t) {
    const StrictificationData& s = *ingredients->strictification;
    const double theta = s.theta(x, t);
    const double v = s.V.value(x, t);
    if (theta == 0.0) return v;
    return v - (*weight)(t) * theta;
  };
  return {eval, alpha, Construction::strictification, ingredients};
}

Gauge chi_gain(const Gauge& delta, double c_bar) {
  if (!(c_bar > 0.0 && c_bar < 1.0)) throw std::invalid_argument("chi_gain: c_bar must lie in (0, 1)");
  if (delta.declared_class != GaugeClass::K && delta.declared_class != GaugeClass::K_infinity) {
    throw std::invalid_argument("chi_gain: delta must be of class K");
  }
  auto d = delta.eval;
  return Gauge{[d, c_bar](double s) { return 0.25 * c_bar * d(0.5 * s); }, delta.declared_class,
               fmt::format("chi[{}]", delta.label)};
}

Gauge chi_gain_with_g(const Gauge& delta, double c_bar, double c_o) {
  if (!(c_bar > 0.0 && c_bar < 1.0)) throw std::invalid_argument("chi_gain_with_g: c_bar must lie in (0, 1)");
  if (!(c_o > 1.0)) throw std::invalid_argument("chi_gain_with_g: c_o must exceed 1");
  if (delta.declared_class != GaugeClass::K_infinity) {
    throw std::invalid_argument("chi_gain_with_g: delta must be of class K_infinity");
  }
  auto d = delta.eval;
  return Gauge{[d, c_bar, c_o](double s) {
                 const double ds = d(0.5 * s);
                 return c_bar * ds / (4.0 * (c_o + std::sqrt(ds)));
               },
               GaugeClass::K_infinity, fmt::format("chi_g[{}]", delta.label)};
}

double pe_kappa(double f_star, double c_tilde, double alpha_prime) {
  const double f = std::abs(f_star);
  return c_tilde / (2.0 * f) + std::pow(c_tilde, 4) * f / (4.0 * alpha_prime);
}

namespace {

VectorIntegrand outer_product(const SignalFn& m) {
  return [m](double l) -> Vector {
    const Vector v = m(l);
    const Matrix mm = v * v.transpose();
    return Eigen::Map<const Vector>(mm.data(), mm.size());
  };
}

Matrix reshape_square(const Vector& flat) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
  return Eigen::Map<const Matrix>(flat.data(), n, n);
}

}  // namespace

Matrix excitation_gram(const SignalFn& m, double t, double c_tilde, const QuadratureConfig& cfg) {
  return reshape_square(weighted_single_integral(outer_product(m), t, t + c_tilde, cfg));
}

Matrix pe_matrix(const SignalFn& m, double c_tilde, double kappa, double t, const QuadratureConfig& cfg) {
  Matrix P = reshape_square(double_time_integral(outer_product(m), t, c_tilde, cfg));
  P.diagonal().array() += kappa;
  return P;
}

LyapunovCandidate pe_lyapunov(const SignalFn& m, double f_star, double c_tilde, double alpha_prime,
                              const QuadratureConfig& cfg) {
  if (!(f_star < 0.0)) throw std::invalid_argument("pe_lyapunov: f_star must be negative");
  if (!(c_tilde > 0.0) || !(alpha_prime > 0.0)) {
    throw std::invalid_argument("pe_lyapunov: c_tilde and alpha' must be positive");
  }
  for (double t : linspace(0.0, 2.0 * c_tilde, 17)) {
    const Vector mt = m(t);
    if (std::abs(mt.norm() - 1.0) > 1e-9) {
      throw std::invalid_argument(fmt::format("pe_lyapunov: |m({})| = {} != 1", t, mt.norm()));
    }
    const Matrix gram = excitation_gram(m, t, c_tilde, cfg);
    const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().minCoeff();
    if (lo < alpha_prime * (1.0 - 1e-9)) {
      throw ExcitationError(fmt::format(
          "excitation check failed at t = {}: min eigenvalue of the Gram integral is {} < alpha' = {}", t, lo,
          alpha_prime));
    }
  }
  const double kappa = pe_kappa(f_star, c_tilde, alpha_prime);
  auto P = detail::make_memo<Matrix>([m, c_tilde, kappa, cfg](double t) { return pe_matrix(m, c_tilde, kappa, t, cfg); });
  auto P_dot = detail::make_memo<Matrix>([m, c_tilde, cfg](double t) {
    const Vector mt = m(t);
    return Matrix(c_tilde * mt * mt.transpose() - excitation_gram(m, t - c_tilde, c_tilde, cfg));
  });
  LyapunovCandidate V;
  V.value = [P](const Vector& x, double t) { return x.dot((*P)(t) * x); };
  V.grad_x = [P](const Vector& x, double t) { return Vector(2.0 * ((*P)(t) * x)); };
  V.dt = [P_dot](const Vector& x, double t) { return x.dot((*P_dot)(t) * x); };
  return V;
}

FrictionLyapunov friction_lyapunov(const FrictionParams& params) {
  const auto& st = params.sigma_tilde;
  if (!(params.k_o > 0.0) || !(st[0] > 0.0) || st[1] < 0.0 || st[2] < 0.0 || !(params.beta2 > 0.0)) {
    throw std::invalid_argument("friction_lyapunov: need k_o, sigma~1, beta2 > 0 and sigma~2, sigma~3 >= 0");
  }
  if (!params.k) throw std::invalid_argument("friction_lyapunov: k must be set");
  FrictionLyapunov out;
  out.S = st[0] + (st[1] + st[2]) * params.beta2;
  out.A = 1.0 + 1.0 / params.k_o + (1.0 + out.S * out.S / params.k_o) / st[0];
  out.b = std::min(params.k_o / 2.0, out.A * st[0] - 0.5);
  const double A = out.A;
  const ScalarFn k = params.k;
  const ScalarFn k_prime = params.k_prime;
  out.V.value = [A, k](const Vector& x, double t) { return A * (k(t) * x(0) * x(0) + x(1) * x(1)) + x(0) * x(1); };
  out.V.grad_x = [A, k](const Vector& x, double t) {
    Vector g(2);
    g << 2.0 * A * k(t) * x(0) + x(1), 2.0 * A * x(1) + x(0);
    return g;
  };
  if (k_prime) {
    out.V.dt = [A, k_prime](const Vector& x, double t) { return A * k_prime(t) * x(0) * x(0); };
  }
  const double upper = 2.0 * A * A * params.k_bar;
  out.V.bounds = std::make_pair(Gauge{[](double s) { return 0.5 * s * s; }, GaugeClass::K_infinity, "s^2/2"},
                                Gauge{[upper](double s) { return upper * s * s; }, GaugeClass::K_infinity,
                                      "2 A^2 k_bar s^2"});
  return out;
}

}  // namespace strictlyap
