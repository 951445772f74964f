#include "strictlyap/examples.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "time_memo.hpp"

namespace strictlyap {

namespace {

constexpr double kPi = std::numbers::pi;

Vector vec1(double v) { return Vector::Constant(1, v); }

/// Memo of t -> int_{t-2/eta}^{t} int_{s}^{t} g(l) dl ds for a fixed alpha.
std::shared_ptr<detail::TimeMemo<Vector>> window_integrals(VectorIntegrand g, double alpha,
                                                           const QuadratureConfig& cfg) {
  const double tau = 2.0 / std::sqrt(alpha);
  QuadratureConfig local = cfg;
  local.panels = oscillation_panels(tau, alpha, cfg.panels);
  return detail::make_memo<Vector>(
      [g = std::move(g), tau, local](double t) { return double_time_integral(g, t, tau, local); });
}

void require_alpha_above(double alpha, double floor, const std::string& who) {
  if (!(alpha > floor) || !std::isfinite(alpha)) {
    throw std::invalid_argument(fmt::format("{}: alpha must exceed {} (got {})", who, floor, alpha));
  }
}

Gauge inverse_square_N() {
  return Gauge{[](double eta) { return 60.0 / (eta * eta); }, GaugeClass::M, "60/eta^2"};
}

Gauge iiss_nu(const Gauge& delta, double c_bar) {
  auto d = delta.eval;
  return Gauge{[d, c_bar](double s) {
                 const double v = d(0.5 * s);
                 return 0.25 * c_bar * v * v;
               },
               GaugeClass::positive_definite, fmt::format("nu[{}]", delta.label)};
}

DecayFloor compatibility_floor(const Gauge& delta, double c_bar) {
  auto d = delta.eval;
  return [d, c_bar](const Vector& x, double) {
    const double v = d(x.norm());
    return c_bar * v * v;
  };
}

CertificateReport sampled_bound(const std::string& name, const std::vector<double>& grid,
                                const std::function<double(double)>& margin) {
  MarginTracker tracker(name, kHypothesisTolerance);
  for (double s : grid) tracker.add(margin(s), vec1(s), kNaN);
  return tracker.finish();
}

}  // namespace

// ---------------------------------------------------------------------------
// UGAS, not UGES
// ---------------------------------------------------------------------------

double sigma_lnk(double s) {
  const double a = std::abs(s);
  if (a >= 1.0) return std::copysign(std::log1p(a), s);
  const double b = (0.5 - std::numbers::ln2) / 2.0;
  const double c = std::numbers::ln2 - b;
  return c * s + b * s * s * s;
}

double sigma_lnk_prime(double s) {
  const double a = std::abs(s);
  if (a >= 1.0) return 1.0 / (1.0 + a);
  const double b = (0.5 - std::numbers::ln2) / 2.0;
  const double c = std::numbers::ln2 - b;
  return c + 3.0 * b * s * s;
}

namespace {

/// int_0^x sigma_lnk.
double sigma_lnk_integral(double x) {
  const double a = std::abs(x);
  const double b = (0.5 - std::numbers::ln2) / 2.0;
  const double c = std::numbers::ln2 - b;
  if (a <= 1.0) return c * a * a / 2.0 + b * a * a * a * a / 4.0;
  const double at_one = c / 2.0 + b / 4.0;
  return at_one + (1.0 + a) * std::log1p(a) - a - (2.0 * std::numbers::ln2 - 1.0);
}

double atan_integral(double x) { return x * std::atan(x) - 0.5 * std::log1p(x * x); }

ExampleBundle non_uges_impl(const ScalarFn& sigma1, const ScalarFn& sigma2, const ScalarFn& sigma1_integral,
                            const NonUgesOptions& options) {
  if (!sigma1 || !sigma2) throw std::invalid_argument("example_non_uges: sigma1 and sigma2 must be set");
  options.constants.validate();
  ExampleBundle b;
  b.name = options.name;
  b.description = "x' = -s1(x)[2 + sin(t + cos(s2(x)))]{1 + 10 sin(alpha t)}; UGAS limiting dynamics, not UGES for bounded s1";
  b.route = Construction::limiting_shift;

  auto mu = [sigma2](double x, double t) { return 2.0 + std::sin(t + std::cos(sigma2(x))); };
  const ScalarFn s1p = options.sigma1_prime;
  const ScalarFn s2p = options.sigma2_prime;
  // d/dx [sigma1(x) mu(x, t)]
  std::function<double(double, double)> dprod;
  if (s1p && s2p) {
    dprod = [sigma1, sigma2, s1p, s2p, mu](double x, double t) {
      const double c = std::cos(t + std::cos(sigma2(x)));
      return s1p(x) * mu(x, t) - sigma1(x) * c * std::sin(sigma2(x)) * s2p(x);
    };
  }

  b.sys.dim = 1;
  b.sys.f = [sigma1, mu](const Vector& x, double t, double tau) {
    return vec1(-sigma1(x(0)) * mu(x(0), t) * (1.0 + 10.0 * std::sin(tau)));
  };
  LimitingSystem lim;
  lim.dim = 1;
  lim.fbar = [sigma1, mu](const Vector& x, double t) { return vec1(-sigma1(x(0)) * mu(x(0), t)); };
  if (dprod) {
    b.sys.jac_x = [dprod](const Vector& x, double t, double tau) {
      return Matrix::Constant(1, 1, -dprod(x(0), t) * (1.0 + 10.0 * std::sin(tau)));
    };
    lim.jac_x = [dprod](const Vector& x, double t) { return Matrix::Constant(1, 1, -dprod(x(0), t)); };
  }
  b.lim = lim;

  if (sigma1_integral) {
    b.V.value = [sigma1_integral](const Vector& x, double) { return sigma1_integral(x(0)); };
  } else {
    b.V.value = [sigma1](const Vector& x, double) {
      // sigma1 odd, so V is even
      return integrate_scalar(sigma1, 0.0, std::abs(x(0)), construction_quadrature());
    };
  }
  b.V.grad_x = [sigma1](const Vector& x, double) { return vec1(sigma1(x(0))); };
  b.V.dt = [](const Vector&, double) { return 0.0; };

  const auto& c = options.constants;
  const Gauge delta{[sigma1](double s) { return 33.0 * sigma1(2.0 * s); }, options.delta_class, "33 s1(2s)"};
  b.gauges.delta = delta;
  b.gauges.N = inverse_square_N();
  b.gauges.constants = c;
  b.gauges.chi = chi_gain(delta, c.c_bar);
  b.gauges.nu = iiss_nu(delta, c.c_bar);
  b.K = c.K;

  // R_alpha = 5 eta s1(xi) int int mu(xi, l) sin(alpha l) with
  // mu = 2 + sin(l) cos(c) + cos(l) sin(c), c = cos(s2(xi)).
  const auto V = b.V;
  const auto sys = b.sys;
  b.builder = [V, sys, lim, sigma1, sigma2](double alpha) {
    require_alpha_above(alpha, 0.0, "nonuges");
    const double eta = std::sqrt(alpha);
    auto I = window_integrals(
        [alpha](double l) {
          Vector v(3);
          const double s = std::sin(alpha * l);
          v << s, std::sin(l) * s, std::cos(l) * s;
          return v;
        },
        alpha, construction_quadrature());
    auto ingredients = std::make_shared<Ingredients>();
    ingredients->V = V;
    ingredients->sys = sys;
    ingredients->lim = lim;
    auto eval = [V, I, eta, sigma1, sigma2](const Vector& xi, double t) {
      const Vector w = (*I)(t);
      const double cc = std::cos(sigma2(xi(0)));
      const double shift = 5.0 * eta * sigma1(xi(0)) * (2.0 * w(0) + std::cos(cc) * w(1) + std::sin(cc) * w(2));
      return V.value(vec1(xi(0) + shift), t);
    };
    return ConstructedLyapunov(eval, alpha, Construction::limiting_shift, ingredients);
  };
  b.decay_floor = limiting_shift_floor(delta, c.c_bar);
  b.limiting_floor = compatibility_floor(delta, c.c_bar);

  const auto radii = geometric_grid(1e-3, 1e3, 121);
  b.preconditions.push_back(sampled_bound("sigma1_odd", radii, [sigma1](double s) {
    return std::abs(sigma1(-s) + sigma1(s)) - 1e-12 * std::abs(sigma1(s));
  }));
  b.preconditions.push_back(gauge_class_check(Gauge{sigma1, GaugeClass::K, "sigma1"}, radii));
  b.preconditions.back().check_name = "sigma1_class_K";
  b.preconditions.push_back(sampled_bound("sigma1_concave", radii, [sigma1](double s) {
    return scaled_margin(sigma1(2.0 * s), 2.0 * sigma1(s));
  }));
  const double bound = options.derivative_bound;
  b.preconditions.push_back(sampled_bound("derivative_product", radii, [sigma1, sigma2, bound](double s) {
    const auto d1 = [&](const ScalarFn& g, double x) { return (g(x + 1e-6 * std::max(1.0, x)) - g(x - 1e-6 * std::max(1.0, x))) / (2e-6 * std::max(1.0, x)); };
    return scaled_margin(std::abs(d1(sigma1, s)) + std::abs(sigma1(s) * d1(sigma2, s)), bound);
  }));

  b.expected = {checks::validate_system, checks::compatibility, checks::relate, checks::m16, checks::limiting_decay,
                checks::decay, checks::iss, checks::iiss};
  b.alpha_default = 1e3;
  b.ic_lo = -2.0;
  b.ic_hi = 2.0;
  b.t_end = 8.0;
  b.iss_epsilon = 1e-4;
  return b;
}

}  // namespace

ExampleBundle example_non_uges(const ScalarFn& sigma1, const ScalarFn& sigma2, const NonUgesOptions& options) {
  return non_uges_impl(sigma1, sigma2, {}, options);
}

ExampleBundle example_non_uges() {
  NonUgesOptions o;
  o.sigma1_prime = [](double s) { return 1.0 / (1.0 + s * s); };
  o.sigma2_prime = o.sigma1_prime;
  const ScalarFn at = [](double s) { return std::atan(s); };
  auto b = non_uges_impl(at, at, atan_integral, o);
  b.notes.push_back("limiting trajectories satisfy |x'| <= 3 pi/2 < 2 pi, so the limiting dynamics is not UGES");
  return b;
}

ExampleBundle example_non_uges_lnk() {
  NonUgesOptions o;
  o.sigma1_prime = sigma_lnk_prime;
  o.sigma2_prime = [](double s) { return 1.0 / (1.0 + s * s); };
  o.delta_class = GaugeClass::K_infinity;
  o.name = "nonuges-lnk";
  auto b = non_uges_impl(sigma_lnk, [](double s) { return std::atan(s); }, sigma_lnk_integral, o);
  b.description = "nonuges with s1 = sgn(s) ln(1+|s|) outside [-1, 1] (odd cubic inside), s2 = atan; delta of class K_infinity";
  b.notes.push_back("sigma1 inside |s| < 1 is the odd cubic matching value and slope at |s| = 1");
  return b;
}

// ---------------------------------------------------------------------------
// Identification
// ---------------------------------------------------------------------------

ExampleBundle example_identification(const IdentificationParams& params) {
  params.validate();
  ExampleBundle b;
  b.name = "identification";
  b.description = "x' = f(alpha t) m(t) m(t)^T x + g u with persistently exciting m; UGES limiting dynamics";
  b.identification = params;
  b.route = Construction::limiting_shift;
  const int n = static_cast<int>(params.m(0.0).size());
  const auto m = params.m;
  const auto f_fast = params.f_fast;
  const double f_star = params.f_star;

  b.sys.dim = n;
  b.sys.f = [m, f_fast](const Vector& x, double t, double tau) {
    const Vector mt = m(t);
    return Vector(f_fast(tau) * mt * mt.dot(x));
  };
  b.sys.jac_x = [m, f_fast](const Vector&, double t, double tau) {
    const Vector mt = m(t);
    return Matrix(f_fast(tau) * mt * mt.transpose());
  };
  b.sys.input_map = params.g;
  b.sys.input_dim = params.g ? params.input_dim : 0;

  LimitingSystem lim;
  lim.dim = n;
  lim.fbar = [m, f_star](const Vector& x, double t) {
    const Vector mt = m(t);
    return Vector(f_star * mt * mt.dot(x));
  };
  lim.jac_x = [m, f_star](const Vector&, double t) {
    const Vector mt = m(t);
    return Matrix(f_star * mt * mt.transpose());
  };
  b.lim = lim;

  const LyapunovCandidate P = pe_lyapunov(m, f_star, params.c_tilde, params.alpha_prime);
  const double scale = 2.0 / params.alpha_prime;
  b.V.value = [P, scale](const Vector& x, double t) { return scale * P.value(x, t); };
  b.V.grad_x = [P, scale](const Vector& x, double t) { return Vector(scale * P.grad_x(x, t)); };
  b.V.dt = [P, scale](const Vector& x, double t) { return scale * P.dt(x, t); };

  // delta(s) = r s with r >= sup_t |grad V|/|x| = (4/alpha') sup_t |P(t)|.
  const double kappa = pe_kappa(f_star, params.c_tilde, params.alpha_prime);
  double p_norm = 0.0;
  for (double t : linspace(0.0, 2.0 * params.c_tilde, 129)) {
    p_norm = std::max(p_norm, spectral_norm(pe_matrix(m, params.c_tilde, kappa, t)));
  }
  const double r_bar = 1.01 * 2.0 * scale * p_norm;
  CompatibilityConstants c{.c_bar = 0.9 / (r_bar * r_bar), .c_bbar = r_bar, .K = 3.0, .eta_0 = 1.0};
  double f_max = 0.0;
  for (double tau : linspace(0.0, 2.0 * kPi, 257)) f_max = std::max(f_max, std::abs(f_fast(tau)));
  c.K = std::max(1.0 + 1e-9, 1.01 * f_max);
  const Gauge delta{[r_bar](double s) { return r_bar * s; }, GaugeClass::K_infinity, fmt::format("{:.6g} s", r_bar)};
  b.gauges.delta = delta;
  b.gauges.N = inverse_square_N();
  b.gauges.constants = c;
  b.gauges.nu = iiss_nu(delta, c.c_bar);
  b.K = c.K;
  if (params.g) {
    b.gauges.c_o = 2.0;
    b.gauges.chi = chi_gain_with_g(delta, c.c_bar, 2.0);
  }

  const auto V = b.V;
  const auto sys = b.sys;
  b.builder = [V, sys, lim, m, f_fast, f_star, n](double alpha) {
    require_alpha_above(alpha, 0.0, "identification");
    const double eta = std::sqrt(alpha);
    // R_alpha(xi, t) = -(eta/2) [int int (f(alpha l) - f*) m m^T] xi.
    auto M = window_integrals(
        [m, f_fast, f_star, alpha](double l) {
          const Vector ml = m(l);
          const Matrix d = (f_fast(alpha * l) - f_star) * ml * ml.transpose();
          return Vector(Eigen::Map<const Vector>(d.data(), d.size()));
        },
        alpha, construction_quadrature());
    auto ingredients = std::make_shared<Ingredients>();
    ingredients->V = V;
    ingredients->sys = sys;
    ingredients->lim = lim;
    auto eval = [V, M, eta, n](const Vector& xi, double t) {
      const Vector flat = (*M)(t);
      const Eigen::Map<const Matrix> D(flat.data(), n, n);
      return V.value(Vector(xi - 0.5 * eta * (D * xi)), t);
    };
    return ConstructedLyapunov(eval, alpha, Construction::limiting_shift, ingredients);
  };
  b.decay_floor = limiting_shift_floor(delta, c.c_bar);
  b.limiting_floor = compatibility_floor(delta, c.c_bar);

  b.notes.push_back(fmt::format("delta(s) = r s with r = {:.17g} from the sampled sup of (4/alpha')|P(t)|", r_bar));
  b.expected = {checks::validate_system, checks::compatibility, checks::relate, checks::m16, checks::limiting_decay,
                checks::decay, checks::envelope};
  if (params.g) b.expected.push_back(checks::iss);
  b.alpha_default = 1e3;
  b.ic_lo = -2.0;
  b.ic_hi = 2.0;
  b.t_end = 40.0;
  b.iss_epsilon = 1e-5;
  return b;
}

// ---------------------------------------------------------------------------
// Friction
// ---------------------------------------------------------------------------

namespace {

/// Decay constant of the deviation bound |int (sigma_i - sigma~_i)| <= M on
/// sampled intervals.
CertificateReport sigma_deviation_check(const FrictionParams& p, double M) {
  MarginTracker tracker("sigma_deviation", kHypothesisTolerance);
  SeededStream rng(7);
  QuadratureConfig cfg;
  for (int k = 0; k < 60; ++k) {
    const double t1 = rng.uniform(-50.0, 50.0);
    const double len = rng.uniform(0.01, 40.0);
    for (std::size_t i = 0; i < 3; ++i) {
      const double st = p.sigma_tilde[i];
      const auto& s = p.sigma[i];
      cfg.panels = oscillation_panels(len, 1.0);
      const double I = integrate_scalar([&](double l) { return s(l) - st; }, t1, t1 + len, cfg);
      tracker.add(scaled_margin(std::abs(I), M), vec1(static_cast<double>(i + 1)), t1, len);
    }
  }
  return tracker.finish();
}

}  // namespace

ExampleBundle example_friction(const FrictionParams& params) {
  params.validate();
  ExampleBundle b;
  b.name = params.constant_coulomb_static ? "friction-const" : "friction";
  b.description = params.constant_coulomb_static
                      ? "mass-spring with fast viscous friction and constant Coulomb/static coefficients"
                      : "mass-spring with fast viscous, Coulomb and static friction coefficients";
  b.friction = params;
  b.route = Construction::limiting_shift;
  const FrictionParams p = params;

  auto stribeck = [p](double v, double s2, double s3) {
    return (s2 + s3 * std::exp(-p.beta1 * p.mu(v))) * p.sat(v);
  };
  auto stribeck_dv = [p](double v, double s2, double s3) {
    const double e = std::exp(-p.beta1 * p.mu(v));
    const double th = p.sat(v);
    const double mu_p = p.mu_prime ? p.mu_prime(v) : (p.mu(v + 1e-7) - p.mu(v - 1e-7)) / 2e-7;
    return (s2 + s3 * e) * p.beta2 * (1.0 - th * th) - s3 * p.beta1 * mu_p * e * th;
  };

  b.sys.dim = 2;
  b.sys.f = [p, stribeck](const Vector& x, double t, double tau) {
    Vector r(2);
    r << x(1), -p.sigma[0](tau) * x(1) - p.k(t) * x(0) - stribeck(x(1), p.sigma[1](tau), p.sigma[2](tau));
    return r;
  };
  b.sys.jac_x = [p, stribeck_dv](const Vector& x, double t, double tau) {
    Matrix J(2, 2);
    J << 0.0, 1.0, -p.k(t), -p.sigma[0](tau) - stribeck_dv(x(1), p.sigma[1](tau), p.sigma[2](tau));
    return J;
  };
  b.sys.input_map = [](const Vector&, double, double) {
    Matrix g(2, 1);
    g << 0.0, 1.0;
    return g;
  };
  b.sys.input_dim = 1;

  const auto& st = p.sigma_tilde;
  LimitingSystem lim;
  lim.dim = 2;
  lim.fbar = [p, st, stribeck](const Vector& x, double t) {
    Vector r(2);
    r << x(1), -st[0] * x(1) - p.k(t) * x(0) - stribeck(x(1), st[1], st[2]);
    return r;
  };
  lim.jac_x = [p, st, stribeck_dv](const Vector& x, double t) {
    Matrix J(2, 2);
    J << 0.0, 1.0, -p.k(t), -st[0] - stribeck_dv(x(1), st[1], st[2]);
    return J;
  };
  b.lim = lim;

  const FrictionLyapunov FL = friction_lyapunov(p);
  b.V = FL.V;
  // |grad V| <= (2 A max(k_bar, 1) + 1) |x|.
  const double r_bar = 2.0 * FL.A * std::max(p.k_bar, 1.0) + 1.0;
  const CompatibilityConstants c{.c_bar = FL.b / (r_bar * r_bar), .c_bbar = r_bar, .K = 50.0, .eta_0 = 1.0};
  const Gauge delta{[r_bar](double s) { return r_bar * s; }, GaugeClass::K_infinity, fmt::format("{:.6g} s", r_bar)};
  b.gauges.delta = delta;
  b.gauges.N = inverse_square_N();
  b.gauges.constants = c;
  b.gauges.c_o = 2.0;
  b.gauges.chi = chi_gain_with_g(delta, c.c_bar, 2.0);
  b.gauges.nu = iiss_nu(delta, c.c_bar);
  b.K = c.K;

  const auto V = b.V;
  const auto sys = b.sys;
  b.builder = [V, sys, lim, p](double alpha) {
    require_alpha_above(alpha, 1.0, "friction");
    const double eta = std::sqrt(alpha);
    // R_alpha acts on xi_2 only: (eta/2) [J1 xi_2 + (J2 + J3 e^{-beta1 mu(xi_2)}) sat(xi_2)],
    // J_i(t) = int int (sigma_i(alpha l) - sigma~_i).
    auto J = window_integrals(
        [p, alpha](double l) {
          Vector v(3);
          for (int i = 0; i < 3; ++i) v(i) = p.sigma[static_cast<std::size_t>(i)](alpha * l) - p.sigma_tilde[static_cast<std::size_t>(i)];
          return v;
        },
        alpha, construction_quadrature());
    auto ingredients = std::make_shared<Ingredients>();
    ingredients->V = V;
    ingredients->sys = sys;
    ingredients->lim = lim;
    auto eval = [V, J, eta, p](const Vector& xi, double t) {
      const Vector j = (*J)(t);
      const double v = xi(1);
      const double gamma = j(0) * v + (j(1) + j(2) * std::exp(-p.beta1 * p.mu(v))) * p.sat(v);
      Vector z(2);
      z << xi(0), v + 0.5 * eta * gamma;
      return V.value(z, t);
    };
    return ConstructedLyapunov(eval, alpha, Construction::limiting_shift, ingredients);
  };
  if (p.constant_coulomb_static) {
    b.route = Construction::closed_form;
    b.builder = [p](double alpha) { return friction_const_v_alpha(p, alpha); };
  }
  b.decay_floor = limiting_shift_floor(delta, c.c_bar);
  const double b_const = FL.b;
  b.limiting_floor = [b_const](const Vector& x, double) { return b_const * x.squaredNorm(); };

  double M = 0.0;
  for (std::size_t i = 0; i < 3; ++i) M = std::max(M, st[i]);
  b.preconditions.push_back(sigma_deviation_check(p, M));
  b.notes.push_back(fmt::format("S = {:.17g}, A = {:.17g}, b = {:.17g}", FL.S, FL.A, FL.b));
  b.notes.push_back("the shift acts on xi_2 as +(sqrt(alpha)/2) int int Gamma_alpha, which is the generic -(eta/2) int int (f - fbar)");
  b.expected = {checks::validate_system, checks::compatibility, checks::relate, checks::m16, checks::limiting_decay,
                checks::decay, checks::iss};
  b.alpha_default = 1e3;
  b.alpha_floor = 1.0;
  b.ic_lo = -2.0;
  b.ic_hi = 2.0;
  b.t_end = 20.0;
  b.iss_epsilon = 1e-6;
  return b;
}

ConstructedLyapunov friction_const_v_alpha(const FrictionParams& params, double alpha, const QuadratureConfig& cfg) {
  require_alpha_above(alpha, 1.0, "friction_const_v_alpha");
  const double eta = std::sqrt(alpha);
  const FrictionLyapunov FL = friction_lyapunov(params);
  const auto V = FL.V;
  const auto s1 = params.sigma[0];
  const double st = params.sigma_tilde[0];
  QuadratureConfig local = cfg;
  local.panels = oscillation_panels(2.0 / eta, alpha, cfg.panels);
  auto J1 = detail::make_memo<double>([s1, st, alpha, eta, local](double t) {
    return double_time_integral_scalar([&](double l) { return s1(alpha * l) - st; }, t, 2.0 / eta, local);
  });
  auto ingredients = std::make_shared<Ingredients>();
  ingredients->V = V;
  auto eval = [V, J1, eta](const Vector& xi, double t) {
    Vector z(2);
    z << xi(0), xi(1) * (1.0 + 0.5 * eta * (*J1)(t));
    return V.value(z, t);
  };
  return {eval, alpha, Construction::closed_form, ingredients};
}

// ---------------------------------------------------------------------------
// Strictification examples
// ---------------------------------------------------------------------------

ExampleBundle example_ngs() {
  ExampleBundle b;
  b.name = "ngs";
  b.description = "x' = -x^3 + 10 cos(alpha t) x^3/(1+x^2); not globally Lipschitz, strictification only";
  b.route = Construction::strictification;
  b.sys.dim = 1;
  b.sys.f = [](const Vector& x, double, double tau) {
    const double v = x(0);
    return vec1(-v * v * v + 10.0 * std::cos(tau) * v * v * v / (1.0 + v * v));
  };
  b.sys.jac_x = [](const Vector& x, double, double tau) {
    const double v = x(0), q = 1.0 + v * v;
    return Matrix::Constant(1, 1, -3.0 * v * v + 10.0 * std::cos(tau) * (3.0 * v * v + v * v * v * v) / (q * q));
  };

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
  b.strictification = sd;
  b.V = sd.V;
  b.builder = [sd](double alpha) { return u_alpha(sd, alpha); };
  b.decay_floor = strictification_floor(sd.W);
  // |f| <= 11 |x|^3 = 88 (|x|/2)^3; used only to show the Jacobian bound fails.
  b.gauges.delta = Gauge{[](double s) { return 88.0 * s * s * s; }, GaugeClass::K_infinity, "88 s^3"};
  b.K = 50.0;
  b.notes.push_back("strictification route only: f is not globally Lipschitz in x, so the Jacobian bound fails for any finite K");
  b.expected = {checks::validate_system, checks::assumption_H, checks::bounda, checks::decay};
  b.alpha_default = 2e4;
  b.ic_lo = -3.0;
  b.ic_hi = 3.0;
  b.t_end = 2.0;
  return b;
}

ExampleBundle example_saturated_feedback(const SaturatedFeedbackParams& params) {
  params.validate();
  ExampleBundle b;
  b.name = "satfb";
  b.description = "x' = p(alpha t) x^2/(1+x^2) + u in closed loop with u = -u_m atan(R x)";
  b.saturated_feedback = params;
  b.route = Construction::strictification;
  const auto p = params.p;
  const double um = params.u_m;
  const double R = params.gain;
  b.sys.dim = 1;
  b.sys.f = [p, um, R](const Vector& x, double, double tau) {
    const double v = x(0);
    return vec1(p(tau) * v * v / (1.0 + v * v) - um * std::atan(R * v));
  };
  b.sys.jac_x = [p, um, R](const Vector& x, double, double tau) {
    const double v = x(0), q = 1.0 + v * v;
    return Matrix::Constant(1, 1, p(tau) * 2.0 * v / (q * q) - um * R / (1.0 + R * R * v * v));
  };

  StrictificationData sd;
  sd.V.value = [](const Vector& x, double) { return 0.5 * x(0) * x(0); };
  sd.V.grad_x = [](const Vector& x, double) { return vec1(x(0)); };
  sd.V.dt = [](const Vector&, double) { return 0.0; };
  sd.W = [um, R](const Vector& x, double) { return um * x(0) * std::atan(R * x(0)); };
  sd.theta = [](const Vector& x, double) { return std::pow(x(0), 3) / (1.0 + x(0) * x(0)); };
  sd.theta_grad = [](const Vector& x, double) {
    const double v = x(0), q = 1.0 + v * v;
    return vec1((3.0 * v * v + v * v * v * v) / (q * q));
  };
  sd.theta_dt = [](const Vector&, double) { return 0.0; };
  sd.p = p;
  sd.period = params.period;
  sd.p_max = params.a_m;
  b.strictification = sd;
  b.V = sd.V;
  b.builder = [sd](double alpha) { return u_alpha(sd, alpha); };
  b.decay_floor = strictification_floor(sd.W);

  const double peak = um * kPi / 2.0;
  b.notes.push_back(fmt::format(
      "feedback amplitude: |u| = u_m |atan(R x)| < u_m pi/2 = {:.17g}, which exceeds the stated limit |u| <= u_m = {:.17g}",
      peak, um));
  MarginTracker amp("feedback_amplitude", 0.0);
  for (double s : geometric_grid(1e-3, 1e6, 91)) amp.add(um * std::abs(std::atan(R * s)) - um, vec1(s), kNaN);
  auto amp_report = amp.finish();
  amp_report.diagnostic = "sup |u| = u_m pi/2; the amplitude limit u_m is exceeded for large |x|";
  b.preconditions.push_back(amp_report);
  b.expected = {checks::validate_system, checks::assumption_H, checks::bounda, checks::decay};
  b.alpha_default = 1e4;
  b.ic_lo = -3.0;
  b.ic_hi = 3.0;
  b.t_end = 3.0;
  return b;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

std::vector<BundleInfo> list_bundles() {
  std::vector<BundleInfo> out;
  for (const char* name : {"nonuges", "nonuges-lnk", "identification", "friction", "friction-const", "ngs", "satfb"}) {
    out.push_back({name, make_bundle(name).description});
  }
  return out;
}

ExampleBundle make_bundle(const std::string& name) {
  if (name == "nonuges") return example_non_uges();
  if (name == "nonuges-lnk") return example_non_uges_lnk();
  if (name == "identification") return example_identification();
  if (name == "friction") return example_friction();
  if (name == "friction-const") return example_friction(FrictionParams::constant_coulomb_static_defaults());
  if (name == "ngs") return example_ngs();
  if (name == "satfb") return example_saturated_feedback();
  throw UnknownBundle(fmt::format("unknown bundle '{}'", name));
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

std::vector<Vector> bundle_initial_conditions(const ExampleBundle& b, int count, std::uint64_t seed) {
  return seeded_initial_conditions(b.sys.dim, count, b.ic_lo, b.ic_hi, seed);
}

bool check_applies(const ExampleBundle& b, const std::string& check) {
  const bool lim = b.lim.has_value();
  const bool strict = b.strictification.has_value();
  if (check == checks::validate_system || check == checks::decay || check == checks::envelope) return true;
  if (check == checks::compatibility) return lim && b.gauges.delta && b.gauges.constants;
  if (check == checks::relate) return lim && b.gauges.delta && b.gauges.N && b.gauges.constants;
  if (check == checks::m16) return b.gauges.delta && b.K > 0.0;
  if (check == checks::assumption_H || check == checks::bounda) return strict;
  if (check == checks::limiting_decay) return lim && static_cast<bool>(b.limiting_floor);
  if (check == checks::iss) return b.gauges.chi.has_value() && b.iss_epsilon > 0.0;
  if (check == checks::iiss) return b.gauges.nu.has_value() && b.iss_epsilon > 0.0;
  return false;
}

namespace {

InputSignal probe_input(const ExampleBundle& b, double amplitude) {
  const int m = b.sys.input_map ? b.sys.input_dim : b.sys.dim;
  return [amplitude, m](double t) { return Vector(Vector::Constant(m, amplitude * std::sin(t))); };
}

SimulationOptions simulation(const ExampleBundle& b, const RunOptions& o) {
  SimulationOptions s;
  s.t0 = 0.0;
  s.t_end = o.t_end.value_or(b.t_end);
  s.step = o.step;
  return s;
}

}  // namespace

CertificateReport run_check(const ExampleBundle& b, const std::string& check, const RunOptions& o) {
  if (!check_applies(b, check)) {
    throw std::invalid_argument(fmt::format("check '{}' does not apply to bundle '{}'", check, b.name));
  }
  if (!(o.alpha > 0.0) || !std::isfinite(o.alpha)) throw std::invalid_argument("run_check: alpha must be positive");
  const SampleGrid grid = default_grid(b.sys.dim, o.alpha, o.seed, o.grid);
  CertificateReport report;

  if (check == checks::validate_system) {
    report = validate_system(b.sys, grid);
  } else if (check == checks::compatibility) {
    report = check_compatibility(b.V, *b.lim, *b.gauges.delta, *b.gauges.constants, grid);
  } else if (check == checks::relate) {
    const auto& c = *b.gauges.constants;
    const auto rg = relate_grid(b.sys.dim, c.eta_0, b.relate_eta_max, o.seed, 4, 5, o.relate_eta_samples);
    const auto out = check_relate(b.sys, *b.lim, *b.gauges.delta, *b.gauges.N, rg);
    report = out.report;
    report.diagnostic = fmt::format("worst ratio {:.17g}, empirical eta_0 {:.17g}", out.worst_ratio, out.empirical_eta0);
  } else if (check == checks::m16) {
    const LimitingSystem lim = b.lim ? *b.lim : LimitingSystem{b.sys.dim, [f = b.sys.f](const Vector& x, double t) { return f(x, t, 0.0); }, {}};
    report = check_m16(b.sys, lim, *b.gauges.delta, b.K, grid);
  } else if (check == checks::assumption_H) {
    const auto out = check_assumption_H(*b.strictification, b.sys, grid);
    report = out.report;
    report.diagnostic = fmt::format("derived c {:.17g}, alpha bound {:.17g}", out.derived_c, out.alpha_bound);
  } else if (check == checks::bounda) {
    const auto& sd = *b.strictification;
    report = check_bounda(sd.p, sd.period, sd.p_max, o.alpha, linspace(0.0, 20.0, 11), 33);
  } else if (check == checks::limiting_decay) {
    const auto sys = as_time_varying(*b.lim);
    std::vector<CertificateReport> parts;
    for (const auto& x0 : bundle_initial_conditions(b, o.n_initial, o.seed)) {
      const auto traj = integrate(sys, 1.0, x0, 0.0, o.t_end.value_or(b.t_end), {}, o.step);
      parts.push_back(certify_decay(traj, b.V.value, b.limiting_floor, o.decay));
    }
    report = merge_same(checks::limiting_decay, parts);
  } else if (check == checks::decay) {
    const auto L = b.builder(o.alpha);
    report = certify_decay_at(b.sys, L, bundle_initial_conditions(b, o.n_initial, o.seed), b.decay_floor,
                              simulation(b, o), o.decay);
  } else if (check == checks::iss) {
    const auto L = b.builder(o.alpha);
    const auto out = iss_gain_test(b.sys, L, *b.gauges.chi, b.decay_floor, {probe_input(b, b.iss_epsilon)},
                                   bundle_initial_conditions(b, o.n_initial, o.seed), simulation(b, o), o.decay);
    report = out.report;
    report.diagnostic = fmt::format("decay evaluations {}, gain-excluded samples {}, evaluations outside gain {}",
                                    out.decay_evaluations, out.gain_excluded, out.evaluated_outside_gain);
    if (out.evaluated_outside_gain != 0 || out.decay_evaluations == 0) report.passed = false;
  } else if (check == checks::iiss) {
    const auto L = b.builder(o.alpha);
    const auto u = probe_input(b, 10.0 * b.iss_epsilon);
    std::vector<DrivenTrajectory> runs;
    const auto sim = simulation(b, o);
    for (const auto& x0 : bundle_initial_conditions(b, o.n_initial, o.seed)) {
      runs.push_back({integrate(b.sys, o.alpha, x0, sim.t0, sim.t_end, u, sim.step), u});
    }
    const auto est = iiss_estimate(L.as_field(), *b.gauges.nu, runs, o.decay);
    report.check_name = checks::iiss;
    report.worst_margin = est.r_bar;
    report.worst_point = est.worst_point;
    report.samples_total = est.samples_used;
    report.tolerance = std::numeric_limits<double>::max();
    report.passed = std::isfinite(est.r_bar) && est.samples_used > 0;
    report.diagnostic = fmt::format("estimated r_bar {:.17g}", est.r_bar);
  } else if (check == checks::envelope) {
    const auto sim = simulation(b, o);
    std::vector<Trajectory> trajs;
    const auto ics = bundle_initial_conditions(b, o.n_initial, o.seed);
    for (const auto& x0 : ics) trajs.push_back(integrate(b.sys, o.alpha, x0, sim.t0, sim.t_end, {}, sim.step));
    report.check_name = checks::envelope;
    report.tolerance = 0.0;
    report.samples_total = 0;
    for (const auto& t : trajs) report.samples_total += static_cast<std::int64_t>(t.size());
    try {
      const auto fit = fit_envelope(trajs);
      report.worst_margin = fit.residual;
      report.passed = fit.residual <= report.tolerance;
      report.worst_point.aux = fit.lambda;
      report.diagnostic = fmt::format("D {:.17g}, lambda {:.17g}", fit.D, fit.lambda);
    } catch (const EnvelopeRefusal& e) {
      report.passed = false;
      report.worst_margin = kInf;
      report.diagnostic = e.what();
    }
  }
  if (std::isnan(report.worst_point.aux) && (check == checks::decay || check == checks::iss)) {
    report.worst_point.aux = o.alpha;
  }
  return report;
}

}  // namespace strictlyap
