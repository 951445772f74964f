#include "strictlyap/params.hpp"

#include <fmt/format.h>

#include <stdexcept>

#include "strictlyap/quadrature.hpp"
#include "strictlyap/sampling.hpp"

namespace strictlyap {

namespace {

std::array<ScalarFn, 3> half_sine_coefficients(const std::array<double, 3>& tilde) {
  std::array<ScalarFn, 3> out;
  for (std::size_t i = 0; i < 3; ++i) {
    const double s = tilde[i];
    out[i] = [s](double tau) { return s + 0.5 * s * std::sin(tau); };
  }
  return out;
}

}  // namespace

FrictionParams FrictionParams::defaults() {
  FrictionParams p;
  p.sigma = half_sine_coefficients(p.sigma_tilde);
  return p;
}

FrictionParams FrictionParams::constant_coulomb_static_defaults() {
  FrictionParams p = defaults();
  const double s2 = p.sigma_tilde[1];
  const double s3 = p.sigma_tilde[2];
  p.sigma[1] = [s2](double) { return s2; };
  p.sigma[2] = [s3](double) { return s3; };
  p.constant_coulomb_static = true;
  return p;
}

void FrictionParams::validate() const {
  if (!(sigma_tilde[0] > 0.0) || sigma_tilde[1] < 0.0 || sigma_tilde[2] < 0.0) {
    throw std::invalid_argument("friction: need sigma~1 > 0 and sigma~2, sigma~3 >= 0");
  }
  if (!(beta1 > 0.0) || !(beta2 > 0.0)) throw std::invalid_argument("friction: beta1 and beta2 must be positive");
  if (!(k_o > 0.0) || k_bar < k_o) throw std::invalid_argument("friction: need 0 < k_o <= k_bar");
  if (!k || !mu || !sigma[0] || !sigma[1] || !sigma[2]) {
    throw std::invalid_argument("friction: k, mu and sigma_1..3 must be set");
  }
  for (double t : linspace(0.0, 50.0, 501)) {
    const double kt = k(t);
    if (kt < k_o * (1.0 - 1e-12) || kt > k_bar * (1.0 + 1e-12)) {
      throw std::invalid_argument(fmt::format("friction: k({}) = {} outside [k_o, k_bar]", t, kt));
    }
    const double slope = k_prime ? k_prime(t) : (k(t + 1e-6) - k(t - 1e-6)) / 2e-6;
    if (slope > 1e-12) {
      throw std::invalid_argument(fmt::format("friction: spring stiffness increases at t = {} (k' = {})", t, slope));
    }
  }
  if (sat(0.0) != 0.0) throw std::invalid_argument("friction: sat(0) != 0");
  for (double v : geometric_grid(1e-3, 1e3, 61)) {
    if (v * sat(v) < 0.0 || -v * sat(-v) < 0.0) throw std::invalid_argument("friction: xi sat(xi) < 0");
  }
  if (std::abs(sat(1e3 / beta2) - 1.0) > 1e-9 || std::abs(sat(-1e3 / beta2) + 1.0) > 1e-9) {
    throw std::invalid_argument("friction: sat does not saturate at +-1");
  }
}

IdentificationParams IdentificationParams::defaults() {
  IdentificationParams p;
  p.g = [](const Vector&, double, double tau) {
    Matrix g(2, 1);
    g << 1.0, std::cos(tau);
    return Matrix(g / std::sqrt(2.0));
  };
  p.input_dim = 1;
  return p;
}

void IdentificationParams::validate() const {
  if (!(f_star < 0.0)) throw std::invalid_argument("identification: f_star must be negative");
  if (!(c_tilde > 0.0) || !(alpha_prime > 0.0) || beta_prime < alpha_prime) {
    throw std::invalid_argument("identification: need c~ > 0 and 0 < alpha' <= beta'");
  }
  if (!f_fast || !m) throw std::invalid_argument("identification: f_fast and m must be set");
  for (double t : linspace(-10.0, 10.0, 201)) {
    const double norm = m(t).norm();
    if (std::abs(norm - 1.0) > 1e-9) {
      throw std::invalid_argument(fmt::format("identification: |m({})| = {} != 1", t, norm));
    }
  }
  const double half = 2000.0;
  QuadratureConfig cfg;
  cfg.panels = oscillation_panels(2.0 * half, 1.0, 64);
  cfg.abs_tol = 1e-9;
  cfg.rel_tol = 1e-9;
  const double mean = integrate_scalar(f_fast, -half, half, cfg) / (2.0 * half);
  if (std::abs(mean - f_star) > 1e-2 * std::max(1.0, std::abs(f_star))) {
    throw std::invalid_argument(fmt::format("identification: mean of f_fast is {} but f_star = {}", mean, f_star));
  }
  if (g) {
    const int n = static_cast<int>(m(0.0).size());
    for (const Vector& x : default_grid(n, 1.0, 42, GridOptions{.per_decade = 4, .n_times = 5}).states) {
      for (double t : linspace(0.0, 10.0, 7)) {
        for (double tau : linspace(0.0, 7.0, 8)) {
          const double gn = spectral_norm(g(x, t, tau));
          if (gn > beta_prime * (1.0 + std::sqrt(x.norm())) * (1.0 + 1e-12)) {
            throw std::invalid_argument("identification: input map exceeds beta' (1 + sqrt|x|)");
          }
        }
      }
    }
  }
}

void SaturatedFeedbackParams::validate() const {
  if (!(a_m > 0.0) || !(u_m > 0.0) || !(gain > 0.0) || !(period > 0.0)) {
    throw std::invalid_argument("saturated feedback: a_m, u_m, R and T must be positive");
  }
  if (!p) throw std::invalid_argument("saturated feedback: p must be set");
  for (double l : linspace(0.0, period, 1001)) {
    if (std::abs(p(l)) > a_m * (1.0 + 1e-12)) {
      throw std::invalid_argument(fmt::format("saturated feedback: |p({})| exceeds a_m", l));
    }
  }
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-10;
  cfg.refine_limit = 16;
  const double mean = integrate_scalar(p, 0.0, period, cfg);
  if (std::abs(mean) > 1e-8 * a_m * period) {
    throw std::invalid_argument(fmt::format("saturated feedback: p has nonzero mean over a period ({})", mean));
  }
}

}  // namespace strictlyap
