#include "strictlyap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace strictlyap {

void QuadratureConfig::validate() const {
  if (panels < 8 || panels % 2 != 0) throw std::invalid_argument("quadrature: panels must be even and >= 8");
  if (refine_limit < 1) throw std::invalid_argument("quadrature: refine_limit must be >= 1");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw std::invalid_argument("quadrature: tolerances must be positive");
}

int oscillation_panels(double span, double frequency, int floor_panels) {
  const double wanted = std::ceil(10.0 * std::abs(span) * std::abs(frequency));
  long n = std::max<long>(floor_panels, static_cast<long>(std::min(wanted, 1e9)));
  if (n % 2 != 0) ++n;
  return static_cast<int>(n);
}

namespace {

double magnitude(double v) { return std::abs(v); }
double magnitude(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

Vector as_vector(double v) { return Vector::Constant(1, v); }
const Vector& as_vector(const Vector& v) { return v; }

/// Romberg table over trapezoid sums; column 1 is composite Simpson. The
/// convergence test compares successive diagonal entries starting from the
/// Simpson estimate with `cfg.panels` panels. Differences below the
/// roundoff level of width * max|f| count as converged.
template <class Value, class F>
Value romberg_simpson(F&& g, double a, double b, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(a <= b)) throw std::invalid_argument("quadrature: requires a <= b");
  double f_max = 0.0;
  auto f = [&](double x) {
    Value v = g(x);
    f_max = std::max(f_max, magnitude(v));
    return v;
  };
  Value first = f(a);
  if (a == b) return first * 0.0;

  const long base = cfg.panels / 2;
  const double width = b - a;
  Value ends = (first + f(b)) * 0.5;
  Value interior = first * 0.0;
  for (long i = 1; i < base; ++i) interior += f(a + width * static_cast<double>(i) / static_cast<double>(base));

  std::vector<std::vector<Value>> table;
  table.push_back({(ends + interior) * (width / static_cast<double>(base))});

  long panels = base;
  const int max_level = 1 + cfg.refine_limit;
  for (int k = 1; k <= max_level; ++k) {
    Value mids = first * 0.0;
    for (long i = 0; i < panels; ++i) {
      mids += f(a + width * (static_cast<double>(i) + 0.5) / static_cast<double>(panels));
    }
    interior += mids;
    panels *= 2;
    if (!std::isfinite(magnitude(interior))) {
      throw QuadratureError("quadrature: non-finite integrand", as_vector(interior), as_vector(ends));
    }
    std::vector<Value> row;
    row.reserve(static_cast<std::size_t>(k) + 1);
    row.push_back((ends + interior) * (width / static_cast<double>(panels)));
    double factor = 1.0;
    for (int j = 1; j <= k; ++j) {
      factor *= 4.0;
      const Value& left = row.back();
      const Value& up = table.back()[static_cast<std::size_t>(j) - 1];
      row.push_back(left + (left - up) * (1.0 / (factor - 1.0)));
    }
    table.push_back(std::move(row));
    if (k >= 2) {
      const Value& cur = table[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
      const Value& prev = table[static_cast<std::size_t>(k) - 1][static_cast<std::size_t>(k) - 1];
      const double err = magnitude(cur - prev);
      const double roundoff = 256.0 * std::numeric_limits<double>::epsilon() * width * f_max;
      if (err <= std::max({cfg.abs_tol, cfg.rel_tol * magnitude(cur), roundoff})) return cur;
    }
  }
  const auto& last = table.back().back();
  const auto& prev = table[table.size() - 2].back();
  throw QuadratureError("quadrature: no convergence within refine_limit", as_vector(last), as_vector(prev));
}

void check_fubini_bound(double value_mag, double tau, double max_p, const QuadratureConfig& cfg) {
  const double bound = 0.5 * tau * tau * max_p;
  if (value_mag > bound + cfg.abs_tol + 1e-9 * bound) {
    throw std::logic_error("double_time_integral: |I| exceeds (tau^2/2) max|p|");
  }
}

}  // namespace

Vector weighted_single_integral(const VectorIntegrand& p, double a, double b, const QuadratureConfig& cfg) {
  return romberg_simpson<Vector>(p, a, b, cfg);
}

double integrate_scalar(const ScalarIntegrand& p, double a, double b, const QuadratureConfig& cfg) {
  return romberg_simpson<double>(p, a, b, cfg);
}

Vector double_time_integral(const VectorIntegrand& p, double t, double tau, const QuadratureConfig& cfg) {
  if (!(tau > 0.0)) throw std::invalid_argument("double_time_integral: tau must be positive");
  const double lo = t - tau;
  double max_p = 0.0;
  auto weighted = [&](double l) {
    Vector v = p(l);
    max_p = std::max(max_p, magnitude(v));
    v *= (l - lo);
    return v;
  };
  Vector value = romberg_simpson<Vector>(weighted, lo, t, cfg);
  check_fubini_bound(magnitude(value), tau, max_p, cfg);
  return value;
}

double double_time_integral_scalar(const ScalarIntegrand& p, double t, double tau, const QuadratureConfig& cfg) {
  if (!(tau > 0.0)) throw std::invalid_argument("double_time_integral: tau must be positive");
  const double lo = t - tau;
  double max_p = 0.0;
  auto weighted = [&](double l) {
    const double v = p(l);
    max_p = std::max(max_p, std::abs(v));
    return (l - lo) * v;
  };
  const double value = romberg_simpson<double>(weighted, lo, t, cfg);
  check_fubini_bound(std::abs(value), tau, max_p, cfg);
  return value;
}

Vector double_integral_rate(const VectorIntegrand& p, double t, double tau, double h, const QuadratureConfig& cfg) {
  if (!(h > 0.0)) throw std::invalid_argument("double_integral_rate: h must be positive");
  return (double_time_integral(p, t + h, tau, cfg) - double_time_integral(p, t - h, tau, cfg)) / (2.0 * h);
}

double double_integral_derivative_check(const VectorIntegrand& p, double t, double tau, double h,
                                        const QuadratureConfig& cfg) {
  const Vector numeric = double_integral_rate(p, t, tau, h, cfg);
  const Vector identity = tau * p(t) - weighted_single_integral(p, t - tau, t, cfg);
  return magnitude(numeric - identity);
}

}  // namespace strictlyap
