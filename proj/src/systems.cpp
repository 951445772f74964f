#include "strictlyap/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace strictlyap {

const char* to_string(GaugeClass c) {
  switch (c) {
    case GaugeClass::K: return "K";
    case GaugeClass::K_infinity: return "K_infinity";
    case GaugeClass::M: return "M";
    case GaugeClass::positive_definite: return "positive_definite";
  }
  return "unknown";
}

void CompatibilityConstants::validate() const {
  if (!(c_bar > 0.0 && c_bar < 1.0)) throw std::invalid_argument("compatibility: c_bar must lie in (0, 1)");
  if (!(c_bbar > 0.0)) throw std::invalid_argument("compatibility: c_bbar must be positive");
  if (!(K > 1.0)) throw std::invalid_argument("compatibility: K must exceed 1");
  if (!(eta_0 > 0.0)) throw std::invalid_argument("compatibility: eta_0 must be positive");
}

Vector fd_gradient(const ScalarFieldFn& fn, const Vector& x, double t, double h_scale) {
  const double h = fd_step(x.norm()) * h_scale;
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    xp[k] = x[k] + h;
    const double up = fn(xp, t);
    xp[k] = x[k] - h;
    const double down = fn(xp, t);
    xp[k] = x[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

double fd_time_derivative(const ScalarFieldFn& fn, const Vector& x, double t) {
  const double h = fd_step(t);
  return (fn(x, t + h) - fn(x, t - h)) / (2.0 * h);
}

Matrix fd_jacobian(const DynamicsFn& f, const Vector& x, double t, double tau) {
  const double h = fd_step(x.norm());
  const auto n = x.size();
  Matrix J(n, n);
  Vector xp = x;
  for (Eigen::Index k = 0; k < n; ++k) {
    xp[k] = x[k] + h;
    const Vector up = f(xp, t, tau);
    xp[k] = x[k] - h;
    const Vector down = f(xp, t, tau);
    xp[k] = x[k];
    J.col(k) = (up - down) / (2.0 * h);
  }
  return J;
}

Matrix fd_jacobian(const LimitingFn& f, const Vector& x, double t) {
  return fd_jacobian([&f](const Vector& y, double s, double) { return f(y, s); }, x, t, 0.0);
}

Matrix jacobian(const TimeVaryingSystem& sys, const Vector& x, double t, double tau) {
  return sys.jac_x ? sys.jac_x(x, t, tau) : fd_jacobian(sys.f, x, t, tau);
}

Matrix jacobian(const LimitingSystem& lim, const Vector& x, double t) {
  return lim.jac_x ? lim.jac_x(x, t) : fd_jacobian(lim.fbar, x, t);
}

Vector gradient(const LyapunovCandidate& V, const Vector& x, double t) {
  return V.grad_x ? V.grad_x(x, t) : fd_gradient(V.value, x, t);
}

double time_partial(const LyapunovCandidate& V, const Vector& x, double t) {
  return V.dt ? V.dt(x, t) : fd_time_derivative(V.value, x, t);
}

double orbital_derivative(const LyapunovCandidate& V, const Vector& x, double t, const Vector& velocity) {
  return time_partial(V, x, t) + gradient(V, x, t).dot(velocity);
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Vector closed_rhs(const TimeVaryingSystem& sys, const Vector& x, double t, double alpha, const Vector* u) {
  Vector dx = sys.f(x, t, alpha * t);
  if (u != nullptr) {
    if (sys.has_input_map()) {
      dx += sys.input_map(x, t, alpha * t) * (*u);
    } else {
      dx += *u;
    }
  }
  return dx;
}

TimeVaryingSystem as_time_varying(const LimitingSystem& lim) {
  TimeVaryingSystem sys;
  sys.dim = lim.dim;
  sys.f = [fbar = lim.fbar](const Vector& x, double t, double) { return fbar(x, t); };
  if (lim.jac_x) {
    sys.jac_x = [jac = lim.jac_x](const Vector& x, double t, double) { return jac(x, t); };
  }
  return sys;
}

CertificateReport validate_system(const TimeVaryingSystem& sys, const SampleGrid& grid, double tolerance) {
  if (grid.times.empty() || grid.fast_times.empty()) throw std::invalid_argument("validate_system: empty grid");
  std::vector<CertificateReport> parts;

  MarginTracker null_track("nullness", tolerance);
  const Vector zero = Vector::Zero(sys.dim);
  for (double t : grid.times) {
    for (double tau : grid.fast_times) {
      const Vector v = sys.f(zero, t, tau);
      if (!v.allFinite()) {
        null_track.add_failure("non-finite f at x = 0", zero, t, tau);
        continue;
      }
      null_track.add(v.lpNorm<Eigen::Infinity>(), zero, t, tau);
    }
  }
  parts.push_back(null_track.finish());

  if (sys.jac_x) {
    MarginTracker jac_track("jacobian_consistency", 1e-5);
    const std::size_t nt = std::min<std::size_t>(3, grid.times.size());
    const std::size_t nf = std::min<std::size_t>(3, grid.fast_times.size());
    for (const auto& x : grid.states) {
      for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nf; ++j) {
          const double t = grid.times[i];
          const double tau = grid.fast_times[j];
          const Matrix J = sys.jac_x(x, t, tau);
          const Matrix Jfd = fd_jacobian(sys.f, x, t, tau);
          const double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
          jac_track.add((J - Jfd).cwiseAbs().maxCoeff() / scale, x, t, tau);
        }
      }
    }
    parts.push_back(jac_track.finish());
  }
  return combine("validate_system", std::move(parts));
}

namespace {

constexpr double kStrict = -std::numeric_limits<double>::denorm_min();

Vector scalar_point(double s) { return Vector::Constant(1, s); }

}  // namespace

CertificateReport gauge_class_check(const Gauge& g, const std::vector<double>& grid) {
  if (grid.size() < 32) throw std::invalid_argument("gauge_class_check: grid needs at least 32 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw std::invalid_argument("gauge_class_check: grid must be positive and strictly increasing");
    }
  }
  std::vector<CertificateReport> parts;

  MarginTracker nonneg("nonnegative", 0.0);
  for (double s : grid) nonneg.add(-g(s), scalar_point(s), kNaN, s);
  parts.push_back(nonneg.finish());

  switch (g.declared_class) {
    case GaugeClass::K:
    case GaugeClass::K_infinity: {
      MarginTracker origin("zero_at_origin", 1e-14);
      origin.add(std::abs(g(0.0)), scalar_point(0.0), kNaN, 0.0);
      parts.push_back(origin.finish());
      MarginTracker inc("strictly_increasing", kStrict);
      double prev = g(0.0);
      double prev_s = 0.0;
      for (double s : grid) {
        const double v = g(s);
        inc.add(prev - v, scalar_point(prev_s), kNaN, prev_s);
        prev = v;
        prev_s = s;
      }
      parts.push_back(inc.finish());
      break;
    }
    case GaugeClass::M: {
      MarginTracker mono("product_nonincreasing", 1e-12);
      double prev = grid.front() * g(grid.front());
      for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = grid[i] * g(grid[i]);
        const double scale = std::max(std::abs(prev), std::numeric_limits<double>::min());
        mono.add((cur - prev) / scale, scalar_point(grid[i]), kNaN, grid[i]);
        prev = cur;
      }
      parts.push_back(mono.finish());
      MarginTracker decay("product_decays", 0.0);
      const double first = grid.front() * g(grid.front());
      const double last = grid.back() * g(grid.back());
      decay.add(last - first / 10.0, scalar_point(grid.back()), kNaN, grid.back());
      parts.push_back(decay.finish());
      break;
    }
    case GaugeClass::positive_definite: {
      MarginTracker origin("zero_at_origin", 1e-14);
      origin.add(std::abs(g(0.0)), scalar_point(0.0), kNaN, 0.0);
      parts.push_back(origin.finish());
      MarginTracker pos("positive", kStrict);
      for (double s : grid) pos.add(-g(s), scalar_point(s), kNaN, s);
      parts.push_back(pos.finish());
      break;
    }
  }
  return combine(std::string("gauge_class_") + to_string(g.declared_class), std::move(parts));
}

double gradient_consistency(const LyapunovCandidate& V, const Vector& x, double t, double h_scale) {
  if (!V.grad_x) throw std::invalid_argument("gradient_consistency: candidate has no analytic gradient");
  const Vector g = V.grad_x(x, t);
  const Vector gfd = fd_gradient(V.value, x, t, h_scale);
  return (g - gfd).norm() / std::max(1.0, g.norm());
}

CertificateReport validate_candidate(const LyapunovCandidate& V, const SampleGrid& grid) {
  if (grid.empty()) throw std::invalid_argument("validate_candidate: empty grid");
  std::vector<CertificateReport> parts;
  const int dim = static_cast<int>(grid.states.front().size());
  const Vector zero = Vector::Zero(dim);

  MarginTracker origin("zero_at_origin", 1e-12);
  for (double t : grid.times) origin.add(std::abs(V(zero, t)), zero, t);
  parts.push_back(origin.finish());

  MarginTracker pos("positive", kStrict);
  for (const auto& x : grid.states) {
    for (double t : grid.times) pos.add(-V(x, t), x, t);
  }
  parts.push_back(pos.finish());

  if (V.grad_x) {
    MarginTracker grad("gradient_consistency", 1e-5);
    for (const auto& x : grid.states) {
      for (double t : grid.times) grad.add(gradient_consistency(V, x, t), x, t);
    }
    parts.push_back(grad.finish());
  }
  return combine("validate_candidate", std::move(parts));
}

}  // namespace strictlyap
