/**
 * @file quadrature.hpp
 * @brief Composite Simpson quadrature with Richardson (Romberg) refinement,
 *        and the single/double time integrals used by the Lyapunov constructions.
 *
 * Double integrals I(t, tau) = int_{t-tau}^{t} int_{s}^{t} p(l) dl ds are
 * reduced over the triangle {t - tau <= s <= l <= t} to the single weighted
 * integral int_{t-tau}^{t} (l - (t - tau)) p(l) dl.
 */
#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "strictlyap/certificate.hpp"

namespace strictlyap {

struct QuadratureConfig {
  /// Simpson panel count at the coarsest level (even, >= 8).
  int panels = 64;
  /// Maximum number of panel doublings.
  int refine_limit = 10;
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;

  void validate() const;
};

/// Raised when the tolerance is not met after `refine_limit` doublings.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, Vector last, Vector previous)
      : std::runtime_error(what), last_(std::move(last)), previous_(std::move(previous)) {}

  [[nodiscard]] const Vector& last_estimate() const { return last_; }
  [[nodiscard]] const Vector& previous_estimate() const { return previous_; }

 private:
  Vector last_;
  Vector previous_;
};

using VectorIntegrand = std::function<Vector(double)>;
using ScalarIntegrand = std::function<double(double)>;

/// Panel count resolving an integrand that oscillates at `frequency` (rad per
/// unit time) over a window of length `span`: at least ten panels per period
/// scale and never fewer than `floor_panels`. Always even.
[[nodiscard]] int oscillation_panels(double span, double frequency, int floor_panels = 64);

/// int_a^b p(l) dl.
[[nodiscard]] Vector weighted_single_integral(const VectorIntegrand& p, double a, double b,
                                              const QuadratureConfig& cfg = {});
[[nodiscard]] double integrate_scalar(const ScalarIntegrand& p, double a, double b,
                                      const QuadratureConfig& cfg = {});

/// int_{t-tau}^{t} int_{s}^{t} p(l) dl ds via the Fubini weight. Asserts the
/// bound |I| <= (tau^2/2) max|p| on the sampled nodes.
[[nodiscard]] Vector double_time_integral(const VectorIntegrand& p, double t, double tau,
                                          const QuadratureConfig& cfg = {});
[[nodiscard]] double double_time_integral_scalar(const ScalarIntegrand& p, double t, double tau,
                                                 const QuadratureConfig& cfg = {});

/// |numeric dI/dt - [tau p(t) - int_{t-tau}^{t} p]| for a t-independent p,
/// with dI/dt taken by central differences of step h.
[[nodiscard]] double double_integral_derivative_check(const VectorIntegrand& p, double t, double tau, double h,
                                                      const QuadratureConfig& cfg = {});

/// Central-difference dI/dt used by the identity check.
[[nodiscard]] Vector double_integral_rate(const VectorIntegrand& p, double t, double tau, double h,
                                          const QuadratureConfig& cfg = {});

}  // namespace strictlyap
