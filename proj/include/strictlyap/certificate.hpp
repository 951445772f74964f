#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace strictlyap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Location of the most-violating sample. `aux` carries an auxiliary
/// parameter such as eta or alpha (NaN when unused).
struct SamplePoint {
  Vector state;
  double t = kNaN;
  double aux = kNaN;
};

/// Outcome of one falsification check.
///
/// `worst_margin` is the largest sampled value of (LHS - RHS) of the checked
/// inequality; `passed` holds exactly when worst_margin <= tolerance.
struct CertificateReport {
  std::string check_name;
  bool passed = true;
  double worst_margin = -kInf;
  SamplePoint worst_point;
  std::int64_t samples_total = 0;
  double tolerance = 0.0;
  std::string diagnostic;
  std::vector<CertificateReport> parts;
};

/// Running maximum of margins. Ties keep the earliest sample, so a fixed
/// iteration order gives a fixed worst point.
class MarginTracker {
 public:
  MarginTracker(std::string check_name, double tolerance);

  /// Records one sample; non-finite margins mark the report as failed.
  void add(double margin, const Vector& state, double t, double aux = kNaN);
  void add_failure(const std::string& diagnostic, const Vector& state, double t, double aux = kNaN);

  [[nodiscard]] std::int64_t count() const { return report_.samples_total; }
  [[nodiscard]] CertificateReport finish() const;

 private:
  CertificateReport report_;
  bool non_finite_ = false;
};

/// Combined verdict over sub-reports: the margin is the largest
/// (part.worst_margin - part.tolerance) and the tolerance is zero.
[[nodiscard]] CertificateReport combine(std::string check_name, std::vector<CertificateReport> parts);

/// Merges reports of the same check across independent work units (trajectories,
/// alpha values). Order of `reports` decides ties.
[[nodiscard]] CertificateReport merge_same(std::string check_name, const std::vector<CertificateReport>& reports);

}  // namespace strictlyap
