#include "strictlyap/certificate.hpp"

#include <algorithm>
#include <utility>

namespace strictlyap {

MarginTracker::MarginTracker(std::string check_name, double tolerance) {
  report_.check_name = std::move(check_name);
  report_.tolerance = tolerance;
}

void MarginTracker::add(double margin, const Vector& state, double t, double aux) {
  ++report_.samples_total;
  if (!std::isfinite(margin)) {
    if (!non_finite_) {
      non_finite_ = true;
      report_.worst_margin = kInf;
      report_.worst_point = SamplePoint{state, t, aux};
      report_.diagnostic = "non-finite value at sample";
    }
    return;
  }
  if (non_finite_) return;
  if (margin > report_.worst_margin) {
    report_.worst_margin = margin;
    report_.worst_point = SamplePoint{state, t, aux};
  }
}

void MarginTracker::add_failure(const std::string& diagnostic, const Vector& state, double t, double aux) {
  ++report_.samples_total;
  if (!non_finite_) {
    non_finite_ = true;
    report_.worst_margin = kInf;
    report_.worst_point = SamplePoint{state, t, aux};
    report_.diagnostic = diagnostic;
  }
}

CertificateReport MarginTracker::finish() const {
  CertificateReport out = report_;
  out.passed = !non_finite_ && out.worst_margin <= out.tolerance;
  return out;
}

CertificateReport combine(std::string check_name, std::vector<CertificateReport> parts) {
  CertificateReport out;
  out.check_name = std::move(check_name);
  out.tolerance = 0.0;
  out.worst_margin = -kInf;
  bool all_passed = true;
  for (const auto& part : parts) {
    out.samples_total += part.samples_total;
    all_passed = all_passed && part.passed;
    const double shifted = part.worst_margin - part.tolerance;
    if (shifted > out.worst_margin || (std::isnan(shifted) && !std::isnan(out.worst_margin))) {
      out.worst_margin = std::isnan(shifted) ? kInf : shifted;
      out.worst_point = part.worst_point;
    }
    if (!part.passed && out.diagnostic.empty()) {
      out.diagnostic = part.check_name + (part.diagnostic.empty() ? " failed" : ": " + part.diagnostic);
    }
  }
  out.passed = all_passed && out.worst_margin <= 0.0;
  out.parts = std::move(parts);
  return out;
}

CertificateReport merge_same(std::string check_name, const std::vector<CertificateReport>& reports) {
  CertificateReport out;
  out.check_name = std::move(check_name);
  out.worst_margin = -kInf;
  if (!reports.empty()) out.tolerance = reports.front().tolerance;
  bool all_passed = true;
  for (const auto& r : reports) {
    out.samples_total += r.samples_total;
    all_passed = all_passed && r.passed;
    if (r.worst_margin > out.worst_margin) {
      out.worst_margin = r.worst_margin;
      out.worst_point = r.worst_point;
    }
    if (out.diagnostic.empty() && !r.diagnostic.empty()) out.diagnostic = r.diagnostic;
  }
  out.passed = all_passed && out.worst_margin <= out.tolerance;
  return out;
}

}  // namespace strictlyap
