/**
 * @file cli.hpp
 * @brief Command-line front end: verify, sweep, simulate, list-bundles.
 *
 * Exit codes: 0 all requested certificates pass, 1 a certificate failed,
 * 2 usage error, 3 numerical error.
 */
#pragma once

#include <ostream>

#include "strictlyap/certificate.hpp"

namespace strictlyap {

inline constexpr const char* kArtifactVersion = STRICTLYAP_VERSION;

namespace cli {

enum ExitCode : int { kAllPass = 0, kCertifiedFail = 1, kUsageError = 2, kNumericalError = 3 };

/// Runs one command line. `argv[0]` is the program name.
[[nodiscard]] int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// One NDJSON report line (without the trailing newline).
[[nodiscard]] std::string report_line(const std::string& bundle, double alpha, std::uint64_t seed,
                                      const CertificateReport& report);

}  // namespace cli
}  // namespace strictlyap
