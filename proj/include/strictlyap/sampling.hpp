#pragma once

#include <cstdint>
#include <vector>

#include "strictlyap/certificate.hpp"

namespace strictlyap {

/// Deterministic 64-bit generator (splitmix64) with a portable uniform
/// mapping, so seeded samples agree across standard libraries.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

struct GridOptions {
  int radius_min_exp = -2;
  int radius_max_exp = 2;
  int per_decade = 16;
  int directions = 0;  // 0: 2 for n = 1, 4n otherwise
  int n_times = 21;
  double t_max = 20.0;
  int n_fast_times = 21;
};

/// States on a log-radial grid with low-discrepancy directions, slow times on
/// [0, t_max] and fast times on [0, t_max * alpha].
struct SampleGrid {
  std::vector<Vector> states;
  std::vector<double> times;
  std::vector<double> fast_times;

  [[nodiscard]] bool empty() const { return states.empty() || times.empty(); }
};

[[nodiscard]] std::vector<double> linspace(double lo, double hi, int n);
[[nodiscard]] std::vector<double> geometric_grid(double lo, double hi, int n);

/// Unit directions: +-1 in one dimension, Halton points on the sphere otherwise.
[[nodiscard]] std::vector<Vector> unit_directions(int dim, int count, std::uint64_t seed);

[[nodiscard]] SampleGrid default_grid(int dim, double alpha = 1.0, std::uint64_t seed = 42,
                                      const GridOptions& options = {});

/// `count` seeded initial conditions with coordinates uniform on [lo, hi].
[[nodiscard]] std::vector<Vector> seeded_initial_conditions(int dim, int count, double lo, double hi,
                                                            std::uint64_t seed);

}  // namespace strictlyap
