#include "strictlyap/sampling.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace strictlyap {

std::uint64_t SeededStream::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SeededStream::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("linspace: n must be positive");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("geometric_grid: need 0 < lo < hi, n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

namespace {

constexpr std::array<int, 12> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<Vector> unit_directions(int dim, int count, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("unit_directions: dim must be positive");
  std::vector<Vector> out;
  if (dim == 1) {
    out.push_back(Vector::Constant(1, 1.0));
    out.push_back(Vector::Constant(1, -1.0));
    return out;
  }
  if (dim > static_cast<int>(kPrimes.size())) throw std::invalid_argument("unit_directions: dim too large");
  std::uint64_t index = 1 + seed % 4096;
  while (static_cast<int>(out.size()) < count) {
    Vector v(dim);
    for (int k = 0; k < dim; ++k) v[k] = 2.0 * radical_inverse(index, kPrimes[static_cast<std::size_t>(k)]) - 1.0;
    ++index;
    const double n = v.norm();
    if (n < 0.05 || n > 1.0) continue;
    out.push_back(v / n);
  }
  return out;
}

SampleGrid default_grid(int dim, double alpha, std::uint64_t seed, const GridOptions& options) {
  if (!(alpha > 0.0)) throw std::invalid_argument("default_grid: alpha must be positive");
  SampleGrid grid;
  const int n_dirs = options.directions > 0 ? options.directions : (dim == 1 ? 2 : 4 * dim);
  const auto dirs = unit_directions(dim, n_dirs, seed);
  const int n_radii = (options.radius_max_exp - options.radius_min_exp) * options.per_decade + 1;
  for (int i = 0; i < n_radii; ++i) {
    const double e = options.radius_min_exp + static_cast<double>(i) / options.per_decade;
    const double r = std::pow(10.0, e);
    for (const auto& d : dirs) grid.states.push_back(r * d);
  }
  grid.times = linspace(0.0, options.t_max, options.n_times);
  grid.fast_times = linspace(0.0, options.t_max * alpha, options.n_fast_times);
  return grid;
}

std::vector<Vector> seeded_initial_conditions(int dim, int count, double lo, double hi, std::uint64_t seed) {
  SeededStream rng(seed);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector x(dim);
    for (int k = 0; k < dim; ++k) x[k] = rng.uniform(lo, hi);
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace strictlyap
