#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "npl/error.hpp"

namespace npl {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Mixes a master seed with a path of indices into a single 64-bit seed.
/// Distinct paths give unrelated seeds; the mapping is a pure function.
inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = detail::splitmix64(master_seed ^ 0x6e706c2d62737472ULL);
  for (std::uint64_t p : path) h = detail::splitmix64(h ^ detail::splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/// Builds a generator from a 64-bit seed through seed_seq so that the whole
/// Mersenne state is populated, not just the first word.
inline Rng make_stream(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x4e504cu, 0x53545231u};
  return Rng(seq);
}

/// Independent, reproducible stream for bootstrap sample `sample_index`.
inline Rng derive_sample_stream(std::uint64_t master_seed, std::uint64_t sample_index) {
  return make_stream(derive_seed(master_seed, {sample_index}));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Gamma(shape, 1). std::gamma_distribution is valid for every positive shape.
inline double standard_gamma(double shape, Rng& rng) {
  return std::gamma_distribution<double>(shape, 1.0)(rng);
}

/// Beta(1, b) by inversion; stays accurate when b is huge.
inline double beta_one(double b, Rng& rng) {
  const double u = uniform01(rng);
  return -std::expm1(std::log1p(-u) / b);
}

/// Dirichlet draw by normalised Gamma variates. Retries a bounded number of
/// times if every Gamma variate underflows to zero.
inline std::vector<double> dirichlet(std::span<const double> concentration, Rng& rng,
                                     int max_attempts = 8) {
  std::vector<double> out(concentration.size());
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    double total = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = standard_gamma(concentration[k], rng);
      total += out[k];
    }
    if (total > 0.0 && std::isfinite(total)) {
      for (double& v : out) v /= total;
      return out;
    }
  }
  throw NumericalError("dirichlet: every gamma variate underflowed to zero");
}

}  // namespace npl
