#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace proxyflow {

/// splitmix64 step; used to derive independent per-instance seeds from a
/// master seed so sampling stays reproducible under any parallel schedule.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0x632be59bd9b4e019ULL * (index + 1));
  return splitmix64(s);
}

/// Deterministic RNG with explicit distributions. The standard library's
/// distribution objects are implementation-defined, which breaks bit-exact
/// artifact reproduction; the mappings below are fixed by this code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (no cached spare: one value per call,
  /// so the draw sequence is position-independent).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double lognormal(double mu, double sigma) {
    return std::exp(normal(mu, sigma));
  }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return n ? engine_() % n : 0;
  }

 private:
  std::mt19937_64 engine_;
};

/// Lognormal parameters (mu, sigma of the underlying normal) giving an exact
/// target mean and standard deviation.
struct LognormalParams {
  double mu;
  double sigma;
};

inline LognormalParams lognormal_from_mean_sd(double mean, double sd) {
  const double s2 = std::log1p((sd * sd) / (mean * mean));
  return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

}  // namespace proxyflow
