#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "bidbench/errors.hpp"

namespace bidbench {

/// 64-bit avalanche finalizer (splitmix64's), used for seeding and stream
/// derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// FNV-1a over bytes. Stable across platforms; used to turn textual tags
/// ("richards|5|3") into substream identifiers.
constexpr std::uint64_t stable_hash(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Deterministic seed derivation for named sub-tasks of a computation.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) noexcept {
  return mix64(base ^ stable_hash(tag));
}

/// Splittable counter-based generator (splitmix64 core). All randomness in
/// the library flows through this class: the standard library's distributions
/// are implementation-defined, and bit-exact reproducibility of every dataset
/// and training run is a hard requirement here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() noexcept { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n) via 128-bit multiply (no modulo bias worth
  /// caring about at 64 bits of input entropy).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("Rng::below requires n > 0");
    return std::uint64_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller. No cached spare: two uniforms per draw
  /// keeps the consumption pattern independent of call history.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]; keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

  /// Gamma(shape, 1) by the Marsaglia-Tsang squeeze; boosted for shape < 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw ArgumentError("gamma shape must be positive");
    if (shape < 1.0) {
      const double u = 1.0 - uniform();  // (0, 1]
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      const double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = 1.0 - uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Beta(a, b) as a ratio of gammas.
  double beta(double a, double b) {
    const double ga = gamma(a);
    const double gb = gamma(b);
    const double s = ga + gb;
    return s > 0.0 ? ga / s : 0.5;  // s == 0 has probability zero
  }

  /// Child generator for an independent named stream. Forking does not
  /// advance the parent, so sibling forks commute with each other and with
  /// later parent draws.
  Rng fork(std::uint64_t stream) const noexcept {
    return Rng(mix64(state_ ^ 0xA0761D6478BD642Full) ^ mix64(stream + 0xE7037ED1A0B428DBull));
  }

  Rng fork(std::string_view tag) const noexcept { return fork(stable_hash(tag)); }

  /// Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = std::size_t(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::uint64_t state_;
};

}  // namespace bidbench
