#pragma once

#include <cstdint>
#include <cstring>
#include <cmath>
#include <random>
#include <string_view>
#include <initializer_list>

#include <Eigen/Dense>

namespace bcrb {

// One splitmix64 step. Used for mixing seeds, not as a generator.
inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stable stream derivation: every stochastic consumer gets its seed as
// derive_seed(master, component_label, {cell indices...}). Reproducible
// independent of execution order or thread count.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t h = master;
  (void)splitmix64(h);
  h ^= fnv1a64(label);
  (void)splitmix64(h);
  std::uint64_t out = splitmix64(h);
  for (std::uint64_t idx : indices) {
    h ^= idx;
    out = splitmix64(h);
  }
  return out;
}

inline std::uint64_t hash_double_bits(double x) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(x));
  std::memcpy(&bits, &x, sizeof(bits));
  return bits;
}

// Deterministic random stream. mt19937_64 output is pinned by the standard;
// uniforms and normals are built from raw bits so draws are bit-stable across
// platforms (std::*_distribution is implementation-defined and avoided).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform01_open_low() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via the Marsaglia polar method, spare cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
    return out;
  }

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal();
    return out;
  }

  // Index draw from unnormalized nonnegative weights.
  int categorical(const Eigen::VectorXd& weights) {
    const double total = weights.sum();
    double r = uniform01() * total;
    for (int k = 0; k < weights.size(); ++k) {
      r -= weights[k];
      if (r < 0.0) return k;
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Rademacher +/-1.
  double sign() { return (engine_() & 1u) ? 1.0 : -1.0; }

  // In-place Fisher-Yates shuffle of [0, n) indices.
  template <class IndexVector>
  void shuffle(IndexVector& idx) {
    for (std::size_t i = idx.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(engine_() % i);
      std::swap(idx[i - 1], idx[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bcrb
