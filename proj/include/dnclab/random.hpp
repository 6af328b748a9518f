#pragma once

#include "dnclab/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace dnclab {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

/// Counter-based generator: the i-th draw is a pure function of (key, i),
/// so independent streams never share state and replays are exact.
class Rng {
 public:
  explicit Rng(std::uint64_t key = 0) : key_(detail::splitmix64(key)) {}

  /// Stream keyed by (seed, name, index); used per suite and per check.
  static Rng stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    std::uint64_t k = detail::splitmix64(seed);
    k = detail::splitmix64(k ^ detail::fnv1a(name));
    k = detail::splitmix64(k ^ (index * 0xD1B54A32D192ED03ull));
    return Rng(k);
  }

  std::uint64_t next_u64() { return detail::splitmix64(key_ ^ detail::splitmix64(counter_++)); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(next_u64() % span);
  }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vector normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vector uniform_vector(Eigen::Index n, double lo, double hi) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  /// Entries k/denominator with |k| <= range*denominator; sums of such
  /// values are exact in double precision, which exact-equality checks need.
  Vector dyadic_vector(Eigen::Index n, int range = 4, int denominator = 64) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
      v[i] = static_cast<double>(integer(-range * denominator, range * denominator)) / denominator;
    return v;
  }

  Matrix integer_matrix(Eigen::Index rows, Eigen::Index cols, int lo, int hi) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = integer(lo, hi);
    return m;
  }

  Vector unit_vector(Eigen::Index n) {
    Vector v = normal_vector(n);
    while (v.norm() < 1e-12) v = normal_vector(n);
    return v.normalized();
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dnclab
