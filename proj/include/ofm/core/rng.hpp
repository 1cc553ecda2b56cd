#pragma once

#include <cmath>
#include <cstdint>
#include <Eigen/Dense>

namespace ofm {

/* Counter-based generator: every draw is a hash of (key, counter), and child
 * streams are derived by hashing (key, stream id).  One root seed therefore
 * fans out into any number of independent, order-insensitive streams, which is
 * what keeps sharded work reproducible.  Mixing is the SplitMix64 finalizer.
 * Normal variates use Box-Muller on the 53-bit uniform; we do not use
 * std::normal_distribution because its output is implementation-defined. */
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed + kGolden) ^ mix(stream * kGolden + 1))) {}

  Rng split(std::uint64_t stream) const { return Rng(key_, stream + 2); }

  std::uint64_t u64() { return mix(key_ + (++ctr_) * kGolden); }

  double uniform() {  // [0, 1)
    return static_cast<double>(u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  int uniform_int(int n) {  // [0, n)
    return static_cast<int>(u64() % static_cast<std::uint64_t>(n));
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = static_cast<double>((u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double c = std::cos(2.0 * M_PI * u2), s = std::sin(2.0 * M_PI * u2);
    spare_ = r * s;
    has_spare_ = true;
    return r * c;
  }

  double rademacher() { return (u64() & 1) ? 1.0 : -1.0; }

  Eigen::VectorXd normal_vec(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Eigen::MatrixXd normal_mat(int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = normal();
    return m;
  }

  Eigen::MatrixXd uniform_mat(int r, int c, double a, double b) {
    Eigen::MatrixXd m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = uniform(a, b);
    return m;
  }

  /* Fisher-Yates permutation of 0..n-1. */
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(p[i], p[uniform_int(i + 1)]);
    return p;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_ = 0, ctr_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ofm
