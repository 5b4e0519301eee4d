#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace trapcheck {

// Deterministic random source. The mt19937_64 stream is pinned by the
// standard; the samplers below avoid std::uniform_real_distribution and
// std::normal_distribution, whose outputs are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double m = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = m * std::sin(a);
    have_spare_ = true;
    return m * std::cos(a);
  }

  std::complex<double> cnormal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

  bool coin() { return (gen_() & 1u) != 0; }

  Eigen::VectorXd unit_vector(int dim) {
    Eigen::VectorXd v(dim);
    double n = 0.0;
    do {
      for (int i = 0; i < dim; ++i) v[i] = normal();
      n = v.norm();
    } while (n < 1e-8);
    return v / n;
  }

  Eigen::MatrixXcd complex_matrix(int rows, int cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = cnormal();
    return m;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace trapcheck
