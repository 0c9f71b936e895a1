#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include <random>

namespace mcr2 {

// Deterministic random source. All draws reduce to the mt19937_64 stream, so
// equal seeds give bit-identical sequences on every platform we target.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on (0, 1]: 53-bit mantissa, never 0, safe under log().
  double uniform();

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double gaussian();

  // i.i.d. standard normal entries, filled in column-major order.
  Eigen::MatrixXd gaussian_matrix(int rows, int cols);

  std::uint64_t next_raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Orthonormal n x r frame: QR of a Gaussian matrix with the sign of each
// column fixed so the R diagonal is positive. Requires 1 <= r <= n.
Eigen::MatrixXd random_orthonormal(int n, int r, Rng& rng);

}  // namespace mcr2
