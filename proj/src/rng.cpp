#include "mcr2/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcr2 {

double Rng::uniform() {
  // Top 53 bits, shifted into (0, 1]; the +1 keeps log() finite.
  const std::uint64_t bits = engine_() >> 11;
  return static_cast<double>(bits + 1) * 0x1.0p-53;
}

double Rng::gaussian() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::MatrixXd Rng::gaussian_matrix(int rows, int cols) {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("gaussian_matrix: negative dimensions");
  }
  Eigen::MatrixXd M(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      M(i, j) = gaussian();
    }
  }
  return M;
}

Eigen::MatrixXd random_orthonormal(int n, int r, Rng& rng) {
  if (r < 1 || r > n) {
    throw std::invalid_argument("random_orthonormal: need 1 <= r <= n, got r = " +
                                std::to_string(r) + ", n = " + std::to_string(n));
  }
  const Eigen::MatrixXd A = rng.gaussian_matrix(n, r);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  const Eigen::MatrixXd R =
      qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (int j = 0; j < r; ++j) {
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

}  // namespace mcr2
