#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mcr2/params.hpp"
#include "mcr2/partition.hpp"

namespace mcr2 {

// Per-term decomposition of the objective. `value` always equals
// total_rate - weighted_class_rate_sum - regularizer to 1e-12 relative.
struct ObjectiveBreakdown {
  double total_rate = 0.0;
  std::vector<double> class_rates;
  double weighted_class_rate_sum = 0.0;
  double regularizer = 0.0;
  double value = 0.0;
};

// (1/2) log det(I + alpha M M^T), computed from the eigenvalues of the
// smaller Gram matrix; no explicit determinant is ever formed. Throws
// std::invalid_argument on non-finite entries or alpha <= 0.
double coding_rate(const Eigen::MatrixXd& M, double alpha);

// Objective F(Z) = R(Z) - sum_k (m_k/m) R_k(Z_k) - (lambda/2) ||Z||_F^2.
ObjectiveBreakdown evaluate(const Eigen::MatrixXd& Z, const ProblemParams& params);
ObjectiveBreakdown evaluate(const FeatureMatrix& Z, const ProblemParams& params);

// Exact Euclidean gradient of F, same shape as Z.
Eigen::MatrixXd gradient(const Eigen::MatrixXd& Z, const ProblemParams& params);
Eigen::MatrixXd gradient(const FeatureMatrix& Z, const ProblemParams& params);

// Quadratic form D -> <D, Hess F(Z)[D]>. At Z = 0 this is -lambda ||D||_F^2.
double hessian_bilinear(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& D,
                        const ProblemParams& params);
double hessian_bilinear(const FeatureMatrix& Z, const Eigen::MatrixXd& D,
                        const ProblemParams& params);

// (I + alpha M M^T)^{-1} B without forming the d x d inverse. Uses the
// Woodbury route through the n x n Gram matrix when n < d, a direct
// Cholesky solve otherwise; the two agree to 1e-10 on well-scaled input.
Eigen::MatrixXd regularized_inverse_apply(const Eigen::MatrixXd& M, double alpha,
                                          const Eigen::MatrixXd& B);

// Separable upper bound sum_k f_k(Z_k) >= F(Z), tight exactly when the class
// blocks are mutually orthogonal.
struct BlockBound {
  double bound = 0.0;
  double gap = 0.0;  // bound - F(Z), >= -1e-10 * (1 + |bound|) always
};

BlockBound block_upper_bound(const Eigen::MatrixXd& Z, const ProblemParams& params);
BlockBound block_upper_bound(const FeatureMatrix& Z, const ProblemParams& params);

}  // namespace mcr2
