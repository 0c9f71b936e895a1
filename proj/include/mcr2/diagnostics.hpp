#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mcr2/optima.hpp"
#include "mcr2/params.hpp"
#include "mcr2/partition.hpp"

namespace mcr2 {

struct SpectralSummary {
  // Descending singular values per class, zero band removed: values below
  // 1e-6 * sigma_high(k) (theory supplied) or 1e-10 * ||Z_k||_2 (theory-free)
  // are dropped, so a zero block reports an empty spectrum.
  std::vector<Eigen::VectorXd> spectra;
  std::vector<int> stable_ranks;
  Eigen::MatrixXd cross_coherence_matrix;  // K x K, ||Z_k^T Z_l||_F, diagonal included
  // Worst principal angle cosine between distinct class ranges, in [0, 1].
  // 0 when fewer than two classes have a nonzero block.
  double discrimination = 0.0;
  // Only filled when theory spectra are supplied: per-class max relative
  // deviation of the nonzero singular values from sigma_high.
  std::vector<double> sigma_deviation;
  double max_sigma_deviation = 0.0;
};

// m x m cosine similarity of columns; zero columns give zero rows/columns.
Eigen::MatrixXd cosine_similarity_matrix(const FeatureMatrix& Z);

// round(||M||_F^2 / ||M||_2^2) with ties to even; 0 for the zero matrix.
int stable_rank(const Eigen::MatrixXd& M);

// max over class pairs of the spectral norm of U_k^T U_l, where U_k holds
// the top stable_rank(Z_k) left singular vectors of block k; zero blocks are
// skipped. Throws std::invalid_argument when fewer than two blocks are
// nonzero.
double discrimination_metric(const FeatureMatrix& Z);

// One-stop summary. When `theory` is non-null the kept singular values are
// compared against sigma_high(k) and the per-class max relative deviation is
// reported.
SpectralSummary spectral_summary(const FeatureMatrix& Z, const ProblemParams& params,
                                 const std::vector<SpectrumPair>* theory = nullptr);

}  // namespace mcr2
