#include "mcr2/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mcr2 {

Eigen::MatrixXd cosine_similarity_matrix(const FeatureMatrix& Z) {
  const Eigen::MatrixXd& M = Z.entries();
  const Eigen::Index m = M.cols();
  const Eigen::VectorXd norms = M.colwise().norm();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (norms(i) == 0.0) continue;
    for (Eigen::Index j = 0; j <= i; ++j) {
      if (norms(j) == 0.0) continue;
      const double c =
          std::clamp(M.col(i).dot(M.col(j)) / (norms(i) * norms(j)), -1.0, 1.0);
      C(i, j) = c;
      C(j, i) = c;
    }
  }
  return C;
}

int stable_rank(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0;
  const double fro2 = M.squaredNorm();
  if (fro2 == 0.0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const double top = svd.singularValues()(0);
  const double ratio = fro2 / (top * top);
  // nearbyint under the default rounding mode resolves ties to even.
  return static_cast<int>(std::nearbyint(ratio));
}

namespace {

// Top-stable_rank left singular frame; empty for a zero block.
Eigen::MatrixXd left_frame(const Eigen::MatrixXd& M) {
  const int r = stable_rank(M);
  if (r == 0) return Eigen::MatrixXd(M.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(std::min<Eigen::Index>(r, svd.matrixU().cols()));
}

}  // namespace

double discrimination_metric(const FeatureMatrix& Z) {
  const int K = Z.partition().num_classes();
  std::vector<Eigen::MatrixXd> frames;
  for (int k = 0; k < K; ++k) {
    Eigen::MatrixXd U = left_frame(Z.block(k));
    if (U.cols() > 0) frames.push_back(std::move(U));
  }
  if (frames.size() < 2) {
    throw std::invalid_argument(
        "discrimination_metric: needs at least two classes with nonzero "
        "features, got " +
        std::to_string(frames.size()));
  }
  double s = 0.0;
  for (std::size_t a = 0; a < frames.size(); ++a) {
    for (std::size_t b = a + 1; b < frames.size(); ++b) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(frames[a].transpose() * frames[b]);
      s = std::max(s, svd.singularValues()(0));
    }
  }
  return std::clamp(s, 0.0, 1.0);
}

SpectralSummary spectral_summary(const FeatureMatrix& Z, const ProblemParams& params,
                                 const std::vector<SpectrumPair>* theory) {
  if (!(Z.partition() == params.partition())) {
    throw std::invalid_argument("spectral_summary: partition differs from params");
  }
  const int K = params.num_classes();
  if (theory && static_cast<int>(theory->size()) != K) {
    throw std::invalid_argument("spectral_summary: theory spectra count differs from K");
  }
  SpectralSummary out;
  out.spectra.reserve(static_cast<std::size_t>(K));
  out.stable_ranks.reserve(static_cast<std::size_t>(K));
  int nonzero_blocks = 0;
  for (int k = 0; k < K; ++k) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z.block(k));
    const Eigen::VectorXd& sv = svd.singularValues();
    // Zero band: 1e-6 * sigma_high when theory is available, else
    // 1e-10 * ||Z_k||_2. Values inside it are dropped from the spectrum,
    // which makes the reported counts stable under tiny perturbations.
    const double cutoff =
        theory ? 1e-6 * (*theory)[static_cast<std::size_t>(k)].sigma_high
               : (sv.size() > 0 ? 1e-10 * sv(0) : 0.0);
    Eigen::Index keep = 0;
    while (keep < sv.size() && sv(keep) > cutoff) ++keep;
    out.spectra.push_back(sv.head(keep));
    out.stable_ranks.push_back(stable_rank(Z.block(k)));
    if (Z.block(k).norm() > 0.0) ++nonzero_blocks;
  }
  out.cross_coherence_matrix = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k) {
    for (int l = k; l < K; ++l) {
      const double c = (Z.block(k).transpose() * Z.block(l)).norm();
      out.cross_coherence_matrix(k, l) = c;
      out.cross_coherence_matrix(l, k) = c;
    }
  }
  out.discrimination = nonzero_blocks >= 2 ? discrimination_metric(Z) : 0.0;
  if (theory) {
    out.sigma_deviation.assign(static_cast<std::size_t>(K), 0.0);
    for (int k = 0; k < K; ++k) {
      const double sh = (*theory)[static_cast<std::size_t>(k)].sigma_high;
      double dev = 0.0;
      // Spectra are already zero-band filtered; every kept value counts.
      const Eigen::VectorXd& sv = out.spectra[static_cast<std::size_t>(k)];
      for (Eigen::Index i = 0; i < sv.size(); ++i) {
        dev = std::max(dev, std::abs(sv(i) - sh) / sh);
      }
      out.sigma_deviation[static_cast<std::size_t>(k)] = dev;
      out.max_sigma_deviation = std::max(out.max_sigma_deviation, dev);
    }
  }
  return out;
}

}  // namespace mcr2
