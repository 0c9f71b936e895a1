#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcr2/objective.hpp"
#include "mcr2/optima.hpp"
#include "mcr2/params.hpp"
#include "mcr2/partition.hpp"
#include "mcr2/rng.hpp"

namespace mcr2 {

// All four tolerances are relative. critical_tol gates the first-order
// residual, orthogonality_tol the cross-block coherence, spectrum_tol the
// per-singular-value match, and zero_tol (times sigma_high of the class)
// decides which singular values count as zero.
struct ClassifyTolerances {
  double critical_tol = 1e-6;
  double orthogonality_tol = 1e-8;
  double spectrum_tol = 1e-6;
  double zero_tol = 1e-6;
};

enum class CriticalPointLabel {
  LocalMax,
  StrictSaddleLowSigma,
  StrictSaddleCrossBlock,
  NotCritical,
};

const char* to_string(CriticalPointLabel label);

struct CurvatureWitness {
  Eigen::MatrixXd direction;  // unit Frobenius norm
  double curvature = 0.0;     // hessian_bilinear value, > 0 when attached
};

struct CriticalPointReport {
  double residual = 0.0;          // ||grad F(Z)||_F
  CriticalPointLabel label = CriticalPointLabel::NotCritical;
  std::vector<Eigen::VectorXd> block_spectra;  // descending per class
  double cross_coherence = 0.0;   // max_{k != l} ||Z_k^T Z_l||_F
  std::optional<CurvatureWitness> curvature_witness;
  std::string diagnostic;         // why a spectrum failed to match, if it did
  int offending_block = -1;       // first block with a sigma_low direction
  int offending_index = -1;       // its index in the descending spectrum
};

// ||gradient(Z)||_F.
double fonc_residual(const Eigen::MatrixXd& Z, const ProblemParams& params);

// Decision order: non-stationary, then cross-correlated blocks, then
// spectrum matching against {sigma_high, sigma_low, 0}. Saddle labels carry
// a direction of verified positive curvature whenever one is found.
CriticalPointReport classify_critical_point(const FeatureMatrix& Z,
                                            const ValidatedParams& params,
                                            const ClassifyTolerances& tol = {});

// Rank-one ascent direction u v^T in the offending block of a
// StrictSaddleLowSigma report. Unit Frobenius norm.
Eigen::MatrixXd saddle_escape_direction(const FeatureMatrix& Z,
                                        const ValidatedParams& params,
                                        const CriticalPointReport& report);

struct ProbeResult {
  double max_curvature = 0.0;
  Eigen::MatrixXd direction;  // attains max_curvature, unit Frobenius norm
};

// Maximum of the Hessian quadratic form over n_random unit Gaussian
// directions plus the structured families: every per-block singular pair
// u_i v_i^T, and (for balanced partitions) cross-block directions u q^T
// built from the correlation structure of Z. Drawing n+1 random directions
// extends the first n, so the maximum is monotone in n_random for a fixed
// rng state.
ProbeResult curvature_probe(const Eigen::MatrixXd& Z, const ProblemParams& params,
                            int n_random, Rng& rng);
ProbeResult curvature_probe(const FeatureMatrix& Z, const ProblemParams& params,
                            int n_random, Rng& rng);

// Critical point whose class blocks share a rank-one range in the same
// 2-plane (three balanced classes, frame vectors at 120 degrees). First-order
// residual is refined below 1e-8. Throws std::domain_error when lambda is too
// large for a real solution; the bound is roughly 0.17 * alpha.
FeatureMatrix make_cross_correlated_critical_point(int d, int block_size,
                                                   double epsilon, double lambda,
                                                   Rng& rng);

}  // namespace mcr2
