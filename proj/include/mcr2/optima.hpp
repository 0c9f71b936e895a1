#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcr2/params.hpp"
#include "mcr2/partition.hpp"
#include "mcr2/rng.hpp"

namespace mcr2 {
class Rng;

// The two admissible singular values of class k at a stationary point.
// Both satisfy 1/(1 + alpha s^2) - 1/(1 + alpha_k s^2) = lambda/alpha to
// 1e-10; sigma_high >= sigma_low > 0 and they coincide when the
// discriminant vanishes.
struct SpectrumPair {
  int class_index = 0;
  double eta = 0.0;
  double discriminant = 0.0;
  double sigma_high = 0.0;
  double sigma_low = 0.0;
};

SpectrumPair stationary_spectrum(const ValidatedParams& params, int k);
std::vector<SpectrumPair> stationary_spectra(const ValidatedParams& params);

// Per-class ranks of the value-maximizing stationary point. Budget is
// min(m, d); classes are filled smallest-size-first, with any group of
// equal-size classes sharing its allotment as evenly as possible.
struct RankAllocation {
  std::vector<int> ranks;  // indexed by original class order
  int total = 0;
};

RankAllocation allocate_global_ranks(const ValidatedParams& params);

// Objective value of the stationary point with the given per-class ranks,
// every retained direction at sigma_high. Throws if the ranks are
// infeasible (r_k < 0, r_k > min(m_k, d), or sum > min(m, d)).
double optimal_value(const ValidatedParams& params, const std::vector<int>& ranks);

// Stationary point with r_k directions in class k: mutually orthogonal
// rank-r_k blocks U_k diag(s) V_k^T, all singular values at sigma_high.
FeatureMatrix construct_maximizer(const ValidatedParams& params,
                                  const std::vector<int>& ranks, Rng& rng);

// Same skeleton but low_counts[k] of class k's directions sit at sigma_low
// instead (they trail the sigma_high ones); low_counts[k] <= ranks[k].
FeatureMatrix construct_stationary_point(const ValidatedParams& params,
                                         const std::vector<int>& ranks,
                                         const std::vector<int>& low_counts,
                                         Rng& rng);

// Regularization weight that places the balanced-case optimum exactly on the
// norm budget ||Z_k||_F^2 = m_k. Requires a balanced partition. `warning` is
// non-empty when d is not a multiple of K and the equal split is only
// approximate.
struct LagrangeLambda {
  double lambda = 0.0;
  std::string warning;
};

LagrangeLambda lagrange_lambda(int d, const ClassPartition& partition, double epsilon);

// log of the distortion bound under which the norm-budget optimum is
// attained; kept in log space because the bound underflows for large m.
// Requires K >= 2.
double log_epsilon_bound(int m, int d, int K);
double epsilon_bound(int m, int d, int K);  // exp(log_epsilon_bound), may underflow to 0

// Norm-constrained optimum: balanced partition, each class an orthonormal
// frame of rank min(m, d)/K scaled so ||Z_k||_F^2 = m_k exactly. Throws when
// the partition is unbalanced or min(m, d) is not a multiple of K.
FeatureMatrix constrained_optimum(const ValidatedParams& params, Rng& rng);

}  // namespace mcr2
