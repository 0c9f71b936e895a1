#include "mcr2/optima.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mcr2 {

namespace {

// Per-direction value contribution of class k at squared singular value x.
double direction_value(const ProblemParams& p, int k, double x) {
  const double wk =
      static_cast<double>(p.partition().size(k)) / static_cast<double>(p.m());
  return std::log1p(p.alpha() * x) - wk * std::log1p(p.alpha_k(k) * x) -
         p.lambda() * x;
}

void check_ranks(const ValidatedParams& vp, const std::vector<int>& ranks) {
  const ProblemParams& p = *vp;
  if (static_cast<int>(ranks.size()) != p.num_classes()) {
    throw std::invalid_argument("ranks: expected one entry per class");
  }
  const int budget = std::min(p.m(), p.d());
  int total = 0;
  for (int k = 0; k < p.num_classes(); ++k) {
    const int cap = std::min(p.partition().size(k), p.d());
    if (ranks[k] < 0 || ranks[k] > cap) {
      throw std::invalid_argument(
          "ranks: class " + std::to_string(k) + " has rank " +
          std::to_string(ranks[k]) + ", admissible range is [0, " +
          std::to_string(cap) + "]");
    }
    total += ranks[k];
  }
  if (total > budget) {
    throw std::invalid_argument("ranks: total " + std::to_string(total) +
                                " exceeds the budget min(m, d) = " +
                                std::to_string(budget));
  }
}

}  // namespace

SpectrumPair stationary_spectrum(const ValidatedParams& params, int k) {
  const ProblemParams& p = *params;
  if (k < 0 || k >= p.num_classes()) {
    throw std::out_of_range("stationary_spectrum: class index out of range");
  }
  const double alpha = p.alpha();
  const double alpha_k = p.alpha_k(k);
  const double lambda = p.lambda();
  const double ratio =
      static_cast<double>(p.m()) / static_cast<double>(p.partition().size(k));

  SpectrumPair out;
  out.class_index = k;
  out.eta = (alpha_k - alpha) - lambda * (ratio + 1.0);
  double disc = out.eta * out.eta - 4.0 * lambda * lambda * ratio;
  // At lambda == lambda_max the discriminant is analytically zero for the
  // largest class; roundoff can land a hair below. Snap that to the double
  // root instead of failing.
  if (disc < 0.0) {
    if (out.eta > 0.0 && disc >= -1e-10 * out.eta * out.eta) {
      disc = 0.0;
    } else {
      std::ostringstream ss;
      ss << "stationary_spectrum: no real singular values for class " << k
         << " (eta = " << out.eta << ", discriminant = " << disc
         << "); lambda lies outside the admissible window";
      throw std::domain_error(ss.str());
    }
  }
  out.discriminant = disc;
  const double root_sum = out.eta + std::sqrt(disc);  // eta > 0 inside the window
  const double high_sq = root_sum / (2.0 * lambda * alpha_k);
  // Conjugate form of the smaller root; avoids cancellation when the
  // discriminant is close to eta^2.
  const double low_sq = (2.0 * lambda / alpha) / root_sum;
  out.sigma_high = std::sqrt(high_sq);
  out.sigma_low = std::sqrt(low_sq);
  return out;
}

std::vector<SpectrumPair> stationary_spectra(const ValidatedParams& params) {
  std::vector<SpectrumPair> out;
  out.reserve(static_cast<std::size_t>(params->num_classes()));
  for (int k = 0; k < params->num_classes(); ++k) {
    out.push_back(stationary_spectrum(params, k));
  }
  return out;
}

RankAllocation allocate_global_ranks(const ValidatedParams& params) {
  const ProblemParams& p = *params;
  const int K = p.num_classes();
  const int budget = std::min(p.m(), p.d());

  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return p.partition().size(a) < p.partition().size(b);
  });

  RankAllocation alloc;
  alloc.ranks.assign(static_cast<std::size_t>(K), 0);
  int remaining = budget;
  std::size_t i = 0;
  while (i < order.size() && remaining > 0) {
    // Group of classes with equal size: they share identical per-direction
    // value, so the group's allotment is split as evenly as possible with
    // the remainder going to lower class indices.
    std::size_t j = i;
    const int size_i = p.partition().size(order[i]);
    while (j < order.size() && p.partition().size(order[j]) == size_i) ++j;
    const int group = static_cast<int>(j - i);
    const int cap = std::min(size_i, p.d());
    const int take = std::min(remaining, cap * group);
    const int base = take / group;
    const int rem = take % group;

    std::vector<int> members(order.begin() + static_cast<std::ptrdiff_t>(i),
                             order.begin() + static_cast<std::ptrdiff_t>(j));
    std::sort(members.begin(), members.end());
    for (int t = 0; t < group; ++t) {
      alloc.ranks[static_cast<std::size_t>(members[static_cast<std::size_t>(t)])] =
          base + (t < rem ? 1 : 0);
    }
    remaining -= take;
    i = j;
  }
  alloc.total = budget - remaining;
  return alloc;
}

double optimal_value(const ValidatedParams& params, const std::vector<int>& ranks) {
  check_ranks(params, ranks);
  const ProblemParams& p = *params;
  double value = 0.0;
  for (int k = 0; k < p.num_classes(); ++k) {
    if (ranks[static_cast<std::size_t>(k)] == 0) continue;
    const SpectrumPair sp = stationary_spectrum(params, k);
    value += 0.5 * ranks[static_cast<std::size_t>(k)] *
             direction_value(p, k, sp.sigma_high * sp.sigma_high);
  }
  return value;
}

FeatureMatrix construct_stationary_point(const ValidatedParams& params,
                                         const std::vector<int>& ranks,
                                         const std::vector<int>& low_counts,
                                         Rng& rng) {
  check_ranks(params, ranks);
  const ProblemParams& p = *params;
  if (low_counts.size() != ranks.size()) {
    throw std::invalid_argument("low_counts: expected one entry per class");
  }
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    if (low_counts[k] < 0 || low_counts[k] > ranks[k]) {
      throw std::invalid_argument("low_counts: class " + std::to_string(k) +
                                  " requests " + std::to_string(low_counts[k]) +
                                  " of " + std::to_string(ranks[k]) + " directions");
    }
  }
  const int total = std::accumulate(ranks.begin(), ranks.end(), 0);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(p.d(), p.m());
  if (total > 0) {
    // One global frame keeps distinct class ranges exactly orthogonal.
    const Eigen::MatrixXd U = random_orthonormal(p.d(), total, rng);
    int col = 0;
    for (int k = 0; k < p.num_classes(); ++k) {
      const int r = ranks[static_cast<std::size_t>(k)];
      if (r == 0) continue;
      const int low = low_counts[static_cast<std::size_t>(k)];
      const SpectrumPair sp = stationary_spectrum(params, k);
      Eigen::VectorXd sigma(r);
      for (int i = 0; i < r; ++i) {
        sigma(i) = (i < r - low) ? sp.sigma_high : sp.sigma_low;
      }
      const Eigen::MatrixXd V = random_orthonormal(p.partition().size(k), r, rng);
      Z.middleCols(p.partition().offset(k), p.partition().size(k)) =
          U.middleCols(col, r) * sigma.asDiagonal() * V.transpose();
      col += r;
    }
  }
  return FeatureMatrix(std::move(Z), p.partition());
}

FeatureMatrix construct_maximizer(const ValidatedParams& params,
                                  const std::vector<int>& ranks, Rng& rng) {
  const std::vector<int> zeros(ranks.size(), 0);
  return construct_stationary_point(params, ranks, zeros, rng);
}

LagrangeLambda lagrange_lambda(int d, const ClassPartition& partition,
                               double epsilon) {
  if (d < 1) {
    throw std::invalid_argument("lagrange_lambda: d must be >= 1");
  }
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    throw std::invalid_argument("lagrange_lambda: epsilon must be finite and > 0");
  }
  const int K = partition.num_classes();
  for (int k = 1; k < K; ++k) {
    if (partition.size(k) != partition.size(0)) {
      throw std::invalid_argument(
          "lagrange_lambda: requires a balanced partition, class 0 has " +
          std::to_string(partition.size(0)) + " samples but class " +
          std::to_string(k) + " has " + std::to_string(partition.size(k)));
    }
  }
  const int m = partition.total();
  const double alpha =
      static_cast<double>(d) / (static_cast<double>(m) * epsilon * epsilon);
  LagrangeLambda out;
  if (m < d) {
    // Norm budget met with unit singular values.
    out.lambda = alpha / (1.0 + alpha) - alpha / (1.0 + K * alpha);
  } else {
    // Feature capacity binds first; singular values sit at sqrt(m/d).
    const double t = static_cast<double>(m) / static_cast<double>(d);
    out.lambda = alpha / (1.0 + alpha * t) - alpha / (1.0 + alpha * K * t);
    if (d % K != 0) {
      out.warning = "d = " + std::to_string(d) + " is not a multiple of K = " +
                    std::to_string(K) +
                    "; the per-class rank d/K is fractional and the equal "
                    "split is only approximate";
    }
  }
  return out;
}

double log_epsilon_bound(int m, int d, int K) {
  if (K < 2) {
    throw std::invalid_argument("log_epsilon_bound: requires K >= 2, got " +
                                std::to_string(K));
  }
  if (m < 1 || d < 1) {
    throw std::invalid_argument("log_epsilon_bound: m and d must be >= 1");
  }
  const double md = static_cast<double>(m);
  const double dd = static_cast<double>(d);
  const double kd = static_cast<double>(K);
  return -std::log(6.0) + 0.5 * (std::log(dd) - std::log(md)) - 0.5 -
         std::log(kd) / (kd - 1.0) -
         (2.0 * md / (kd - 1.0)) * std::log1p(1.0 / std::sqrt(kd));
}

double epsilon_bound(int m, int d, int K) {
  return std::exp(log_epsilon_bound(m, d, K));
}

FeatureMatrix constrained_optimum(const ValidatedParams& params, Rng& rng) {
  const ProblemParams& p = *params;
  const int K = p.num_classes();
  for (int k = 1; k < K; ++k) {
    if (p.partition().size(k) != p.partition().size(0)) {
      throw std::invalid_argument(
          "constrained_optimum: requires a balanced partition");
    }
  }
  const int n0 = std::min(p.m(), p.d());
  if (n0 % K != 0) {
    throw std::invalid_argument(
        "constrained_optimum: min(m, d) = " + std::to_string(n0) +
        " is not divisible by K = " + std::to_string(K) +
        ", the rank budget cannot be split equally");
  }
  const int r = n0 / K;
  const double scale =
      std::sqrt(static_cast<double>(p.m()) / static_cast<double>(n0));
  const Eigen::MatrixXd U = random_orthonormal(p.d(), n0, rng);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(p.d(), p.m());
  for (int k = 0; k < K; ++k) {
    const Eigen::MatrixXd V = random_orthonormal(p.partition().size(k), r, rng);
    Z.middleCols(p.partition().offset(k), p.partition().size(k)) =
        scale * U.middleCols(k * r, r) * V.transpose();
  }
  return FeatureMatrix(std::move(Z), p.partition());
}

}  // namespace mcr2
