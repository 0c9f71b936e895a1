// Acceptance gate: one [PASS]/[FAIL] line per numbered criterion, nonzero
// exit if any fail. Each criterion is self-contained and uses only the
// public library surface.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "mcr2/diagnostics.hpp"
#include "mcr2/experiments.hpp"
#include "mcr2/landscape.hpp"
#include "mcr2/objective.hpp"
#include "mcr2/optima.hpp"
#include "mcr2/rng.hpp"
#include "mcr2/solver.hpp"

using namespace mcr2;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what,
            double seconds) {
  std::printf("[%s] %d: %s (%.2f s)\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double run_criterion(int criterion, const std::string& what,
                     const std::function<bool(std::string&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail = what;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = what + " [exception: " + e.what() + "]";
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(criterion, pass, detail, seconds);
  return seconds;
}

struct GdOutcome {
  FeatureMatrix Z;
  RunTrace trace;
  ValidatedParams vp;
};

GdOutcome run_gd(int d, const std::vector<int>& sizes, double eps, double lam,
                 double step, std::uint64_t seed) {
  const ProblemParams p(d, ClassPartition(sizes), eps, lam);
  const ValidatedParams vp = require_valid(p);
  Rng rng(seed);
  const FeatureMatrix Z0 = random_init(d, p.partition(), rng);
  SolverConfig cfg;
  cfg.step_size = step;
  cfg.grad_tol = 1e-5;
  cfg.max_iters = 200000;
  cfg.trace_every = 1;
  auto [Z, trace] = gradient_ascent(Z0, p, cfg);
  return {std::move(Z), std::move(trace), vp};
}

double cross_coherence_ratio(const FeatureMatrix& Z) {
  double num = 0.0;
  for (int k = 0; k < Z.partition().num_classes(); ++k) {
    for (int l = k + 1; l < Z.partition().num_classes(); ++l) {
      num = std::max(num, (Z.block(k).transpose() * Z.block(l)).norm());
    }
  }
  return num / Z.entries().squaredNorm();
}

bool criterion1(std::string& detail) {
  const double expect[8] = {37.38, 38.96, 38.48, 37.41,
                            215.61, 229.14, 230.70, 228.48};
  const std::vector<TheoryRow> rows = table1_rows();
  if (rows.size() != 8) {
    detail += " [wrong row count]";
    return false;
  }
  double worst = 0.0;
  for (int i = 0; i < 8; ++i) {
    worst = std::max(worst, std::abs(rows[i].value - expect[i]));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), " [max |dF*| = %.4f]", worst);
  detail += buf;
  return worst <= 0.02;
}

bool criterion2(std::string& detail) {
  const GdOutcome out = run_gd(100, {30, 70, 40, 60}, 0.5, 0.1, 0.1, 0);
  const std::vector<SpectrumPair> theory = stationary_spectra(out.vp);
  const SpectralSummary s = spectral_summary(out.Z, *out.vp, &theory);
  const int rank_sum =
      std::accumulate(s.stable_ranks.begin(), s.stable_ranks.end(), 0);
  const double coh = cross_coherence_ratio(out.Z);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                " [ranks sum %d, max sigma dev %.2e, coherence %.2e, %ld iters]",
                rank_sum, s.max_sigma_deviation, coh, out.trace.iterations);
  detail += buf;
  return out.trace.reason == StopReason::GradTol && rank_sum == 100 &&
         s.max_sigma_deviation <= 1e-3 && coh <= 1e-6;
}

bool criterion3(std::string& detail) {
  const GdOutcome out = run_gd(300, {50, 50, 40, 60}, 5.0, 0.01, 1.0, 0);
  const SpectralSummary s = spectral_summary(out.Z, *out.vp);
  const double f = evaluate(out.Z, *out.vp).value;
  const double f_star = optimal_value(out.vp, {50, 50, 40, 60});
  const double rel = std::abs(f - f_star) / std::abs(f_star);
  char buf[160];
  std::snprintf(buf, sizeof(buf), " [ranks %d,%d,%d,%d, rel gap %.2e]",
                s.stable_ranks[0], s.stable_ranks[1], s.stable_ranks[2],
                s.stable_ranks[3], rel);
  detail += buf;
  return s.stable_ranks == std::vector<int>{50, 50, 40, 60} && rel <= 1e-6;
}

bool criterion4(std::string& detail) {
  struct Case {
    int d;
    int per_class;
  };
  std::vector<Case> cases;
  for (int d : {40, 80, 120}) cases.push_back({d, 50});    // m = 200
  for (int m : {100, 200, 400}) cases.push_back({50, m / 4});  // d = 50
  for (const Case& c : cases) {
    const std::vector<int> sizes(4, c.per_class);
    const GdOutcome out = run_gd(c.d, sizes, 0.5, 0.1, 0.1, 1);
    const double f_star =
        optimal_value(out.vp, allocate_global_ranks(out.vp).ranks);
    std::vector<double> gaps;
    for (const TracePoint& p : out.trace.points) {
      gaps.push_back(f_star - p.value);
    }
    const double best = *std::min_element(gaps.begin(), gaps.end());
    if (!(best <= 1e-6 * std::abs(f_star))) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), " [d=%d m=%d gap stalls at %.2e]", c.d,
                    4 * c.per_class, best);
      detail += buf;
      return false;
    }
    // Median contraction over the last quartile of positive gaps.
    std::vector<double> ratios;
    const std::size_t start = gaps.size() - gaps.size() / 4;
    for (std::size_t i = std::max<std::size_t>(start, 1); i < gaps.size(); ++i) {
      if (gaps[i - 1] > 0.0 && gaps[i] > 0.0) {
        ratios.push_back(gaps[i] / gaps[i - 1]);
      }
    }
    if (ratios.empty()) {
      detail += " [no positive tail gaps]";
      return false;
    }
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2,
                     ratios.end());
    const double median = ratios[ratios.size() / 2];
    if (!(median < 1.0)) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), " [d=%d m=%d tail median %.4f]", c.d,
                    4 * c.per_class, median);
      detail += buf;
      return false;
    }
  }
  detail += " [all six regimes reach 1e-6 relative gap with contracting tails]";
  return true;
}

bool criterion5(std::string& detail) {
  Rng rng(77);
  double worst_grad = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 4 + static_cast<int>(rng.uniform() * 8);
    const int a = 2 + static_cast<int>(rng.uniform() * 5);
    const int b = 2 + static_cast<int>(rng.uniform() * 5);
    const ProblemParams p(d, ClassPartition({a, b}), 0.4 + rng.uniform(),
                          0.01 + 0.04 * rng.uniform());
    const Eigen::MatrixXd Z = rng.gaussian_matrix(p.d(), p.m());
    Eigen::MatrixXd D = rng.gaussian_matrix(p.d(), p.m());
    D /= D.norm();
    const double g = (gradient(Z, p).array() * D.array()).sum();
    const double h = 1e-5;
    const double fd = (evaluate(Eigen::MatrixXd(Z + h * D), p).value -
                       evaluate(Eigen::MatrixXd(Z - h * D), p).value) /
                      (2.0 * h);
    worst_grad = std::max(worst_grad,
                          std::abs(fd - g) / std::max(1.0, std::abs(g)));
  }
  if (worst_grad > 1e-5) {
    detail += " [gradient FD error " + std::to_string(worst_grad) + "]";
    return false;
  }

  double worst_hess = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ProblemParams p(7, ClassPartition({4, 5}), 0.9, 0.03);
    const Eigen::MatrixXd Z = rng.gaussian_matrix(p.d(), p.m());
    Eigen::MatrixXd D = rng.gaussian_matrix(p.d(), p.m());
    D /= D.norm();
    const double q = hessian_bilinear(Z, D, p);
    const double h = 1e-4;
    const double f0 = evaluate(Z, p).value;
    const double fd = (evaluate(Eigen::MatrixXd(Z + h * D), p).value -
                       2.0 * f0 +
                       evaluate(Eigen::MatrixXd(Z - h * D), p).value) /
                      (h * h);
    worst_hess = std::max(worst_hess,
                          std::abs(fd - q) / std::max(1.0, std::abs(q)));
  }
  if (worst_hess > 1e-4) {
    detail += " [hessian FD error " + std::to_string(worst_hess) + "]";
    return false;
  }

  double worst_inv = 0.0;
  for (const auto& [d, n] : {std::pair{50, 20}, std::pair{20, 50},
                             std::pair{50, 50}, std::pair{33, 7}}) {
    const Eigen::MatrixXd M = rng.gaussian_matrix(d, n);
    const Eigen::MatrixXd B = rng.gaussian_matrix(d, 6);
    const Eigen::MatrixXd fast = regularized_inverse_apply(M, 1.9, B);
    const Eigen::MatrixXd X =
        Eigen::MatrixXd::Identity(d, d) + 1.9 * M * M.transpose();
    const Eigen::MatrixXd dense = X.ldlt().solve(B);
    worst_inv = std::max(worst_inv,
                         (fast - dense).norm() / std::max(1.0, dense.norm()));
  }
  if (worst_inv > 1e-10) {
    detail += " [resolvent error " + std::to_string(worst_inv) + "]";
    return false;
  }

  double worst_gram = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd tall = rng.gaussian_matrix(30, 8);
    const double a = coding_rate(tall, 1.4);
    const double b = coding_rate(Eigen::MatrixXd(tall.transpose()), 1.4);
    worst_gram = std::max(worst_gram,
                          std::abs(a - b) / std::max(1.0, std::abs(a)));
  }
  if (worst_gram > 1e-12) {
    detail += " [gram-side error " + std::to_string(worst_gram) + "]";
    return false;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                " [grad %.1e, hess %.1e, resolvent %.1e, gram %.1e]",
                worst_grad, worst_hess, worst_inv, worst_gram);
  detail += buf;
  return true;
}

bool criterion6(std::string& detail) {
  const ValidatedParams vp = require_valid(
      ProblemParams(100, ClassPartition({50, 50, 50, 50}), 0.5, 0.1));
  const std::vector<int> ranks{25, 25, 25, 25};

  Rng rng(11);
  const FeatureMatrix Z2 =
      construct_stationary_point(vp, ranks, {1, 0, 0, 0}, rng);
  const CriticalPointReport rep2 = classify_critical_point(Z2, vp);
  if (rep2.label != CriticalPointLabel::StrictSaddleLowSigma ||
      !rep2.curvature_witness || rep2.curvature_witness->curvature <= 0.0) {
    detail += " [low-sigma point not certified]";
    return false;
  }
  const double verified =
      hessian_bilinear(Z2.entries(), rep2.curvature_witness->direction, *vp);
  if (verified <= 0.0) {
    detail += " [witness direction is not an ascent direction]";
    return false;
  }

  Rng rng2(12);
  const FeatureMatrix Z1 = construct_stationary_point(vp, ranks, {0, 0, 0, 0}, rng2);
  Rng probe_rng(13);
  const ProbeResult pr = curvature_probe(Z1, *vp, 64, probe_rng);
  if (pr.max_curvature > 1e-8) {
    detail += " [max point shows positive curvature " +
              std::to_string(pr.max_curvature) + "]";
    return false;
  }

  // Value bound: nonnegative gap on random points, zero on orthogonal blocks.
  Rng rng3(14);
  double min_gap = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 3 + static_cast<int>(rng3.uniform() * 8);
    const int a = 2 + static_cast<int>(rng3.uniform() * 4);
    const int b = 2 + static_cast<int>(rng3.uniform() * 4);
    const ProblemParams p(d, ClassPartition({a, b}), 0.4 + 0.8 * rng3.uniform(),
                          0.01 + 0.05 * rng3.uniform());
    const Eigen::MatrixXd Z = rng3.gaussian_matrix(p.d(), p.m());
    const BlockBound bb = block_upper_bound(Z, p);
    min_gap = std::min(min_gap,
                       bb.gap / std::max(1.0, std::abs(bb.bound)));
  }
  if (min_gap < -1e-10) {
    detail += " [bound violated, relative gap " + std::to_string(min_gap) + "]";
    return false;
  }

  double worst_zero = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ValidatedParams small = require_valid(
        ProblemParams(12, ClassPartition({4, 4, 4}), 0.8, 0.05));
    Rng r(100 + trial);
    const FeatureMatrix Zo =
        construct_maximizer(small, allocate_global_ranks(small).ranks, r);
    const BlockBound bb = block_upper_bound(Zo, *small);
    worst_zero = std::max(worst_zero,
                          std::abs(bb.gap) / std::max(1.0, std::abs(bb.bound)));
  }
  // Analytic equality; 1e-12 covers floating-point roundoff of two log-det paths.
  if (worst_zero > 1e-12) {
    detail += " [orthogonal-block gap " + std::to_string(worst_zero) + "]";
    return false;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                " [witness %.3f, probe max %.1e, min gap %.1e, ortho gap %.1e]",
                rep2.curvature_witness->curvature, pr.max_curvature, min_gap,
                worst_zero);
  detail += buf;
  return true;
}

bool criterion7(std::string& detail) {
  Rng rng(2024);
  int draws = 0;
  while (draws < 200) {
    const int K = 2 + static_cast<int>(rng.uniform() * 3);  // 2..4
    std::vector<int> sizes;
    for (int k = 0; k < K; ++k) {
      sizes.push_back(1 + static_cast<int>(rng.uniform() * 6));
    }
    const int m = std::accumulate(sizes.begin(), sizes.end(), 0);
    const int d = 2 + static_cast<int>(rng.uniform() * 11);  // 2..12
    if (std::min(m, d) > 12) continue;
    if (*std::max_element(sizes.begin(), sizes.end()) == m) continue;
    const double eps = 0.3 + 1.2 * rng.uniform();
    const ProblemParams probe(d, ClassPartition(sizes), eps, 1.0);
    const LambdaWindow w = lambda_window(probe);
    const double lam = (0.05 + 0.55 * rng.uniform()) * w.lambda_max;
    const ValidatedParams vp =
        require_valid(ProblemParams(d, ClassPartition(sizes), eps, lam));
    ++draws;

    const RankAllocation greedy = allocate_global_ranks(vp);
    const double greedy_value = optimal_value(vp, greedy.ranks);

    // Exhaustive enumeration of feasible rank vectors.
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> r(sizes.size(), 0);
    const int budget = std::min(m, d);
    std::function<void(std::size_t, int)> enumerate = [&](std::size_t k,
                                                          int used) {
      if (k == sizes.size()) {
        best = std::max(best, optimal_value(vp, r));
        return;
      }
      const int cap = std::min(sizes[k], d);
      for (int v = 0; v <= cap && used + v <= budget; ++v) {
        r[k] = v;
        enumerate(k + 1, used + v);
      }
      r[k] = 0;
    };
    enumerate(0, 0);

    if (!(greedy_value >= best - 1e-9 * std::max(1.0, std::abs(best)))) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    " [draw %d: greedy %.12f < enumerated %.12f]", draws,
                    greedy_value, best);
      detail += buf;
      return false;
    }
  }
  detail += " [200 randomized draws, greedy matches enumeration]";
  return true;
}

bool criterion8(std::string& detail) {
  struct Case {
    int d;
    std::vector<int> sizes;
    double eps;
  };
  const std::vector<Case> cases = {
      {100, {5, 5, 5, 5}, std::sqrt(2.5)},
      {64, {8, 8}, 0.9},
      {40, {4, 4, 4}, 0.7},
  };
  for (const Case& c : cases) {
    const ClassPartition part(c.sizes);
    const LagrangeLambda lam = lagrange_lambda(c.d, part, c.eps);
    const ValidatedParams vp =
        require_valid(ProblemParams(c.d, part, c.eps, lam.lambda));
    const std::vector<SpectrumPair> spectra = stationary_spectra(vp);
    for (const SpectrumPair& sp : spectra) {
      if (std::abs(sp.sigma_high - 1.0) > 1e-10) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), " [d=%d sigma_high %.12f]", c.d,
                      sp.sigma_high);
        detail += buf;
        return false;
      }
    }
    const RankAllocation alloc = allocate_global_ranks(vp);
    for (std::size_t k = 0; k < c.sizes.size(); ++k) {
      if (alloc.ranks[k] != c.sizes[k]) {
        detail += " [allocation is not full per-class rank]";
        return false;
      }
    }
    Rng rng(55);
    const FeatureMatrix Z = construct_maximizer(vp, alloc.ranks, rng);
    for (std::size_t k = 0; k < c.sizes.size(); ++k) {
      if (std::abs(Z.block(static_cast<int>(k)).squaredNorm() - c.sizes[k]) >
          1e-8) {
        detail += " [block energy misses its sample count]";
        return false;
      }
    }
  }
  detail += " [sigma_high = 1, ranks = class sizes, block energy = m_k]";
  return true;
}

}  // namespace

int main() {
  std::printf("acceptance gate, library version %s\n", kVersion);

  const double t1 = run_criterion(
      1, "closed-form optimal values match all eight frozen targets within 0.02",
      criterion1);
  if (t1 >= 1.0) {
    report(1, false, "theory table exceeded its 1 s budget", t1);
  }

  const double t2 = run_criterion(
      2,
      "unbalanced ascent reaches tolerance with full rank budget, matched "
      "spectra, and orthogonal classes",
      criterion2);
  if (t2 >= 120.0) {
    report(2, false, "unbalanced ascent exceeded its 2 min budget", t2);
  }

  const double t3 = run_criterion(
      3, "tall-feature ascent lands on the exact per-class rank split",
      criterion3);
  if (t3 >= 120.0) {
    report(3, false, "tall-feature ascent exceeded its 2 min budget", t3);
  }

  run_criterion(4,
                "all six balanced regimes reach 1e-6 relative gap with "
                "contracting tails",
                criterion4);
  run_criterion(5, "oracles agree with finite differences and dense solves",
                criterion5);
  run_criterion(6,
                "saddles are certified with witnesses, maxima show no ascent, "
                "and the block bound holds",
                criterion6);
  run_criterion(7, "greedy rank allocation matches exhaustive enumeration",
                criterion7);
  run_criterion(8,
                "norm-constrained multiplier yields unit spectrum and per-class "
                "energy",
                criterion8);

  std::printf(
      "[NOTE] 9: trained-network reproduction (dataset-scale training, its "
      "empirical objective and discrimination columns, and trained-feature "
      "heatmaps) is out of scope at desk scale; the closed-form values "
      "(criterion 1) and the metric implementations stand in for it.\n");

  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
