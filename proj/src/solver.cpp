#include "mcr2/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mcr2/objective.hpp"

namespace mcr2 {

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::GradTol: return "GradTol";
    case StopReason::MaxIters: return "MaxIters";
  }
  return "MaxIters";
}

FeatureMatrix random_init(int d, const ClassPartition& partition, Rng& rng) {
  return FeatureMatrix(rng.gaussian_matrix(d, partition.total()), partition);
}

std::pair<FeatureMatrix, RunTrace> gradient_ascent(const FeatureMatrix& Z0,
                                                   const ProblemParams& params,
                                                   const SolverConfig& config) {
  if (!(Z0.partition() == params.partition())) {
    throw std::invalid_argument("gradient_ascent: initial point partition differs");
  }
  if (!std::isfinite(config.step_size) || config.step_size <= 0.0) {
    throw std::invalid_argument("gradient_ascent: step_size must be finite and > 0");
  }
  if (config.max_iters < 1) {
    throw std::invalid_argument("gradient_ascent: max_iters must be >= 1");
  }
  if (!std::isfinite(config.grad_tol) || config.grad_tol <= 0.0) {
    throw std::invalid_argument("gradient_ascent: grad_tol must be finite and > 0");
  }
  if (config.trace_every < 1) {
    throw std::invalid_argument("gradient_ascent: trace_every must be >= 1");
  }

  Eigen::MatrixXd Z = Z0.entries();
  RunTrace trace;
  long t = 0;
  while (true) {
    Eigen::MatrixXd G;
    double gn = std::numeric_limits<double>::quiet_NaN();
    std::string fail;
    try {
      G = gradient(Z, params);
      gn = G.norm();
      if (!std::isfinite(gn)) fail = "gradient norm is non-finite";
    } catch (const std::exception& e) {
      fail = e.what();
    }
    if (!fail.empty()) {
      trace.iterations = t;
      trace.points.push_back({t, std::numeric_limits<double>::quiet_NaN(), gn});
      throw SolverDivergence("iterate diverged at iteration " + std::to_string(t) +
                                 ": " + fail,
                             std::move(trace), t);
    }

    const bool stop_tol = gn < config.grad_tol;
    const bool stop_iter = t >= config.max_iters;
    if (t % config.trace_every == 0 || stop_tol || stop_iter) {
      // The objective is only evaluated at traced iterations; the ascent
      // itself needs nothing but gradients.
      double value = std::numeric_limits<double>::quiet_NaN();
      std::string efail;
      try {
        value = evaluate(Z, params).value;
        if (!std::isfinite(value)) efail = "objective is non-finite";
      } catch (const std::exception& e) {
        efail = e.what();
      }
      trace.points.push_back({t, value, gn});
      if (!efail.empty()) {
        trace.iterations = t;
        throw SolverDivergence("iterate diverged at iteration " + std::to_string(t) +
                                   ": " + efail,
                               std::move(trace), t);
      }
    }
    if (stop_tol) {
      trace.reason = StopReason::GradTol;
      trace.iterations = t;
      break;
    }
    if (stop_iter) {
      trace.reason = StopReason::MaxIters;
      trace.iterations = t;
      break;
    }
    Z += config.step_size * G;
    ++t;
  }
  return {FeatureMatrix(std::move(Z), Z0.partition()), std::move(trace)};
}

}  // namespace mcr2
