#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mcr2/params.hpp"
#include "mcr2/partition.hpp"
#include "mcr2/rng.hpp"

namespace mcr2 {

struct SolverConfig {
  double step_size = 0.1;
  long max_iters = 200000;
  double grad_tol = 1e-5;
  std::uint64_t seed = 0;
  long trace_every = 100;  // objective is evaluated only at traced iterations
};

enum class StopReason { GradTol, MaxIters };

const char* to_string(StopReason reason);

struct TracePoint {
  long iter = 0;
  double value = 0.0;
  double grad_norm = 0.0;
};

struct RunTrace {
  std::vector<TracePoint> points;
  long iterations = 0;  // gradient steps actually taken
  StopReason reason = StopReason::MaxIters;
};

// Thrown when the iterate or objective stops being finite. Carries the trace
// collected up to the failure so callers can persist it.
class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(std::string message, RunTrace trace, long iter)
      : std::runtime_error(std::move(message)), trace(std::move(trace)), iter(iter) {}

  RunTrace trace;
  long iter = 0;
};

// i.i.d. standard normal entries; equal seeds give bit-identical matrices.
FeatureMatrix random_init(int d, const ClassPartition& partition, Rng& rng);

// Fixed-step gradient ascent. The stopping test runs before each step, so a
// start with ||grad|| < grad_tol returns immediately with zero iterations.
// Trace points are recorded every trace_every iterations and at termination.
std::pair<FeatureMatrix, RunTrace> gradient_ascent(const FeatureMatrix& Z0,
                                                   const ProblemParams& params,
                                                   const SolverConfig& config);

}  // namespace mcr2
