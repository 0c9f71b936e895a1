#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcr2/objective.hpp"
#include "mcr2/optima.hpp"
#include "mcr2/rng.hpp"
#include "mcr2/solver.hpp"

using namespace mcr2;

namespace {

ProblemParams small_params() {
  return ProblemParams(16, ClassPartition({6, 6, 6, 6}), 0.7, 0.1);
}

}  // namespace

TEST_CASE("random init is deterministic with the partition's shape") {
  const ProblemParams p = small_params();
  Rng a(3), b(3);
  const FeatureMatrix Z1 = random_init(p.d(), p.partition(), a);
  const FeatureMatrix Z2 = random_init(p.d(), p.partition(), b);
  CHECK(Z1.d() == 16);
  CHECK(Z1.m() == 24);
  CHECK((Z1.entries() - Z2.entries()).norm() == 0.0);
}

TEST_CASE("ascent converges to first-order stationarity and never descends") {
  const ProblemParams p = small_params();
  Rng rng(4);
  const FeatureMatrix Z0 = random_init(p.d(), p.partition(), rng);
  SolverConfig cfg;
  cfg.step_size = 0.01;
  cfg.grad_tol = 1e-5;
  cfg.trace_every = 1;
  cfg.max_iters = 200000;
  const auto [Zf, trace] = gradient_ascent(Z0, p, cfg);
  CHECK(trace.reason == StopReason::GradTol);
  CHECK(gradient(Zf, p).norm() < 1e-5);
  REQUIRE(trace.points.size() >= 2);
  for (std::size_t i = 1; i < trace.points.size(); ++i) {
    CHECK(trace.points[i].value >= trace.points[i - 1].value - 1e-12);
  }
  CHECK(trace.points.back().iter == trace.iterations);
}

TEST_CASE("a maximizer init stops at iteration zero") {
  const ValidatedParams vp = require_valid(small_params());
  Rng rng(5);
  const FeatureMatrix Z =
      construct_maximizer(vp, allocate_global_ranks(vp).ranks, rng);
  SolverConfig cfg;
  cfg.grad_tol = 1e-5;
  const auto [Zf, trace] = gradient_ascent(Z, *vp, cfg);
  CHECK(trace.iterations == 0);
  CHECK(trace.reason == StopReason::GradTol);
  CHECK((Zf.entries() - Z.entries()).norm() == 0.0);
  REQUIRE(trace.points.size() == 1);
  CHECK(trace.points[0].iter == 0);
}

TEST_CASE("iteration cap is reported") {
  const ProblemParams p = small_params();
  Rng rng(6);
  const FeatureMatrix Z0 = random_init(p.d(), p.partition(), rng);
  SolverConfig cfg;
  cfg.max_iters = 5;
  cfg.grad_tol = 1e-12;
  const auto [Zf, trace] = gradient_ascent(Z0, p, cfg);
  CHECK(trace.reason == StopReason::MaxIters);
  CHECK(trace.iterations == 5);
}

TEST_CASE("trace records every trace_every-th iterate plus the last") {
  const ProblemParams p = small_params();
  Rng rng(7);
  const FeatureMatrix Z0 = random_init(p.d(), p.partition(), rng);
  SolverConfig cfg;
  cfg.max_iters = 10;
  cfg.grad_tol = 1e-12;
  cfg.trace_every = 4;
  const auto [Zf, trace] = gradient_ascent(Z0, p, cfg);
  REQUIRE(trace.points.size() == 4);
  CHECK(trace.points[0].iter == 0);
  CHECK(trace.points[1].iter == 4);
  CHECK(trace.points[2].iter == 8);
  CHECK(trace.points[3].iter == 10);
}

TEST_CASE("two runs with one config agree bit for bit") {
  const ProblemParams p = small_params();
  SolverConfig cfg;
  cfg.step_size = 0.1;
  cfg.grad_tol = 1e-5;
  Rng a(8), b(8);
  const FeatureMatrix Za = random_init(p.d(), p.partition(), a);
  const FeatureMatrix Zb = random_init(p.d(), p.partition(), b);
  const auto [Z1, t1] = gradient_ascent(Za, p, cfg);
  const auto [Z2, t2] = gradient_ascent(Zb, p, cfg);
  CHECK((Z1.entries() - Z2.entries()).norm() == 0.0);
  CHECK(t1.iterations == t2.iterations);
  REQUIRE(t1.points.size() == t2.points.size());
  for (std::size_t i = 0; i < t1.points.size(); ++i) {
    CHECK(t1.points[i].value == t2.points[i].value);
    CHECK(t1.points[i].grad_norm == t2.points[i].grad_norm);
  }
}

TEST_CASE("an oversized step raises a divergence error with a partial trace") {
  const ProblemParams p = small_params();
  Rng rng(9);
  const FeatureMatrix Z0 = random_init(p.d(), p.partition(), rng);
  SolverConfig cfg;
  cfg.step_size = 1e8;
  cfg.trace_every = 1;
  cfg.max_iters = 1000;
  bool threw = false;
  try {
    gradient_ascent(Z0, p, cfg);
  } catch (const SolverDivergence& e) {
    threw = true;
    REQUIRE_FALSE(e.trace.points.empty());
    const TracePoint& last = e.trace.points.back();
    CHECK((std::isnan(last.value) || std::isnan(last.grad_norm)));
    CHECK(e.iter >= 0);
  }
  CHECK(threw);
}

TEST_CASE("solver config is validated") {
  const ProblemParams p = small_params();
  Rng rng(10);
  const FeatureMatrix Z0 = random_init(p.d(), p.partition(), rng);
  SolverConfig bad;
  bad.step_size = 0.0;
  CHECK_THROWS_AS(gradient_ascent(Z0, p, bad), std::invalid_argument);
  bad = SolverConfig{};
  bad.max_iters = 0;
  CHECK_THROWS_AS(gradient_ascent(Z0, p, bad), std::invalid_argument);
  bad = SolverConfig{};
  bad.grad_tol = -1.0;
  CHECK_THROWS_AS(gradient_ascent(Z0, p, bad), std::invalid_argument);
  bad = SolverConfig{};
  bad.trace_every = 0;
  CHECK_THROWS_AS(gradient_ascent(Z0, p, bad), std::invalid_argument);

  // Partition mismatch between init and params.
  const ProblemParams other(16, ClassPartition({12, 12}), 0.7, 0.1);
  CHECK_THROWS_AS(gradient_ascent(Z0, other, SolverConfig{}),
                  std::invalid_argument);
}
