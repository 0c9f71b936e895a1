#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcr2/partition.hpp"

namespace mcr2 {

// Problem data (d, partition, epsilon, lambda) plus the derived distortion
// coefficients alpha = d/(m eps^2) and alpha_k = d/(m_k eps^2). The identity
// alpha_k * m_k == alpha * m holds to within 4 ulps for every class.
class ProblemParams {
 public:
  // Throws std::invalid_argument on structurally meaningless input:
  // d < 1, epsilon <= 0 or non-finite, lambda < 0 or non-finite.
  ProblemParams(int d, ClassPartition partition, double epsilon, double lambda);

  int d() const noexcept { return d_; }
  const ClassPartition& partition() const noexcept { return partition_; }
  int num_classes() const noexcept { return partition_.num_classes(); }
  int m() const noexcept { return partition_.total(); }
  double epsilon() const noexcept { return epsilon_; }
  double lambda() const noexcept { return lambda_; }
  double alpha() const noexcept { return alpha_; }
  double alpha_k(int k) const { return alpha_k_.at(static_cast<std::size_t>(k)); }
  const std::vector<double>& alpha_per_class() const noexcept { return alpha_k_; }

  friend bool operator==(const ProblemParams& a, const ProblemParams& b) {
    return a.d_ == b.d_ && a.partition_ == b.partition_ &&
           a.epsilon_ == b.epsilon_ && a.lambda_ == b.lambda_;
  }

 private:
  int d_;
  ClassPartition partition_;
  double epsilon_;
  double lambda_;
  double alpha_;
  std::vector<double> alpha_k_;
};

// Admissible regularization interval (0, lambda_max]. When all samples lie in
// one class the interval is empty; `degenerate` flags that case and
// lambda_max is 0.
struct LambdaWindow {
  double lambda_max = 0.0;
  bool degenerate = false;
};

LambdaWindow lambda_window(const ProblemParams& params);

// Closed right endpoint: lambda == lambda_max passes, with 1e-12 relative
// slack for values computed rather than stored.
bool lambda_in_window(double lambda, const LambdaWindow& window);

// Empty when the analytical hypotheses hold. Each violation names the
// offending quantity and its value.
std::vector<std::string> hypothesis_violations(const ProblemParams& params);

class ValidatedParams;
struct ValidationResult;
ValidationResult validate(const ProblemParams& params);

// Evidence that hypothesis_violations(...) was empty. Only validate() and
// require_valid() can mint one.
class ValidatedParams {
 public:
  const ProblemParams& params() const noexcept { return params_; }
  const ProblemParams& operator*() const noexcept { return params_; }
  const ProblemParams* operator->() const noexcept { return &params_; }

 private:
  explicit ValidatedParams(ProblemParams params) : params_(std::move(params)) {}
  ProblemParams params_;

  friend struct ValidationResult;
  friend ValidationResult validate(const ProblemParams& params);
};

struct ValidationResult {
  std::optional<ValidatedParams> valid;
  std::vector<std::string> violations;

  bool ok() const noexcept { return valid.has_value(); }
};

// Throws std::invalid_argument listing every violation when validation fails.
ValidatedParams require_valid(const ProblemParams& params);

// JSON bridge: {"d": int, "class_sizes": [int...], "epsilon": num, "lambda": num}.
// Parsing rejects missing keys, wrong types, and non-integral sizes.
ProblemParams params_from_json_text(const std::string& text);
std::string params_to_json_text(const ProblemParams& params);

}  // namespace mcr2
