#include "mcr2/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace mcr2 {

ProblemParams::ProblemParams(int d, ClassPartition partition, double epsilon,
                             double lambda)
    : d_(d), partition_(std::move(partition)), epsilon_(epsilon), lambda_(lambda) {
  if (d_ < 1) {
    throw std::invalid_argument("ProblemParams: d = " + std::to_string(d_) +
                                ", expected >= 1");
  }
  if (!std::isfinite(epsilon_) || epsilon_ <= 0.0) {
    throw std::invalid_argument("ProblemParams: epsilon must be finite and > 0");
  }
  if (!std::isfinite(lambda_) || lambda_ < 0.0) {
    throw std::invalid_argument("ProblemParams: lambda must be finite and >= 0");
  }
  const double m = static_cast<double>(partition_.total());
  alpha_ = static_cast<double>(d_) / (m * epsilon_ * epsilon_);
  alpha_k_.reserve(static_cast<std::size_t>(partition_.num_classes()));
  for (int k = 0; k < partition_.num_classes(); ++k) {
    const double mk = static_cast<double>(partition_.size(k));
    alpha_k_.push_back(static_cast<double>(d_) / (mk * epsilon_ * epsilon_));
  }
}

LambdaWindow lambda_window(const ProblemParams& params) {
  LambdaWindow w;
  const double m = static_cast<double>(params.m());
  const double mmax = static_cast<double>(params.partition().max_size());
  if (params.partition().max_size() == params.m()) {
    w.degenerate = true;
    w.lambda_max = 0.0;
    return w;
  }
  const double sqrt_rho = std::sqrt(m / mmax);
  w.lambda_max = params.alpha() * (sqrt_rho - 1.0) / (sqrt_rho + 1.0);
  return w;
}

bool lambda_in_window(double lambda, const LambdaWindow& window) {
  if (window.degenerate) return false;
  return lambda > 0.0 && lambda <= window.lambda_max * (1.0 + 1e-12);
}

std::vector<std::string> hypothesis_violations(const ProblemParams& params) {
  std::vector<std::string> out;
  const LambdaWindow w = lambda_window(params);
  if (w.degenerate) {
    out.push_back(
        "single-class partition: the admissible lambda interval is empty "
        "(max class size " +
        std::to_string(params.partition().max_size()) + " equals m = " +
        std::to_string(params.m()) + ")");
    return out;
  }
  if (!(params.lambda() > 0.0)) {
    std::ostringstream ss;
    ss << "lambda = " << params.lambda() << " is not strictly positive";
    out.push_back(ss.str());
  } else if (!lambda_in_window(params.lambda(), w)) {
    std::ostringstream ss;
    ss << "lambda = " << params.lambda() << " exceeds lambda_max = " << w.lambda_max;
    out.push_back(ss.str());
  }
  return out;
}

ValidationResult validate(const ProblemParams& params) {
  ValidationResult res;
  res.violations = hypothesis_violations(params);
  if (res.violations.empty()) {
    res.valid = ValidatedParams(params);
  }
  return res;
}

ValidatedParams require_valid(const ProblemParams& params) {
  ValidationResult res = validate(params);
  if (!res.ok()) {
    std::string joined = "parameters violate the analytical hypotheses: ";
    for (std::size_t i = 0; i < res.violations.size(); ++i) {
      if (i) joined += "; ";
      joined += res.violations[i];
    }
    throw std::invalid_argument(joined);
  }
  return *std::move(res.valid);
}

ProblemParams params_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("parameter JSON is malformed: ") + e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("parameter JSON must be an object");
  }
  for (const char* key : {"d", "class_sizes", "epsilon", "lambda"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("parameter JSON is missing \"") + key + "\"");
    }
  }
  if (!j["d"].is_number_integer()) {
    throw std::invalid_argument("\"d\" must be an integer");
  }
  if (!j["class_sizes"].is_array() || j["class_sizes"].empty()) {
    throw std::invalid_argument("\"class_sizes\" must be a nonempty array");
  }
  std::vector<int> sizes;
  for (const auto& v : j["class_sizes"]) {
    if (!v.is_number_integer()) {
      throw std::invalid_argument("\"class_sizes\" entries must be integers");
    }
    sizes.push_back(v.get<int>());
  }
  if (!j["epsilon"].is_number() || !j["lambda"].is_number()) {
    throw std::invalid_argument("\"epsilon\" and \"lambda\" must be numbers");
  }
  return ProblemParams(j["d"].get<int>(), ClassPartition(std::move(sizes)),
                       j["epsilon"].get<double>(), j["lambda"].get<double>());
}

std::string params_to_json_text(const ProblemParams& params) {
  nlohmann::ordered_json j;
  j["d"] = params.d();
  j["class_sizes"] = params.partition().class_sizes();
  j["epsilon"] = params.epsilon();
  j["lambda"] = params.lambda();
  return j.dump(2);
}

}  // namespace mcr2
