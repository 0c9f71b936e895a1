#include "mcr2/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcr2 {

namespace {

void check_shape(const Eigen::MatrixXd& Z, const ProblemParams& params,
                 const char* where) {
  if (Z.rows() != params.d() || Z.cols() != params.m()) {
    throw std::invalid_argument(std::string(where) + ": matrix is " +
                                std::to_string(Z.rows()) + "x" +
                                std::to_string(Z.cols()) + " but params expect " +
                                std::to_string(params.d()) + "x" +
                                std::to_string(params.m()));
  }
}

void check_finite(const Eigen::MatrixXd& M, const char* where) {
  if (!M.allFinite()) {
    throw std::invalid_argument(std::string(where) + ": non-finite entries");
  }
}

void check_partition(const FeatureMatrix& Z, const ProblemParams& params,
                     const char* where) {
  if (!(Z.partition() == params.partition())) {
    throw std::invalid_argument(std::string(where) +
                                ": feature matrix partition differs from params");
  }
}

Eigen::Ref<const Eigen::MatrixXd> class_block(const Eigen::MatrixXd& Z,
                                              const ProblemParams& params, int k) {
  return Z.middleCols(params.partition().offset(k), params.partition().size(k));
}

// Hessian quadratic form of M -> (1/2) log det(I + alpha M M^T) at M along D:
//   alpha <X^{-1}, D D^T> - (alpha^2 / 2) tr(X^{-1} S X^{-1} S),
// with X = I + alpha M M^T and S = M D^T + D M^T.
double rate_hessian_form(const Eigen::MatrixXd& M, double alpha,
                         const Eigen::MatrixXd& D) {
  const Eigen::MatrixXd XD = regularized_inverse_apply(M, alpha, D);
  const double term1 = alpha * XD.cwiseProduct(D).sum();
  const Eigen::MatrixXd S = M * D.transpose() + D * M.transpose();
  const Eigen::MatrixXd XS = regularized_inverse_apply(M, alpha, S);
  const double tr = XS.cwiseProduct(XS.transpose()).sum();
  return term1 - 0.5 * alpha * alpha * tr;
}

}  // namespace

double coding_rate(const Eigen::MatrixXd& M, double alpha) {
  check_finite(M, "coding_rate");
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw std::invalid_argument("coding_rate: alpha must be finite and > 0");
  }
  if (M.size() == 0) return 0.0;
  // log det(I_d + alpha M M^T) == log det(I_n + alpha M^T M); take the
  // smaller Gram matrix and sum log1p over its eigenvalues.
  Eigen::MatrixXd gram;
  if (M.cols() <= M.rows()) {
    gram.noalias() = M.transpose() * M;
  } else {
    gram.noalias() = M * M.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("coding_rate: eigenvalue computation failed");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    // Gram eigenvalues are >= 0 in exact arithmetic; clamp roundoff.
    sum += std::log1p(alpha * std::max(es.eigenvalues()(i), 0.0));
  }
  return 0.5 * sum;
}

Eigen::MatrixXd regularized_inverse_apply(const Eigen::MatrixXd& M, double alpha,
                                          const Eigen::MatrixXd& B) {
  check_finite(M, "regularized_inverse_apply");
  check_finite(B, "regularized_inverse_apply");
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw std::invalid_argument("regularized_inverse_apply: alpha must be finite and > 0");
  }
  if (B.rows() != M.rows()) {
    throw std::invalid_argument("regularized_inverse_apply: row mismatch between M and B");
  }
  const Eigen::Index d = M.rows();
  const Eigen::Index n = M.cols();
  if (n == 0) return B;
  if (n < d) {
    // Woodbury: (I + alpha M M^T)^{-1} B = B - M ((1/alpha) I + M^T M)^{-1} M^T B.
    Eigen::MatrixXd core = M.transpose() * M;
    core.diagonal().array() += 1.0 / alpha;
    Eigen::LLT<Eigen::MatrixXd> llt(core);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("regularized_inverse_apply: Cholesky failed on Gram core");
    }
    return B - M * llt.solve(M.transpose() * B);
  }
  Eigen::MatrixXd X = alpha * (M * M.transpose());
  X.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("regularized_inverse_apply: Cholesky failed");
  }
  return llt.solve(B);
}

ObjectiveBreakdown evaluate(const Eigen::MatrixXd& Z, const ProblemParams& params) {
  check_shape(Z, params, "evaluate");
  check_finite(Z, "evaluate");
  ObjectiveBreakdown out;
  out.total_rate = coding_rate(Z, params.alpha());
  const double m = static_cast<double>(params.m());
  out.class_rates.reserve(static_cast<std::size_t>(params.num_classes()));
  for (int k = 0; k < params.num_classes(); ++k) {
    const double rk = coding_rate(class_block(Z, params, k), params.alpha_k(k));
    out.class_rates.push_back(rk);
    out.weighted_class_rate_sum +=
        (static_cast<double>(params.partition().size(k)) / m) * rk;
  }
  out.regularizer = 0.5 * params.lambda() * Z.squaredNorm();
  out.value = out.total_rate - out.weighted_class_rate_sum - out.regularizer;
  return out;
}

ObjectiveBreakdown evaluate(const FeatureMatrix& Z, const ProblemParams& params) {
  check_partition(Z, params, "evaluate");
  return evaluate(Z.entries(), params);
}

Eigen::MatrixXd gradient(const Eigen::MatrixXd& Z, const ProblemParams& params) {
  check_shape(Z, params, "gradient");
  check_finite(Z, "gradient");
  const double a = params.alpha();
  // Expansion term: alpha (I + alpha Z Z^T)^{-1} Z.
  Eigen::MatrixXd G = a * regularized_inverse_apply(Z, a, Z);
  // Per class: the (m_k/m)-weighted compression gradient carries coefficient
  // (m_k/m) alpha_k == alpha, plus the ridge term.
  for (int k = 0; k < params.num_classes(); ++k) {
    const auto Zk = class_block(Z, params, k);
    G.middleCols(params.partition().offset(k), params.partition().size(k)) -=
        a * regularized_inverse_apply(Zk, params.alpha_k(k), Zk) +
        params.lambda() * Zk;
  }
  return G;
}

Eigen::MatrixXd gradient(const FeatureMatrix& Z, const ProblemParams& params) {
  check_partition(Z, params, "gradient");
  return gradient(Z.entries(), params);
}

double hessian_bilinear(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& D,
                        const ProblemParams& params) {
  check_shape(Z, params, "hessian_bilinear");
  check_shape(D, params, "hessian_bilinear");
  check_finite(Z, "hessian_bilinear");
  check_finite(D, "hessian_bilinear");
  double out = rate_hessian_form(Z, params.alpha(), D);
  const double m = static_cast<double>(params.m());
  for (int k = 0; k < params.num_classes(); ++k) {
    const double wk = static_cast<double>(params.partition().size(k)) / m;
    out -= wk * rate_hessian_form(class_block(Z, params, k), params.alpha_k(k),
                                  class_block(D, params, k));
  }
  return out - params.lambda() * D.squaredNorm();
}

double hessian_bilinear(const FeatureMatrix& Z, const Eigen::MatrixXd& D,
                        const ProblemParams& params) {
  check_partition(Z, params, "hessian_bilinear");
  return hessian_bilinear(Z.entries(), D, params);
}

BlockBound block_upper_bound(const Eigen::MatrixXd& Z, const ProblemParams& params) {
  check_shape(Z, params, "block_upper_bound");
  check_finite(Z, "block_upper_bound");
  const double m = static_cast<double>(params.m());
  double bound = 0.0;
  for (int k = 0; k < params.num_classes(); ++k) {
    const auto Zk = class_block(Z, params, k);
    const double wk = static_cast<double>(params.partition().size(k)) / m;
    bound += coding_rate(Zk, params.alpha()) -
             wk * coding_rate(Zk, params.alpha_k(k)) -
             0.5 * params.lambda() * Zk.squaredNorm();
  }
  BlockBound out;
  out.bound = bound;
  out.gap = bound - evaluate(Z, params).value;
  return out;
}

BlockBound block_upper_bound(const FeatureMatrix& Z, const ProblemParams& params) {
  check_partition(Z, params, "block_upper_bound");
  return block_upper_bound(Z.entries(), params);
}

}  // namespace mcr2
