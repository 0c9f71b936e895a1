#include "mcr2/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mcr2 {

namespace {

Eigen::Ref<const Eigen::MatrixXd> class_block(const Eigen::MatrixXd& Z,
                                              const ProblemParams& p, int k) {
  return Z.middleCols(p.partition().offset(k), p.partition().size(k));
}

double max_cross_coherence(const Eigen::MatrixXd& Z, const ProblemParams& p) {
  double best = 0.0;
  for (int k = 0; k < p.num_classes(); ++k) {
    for (int l = k + 1; l < p.num_classes(); ++l) {
      best = std::max(best,
                      (class_block(Z, p, k).transpose() * class_block(Z, p, l)).norm());
    }
  }
  return best;
}

std::vector<Eigen::VectorXd> block_singular_values(const Eigen::MatrixXd& Z,
                                                   const ProblemParams& p) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(p.num_classes()));
  for (int k = 0; k < p.num_classes(); ++k) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(class_block(Z, p, k));
    out.push_back(svd.singularValues());
  }
  return out;
}

bool is_balanced(const ClassPartition& part) {
  for (int k = 1; k < part.num_classes(); ++k) {
    if (part.size(k) != part.size(0)) return false;
  }
  return true;
}

// Cross-block probe directions u q^T derived from the correlation structure
// of Z. Only defined for balanced partitions: builds, per eigenvalue cluster
// of Z Z^T, a vector q from the per-class right singular frames and an
// ascent vector u inside the cluster's column space but orthogonal to one
// class's share of it. Capped at 64 directions.
std::vector<Eigen::MatrixXd> cross_probe_directions(const Eigen::MatrixXd& Z,
                                                    const ProblemParams& p) {
  std::vector<Eigen::MatrixXd> out;
  const ClassPartition& part = p.partition();
  const int K = part.num_classes();
  if (K < 2 || !is_balanced(part)) return out;
  const double znorm = Z.norm();
  if (znorm <= 0.0) return out;
  const Eigen::Index d = Z.rows();
  const Eigen::Index m = Z.cols();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z * Z.transpose());
  if (es.info() != Eigen::Success) return out;
  const Eigen::VectorXd& evs = es.eigenvalues();  // ascending
  const double evmax = evs(evs.size() - 1);
  if (!(evmax > 0.0)) return out;

  // Cluster the significant eigenvalues, scanning from the largest down.
  struct Cluster {
    std::vector<Eigen::Index> eig_indices;
    double value = 0.0;
  };
  std::vector<Cluster> clusters;
  for (Eigen::Index i = evs.size() - 1; i >= 0; --i) {
    if (evs(i) <= 1e-10 * evmax) break;
    if (clusters.empty() ||
        std::abs(clusters.back().value - evs(i)) > 1e-6 * evmax) {
      clusters.push_back({{i}, evs(i)});
    } else {
      clusters.back().eig_indices.push_back(i);
    }
  }

  // Map each column to the class it belongs to.
  std::vector<int> col_class(static_cast<std::size_t>(m));
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < part.size(k); ++j) {
      col_class[static_cast<std::size_t>(part.offset(k) + j)] = k;
    }
  }

  for (const Cluster& cl : clusters) {
    // Eigenbasis Q of the cluster and the columns living in its span.
    Eigen::MatrixXd Q(d, static_cast<Eigen::Index>(cl.eig_indices.size()));
    for (std::size_t t = 0; t < cl.eig_indices.size(); ++t) {
      Q.col(static_cast<Eigen::Index>(t)) = es.eigenvectors().col(cl.eig_indices[t]);
    }
    std::vector<Eigen::Index> cols;
    for (Eigen::Index c = 0; c < m; ++c) {
      const double nc = Z.col(c).norm();
      if (nc <= 1e-12 * (1.0 + znorm)) continue;
      if ((Q.transpose() * Z.col(c)).norm() >= 0.999 * nc) cols.push_back(c);
    }
    if (cols.size() < 2) continue;
    std::vector<int> classes_present;
    for (Eigen::Index c : cols) {
      const int k = col_class[static_cast<std::size_t>(c)];
      if (std::find(classes_present.begin(), classes_present.end(), k) ==
          classes_present.end()) {
        classes_present.push_back(k);
      }
    }
    if (classes_present.size() < 2) continue;

    const Eigen::Index s = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd Zg(d, s);
    for (Eigen::Index t = 0; t < s; ++t) Zg.col(t) = Z.col(cols[static_cast<std::size_t>(t)]);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd_g(Zg, Eigen::ComputeThinU);
    const double smax = svd_g.singularValues()(0);
    Eigen::Index rank_g = 0;
    while (rank_g < svd_g.singularValues().size() &&
           svd_g.singularValues()(rank_g) > 1e-10 * smax) {
      ++rank_g;
    }
    if (rank_g == 0) continue;
    const Eigen::MatrixXd U = svd_g.matrixU().leftCols(rank_g);

    // Per-class share of the cluster: positions, left frame, right frame.
    struct Share {
      std::vector<Eigen::Index> pos;  // group-local positions
      Eigen::MatrixXd Ub;
      Eigen::MatrixXd Vb;
    };
    std::map<int, Share> shares;
    for (int k : classes_present) {
      Share sh;
      for (Eigen::Index t = 0; t < s; ++t) {
        if (col_class[static_cast<std::size_t>(cols[static_cast<std::size_t>(t)])] == k) {
          sh.pos.push_back(t);
        }
      }
      Eigen::MatrixXd Zb(d, static_cast<Eigen::Index>(sh.pos.size()));
      for (std::size_t t = 0; t < sh.pos.size(); ++t) {
        Zb.col(static_cast<Eigen::Index>(t)) = Zg.col(sh.pos[t]);
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd_b(
          Zb, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const double bmax = svd_b.singularValues()(0);
      Eigen::Index rb = 0;
      while (rb < svd_b.singularValues().size() &&
             svd_b.singularValues()(rb) > 1e-10 * bmax) {
        ++rb;
      }
      if (rb == 0) continue;
      sh.Ub = svd_b.matrixU().leftCols(rb);
      sh.Vb = svd_b.matrixV().leftCols(rb);
      shares[k] = std::move(sh);
    }
    if (shares.size() < 2) continue;

    // Anchor pairs: cross-class column pairs with genuine correlation.
    struct Anchor {
      Eigen::Index pu;
      int class_u;
      int class_v;
    };
    std::vector<Anchor> anchors;
    for (Eigen::Index a = 0; a < s && anchors.size() < 8; ++a) {
      for (Eigen::Index b = a + 1; b < s && anchors.size() < 8; ++b) {
        const int ka = col_class[static_cast<std::size_t>(cols[static_cast<std::size_t>(a)])];
        const int kb = col_class[static_cast<std::size_t>(cols[static_cast<std::size_t>(b)])];
        if (ka == kb) continue;
        if (!shares.count(ka) || !shares.count(kb)) continue;
        const double dot = std::abs(Zg.col(a).dot(Zg.col(b)));
        if (dot > 1e-8 * Zg.col(a).norm() * Zg.col(b).norm()) {
          anchors.push_back({a, ka, kb});
        }
      }
    }

    for (const Anchor& an : anchors) {
      Eigen::VectorXd c = Zg.transpose() * Zg.col(an.pu);
      c(an.pu) -= cl.value;
      Eigen::VectorXd q = Eigen::VectorXd::Zero(s);
      for (const auto& [k, sh] : shares) {
        Eigen::VectorXd cb(static_cast<Eigen::Index>(sh.pos.size()));
        for (std::size_t t = 0; t < sh.pos.size(); ++t) cb(static_cast<Eigen::Index>(t)) = c(sh.pos[t]);
        const Eigen::VectorXd qb = sh.Vb * (sh.Vb.transpose() * cb);
        for (std::size_t t = 0; t < sh.pos.size(); ++t) q(sh.pos[t]) = qb(static_cast<Eigen::Index>(t));
      }
      if (q.norm() <= 1e-10 * (1.0 + cl.value)) continue;

      for (int target : {an.class_u, an.class_v}) {
        const Share& sh = shares.at(target);
        const Eigen::MatrixXd W = sh.Ub.transpose() * U;  // r_b x rank_g
        Eigen::JacobiSVD<Eigen::MatrixXd> svd_w(W, Eigen::ComputeFullV);
        const double wmax =
            svd_w.singularValues().size() > 0 ? svd_w.singularValues()(0) : 0.0;
        Eigen::Index rank_w = 0;
        while (rank_w < svd_w.singularValues().size() &&
               svd_w.singularValues()(rank_w) > 1e-10 * std::max(wmax, 1e-300)) {
          ++rank_w;
        }
        const Eigen::Index null_dim = rank_g - rank_w;
        for (Eigen::Index j = 0; j < std::min<Eigen::Index>(null_dim, 4); ++j) {
          const Eigen::VectorXd a = svd_w.matrixV().col(rank_g - 1 - j);
          Eigen::VectorXd u = U * a;
          const double nu = u.norm();
          if (nu < 1e-12) continue;
          u /= nu;
          Eigen::MatrixXd D = Eigen::MatrixXd::Zero(d, m);
          for (Eigen::Index t = 0; t < s; ++t) {
            D.col(cols[static_cast<std::size_t>(t)]) = q(t) * u;
          }
          const double nd = D.norm();
          if (nd < 1e-12) continue;
          out.push_back(D / nd);
          if (out.size() >= 64) return out;
        }
      }
    }
  }
  return out;
}

}  // namespace

const char* to_string(CriticalPointLabel label) {
  switch (label) {
    case CriticalPointLabel::LocalMax: return "LocalMax";
    case CriticalPointLabel::StrictSaddleLowSigma: return "StrictSaddleLowSigma";
    case CriticalPointLabel::StrictSaddleCrossBlock: return "StrictSaddleCrossBlock";
    case CriticalPointLabel::NotCritical: return "NotCritical";
  }
  return "NotCritical";
}

double fonc_residual(const Eigen::MatrixXd& Z, const ProblemParams& params) {
  return gradient(Z, params).norm();
}

CriticalPointReport classify_critical_point(const FeatureMatrix& Z,
                                            const ValidatedParams& params,
                                            const ClassifyTolerances& tol) {
  const ProblemParams& p = *params;
  if (!(Z.partition() == p.partition())) {
    throw std::invalid_argument(
        "classify_critical_point: feature matrix partition differs from params");
  }
  CriticalPointReport rep;
  const Eigen::MatrixXd& M = Z.entries();
  const double znorm = M.norm();
  rep.residual = fonc_residual(M, p);
  rep.block_spectra = block_singular_values(M, p);
  rep.cross_coherence = max_cross_coherence(M, p);

  if (rep.residual > tol.critical_tol * (1.0 + znorm)) {
    rep.label = CriticalPointLabel::NotCritical;
    std::ostringstream ss;
    ss << "first-order residual " << rep.residual << " exceeds "
       << tol.critical_tol << " * (1 + ||Z||_F)";
    rep.diagnostic = ss.str();
    return rep;
  }

  if (p.num_classes() >= 2 && znorm > 0.0 &&
      rep.cross_coherence > tol.orthogonality_tol * znorm * znorm) {
    rep.label = CriticalPointLabel::StrictSaddleCrossBlock;
    // Fixed internal seed: the witness search must not perturb caller state.
    Rng probe_rng(0xC0FFEEULL);
    const ProbeResult probe = curvature_probe(M, p, 32, probe_rng);
    if (probe.max_curvature > 0.0) {
      rep.curvature_witness = CurvatureWitness{probe.direction, probe.max_curvature};
    } else {
      std::ostringstream ss;
      ss << "cross-block coherence " << rep.cross_coherence
         << " flags a saddle but no probe direction had positive curvature "
            "(best "
         << probe.max_curvature << ")";
      rep.diagnostic = ss.str();
    }
    return rep;
  }

  // Blocks are numerically orthogonal and the gradient vanishes: every
  // nonzero singular value must sit at sigma_high or sigma_low.
  bool any_low = false;
  for (int k = 0; k < p.num_classes() && !any_low; ++k) {
    const SpectrumPair sp = stationary_spectrum(params, k);
    const Eigen::VectorXd& sv = rep.block_spectra[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      const double s = sv(i);
      const bool is_zero = s <= tol.zero_tol * sp.sigma_high;
      const bool is_high = std::abs(s - sp.sigma_high) <= tol.spectrum_tol * sp.sigma_high;
      const bool is_low = std::abs(s - sp.sigma_low) <= tol.spectrum_tol * sp.sigma_low;
      if (is_zero && is_low) {
        rep.label = CriticalPointLabel::NotCritical;
        std::ostringstream ss;
        ss << "class " << k << " singular value " << s
           << " is inside both the zero band and the sigma_low band; "
              "tolerances cannot distinguish them";
        rep.diagnostic = ss.str();
        return rep;
      }
      if (is_zero || is_high) continue;
      if (is_low) {
        any_low = true;
        rep.offending_block = k;
        rep.offending_index = static_cast<int>(i);
        break;
      }
      rep.label = CriticalPointLabel::NotCritical;
      std::ostringstream ss;
      ss << "class " << k << " singular value " << s
         << " matches neither sigma_high = " << sp.sigma_high
         << " nor sigma_low = " << sp.sigma_low << " nor zero at relative tolerance "
         << tol.spectrum_tol;
      rep.diagnostic = ss.str();
      return rep;
    }
  }

  if (any_low) {
    rep.label = CriticalPointLabel::StrictSaddleLowSigma;
    const Eigen::MatrixXd D = saddle_escape_direction(Z, params, rep);
    const double curv = hessian_bilinear(M, D, p);
    if (curv > 0.0) {
      rep.curvature_witness = CurvatureWitness{D, curv};
    } else {
      std::ostringstream ss;
      ss << "sigma_low direction found in class " << rep.offending_block
         << " but its escape curvature " << curv << " is not positive";
      rep.diagnostic = ss.str();
    }
    return rep;
  }

  rep.label = CriticalPointLabel::LocalMax;
  return rep;
}

Eigen::MatrixXd saddle_escape_direction(const FeatureMatrix& Z,
                                        const ValidatedParams& params,
                                        const CriticalPointReport& report) {
  const ProblemParams& p = *params;
  if (report.label != CriticalPointLabel::StrictSaddleLowSigma ||
      report.offending_block < 0) {
    throw std::invalid_argument(
        "saddle_escape_direction: report does not identify a sigma_low direction");
  }
  const int k = report.offending_block;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z.block(k),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (report.offending_index >= svd.singularValues().size()) {
    throw std::invalid_argument("saddle_escape_direction: offending index out of range");
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(p.d(), p.m());
  D.middleCols(p.partition().offset(k), p.partition().size(k)) =
      svd.matrixU().col(report.offending_index) *
      svd.matrixV().col(report.offending_index).transpose();
  return D;
}

ProbeResult curvature_probe(const Eigen::MatrixXd& Z, const ProblemParams& params,
                            int n_random, Rng& rng) {
  if (n_random < 0) {
    throw std::invalid_argument("curvature_probe: n_random must be >= 0");
  }
  if (Z.rows() != params.d() || Z.cols() != params.m()) {
    throw std::invalid_argument("curvature_probe: matrix shape differs from params");
  }
  ProbeResult best;
  bool seen = false;
  auto consider = [&](const Eigen::MatrixXd& D) {
    const double c = hessian_bilinear(Z, D, params);
    if (!seen || c > best.max_curvature) {
      best.max_curvature = c;
      best.direction = D;
      seen = true;
    }
  };

  // Random family first: it is the only consumer of rng, so a larger budget
  // replays the same prefix of directions.
  for (int i = 0; i < n_random; ++i) {
    Eigen::MatrixXd D = rng.gaussian_matrix(params.d(), params.m());
    const double nd = D.norm();
    if (nd < 1e-12) continue;
    consider(D / nd);
  }

  // Every singular pair of every class block.
  for (int k = 0; k < params.num_classes(); ++k) {
    const auto Zk = Z.middleCols(params.partition().offset(k),
                                 params.partition().size(k));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Zk, Eigen::ComputeThinU | Eigen::ComputeThinV);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      Eigen::MatrixXd D = Eigen::MatrixXd::Zero(params.d(), params.m());
      D.middleCols(params.partition().offset(k), params.partition().size(k)) =
          svd.matrixU().col(i) * svd.matrixV().col(i).transpose();
      consider(D);
    }
  }

  for (const Eigen::MatrixXd& D : cross_probe_directions(Z, params)) {
    consider(D);
  }

  if (!seen) {
    // Zero probe budget on a zero-dimensional family; report the ridge term.
    best.direction = Eigen::MatrixXd::Zero(params.d(), params.m());
    best.max_curvature = 0.0;
  }
  return best;
}

ProbeResult curvature_probe(const FeatureMatrix& Z, const ProblemParams& params,
                            int n_random, Rng& rng) {
  if (!(Z.partition() == params.partition())) {
    throw std::invalid_argument("curvature_probe: feature matrix partition differs");
  }
  return curvature_probe(Z.entries(), params, n_random, rng);
}

FeatureMatrix make_cross_correlated_critical_point(int d, int block_size,
                                                   double epsilon, double lambda,
                                                   Rng& rng) {
  if (d < 2) {
    throw std::invalid_argument(
        "make_cross_correlated_critical_point: need d >= 2 for a shared 2-plane");
  }
  if (block_size < 1) {
    throw std::invalid_argument("make_cross_correlated_critical_point: block_size >= 1");
  }
  const ClassPartition part({block_size, block_size, block_size});
  const ProblemParams p(d, part, epsilon, lambda);
  const double alpha = p.alpha();
  const double alpha_k = p.alpha_k(0);  // balanced: 3 * alpha

  // Shared rank-one ranges at 120 degrees in a random 2-plane. The common
  // squared scale beta^2 solves A x^2 - B x + lambda = 0 with the
  // coefficients below; real roots need roughly lambda <= 0.17 * alpha.
  const double A = 1.5 * lambda * alpha * alpha_k;
  const double B = alpha * (alpha_k - 1.5 * alpha) - lambda * (1.5 * alpha + alpha_k);
  const double disc = B * B - 4.0 * A * lambda;
  if (!(B > 0.0) || disc < 0.0) {
    std::ostringstream ss;
    ss << "make_cross_correlated_critical_point: lambda = " << lambda
       << " admits no real scale for alpha = " << alpha
       << "; need roughly lambda <= 0.17 * alpha";
    throw std::domain_error(ss.str());
  }
  const double beta = std::sqrt((B + std::sqrt(disc)) / (2.0 * A));

  const Eigen::MatrixXd P = random_orthonormal(d, 2, rng);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(d, part.total());
  for (int k = 0; k < 3; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / 3.0;
    const Eigen::VectorXd u = P.col(0) * std::cos(theta) + P.col(1) * std::sin(theta);
    // Strictly positive weights keep every column active and correlated.
    Eigen::VectorXd v = rng.gaussian_matrix(block_size, 1);
    v = v.cwiseAbs().array() + 0.3;
    v /= v.norm();
    Z.middleCols(part.offset(k), part.size(k)) = beta * u * v.transpose();
  }

  // The construction is stationary in exact arithmetic; a few damped steps
  // on ||grad||^2 absorb roundoff if it is ever visible.
  for (int it = 0; it < 50; ++it) {
    const Eigen::MatrixXd G = gradient(Z, p);
    const double r = G.norm();
    if (r <= 1e-10 * (1.0 + Z.norm())) break;
    const double t = 1e-6 * (1.0 + Z.norm()) / r;
    const Eigen::MatrixXd Hg =
        (gradient(Z + t * G, p) - gradient(Z - t * G, p)) / (2.0 * t);
    double s = 1.0;
    bool improved = false;
    while (s > 1e-12) {
      const Eigen::MatrixXd Zn = Z - s * Hg;
      if (gradient(Zn, p).norm() < r) {
        Z = Zn;
        improved = true;
        break;
      }
      s *= 0.5;
    }
    if (!improved) break;
  }
  const double resid = gradient(Z, p).norm();
  if (resid > 1e-8 * (1.0 + Z.norm())) {
    throw std::runtime_error(
        "make_cross_correlated_critical_point: residual refinement stalled at " +
        std::to_string(resid));
  }
  return FeatureMatrix(std::move(Z), part);
}

}  // namespace mcr2
