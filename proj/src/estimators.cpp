#include "shrinkcov/estimators.hpp"

#include <cmath>
#include <string>

namespace shrinkcov {

namespace {

void require_same_dim(const SymMatrix& a, const SymMatrix& b,
                      const char* where) {
  if (a.dim() != b.dim()) {
    throw DimError(std::string(where) + ": dimensions disagree, " +
                   std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

void require_spd_target(const SymMatrix& target, const char* where) {
  if (!is_spd(target)) {
    throw ArgError(std::string(where) + ": target must be symmetric positive definite");
  }
}

/// Shared degeneracy gate: det = ||s||^2 ||t||^2 - tr(s t)^2 vanishes exactly
/// when s and t are proportional.
double hessian_det_or_throw(double fro_s, double fro_t, double tp,
                            const char* where) {
  const double det = fro_s * fro_t - tp * tp;
  if (det <= kTol.degenerate_rel * fro_s * fro_t) {
    throw DegenerateTarget(std::string(where) +
                           ": sample matrix is numerically proportional to the target");
  }
  return det;
}

}  // namespace

const char* to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::oracle: return "oracle";
    case WeightKind::asymptotic: return "asymptotic";
    case WeightKind::bona_fide: return "bona_fide";
    case WeightKind::lw: return "lw";
  }
  return "unknown";
}

SymMatrix sample_covariance(const DataMatrix& y, bool center) {
  const Eigen::Index p = y.vars();
  const Eigen::Index n = y.samples();
  Eigen::MatrixXd obs;
  if (center) {
    if (n < 2) {
      throw InsufficientData("sample_covariance: centering needs n >= 2, got n = " +
                             std::to_string(n));
    }
    obs = y.mat().colwise() - y.mat().rowwise().mean();
  } else {
    obs = y.mat();
  }
  // Rank update fills one triangle; mirror it so the result is bitwise
  // symmetric.
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  s.selfadjointView<Eigen::Lower>().rankUpdate(obs, 1.0 / static_cast<double>(n));
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return SymMatrix(s);
}

double glse_loss(double alpha, double beta, const SymMatrix& s,
                 const SymMatrix& target, const SymMatrix& sigma) {
  require_same_dim(s, target, "glse_loss");
  require_same_dim(s, sigma, "glse_loss");
  const double fro_s = frobenius_norm_sq(s);
  const double fro_t = frobenius_norm_sq(target);
  const double fro_sig = frobenius_norm_sq(sigma);
  const double st = trace_product(s, target);
  const double ss = trace_product(s, sigma);
  const double gt = trace_product(sigma, target);
  return alpha * alpha * fro_s + 2.0 * alpha * beta * st + beta * beta * fro_t -
         2.0 * alpha * ss - 2.0 * beta * gt + fro_sig;
}

ShrinkageWeights oracle_weights(const SymMatrix& s, const SymMatrix& sigma,
                                const SymMatrix& target) {
  require_same_dim(s, sigma, "oracle_weights");
  require_same_dim(s, target, "oracle_weights");
  require_spd_target(target, "oracle_weights");
  const double fro_s = frobenius_norm_sq(s);
  const double fro_t = frobenius_norm_sq(target);
  const double st = trace_product(s, target);
  const double ss = trace_product(s, sigma);
  const double gt = trace_product(sigma, target);
  const double det = hessian_det_or_throw(fro_s, fro_t, st, "oracle_weights");
  return {(ss * fro_t - gt * st) / det, (gt * fro_s - ss * st) / det,
          WeightKind::oracle};
}

ShrinkageWeights asymptotic_oracle_weights(const SymMatrix& sigma,
                                           const SymMatrix& target, double c) {
  require_same_dim(sigma, target, "asymptotic_oracle_weights");
  require_spd_target(target, "asymptotic_oracle_weights");
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw ArgError("asymptotic_oracle_weights: concentration must be a nonnegative real");
  }
  const double p = static_cast<double>(sigma.dim());
  const double fro_sig = frobenius_norm_sq(sigma);
  const double trsq_sig = trace_norm_sq(sigma);
  const double fro_t = frobenius_norm_sq(target);
  const double gt = trace_product(sigma, target);
  const double lim_fro = fro_sig + (c / p) * trsq_sig;
  const double det = hessian_det_or_throw(lim_fro, fro_t, gt,
                                          "asymptotic_oracle_weights");
  const double alpha = 1.0 - ((c / p) * trsq_sig * fro_t) / det;
  const double beta = (gt / fro_t) * (1.0 - alpha);
  return {alpha, beta, WeightKind::asymptotic};
}

ShrinkageWeights bona_fide_weights(const SymMatrix& s, const SymMatrix& target,
                                   Eigen::Index n) {
  require_same_dim(s, target, "bona_fide_weights");
  require_spd_target(target, "bona_fide_weights");
  if (n < 1) {
    throw ArgError("bona_fide_weights: need n >= 1, got n = " + std::to_string(n));
  }
  const double fro_s = frobenius_norm_sq(s);
  const double fro_t = frobenius_norm_sq(target);
  const double st = trace_product(s, target);
  const double det = hessian_det_or_throw(fro_s, fro_t, st, "bona_fide_weights");
  const double alpha =
      1.0 - (trace_norm_sq(s) * fro_t) / (static_cast<double>(n) * det);
  const double beta = (st / fro_t) * (1.0 - alpha);
  return {alpha, beta, WeightKind::bona_fide};
}

EstimateResult olse(const SymMatrix& s, const SymMatrix& target,
                    Eigen::Index n) {
  const ShrinkageWeights w = bona_fide_weights(s, target, n);
  SymMatrix est(w.alpha * s.mat() + w.beta * target.mat());
  return {std::move(est), w, target, n};
}

double frobenius_estimator(const SymMatrix& s, Eigen::Index n) {
  if (n < 1) {
    throw ArgError("frobenius_estimator: need n >= 1, got n = " + std::to_string(n));
  }
  const double p = static_cast<double>(s.dim());
  const double nn = static_cast<double>(n);
  return frobenius_norm_sq(s) / p - trace_norm_sq(s) / (nn * p);
}

EstimateResult lw_estimator(const DataMatrix& y, bool center) {
  const SymMatrix s = sample_covariance(y, center);
  const Eigen::Index p = y.vars();
  const Eigen::Index n = y.samples();
  const double pd = static_cast<double>(p);
  const double nd = static_cast<double>(n);

  const double mu = s.mat().trace() / pd;
  const double d2 = frobenius_norm_sq(s) / pd - mu * mu;
  if (d2 <= kTol.degenerate_rel * frobenius_norm_sq(s) / pd) {
    throw DegenerateTarget("lw_estimator: sample matrix is numerically a multiple of the identity");
  }

  // b^2 averages the squared distance of the per-observation outer products
  // from S; observations match the centering mode used to build S.
  Eigen::MatrixXd obs;
  if (center) {
    obs = y.mat().colwise() - y.mat().rowwise().mean();
  } else {
    obs = y.mat();
  }
  double b2 = 0.0;
  Eigen::MatrixXd outer(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    outer.noalias() = obs.col(i) * obs.col(i).transpose();
    b2 += (outer - s.mat()).squaredNorm();
  }
  b2 /= pd * nd * nd;

  const double alpha = 1.0 - std::min(b2, d2) / d2;
  const double beta = (1.0 - alpha) * mu;
  SymMatrix est(alpha * s.mat() +
                beta * Eigen::MatrixXd::Identity(p, p));
  return {std::move(est), {alpha, beta, WeightKind::lw},
          SymMatrix::identity(p), n};
}

SymMatrix identity_target(Eigen::Index p) {
  if (p < 1) {
    throw ArgError("identity_target: dimension must be >= 1, got " +
                   std::to_string(p));
  }
  return SymMatrix((1.0 / static_cast<double>(p)) *
                   Eigen::MatrixXd::Identity(p, p));
}

}  // namespace shrinkcov
