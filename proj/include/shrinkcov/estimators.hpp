#pragma once

#include <Eigen/Dense>

#include "shrinkcov/errors.hpp"
#include "shrinkcov/matrix.hpp"

namespace shrinkcov {

/// Which rule produced a pair of shrinkage weights.
enum class WeightKind { oracle, asymptotic, bona_fide, lw };

const char* to_string(WeightKind kind);

/// Weights of a general linear shrinkage estimator alpha * S + beta * T,
/// where S is the sample covariance matrix and T the shrinkage target.
///
/// Finite-sample optimal weights are deliberately not clamped: alpha may be
/// negative or exceed one when p/n is extreme.  Callers that need a
/// guaranteed well-conditioned estimate should inspect alpha.
struct ShrinkageWeights {
  double alpha;
  double beta;
  WeightKind kind;
};

/// A fitted shrinkage estimate: matrix == weights.alpha * S + weights.beta *
/// target, where S is the sample covariance matrix of the n_samples
/// observations the estimate was fitted on.
struct EstimateResult {
  SymMatrix matrix;
  ShrinkageWeights weights;
  SymMatrix target;
  Eigen::Index n_samples;
};

/// Sample covariance matrix of y (p variables by n samples).
///
/// Uncentered: S = (1/n) Y Y^T, the moment estimator for known-zero-mean
/// data.  Centered: columns are demeaned first and the divisor stays n, so
/// S = (1/n) (Y - ybar 1^T)(Y - ybar 1^T)^T; requires n >= 2.
SymMatrix sample_covariance(const DataMatrix& y, bool center);

/// Squared Frobenius loss || alpha * s + beta * target - sigma ||_F^2,
/// expanded into traces:
///   alpha^2 ||s||_F^2 + 2 alpha beta tr(s t) + beta^2 ||t||_F^2
///   - 2 alpha tr(s sigma) - 2 beta tr(sigma t) + ||sigma||_F^2.
double glse_loss(double alpha, double beta, const SymMatrix& s,
                 const SymMatrix& target, const SymMatrix& sigma);

/// Finite-sample oracle weights minimizing glse_loss over (alpha, beta) for
/// known population matrix sigma:
///   alpha = (tr(s sigma) ||t||_F^2 - tr(sigma t) tr(s t)) / det
///   beta  = (tr(sigma t) ||s||_F^2 - tr(s sigma) tr(s t)) / det
///   det   = ||s||_F^2 ||t||_F^2 - tr(s t)^2.
/// det > 0 unless s is proportional to t (Cauchy-Schwarz); a numerically
/// vanishing det raises DegenerateTarget.
ShrinkageWeights oracle_weights(const SymMatrix& s, const SymMatrix& sigma,
                                const SymMatrix& target);

/// Large-dimensional limit of the oracle weights under concentration
/// c = lim p/n, expressed through population quantities only:
///   alpha = 1 - (c/p) ||sigma||_tr^2 ||t||_F^2 /
///           ((||sigma||_F^2 + (c/p) ||sigma||_tr^2) ||t||_F^2 - tr(sigma t)^2)
///   beta  = (tr(sigma t) / ||t||_F^2) (1 - alpha).
ShrinkageWeights asymptotic_oracle_weights(const SymMatrix& sigma,
                                           const SymMatrix& target, double c);

/// Bona fide optimal weights: the asymptotic oracle with every population
/// quantity replaced by its consistent sample counterpart, using c = p/n:
///   alpha = 1 - (1/n) ||s||_tr^2 ||t||_F^2 /
///               (||s||_F^2 ||t||_F^2 - tr(s t)^2)
///   beta  = (tr(s t) / ||t||_F^2) (1 - alpha).
/// alpha < 1 whenever tr(s) > 0, but it is not clamped from below.
ShrinkageWeights bona_fide_weights(const SymMatrix& s, const SymMatrix& target,
                                   Eigen::Index n);

/// Optimal linear shrinkage estimate alpha * s + beta * target with bona fide
/// weights.
EstimateResult olse(const SymMatrix& s, const SymMatrix& target,
                    Eigen::Index n);

/// Consistent estimator of (1/p)||sigma||_F^2 from the sample covariance
/// matrix: (1/p) ||s||_F^2 - (1/(n p)) ||s||_tr^2.
double frobenius_estimator(const SymMatrix& s, Eigen::Index n);

/// Ledoit-Wolf shrinkage toward the scaled identity mu I, mu = tr(S)/p:
///   d^2 = (1/p)||S||_F^2 - mu^2
///   b^2 = (1/(p n^2)) sum_i || y_i y_i^T - S ||_F^2
///   alpha = 1 - min(b^2, d^2) / d^2, always in [0, 1].
/// Observations are demeaned first when center is set, matching the
/// construction of S.  Returns alpha * S + (1 - alpha) * mu * I with target
/// stored as the plain identity and beta = (1 - alpha) * mu.
/// d^2 ~ 0 (S a multiple of the identity) raises DegenerateTarget.
EstimateResult lw_estimator(const DataMatrix& y, bool center);

/// The canonical naive target (1/p) I.
SymMatrix identity_target(Eigen::Index p);

}  // namespace shrinkcov
