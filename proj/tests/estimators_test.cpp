#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "shrinkcov/estimators.hpp"
#include "shrinkcov/rng.hpp"
#include "shrinkcov/simulation.hpp"
#include "test_support.hpp"

using namespace shrinkcov;
using testsupport::random_gaussian;
using testsupport::random_spd;

namespace {

/// Loss oracle: assemble the matrix and take the squared Frobenius norm
/// directly instead of expanding into traces.
double assembled_loss(double alpha, double beta, const SymMatrix& s,
                      const SymMatrix& t, const SymMatrix& sigma) {
  return (alpha * s.mat() + beta * t.mat() - sigma.mat()).squaredNorm();
}

}  // namespace

TEST_CASE("sample covariance matches direct summation") {
  std::mt19937_64 engine(8201);
  const Eigen::MatrixXd y = random_gaussian(4, 7, engine);
  const SymMatrix s = sample_covariance(DataMatrix(y), false);

  // Oracle: entrywise double loop over observations.
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < 7; ++k) acc += y(i, k) * y(j, k);
      CHECK(s(i, j) == doctest::Approx(acc / 7.0).epsilon(1e-13));
    }
  }
  CHECK((s.mat() - s.mat().transpose()).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd one(1, 2);
  one << 1.0, -1.0;
  CHECK(sample_covariance(DataMatrix(one), false)(0, 0) == 1.0);
  Eigen::MatrixXd flat(1, 2);
  flat << 1.0, 1.0;
  CHECK(sample_covariance(DataMatrix(flat), true)(0, 0) == 0.0);
}

TEST_CASE("sample covariance is scale equivariant") {
  std::mt19937_64 engine(8215);
  const Eigen::MatrixXd y = random_gaussian(3, 8, engine);
  const SymMatrix base = sample_covariance(DataMatrix(y), false);
  // Powers of two scale exactly.
  const SymMatrix doubled = sample_covariance(DataMatrix(2.0 * y), false);
  CHECK((doubled.mat() - 4.0 * base.mat()).cwiseAbs().maxCoeff() == 0.0);
  const SymMatrix scaled = sample_covariance(DataMatrix(1.7 * y), false);
  CHECK((scaled.mat() - 1.7 * 1.7 * base.mat()).cwiseAbs().maxCoeff() <
        1e-14 * base.mat().cwiseAbs().maxCoeff());
}

TEST_CASE("centered covariance demeans and keeps divisor n") {
  Eigen::MatrixXd y(1, 2);
  y << 1.0, 3.0;
  const SymMatrix s = sample_covariance(DataMatrix(y), true);
  CHECK(s(0, 0) == doctest::Approx(1.0));  // divisor n, not n - 1

  std::mt19937_64 engine(8202);
  const Eigen::MatrixXd z = random_gaussian(3, 9, engine);
  const SymMatrix sc = sample_covariance(DataMatrix(z), true);
  const Eigen::VectorXd mean = z.rowwise().mean();
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < 9; ++k) {
        acc += (z(i, k) - mean(i)) * (z(j, k) - mean(j));
      }
      CHECK(sc(i, j) == doctest::Approx(acc / 9.0).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(sample_covariance(DataMatrix(Eigen::MatrixXd::Ones(2, 1)), true),
                  InsufficientData);
  CHECK_NOTHROW(sample_covariance(DataMatrix(Eigen::MatrixXd::Ones(2, 1)), false));
}

TEST_CASE("glse loss equals the assembled squared distance") {
  std::mt19937_64 engine(8203);
  std::uniform_real_distribution<double> weight(-2.0, 2.0);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index p = 2 + rep % 5;
    const SymMatrix s = random_spd(p, engine);
    const SymMatrix t = random_spd(p, engine);
    const SymMatrix sigma = random_spd(p, engine);
    const double alpha = weight(engine);
    const double beta = weight(engine);
    const double expanded = glse_loss(alpha, beta, s, t, sigma);
    const double direct = assembled_loss(alpha, beta, s, t, sigma);
    CHECK(expanded == doctest::Approx(direct).epsilon(1e-10));
  }
  const SymMatrix m = random_spd(3, engine);
  // Exact recovery and pure-population extremes.
  CHECK(glse_loss(1.0, 0.0, m, SymMatrix::identity(3), m) ==
        doctest::Approx(0.0).scale(frobenius_norm_sq(m)).epsilon(1e-14));
  CHECK(glse_loss(0.0, 0.0, m, SymMatrix::identity(3), m) ==
        doctest::Approx(frobenius_norm_sq(m)).epsilon(1e-14));
  CHECK_THROWS_AS(glse_loss(1.0, 1.0, random_spd(3, engine),
                            SymMatrix::identity(4), SymMatrix::identity(3)),
                  DimError);
}

TEST_CASE("oracle weights on a fully aligned instance") {
  // s == sigma == diag(1, 2), target == I: shrinking is pointless, the
  // minimizer must keep the sample matrix untouched.
  Eigen::VectorXd d(2);
  d << 1.0, 2.0;
  const SymMatrix s = SymMatrix::diagonal(d);
  const ShrinkageWeights w = oracle_weights(s, s, SymMatrix::identity(2));
  CHECK(w.alpha == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.beta == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(w.kind == WeightKind::oracle);
}

TEST_CASE("oracle weights beat every grid point") {
  std::mt19937_64 engine(8204);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index p = 2 + rep % 5;
    const SymMatrix s = random_spd(p, engine);
    const SymMatrix sigma = random_spd(p, engine);
    const SymMatrix t = random_spd(p, engine);
    const ShrinkageWeights w = oracle_weights(s, sigma, t);
    const double at_oracle = glse_loss(w.alpha, w.beta, s, t, sigma);
    double best_grid = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 200; ++i) {
      for (int j = 0; j <= 200; ++j) {
        const double a = -2.0 + i * 0.02;
        const double b = -2.0 + j * 0.02;
        best_grid = std::min(best_grid, glse_loss(a, b, s, t, sigma));
      }
    }
    CHECK(at_oracle <= best_grid + 1e-9 * (1.0 + std::abs(best_grid)));
  }
}

TEST_CASE("oracle loss never exceeds the sample loss") {
  std::mt19937_64 engine(8205);
  for (int rep = 0; rep < 25; ++rep) {
    const SymMatrix s = random_spd(4, engine);
    const SymMatrix sigma = random_spd(4, engine);
    const SymMatrix t = random_spd(4, engine);
    const ShrinkageWeights w = oracle_weights(s, sigma, t);
    CHECK(glse_loss(w.alpha, w.beta, s, t, sigma) <=
          glse_loss(1.0, 0.0, s, t, sigma) * (1 + 1e-12) + 1e-12);
  }
}

TEST_CASE("proportional sample and target degenerate") {
  std::mt19937_64 engine(8206);
  const SymMatrix s = random_spd(4, engine);
  const SymMatrix t(2.5 * s.mat());
  const SymMatrix sigma = random_spd(4, engine);
  CHECK_THROWS_AS(oracle_weights(s, sigma, t), DegenerateTarget);
  CHECK_THROWS_AS(bona_fide_weights(s, t, 10), DegenerateTarget);
}

TEST_CASE("non-spd target is rejected") {
  std::mt19937_64 engine(8207);
  const SymMatrix s = random_spd(3, engine);
  const SymMatrix sigma = random_spd(3, engine);
  Eigen::VectorXd d(3);
  d << 1.0, -1.0, 2.0;
  const SymMatrix indefinite = SymMatrix::diagonal(d);
  CHECK_THROWS_AS(oracle_weights(s, sigma, indefinite), ArgError);
  CHECK_THROWS_AS(bona_fide_weights(s, indefinite, 5), ArgError);
  CHECK_THROWS_AS(asymptotic_oracle_weights(sigma, indefinite, 1.0), ArgError);
}

TEST_CASE("asymptotic weights on a worked instance") {
  // sigma = diag(1, 2), target = I, c = 1:
  //   ||sigma||_F^2 = 5, ||sigma||_tr^2 = 9, ||I||_F^2 = 2, tr(sigma I) = 3,
  //   denominator (5 + 9/2) * 2 - 9 = 10, alpha = 1 - (9/2 * 2)/10 = 0.1,
  //   beta = (3/2) * 0.9 = 1.35.
  Eigen::VectorXd d(2);
  d << 1.0, 2.0;
  const SymMatrix sigma = SymMatrix::diagonal(d);
  const ShrinkageWeights w =
      asymptotic_oracle_weights(sigma, SymMatrix::identity(2), 1.0);
  CHECK(w.alpha == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(w.beta == doctest::Approx(1.35).epsilon(1e-14));
  CHECK(w.kind == WeightKind::asymptotic);
}

TEST_CASE("asymptotic weights degenerate only at c = 0 with proportional inputs") {
  std::mt19937_64 engine(8208);
  const SymMatrix sigma = random_spd(4, engine);
  const SymMatrix prop(3.0 * sigma.mat());

  // c = 0: no sampling noise, so a proportional target leaves the weights
  // unidentified; anything else collapses to (1, 0).
  CHECK_THROWS_AS(asymptotic_oracle_weights(sigma, prop, 0.0), DegenerateTarget);
  const ShrinkageWeights at_zero =
      asymptotic_oracle_weights(sigma, SymMatrix::identity(4), 0.0);
  CHECK(at_zero.alpha == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(at_zero.beta == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));

  // c > 0 keeps the system nonsingular even for proportional inputs.
  CHECK_NOTHROW(asymptotic_oracle_weights(sigma, prop, 0.5));
  for (double c : {0.1, 0.5, 1.0, 2.0}) {
    const ShrinkageWeights w =
        asymptotic_oracle_weights(sigma, SymMatrix::identity(4), c);
    CHECK(w.alpha > 0.0);
    CHECK(w.alpha < 1.0);
  }
  CHECK_THROWS_AS(asymptotic_oracle_weights(sigma, SymMatrix::identity(4), -1.0),
                  ArgError);
}

TEST_CASE("bona fide weights on a worked instance, unclamped") {
  // s = diag(1, 2), target = I/2, n = 4:
  //   ||s||_F^2 = 5, ||s||_tr^2 = 9, ||t||_F^2 = 1/2, tr(s t) = 3/2,
  //   det = 5/2 - 9/4 = 1/4, alpha = 1 - (9/4 * 1/2)/(1/4) = -3.5,
  //   beta = 3 * 4.5 = 13.5.
  Eigen::VectorXd d(2);
  d << 1.0, 2.0;
  const SymMatrix s = SymMatrix::diagonal(d);
  const SymMatrix t(0.5 * Eigen::MatrixXd::Identity(2, 2));
  const ShrinkageWeights w = bona_fide_weights(s, t, 4);
  CHECK(w.alpha == doctest::Approx(-3.5).epsilon(1e-14));
  CHECK(w.beta == doctest::Approx(13.5).epsilon(1e-14));
  CHECK(w.kind == WeightKind::bona_fide);
  CHECK_THROWS_AS(bona_fide_weights(s, t, 0), ArgError);
}

TEST_CASE("bona fide alpha stays below one for positive-trace samples") {
  std::mt19937_64 engine(8209);
  for (int rep = 0; rep < 40; ++rep) {
    const Eigen::Index p = 2 + rep % 6;
    const SymMatrix s = random_spd(p, engine);
    const SymMatrix t = random_spd(p, engine);
    const Eigen::Index n = 1 + rep % 12;
    CHECK(bona_fide_weights(s, t, n).alpha < 1.0);
  }
}

TEST_CASE("bona fide weights approach the asymptotic weights") {
  // Population: eigenvalues 0.1, 5, 10 in equal blocks, p = 99, n = 297.
  const SpectrumSpec spectrum = SpectrumSpec::equal_masses({0.1, 5.0, 10.0});
  const int p = 99, n = 297;
  const SymMatrix sigma = covariance_from_spectrum(spectrum, p);
  const SymMatrix target = identity_target(p);
  const double c = static_cast<double>(p) / n;
  const ShrinkageWeights limit = asymptotic_oracle_weights(sigma, target, c);

  const GaussianSampler sampler(sigma);
  double mean_abs_alpha_dev = 0.0;
  double mean_abs_beta_dev = 0.0;
  int near_oracle = 0;
  const int runs = 1000;
  for (int r = 0; r < runs; ++r) {
    const DataMatrix y = sampler.sample(n, derive_stream(8210, 0, r));
    const SymMatrix s = sample_covariance(y, false);
    const ShrinkageWeights w = bona_fide_weights(s, target, n);
    mean_abs_alpha_dev += std::abs(w.alpha - limit.alpha);
    mean_abs_beta_dev += std::abs(w.beta - limit.beta) / limit.beta;
    // Per-draw oracle: the exact finite-sample minimizer for this draw.
    if (std::abs(w.alpha - oracle_weights(s, sigma, target).alpha) < 0.05) {
      ++near_oracle;
    }
  }
  mean_abs_alpha_dev /= runs;
  mean_abs_beta_dev /= runs;
  CHECK(mean_abs_alpha_dev < 0.02);
  CHECK(mean_abs_beta_dev < 0.02);
  CHECK(near_oracle >= 950);
}

TEST_CASE("bona fide beta keeps its exact relation to alpha") {
  std::mt19937_64 engine(8216);
  for (int rep = 0; rep < 25; ++rep) {
    const Eigen::Index p = 2 + rep % 6;
    const SymMatrix s = random_spd(p, engine);
    const SymMatrix t = random_spd(p, engine);
    const ShrinkageWeights w = bona_fide_weights(s, t, 3 + rep);
    const double want =
        trace_product(s, t) / frobenius_norm_sq(t) * (1.0 - w.alpha);
    CHECK(w.beta == want);
  }
}

TEST_CASE("olse assembles the weighted combination") {
  std::mt19937_64 engine(8211);
  const SymMatrix s = random_spd(5, engine);
  const SymMatrix t = random_spd(5, engine);
  const EstimateResult fit = olse(s, t, 20);
  const Eigen::MatrixXd expected =
      fit.weights.alpha * s.mat() + fit.weights.beta * t.mat();
  CHECK((fit.matrix.mat() - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.n_samples == 20);
  CHECK((fit.target.mat() - t.mat()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("olse leaves an oversampled matrix nearly untouched") {
  // Tiny p with huge n: the weights drift to (1, 0) and the estimate
  // reproduces the sample matrix.
  Eigen::VectorXd d(3);
  d << 1.0, 2.0, 4.0;
  const SymMatrix sigma = SymMatrix::diagonal(d);
  const DataMatrix y = gaussian_sample(sigma, 30000, 8217);
  const SymMatrix s = sample_covariance(y, false);
  const EstimateResult fit = olse(s, identity_target(3), y.samples());
  CHECK(fit.weights.alpha == doctest::Approx(1.0).epsilon(2e-3));
  CHECK((fit.matrix.mat() - s.mat()).cwiseAbs().maxCoeff() <
        5e-3 * s.mat().cwiseAbs().maxCoeff());
}

TEST_CASE("frobenius estimator formula and consistency") {
  Eigen::VectorXd d(2);
  d << 1.0, 2.0;
  const SymMatrix s = SymMatrix::diagonal(d);
  // (1/2) * 5 - (1/(4*2)) * 9 = 2.5 - 1.125
  CHECK(frobenius_estimator(s, 4) == doctest::Approx(1.375).epsilon(1e-14));
  CHECK_THROWS_AS(frobenius_estimator(s, 0), ArgError);

  // Identity population, p = 200, n = 400: psi_hat estimates
  // (1/p)||sigma||_F^2 = 1 with small bias and variance.
  const SymMatrix sigma = SymMatrix::identity(200);
  const GaussianSampler sampler(sigma);
  double mean = 0.0;
  const int seeds = 100;
  for (int r = 0; r < seeds; ++r) {
    const DataMatrix y = sampler.sample(400, derive_stream(8212, 0, r));
    mean += frobenius_estimator(sample_covariance(y, false), 400);
  }
  mean /= seeds;
  CHECK(std::abs(mean - 1.0) < 0.05);
}

TEST_CASE("ledoit-wolf on a hand-checked draw") {
  // y1 = (1, 0), y2 = (0, 2): S = diag(0.5, 2), mu = 1.25, d^2 = 0.5625,
  // b^2 = 1.0625 > d^2, so the estimate collapses to mu I exactly.
  Eigen::MatrixXd y(2, 2);
  y << 1.0, 0.0, 0.0, 2.0;
  const EstimateResult fit = lw_estimator(DataMatrix(y), false);
  CHECK(fit.weights.alpha == 0.0);
  CHECK(fit.weights.beta == 1.25);
  CHECK(fit.weights.kind == WeightKind::lw);
  CHECK((fit.matrix.mat() - 1.25 * Eigen::MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("ledoit-wolf keeps noiseless data unshrunk") {
  // Both columns carry the same outer product, so the dispersion term is
  // zero and the sample matrix is reproduced exactly.
  Eigen::MatrixXd y(2, 2);
  y << 1.0, -1.0, 2.0, -2.0;
  const EstimateResult fit = lw_estimator(DataMatrix(y), false);
  const SymMatrix s = sample_covariance(DataMatrix(y), false);
  CHECK(fit.weights.alpha == 1.0);
  CHECK(fit.weights.beta == 0.0);
  CHECK((fit.matrix.mat() - s.mat()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ledoit-wolf matches a direct recomputation") {
  std::mt19937_64 engine(8213);
  for (bool center : {false, true}) {
    const Eigen::MatrixXd y = random_gaussian(6, 15, engine);
    const EstimateResult fit = lw_estimator(DataMatrix(y), center);
    const SymMatrix s = sample_covariance(DataMatrix(y), center);

    Eigen::MatrixXd obs = y;
    if (center) obs = y.colwise() - y.rowwise().mean();
    const double p = 6.0, n = 15.0;
    const double mu = s.mat().trace() / p;
    const double d2 = s.mat().squaredNorm() / p - mu * mu;
    double b2 = 0.0;
    for (int i = 0; i < 15; ++i) {
      b2 += (obs.col(i) * obs.col(i).transpose() - s.mat()).squaredNorm();
    }
    b2 /= p * n * n;
    const double alpha = 1.0 - std::min(b2, d2) / d2;

    CHECK(fit.weights.alpha == doctest::Approx(alpha).epsilon(1e-12));
    CHECK(fit.weights.alpha >= 0.0);
    CHECK(fit.weights.alpha <= 1.0);
    CHECK(fit.weights.beta ==
          doctest::Approx((1.0 - alpha) * mu).epsilon(1e-12));
    const Eigen::MatrixXd expected =
        alpha * s.mat() + (1.0 - alpha) * mu * Eigen::MatrixXd::Identity(6, 6);
    CHECK((fit.matrix.mat() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("ledoit-wolf alpha lies in the unit interval") {
  std::mt19937_64 engine(8214);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index p = 2 + rep % 8;
    const Eigen::Index n = 2 + rep % 11;
    const Eigen::MatrixXd y = random_gaussian(p, n, engine);
    const EstimateResult fit = lw_estimator(DataMatrix(y), rep % 2 == 0);
    CHECK(fit.weights.alpha >= 0.0);
    CHECK(fit.weights.alpha <= 1.0);
  }
}

TEST_CASE("ledoit-wolf rejects samples proportional to the identity") {
  Eigen::MatrixXd y(2, 2);
  y << 3.0, 0.0, 0.0, 3.0;  // S = (9/2) I
  CHECK_THROWS_AS(lw_estimator(DataMatrix(y), false), DegenerateTarget);
}

TEST_CASE("identity target") {
  const SymMatrix t = identity_target(4);
  CHECK(t.dim() == 4);
  CHECK(t(0, 0) == 0.25);
  CHECK(t(0, 1) == 0.0);
  CHECK_THROWS_AS(identity_target(0), ArgError);
}
