#include "shrinkcov/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "shrinkcov/rng.hpp"
#include "shrinkcov/util.hpp"

namespace shrinkcov {

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::sample: return "sample";
    case EstimatorKind::oracle_olse: return "oracle_olse";
    case EstimatorKind::bona_fide_olse: return "bona_fide_olse";
    case EstimatorKind::lw: return "lw";
  }
  return "unknown";
}

EstimatorKind estimator_from_string(const std::string& name) {
  if (name == "sample") return EstimatorKind::sample;
  if (name == "oracle_olse") return EstimatorKind::oracle_olse;
  if (name == "bona_fide_olse") return EstimatorKind::bona_fide_olse;
  if (name == "lw") return EstimatorKind::lw;
  throw ConfigError("unknown estimator '" + name +
                    "' (expected sample, oracle_olse, bona_fide_olse or lw)");
}

SymMatrix covariance_from_spectrum(const SpectrumSpec& spec, Eigen::Index p) {
  if (p < 1) {
    throw ConfigError("covariance_from_spectrum: dimension must be >= 1, got " +
                      std::to_string(p));
  }
  const auto& atoms = spec.atoms();
  Eigen::VectorXd diag(p);
  double cum = 0.0;
  Eigen::Index lo = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    cum += atoms[i].mass;
    const Eigen::Index hi =
        (i + 1 == atoms.size())
            ? p
            : static_cast<Eigen::Index>(std::llround(cum * static_cast<double>(p)));
    if (hi <= lo || hi > p) {
      throw ConfigError("covariance_from_spectrum: atom " + std::to_string(i) +
                        " receives an empty block at p = " + std::to_string(p));
    }
    diag.segment(lo, hi - lo).setConstant(atoms[i].tau);
    lo = hi;
  }
  return SymMatrix::diagonal(diag);
}

GaussianSampler::GaussianSampler(const SymMatrix& sigma)
    : dim_(sigma.dim()), diagonal_(is_exactly_diagonal(sigma.mat())) {
  if (!is_spd(sigma)) {
    throw ArgError("GaussianSampler: covariance must be symmetric positive definite");
  }
  if (diagonal_) {
    diag_sqrt_ = sigma.mat().diagonal().cwiseSqrt();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma.mat());
    if (solver.info() != Eigen::Success) {
      throw NumericalError("GaussianSampler: eigenvalue decomposition failed");
    }
    sqrt_ = solver.eigenvectors() *
            solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
            solver.eigenvectors().transpose();
  }
}

DataMatrix GaussianSampler::sample(Eigen::Index n,
                                   std::uint64_t stream_seed) const {
  if (n < 1) {
    throw ArgError("GaussianSampler: need n >= 1, got n = " + std::to_string(n));
  }
  std::mt19937_64 engine = make_engine(stream_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(dim_, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < dim_; ++i) {
      x(i, j) = normal(engine);
    }
  }
  if (diagonal_) {
    return DataMatrix(diag_sqrt_.asDiagonal() * x);
  }
  return DataMatrix(sqrt_ * x);
}

DataMatrix gaussian_sample(const SymMatrix& sigma, Eigen::Index n,
                           std::uint64_t stream_seed) {
  return GaussianSampler(sigma).sample(n, stream_seed);
}

double prial(std::span<const double> estimator_losses,
             std::span<const double> sample_losses) {
  if (estimator_losses.size() != sample_losses.size()) {
    throw ArgError("prial: loss lists must be paired, got " +
                   std::to_string(estimator_losses.size()) + " vs " +
                   std::to_string(sample_losses.size()));
  }
  if (estimator_losses.empty()) {
    throw ArgError("prial: need at least one repetition");
  }
  double est = 0.0, ref = 0.0;
  for (double v : estimator_losses) est += v;
  for (double v : sample_losses) ref += v;
  est /= static_cast<double>(estimator_losses.size());
  ref /= static_cast<double>(sample_losses.size());
  if (!(ref > 0.0)) {
    throw ArgError("prial: mean sample loss must be positive");
  }
  return (1.0 - est / ref) * 100.0;
}

Eigen::Index samples_for(int p, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ConfigError("concentration must be a positive real, got " +
                      std::to_string(c));
  }
  const long long n = round_half_even(static_cast<double>(p) / c);
  if (n < 1) {
    throw ConfigError("p = " + std::to_string(p) + ", c = " + std::to_string(c) +
                      " gives no observations");
  }
  return static_cast<Eigen::Index>(n);
}

namespace {

struct CellBuffers {
  std::vector<double> loss;
  std::vector<char> ok;
};

/// Mean and standard error over the repetitions flagged ok, walked in index
/// order so the reduction is deterministic.
void aggregate(const CellBuffers& cell, double* mean, double* stderr_out,
               int* skipped) {
  double sum = 0.0;
  int used = 0;
  for (std::size_t r = 0; r < cell.loss.size(); ++r) {
    if (cell.ok[r]) {
      sum += cell.loss[r];
      ++used;
    }
  }
  *skipped = static_cast<int>(cell.loss.size()) - used;
  if (used == 0) {
    *mean = 0.0;
    *stderr_out = 0.0;
    return;
  }
  *mean = sum / used;
  if (used < 2) {
    *stderr_out = 0.0;
    return;
  }
  double ssq = 0.0;
  for (std::size_t r = 0; r < cell.loss.size(); ++r) {
    if (cell.ok[r]) {
      const double d = cell.loss[r] - *mean;
      ssq += d * d;
    }
  }
  *stderr_out = std::sqrt(ssq / (used - 1)) / std::sqrt(static_cast<double>(used));
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.p_grid.empty()) {
    throw ConfigError("run_experiment: p_grid must not be empty");
  }
  if (config.repetitions < 1) {
    throw ConfigError("run_experiment: repetitions must be >= 1, got " +
                      std::to_string(config.repetitions));
  }
  if (config.estimators.empty()) {
    throw ConfigError("run_experiment: no estimators requested");
  }
  if (config.threads < 1) {
    throw ConfigError("run_experiment: threads must be >= 1, got " +
                      std::to_string(config.threads));
  }

  const int reps = config.repetitions;
  auto wants = [&](EstimatorKind k) {
    return std::find(config.estimators.begin(), config.estimators.end(), k) !=
           config.estimators.end();
  };
  const bool want_oracle = wants(EstimatorKind::oracle_olse);
  const bool want_bona = wants(EstimatorKind::bona_fide_olse);
  const bool want_lw = wants(EstimatorKind::lw);

  ExperimentReport report{config.tag, config, {}};

  for (int p : config.p_grid) {
    if (p < 1) {
      throw ConfigError("run_experiment: dimensions must be >= 1, got " +
                        std::to_string(p));
    }
    const Eigen::Index n = samples_for(p, config.c);
    const SymMatrix sigma = covariance_from_spectrum(config.spectrum, p);
    const SymMatrix target =
        config.target_spectrum
            ? covariance_from_spectrum(*config.target_spectrum, p)
            : identity_target(p);
    const GaussianSampler sampler(sigma);

    CellBuffers sample_cell{std::vector<double>(reps, 0.0),
                            std::vector<char>(reps, 1)};
    CellBuffers oracle_cell = sample_cell;
    CellBuffers bona_cell = sample_cell;
    CellBuffers lw_cell = sample_cell;

    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&](int rep_begin, int rep_end) {
      try {
        for (int rep = rep_begin; rep < rep_end; ++rep) {
          const DataMatrix y = sampler.sample(
              n, derive_stream(config.seed, static_cast<std::uint64_t>(p),
                               static_cast<std::uint64_t>(rep)));
          const SymMatrix s = sample_covariance(y, false);
          sample_cell.loss[rep] = (s.mat() - sigma.mat()).squaredNorm();
          if (want_oracle) {
            try {
              const ShrinkageWeights w = oracle_weights(s, sigma, target);
              oracle_cell.loss[rep] =
                  (w.alpha * s.mat() + w.beta * target.mat() - sigma.mat())
                      .squaredNorm();
            } catch (const DegenerateTarget&) {
              oracle_cell.ok[rep] = 0;
            }
          }
          if (want_bona) {
            try {
              const ShrinkageWeights w = bona_fide_weights(s, target, n);
              bona_cell.loss[rep] =
                  (w.alpha * s.mat() + w.beta * target.mat() - sigma.mat())
                      .squaredNorm();
            } catch (const DegenerateTarget&) {
              bona_cell.ok[rep] = 0;
            }
          }
          if (want_lw) {
            try {
              const EstimateResult r = lw_estimator(y, false);
              lw_cell.loss[rep] = (r.matrix.mat() - sigma.mat()).squaredNorm();
            } catch (const DegenerateTarget&) {
              lw_cell.ok[rep] = 0;
            }
          }
        }
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    };

    const int nthreads = std::max(1, std::min(config.threads, reps));
    if (nthreads == 1) {
      worker(0, reps);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(nthreads);
      const int chunk = (reps + nthreads - 1) / nthreads;
      for (int t = 0; t < nthreads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(reps, lo + chunk);
        if (lo < hi) pool.emplace_back(worker, lo, hi);
      }
      for (std::thread& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    auto emit = [&](EstimatorKind kind, const CellBuffers& cell) {
      ReportRow row;
      row.p = p;
      row.n = static_cast<int>(n);
      row.estimator = kind;
      aggregate(cell, &row.mean_loss, &row.std_error, &row.skipped);
      if (kind == EstimatorKind::sample) {
        row.prial = prial(cell.loss, cell.loss);
      } else {
        // Pair estimator losses with the sample losses of the same draws.
        std::vector<double> est, ref;
        est.reserve(cell.loss.size());
        ref.reserve(cell.loss.size());
        for (std::size_t r = 0; r < cell.loss.size(); ++r) {
          if (cell.ok[r]) {
            est.push_back(cell.loss[r]);
            ref.push_back(sample_cell.loss[r]);
          }
        }
        row.prial = est.empty() ? 0.0 : prial(est, ref);
      }
      report.rows.push_back(row);
    };

    for (EstimatorKind kind :
         {EstimatorKind::sample, EstimatorKind::oracle_olse,
          EstimatorKind::bona_fide_olse, EstimatorKind::lw}) {
      if (!wants(kind)) continue;
      switch (kind) {
        case EstimatorKind::sample: emit(kind, sample_cell); break;
        case EstimatorKind::oracle_olse: emit(kind, oracle_cell); break;
        case EstimatorKind::bona_fide_olse: emit(kind, bona_cell); break;
        case EstimatorKind::lw: emit(kind, lw_cell); break;
      }
    }
  }
  return report;
}

}  // namespace shrinkcov
