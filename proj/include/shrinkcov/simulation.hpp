#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shrinkcov/asymptotics.hpp"
#include "shrinkcov/estimators.hpp"
#include "shrinkcov/matrix.hpp"

namespace shrinkcov {

/// Estimators a Monte Carlo experiment can score.
enum class EstimatorKind { sample, oracle_olse, bona_fide_olse, lw };

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

/// One Monte Carlo sweep: for each p in p_grid, draw `repetitions` Gaussian
/// samples of size n = round(p / c) from the covariance matrix induced by
/// `spectrum`, and score the requested estimators against the shrinkage
/// target (identity/p by default, or the matrix induced by target_spectrum).
struct ExperimentConfig {
  SpectrumSpec spectrum;
  std::optional<SpectrumSpec> target_spectrum;
  double c = 1.0;
  std::vector<int> p_grid;
  int repetitions = 100;
  std::uint64_t seed = 0;
  std::vector<EstimatorKind> estimators;
  int threads = 1;
  std::string tag = "experiment";
};

/// Aggregated results for one (p, estimator) cell.  mean_loss averages the
/// squared Frobenius loss over non-skipped repetitions, std_error is the
/// standard error of that mean, and skipped counts repetitions abandoned with
/// DegenerateTarget.
struct ReportRow {
  int p = 0;
  int n = 0;
  EstimatorKind estimator = EstimatorKind::sample;
  double mean_loss = 0.0;
  double prial = 0.0;
  double std_error = 0.0;
  int skipped = 0;
};

struct ExperimentReport {
  std::string tag;
  ExperimentConfig config;
  std::vector<ReportRow> rows;
};

/// Diagonal population matrix realizing the spectrum at dimension p: block i
/// holds atom i's eigenvalue, block sizes follow the cumulative-rounding
/// partition round(p * cummass_i) - round(p * cummass_{i-1}), which always
/// sums to p.  An empty block raises ConfigError.
SymMatrix covariance_from_spectrum(const SpectrumSpec& spec, Eigen::Index p);

/// Draws n zero-mean Gaussian observations with the given covariance via its
/// symmetric square root.  Variates come from std::mt19937_64 seeded with
/// stream_seed, filled one observation (column) at a time.
class GaussianSampler {
 public:
  explicit GaussianSampler(const SymMatrix& sigma);
  DataMatrix sample(Eigen::Index n, std::uint64_t stream_seed) const;
  Eigen::Index dim() const { return dim_; }

 private:
  Eigen::Index dim_;
  bool diagonal_;
  Eigen::VectorXd diag_sqrt_;
  Eigen::MatrixXd sqrt_;
};

DataMatrix gaussian_sample(const SymMatrix& sigma, Eigen::Index n,
                           std::uint64_t stream_seed);

/// Percentage Relative Improvement in Average Loss over the sample
/// covariance matrix: (1 - mean(est) / mean(sample)) * 100.  Lists must be
/// paired per repetition and equally long.
double prial(std::span<const double> estimator_losses,
             std::span<const double> sample_losses);

/// Observation count induced by dimension p and concentration c, rounded to
/// the nearest integer with ties to even.
Eigen::Index samples_for(int p, double c);

/// Runs the Monte Carlo sweep.  Every estimator within a repetition sees the
/// same draw (common random numbers), repetition r of dimension p uses the
/// substream derive_stream(seed, p, r), and aggregation walks repetitions in
/// index order, so results are byte-identical for any thread count.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace shrinkcov
