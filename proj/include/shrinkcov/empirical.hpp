#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shrinkcov/estimators.hpp"
#include "shrinkcov/matrix.hpp"

namespace shrinkcov {

/// A panel of asset returns: one row per asset, one column per trading date,
/// dates strictly increasing.
struct ReturnsPanel {
  std::vector<std::string> asset_names;
  std::vector<std::string> dates;
  Eigen::MatrixXd returns;

  Eigen::Index assets() const { return returns.rows(); }
  Eigen::Index observations() const { return returns.cols(); }
};

/// What to do with rows that have empty cells.
enum class MissingPolicy { reject, drop_incomplete_rows };

struct LoadReport {
  ReturnsPanel panel;
  std::vector<std::string> dropped_dates;
};

/// Loads a returns CSV.  Expected layout: header `date,<name>,...`, then one
/// row per date `YYYY-MM-DD,<return>,...`.  Empty cells are gaps handled per
/// policy; any other malformed cell, duplicate or out-of-order date, row of
/// the wrong width, or a panel left empty raises ParseError naming the line
/// and column (1-based, counting the header as line 1).
LoadReport load_returns_csv(const std::filesystem::path& path,
                            MissingPolicy policy);

/// Writes a panel in the same layout with full 17-digit precision, so a
/// write/load round trip reproduces the panel exactly.
void write_returns_csv(const ReturnsPanel& panel,
                       const std::filesystem::path& path);

/// A resampled portfolio: p distinct asset rows (ascending) and the
/// half-open column window [window_begin, window_end) of observations.
struct PortfolioDraw {
  std::vector<Eigen::Index> asset_indices;
  Eigen::Index window_begin = 0;
  Eigen::Index window_end = 0;
};

/// Draws `count` portfolios of p assets sampled uniformly without
/// replacement; every draw uses the window of the n most recent dates.
/// Draw d uses the substream derive_stream(seed, d).
std::vector<PortfolioDraw> sample_portfolios(const ReturnsPanel& panel,
                                             Eigen::Index p, Eigen::Index n,
                                             Eigen::Index count,
                                             std::uint64_t seed);

/// Observation matrix (p x n) of one draw.
DataMatrix panel_window(const ReturnsPanel& panel, const PortfolioDraw& draw);

/// Shrinkage diagnostics of one draw: squared Frobenius norms and extreme
/// eigenvalues of the shrinkage estimate and of the sample covariance
/// matrix, plus the fitted weights.
struct DiagnosticsRow {
  int draw_id = 0;
  double frob_olse = 0.0;
  double frob_sample = 0.0;
  double lmax_olse = 0.0;
  double lmax_sample = 0.0;
  double lmin_olse = 0.0;
  double lmin_sample = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// Diagnostics for one draw.  A missing target means identity/p at the
/// draw's dimension; an explicit target must match it.
DiagnosticsRow portfolio_diagnostics(const ReturnsPanel& panel,
                                     const PortfolioDraw& draw,
                                     const std::optional<SymMatrix>& target,
                                     bool center);

/// Diagnostics for a batch of draws, draw_id set to the draw's position.
/// Draws are independent, so they may be processed by up to `threads`
/// workers; the output order is the input order either way.
std::vector<DiagnosticsRow> run_diagnostics(
    const ReturnsPanel& panel, const std::vector<PortfolioDraw>& draws,
    const std::optional<SymMatrix>& target, bool center, int threads);

/// Empirical distribution function: sorted unique values paired with the
/// fraction of observations less than or equal to each.
std::vector<std::pair<double, double>> empirical_edf(
    std::span<const double> values);

/// Synthetic daily returns panel with strong cross-correlation, produced by
/// a three-factor model with a dominant market factor.  Deterministic in the
/// seed; useful as a test fixture when real data is unavailable.
ReturnsPanel synthetic_panel(Eigen::Index assets, Eigen::Index observations,
                             std::uint64_t seed);

}  // namespace shrinkcov
