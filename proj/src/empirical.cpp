#include "shrinkcov/empirical.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "shrinkcov/rng.hpp"
#include "shrinkcov/util.hpp"

namespace shrinkcov {

namespace {

double parse_cell(const std::string& cell, std::size_t line, std::size_t col) {
  const std::string_view sv = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), value);
  if (ec != std::errc() || ptr != sv.data() + sv.size() ||
      !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": cannot parse '" + cell +
                     "' as a return");
  }
  return value;
}

bool looks_like_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

}  // namespace

LoadReport load_returns_csv(const std::filesystem::path& path,
                            MissingPolicy policy) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open returns file '" + path.string() + "'");
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("'" + path.string() + "' is empty");
  }
  std::vector<std::string> header = split(trim(line), ',');
  if (header.empty() || std::string(trim(header[0])) != "date") {
    throw ParseError("line 1: header must start with 'date'");
  }
  if (header.size() < 2) {
    throw ParseError("line 1: need at least one asset column");
  }

  LoadReport report;
  ReturnsPanel& panel = report.panel;
  for (std::size_t i = 1; i < header.size(); ++i) {
    panel.asset_names.emplace_back(trim(header[i]));
    if (panel.asset_names.back().empty()) {
      throw ParseError("line 1, column " + std::to_string(i + 1) +
                       ": empty asset name");
    }
  }
  const std::size_t width = header.size();

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(trim(line), ',');
    if (cells.size() != width) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(width) + " fields, got " +
                       std::to_string(cells.size()));
    }
    std::string date(trim(cells[0]));
    if (!looks_like_date(date)) {
      throw ParseError("line " + std::to_string(lineno) +
                       ", column 1: '" + date + "' is not a YYYY-MM-DD date");
    }
    if (!panel.dates.empty()) {
      const std::string& prev =
          report.dropped_dates.empty() || panel.dates.empty()
              ? panel.dates.back()
              : std::max(panel.dates.back(), report.dropped_dates.back());
      if (date == prev) {
        throw ParseError("line " + std::to_string(lineno) +
                         ": duplicate date '" + date + "'");
      }
      if (date < prev) {
        throw ParseError("line " + std::to_string(lineno) + ": date '" + date +
                         "' is out of order");
      }
    } else if (!report.dropped_dates.empty() &&
               date <= report.dropped_dates.back()) {
      throw ParseError("line " + std::to_string(lineno) + ": date '" + date +
                       "' duplicates or reorders a dropped row");
    }

    bool has_gap = false;
    for (std::size_t i = 1; i < width && !has_gap; ++i) {
      if (trim(cells[i]).empty()) has_gap = true;
    }
    if (has_gap) {
      if (policy == MissingPolicy::reject) {
        for (std::size_t i = 1; i < width; ++i) {
          if (trim(cells[i]).empty()) {
            throw ParseError("line " + std::to_string(lineno) + ", column " +
                             std::to_string(i + 1) + ": missing return");
          }
        }
      }
      report.dropped_dates.push_back(std::move(date));
      continue;
    }

    std::vector<double> values(width - 1);
    for (std::size_t i = 1; i < width; ++i) {
      values[i - 1] = parse_cell(cells[i], lineno, i + 1);
    }
    panel.dates.push_back(std::move(date));
    rows.push_back(std::move(values));
  }

  if (rows.empty()) {
    throw ParseError("'" + path.string() + "' has no complete observations");
  }
  panel.returns.resize(static_cast<Eigen::Index>(panel.asset_names.size()),
                       static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i + 1 < width; ++i) {
      panel.returns(static_cast<Eigen::Index>(i),
                    static_cast<Eigen::Index>(j)) = rows[j][i];
    }
  }
  return report;
}

void write_returns_csv(const ReturnsPanel& panel,
                       const std::filesystem::path& path) {
  if (panel.assets() < 1 || panel.observations() < 1 ||
      panel.asset_names.size() != static_cast<std::size_t>(panel.assets()) ||
      panel.dates.size() != static_cast<std::size_t>(panel.observations())) {
    throw ArgError("write_returns_csv: inconsistent panel");
  }
  std::ofstream out(path);
  if (!out) {
    throw ArgError("write_returns_csv: cannot open '" + path.string() + "'");
  }
  out << "date";
  for (const std::string& name : panel.asset_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index j = 0; j < panel.observations(); ++j) {
    out << panel.dates[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < panel.assets(); ++i) {
      out << ',' << to_full_precision(panel.returns(i, j));
    }
    out << '\n';
  }
  if (!out) {
    throw ArgError("write_returns_csv: write to '" + path.string() + "' failed");
  }
}

std::vector<PortfolioDraw> sample_portfolios(const ReturnsPanel& panel,
                                             Eigen::Index p, Eigen::Index n,
                                             Eigen::Index count,
                                             std::uint64_t seed) {
  if (count < 1) {
    throw ConfigError("sample_portfolios: need count >= 1, got " +
                      std::to_string(count));
  }
  if (p < 1 || p > panel.assets()) {
    throw ConfigError("sample_portfolios: portfolio size " + std::to_string(p) +
                      " must be in [1, " + std::to_string(panel.assets()) + "]");
  }
  if (n < 1 || n > panel.observations()) {
    throw ConfigError("sample_portfolios: window " + std::to_string(n) +
                      " must be in [1, " + std::to_string(panel.observations()) +
                      "]");
  }
  const Eigen::Index begin = panel.observations() - n;
  std::vector<PortfolioDraw> draws;
  draws.reserve(static_cast<std::size_t>(count));
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(panel.assets()));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  for (Eigen::Index d = 0; d < count; ++d) {
    std::mt19937_64 engine =
        make_engine(derive_stream(seed, static_cast<std::uint64_t>(d)));
    // Partial Fisher-Yates: the first p slots become the draw.
    for (Eigen::Index i = 0; i < p; ++i) {
      std::uniform_int_distribution<std::size_t> pick(
          static_cast<std::size_t>(i), pool.size() - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[pick(engine)]);
    }
    PortfolioDraw draw;
    draw.asset_indices.assign(pool.begin(), pool.begin() + p);
    std::sort(draw.asset_indices.begin(), draw.asset_indices.end());
    draw.window_begin = begin;
    draw.window_end = panel.observations();
    draws.push_back(std::move(draw));
  }
  return draws;
}

DataMatrix panel_window(const ReturnsPanel& panel, const PortfolioDraw& draw) {
  if (draw.asset_indices.empty()) {
    throw ArgError("panel_window: empty draw");
  }
  if (draw.window_begin < 0 || draw.window_end > panel.observations() ||
      draw.window_begin >= draw.window_end) {
    throw ArgError("panel_window: window out of range");
  }
  const Eigen::Index p = static_cast<Eigen::Index>(draw.asset_indices.size());
  const Eigen::Index n = draw.window_end - draw.window_begin;
  Eigen::MatrixXd y(p, n);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::Index row = draw.asset_indices[static_cast<std::size_t>(i)];
    if (row < 0 || row >= panel.assets()) {
      throw ArgError("panel_window: asset index " + std::to_string(row) +
                     " out of range");
    }
    y.row(i) = panel.returns.row(row).segment(draw.window_begin, n);
  }
  return DataMatrix(std::move(y));
}

DiagnosticsRow portfolio_diagnostics(const ReturnsPanel& panel,
                                     const PortfolioDraw& draw,
                                     const std::optional<SymMatrix>& target,
                                     bool center) {
  const DataMatrix y = panel_window(panel, draw);
  const SymMatrix s = sample_covariance(y, center);
  const SymMatrix t = target ? *target : identity_target(y.vars());
  const EstimateResult fit = olse(s, t, y.samples());

  const EigenList ev_s = sym_eigenvalues(s);
  const EigenList ev_o = sym_eigenvalues(fit.matrix);
  DiagnosticsRow row;
  row.frob_olse = frobenius_norm_sq(fit.matrix);
  row.frob_sample = frobenius_norm_sq(s);
  row.lmax_olse = ev_o(ev_o.size() - 1);
  row.lmax_sample = ev_s(ev_s.size() - 1);
  row.lmin_olse = ev_o(0);
  row.lmin_sample = ev_s(0);
  row.alpha = fit.weights.alpha;
  row.beta = fit.weights.beta;
  return row;
}

std::vector<DiagnosticsRow> run_diagnostics(
    const ReturnsPanel& panel, const std::vector<PortfolioDraw>& draws,
    const std::optional<SymMatrix>& target, bool center, int threads) {
  if (threads < 1) {
    throw ConfigError("run_diagnostics: threads must be >= 1, got " +
                      std::to_string(threads));
  }
  std::vector<DiagnosticsRow> rows(draws.size());
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&](std::size_t lo, std::size_t hi) {
    try {
      for (std::size_t d = lo; d < hi; ++d) {
        rows[d] = portfolio_diagnostics(panel, draws[d], target, center);
        rows[d].draw_id = static_cast<int>(d);
      }
    } catch (...) {
      std::scoped_lock lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  const std::size_t nthreads =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, draws.size()));
  if (nthreads <= 1) {
    worker(0, draws.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (draws.size() + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(draws.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

std::vector<std::pair<double, double>> empirical_edf(
    std::span<const double> values) {
  if (values.empty()) {
    throw ArgError("empirical_edf: need at least one value");
  }
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw ArgError("empirical_edf: values must be finite");
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> edf;
  const double total = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    edf.emplace_back(sorted[i], static_cast<double>(i + 1) / total);
  }
  return edf;
}

namespace {

/// Next calendar day after (y, m, d), Gregorian rules.
void next_day(int& y, int& m, int& d) {
  static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const int last = (m == 2 && leap) ? 29 : days[m - 1];
  if (d < last) {
    ++d;
  } else if (m < 12) {
    ++m;
    d = 1;
  } else {
    ++y;
    m = 1;
    d = 1;
  }
}

}  // namespace

ReturnsPanel synthetic_panel(Eigen::Index assets, Eigen::Index observations,
                             std::uint64_t seed) {
  if (assets < 1 || observations < 1) {
    throw ArgError("synthetic_panel: need at least one asset and one observation");
  }
  std::mt19937_64 engine = make_engine(derive_stream(seed, 0x9A7E1));
  std::normal_distribution<double> normal(0.0, 1.0);

  // Three common factors; the first dominates, so the panel carries heavy
  // cross-sectional correlation.
  const int k = 3;
  const double factor_vol[k] = {0.011, 0.006, 0.004};
  Eigen::MatrixXd loadings(assets, k);
  Eigen::VectorXd idio_vol(assets);
  for (Eigen::Index i = 0; i < assets; ++i) {
    loadings(i, 0) = 1.0 + 0.3 * normal(engine);
    loadings(i, 1) = 0.5 * normal(engine);
    loadings(i, 2) = 0.5 * normal(engine);
    idio_vol(i) = std::max(1e-4, 0.005 + 0.0015 * normal(engine));
  }
  ReturnsPanel panel;
  panel.returns.resize(assets, observations);
  for (Eigen::Index t = 0; t < observations; ++t) {
    double f[k];
    for (int j = 0; j < k; ++j) f[j] = factor_vol[j] * normal(engine);
    for (Eigen::Index i = 0; i < assets; ++i) {
      double r = idio_vol(i) * normal(engine);
      for (int j = 0; j < k; ++j) r += loadings(i, j) * f[j];
      panel.returns(i, t) = r;
    }
  }

  panel.asset_names.reserve(static_cast<std::size_t>(assets));
  for (Eigen::Index i = 0; i < assets; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "A%04lld", static_cast<long long>(i));
    panel.asset_names.emplace_back(name);
  }
  int y = 2015, m = 1, d = 2;
  panel.dates.reserve(static_cast<std::size_t>(observations));
  for (Eigen::Index t = 0; t < observations; ++t) {
    char date[32];
    std::snprintf(date, sizeof(date), "%04d-%02d-%02d", y, m, d);
    panel.dates.emplace_back(date);
    next_day(y, m, d);
  }
  return panel;
}

}  // namespace shrinkcov
