#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "shrinkcov/asymptotics.hpp"
#include "shrinkcov/simulation.hpp"

namespace shrinkcov {

/// Flat `key = value` file with '#' comments and blank lines.  Keys outside
/// the allowed set, duplicates, and lines without '=' raise ConfigError.
std::map<std::string, std::string> parse_key_value_file(
    const std::filesystem::path& path, const std::set<std::string>& allowed);

/// Real number, allowing a plain literal or a fraction like "1/3".
double parse_real(const std::string& token);

/// Positive integers from either an explicit list "3 6 9" or an inclusive
/// range "start:stop:step".
std::vector<int> parse_int_grid(const std::string& token);

/// Spectrum atoms from tokens "tau" (equal masses) or "tau:mass" pairs;
/// values may be fractions.  Mixing the two forms raises ConfigError.
SpectrumSpec parse_spectrum(const std::string& tokens);

/// Spectrum read from a file holding the same token syntax, comments and
/// newlines allowed.
SpectrumSpec load_spectrum(const std::filesystem::path& path);

/// Experiment description from a config file.  Recognized keys:
///   tag          short name used in output file names (default: file stem)
///   spectrum     population spectrum atoms (required)
///   target       "identity" (default) or shrinkage-target spectrum atoms
///   c            concentration p/n, positive real or fraction (required)
///   p_grid       dimensions to sweep (required)
///   repetitions  Monte Carlo repetitions (default 100)
///   seed         RNG seed (default 0)
///   estimators   subset of: sample oracle_olse bona_fide_olse lw (required)
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct LimitsSpec {
  SpectrumSpec spectrum;
  double c = 0.0;
  std::vector<int> p_grid;
  std::string tag;
};

/// Limit-quantity request from a config file.  Recognized keys: tag,
/// spectrum, c, p_grid (optional).
LimitsSpec load_limits_config(const std::filesystem::path& path);

}  // namespace shrinkcov
