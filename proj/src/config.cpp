#include "shrinkcov/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shrinkcov/util.hpp"

namespace shrinkcov {

namespace {

std::vector<std::string> tokenize(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> tokens;
  std::string t;
  while (in >> t) tokens.push_back(t);
  return tokens;
}

double parse_plain_real(std::string_view sv, const std::string& token) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc() || ptr != sv.data() + sv.size() || !std::isfinite(v)) {
    throw ConfigError("cannot parse '" + token + "' as a real number");
  }
  return v;
}

int parse_int(const std::string& token) {
  const std::string_view sv = trim(token);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc() || ptr != sv.data() + sv.size()) {
    throw ConfigError("cannot parse '" + token + "' as an integer");
  }
  return v;
}

}  // namespace

std::map<std::string, std::string> parse_key_value_file(
    const std::filesystem::path& path, const std::set<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    if (!allowed.contains(key)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

double parse_real(const std::string& token) {
  const std::string_view sv = trim(token);
  const auto slash = sv.find('/');
  if (slash == std::string_view::npos) {
    return parse_plain_real(sv, token);
  }
  const double num = parse_plain_real(trim(sv.substr(0, slash)), token);
  const double den = parse_plain_real(trim(sv.substr(slash + 1)), token);
  if (den == 0.0) {
    throw ConfigError("division by zero in '" + token + "'");
  }
  return num / den;
}

std::vector<int> parse_int_grid(const std::string& token) {
  std::vector<int> grid;
  if (token.find(':') != std::string::npos) {
    const std::vector<std::string> parts = split(token, ':');
    if (parts.size() != 3) {
      throw ConfigError("range '" + token + "' must be start:stop:step");
    }
    const int start = parse_int(parts[0]);
    const int stop = parse_int(parts[1]);
    const int step = parse_int(parts[2]);
    if (start < 1 || stop < start || step < 1) {
      throw ConfigError("range '" + token +
                        "' must satisfy 1 <= start <= stop and step >= 1");
    }
    for (int p = start; p <= stop; p += step) grid.push_back(p);
    return grid;
  }
  for (const std::string& t : tokenize(token)) {
    const int p = parse_int(t);
    if (p < 1) {
      throw ConfigError("dimension '" + t + "' must be >= 1");
    }
    grid.push_back(p);
  }
  if (grid.empty()) {
    throw ConfigError("empty dimension list");
  }
  return grid;
}

SpectrumSpec parse_spectrum(const std::string& tokens) {
  const std::vector<std::string> parts = tokenize(tokens);
  if (parts.empty()) {
    throw ConfigError("empty spectrum");
  }
  const bool with_masses = parts[0].find(':') != std::string::npos;
  std::vector<SpectrumAtom> atoms;
  std::vector<double> taus;
  for (const std::string& t : parts) {
    const auto colon = t.find(':');
    if ((colon != std::string::npos) != with_masses) {
      throw ConfigError("spectrum '" + tokens +
                        "' mixes plain eigenvalues with tau:mass pairs");
    }
    try {
      if (with_masses) {
        atoms.push_back({parse_real(t.substr(0, colon)),
                         parse_real(t.substr(colon + 1))});
      } else {
        taus.push_back(parse_real(t));
      }
    } catch (const ConfigError& e) {
      throw ConfigError("bad spectrum atom '" + t + "': " + e.what());
    }
  }
  try {
    return with_masses ? SpectrumSpec(std::move(atoms))
                       : SpectrumSpec::equal_masses(taus);
  } catch (const ArgError& e) {
    throw ConfigError(std::string("bad spectrum: ") + e.what());
  }
}

SpectrumSpec load_spectrum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open spectrum file '" + path.string() + "'");
  }
  std::string all, line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    all += line;
    all += ' ';
  }
  return parse_spectrum(all);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  static const std::set<std::string> allowed = {
      "tag", "spectrum", "target", "c", "p_grid", "repetitions", "seed",
      "estimators"};
  const auto kv = parse_key_value_file(path, allowed);
  for (const char* required : {"spectrum", "c", "p_grid", "estimators"}) {
    if (!kv.contains(required)) {
      throw ConfigError(path.string() + ": missing key '" +
                        std::string(required) + "'");
    }
  }

  ExperimentConfig cfg{parse_spectrum(kv.at("spectrum")), std::nullopt};
  cfg.tag = kv.contains("tag") ? kv.at("tag") : path.stem().string();
  if (kv.contains("target") && kv.at("target") != "identity") {
    cfg.target_spectrum = parse_spectrum(kv.at("target"));
  }
  cfg.c = parse_real(kv.at("c"));
  if (!(cfg.c > 0.0)) {
    throw ConfigError(path.string() + ": c must be positive");
  }
  cfg.p_grid = parse_int_grid(kv.at("p_grid"));
  if (kv.contains("repetitions")) {
    cfg.repetitions = parse_int(kv.at("repetitions"));
    if (cfg.repetitions < 1) {
      throw ConfigError(path.string() + ": repetitions must be >= 1");
    }
  }
  if (kv.contains("seed")) {
    const std::string_view sv = trim(kv.at("seed"));
    std::uint64_t s = 0;
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), s);
    if (ec != std::errc() || ptr != sv.data() + sv.size()) {
      throw ConfigError(path.string() + ": cannot parse seed '" +
                        kv.at("seed") + "'");
    }
    cfg.seed = s;
  }
  for (const std::string& name : tokenize(kv.at("estimators"))) {
    cfg.estimators.push_back(estimator_from_string(name));
  }
  if (cfg.estimators.empty()) {
    throw ConfigError(path.string() + ": estimators must not be empty");
  }
  return cfg;
}

LimitsSpec load_limits_config(const std::filesystem::path& path) {
  static const std::set<std::string> allowed = {"tag", "spectrum", "c",
                                                "p_grid"};
  const auto kv = parse_key_value_file(path, allowed);
  for (const char* required : {"spectrum", "c"}) {
    if (!kv.contains(required)) {
      throw ConfigError(path.string() + ": missing key '" +
                        std::string(required) + "'");
    }
  }
  LimitsSpec spec{parse_spectrum(kv.at("spectrum"))};
  spec.tag = kv.contains("tag") ? kv.at("tag") : path.stem().string();
  spec.c = parse_real(kv.at("c"));
  if (!(spec.c >= 0.0)) {
    throw ConfigError(path.string() + ": c must be nonnegative");
  }
  if (kv.contains("p_grid")) {
    spec.p_grid = parse_int_grid(kv.at("p_grid"));
  }
  return spec;
}

}  // namespace shrinkcov
