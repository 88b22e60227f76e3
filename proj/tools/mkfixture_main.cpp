#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "shrinkcov/empirical.hpp"
#include "shrinkcov/errors.hpp"

// Writes a synthetic factor-model returns panel, for exercising the
// empirical pipeline when no real data is at hand.
int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic returns CSV"};
  int assets = 100;
  int observations = 250;
  std::uint64_t seed = 0;
  std::string out = "returns.csv";
  app.add_option("--assets", assets, "number of assets");
  app.add_option("--obs", observations, "number of trading days");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out", out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const shrinkcov::ReturnsPanel panel =
        shrinkcov::synthetic_panel(assets, observations, seed);
    shrinkcov::write_returns_csv(panel, out);
    std::cout << "wrote " << out << '\n';
    return 0;
  } catch (const shrinkcov::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
