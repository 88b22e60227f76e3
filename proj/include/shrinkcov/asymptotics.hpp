#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "shrinkcov/errors.hpp"
#include "shrinkcov/matrix.hpp"

namespace shrinkcov {

/// One atom of a discrete population spectrum: eigenvalue tau with weight
/// mass.
struct SpectrumAtom {
  double tau;
  double mass;
};

/// Discrete limiting spectral distribution H: finitely many atoms with
/// positive eigenvalues and positive masses summing to one.
class SpectrumSpec {
 public:
  explicit SpectrumSpec(std::vector<SpectrumAtom> atoms,
                        double mass_tol = kTol.mass_sum)
      : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ArgError("SpectrumSpec: need at least one atom");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!(atoms_[i].tau > 0.0) || !std::isfinite(atoms_[i].tau)) {
        throw ArgError("SpectrumSpec: atom " + std::to_string(i) +
                       " has non-positive eigenvalue");
      }
      if (!(atoms_[i].mass > 0.0) || !std::isfinite(atoms_[i].mass)) {
        throw ArgError("SpectrumSpec: atom " + std::to_string(i) +
                       " has non-positive mass");
      }
      total += atoms_[i].mass;
    }
    if (std::abs(total - 1.0) > mass_tol) {
      throw ArgError("SpectrumSpec: masses sum to " + std::to_string(total) +
                     ", expected 1");
    }
  }

  static SpectrumSpec equal_masses(const std::vector<double>& taus) {
    if (taus.empty()) throw ArgError("SpectrumSpec: need at least one atom");
    std::vector<SpectrumAtom> atoms;
    atoms.reserve(taus.size());
    const double mass = 1.0 / static_cast<double>(taus.size());
    for (double t : taus) atoms.push_back({t, mass});
    return SpectrumSpec(std::move(atoms));
  }

  const std::vector<SpectrumAtom>& atoms() const { return atoms_; }

 private:
  std::vector<SpectrumAtom> atoms_;
};

/// k-th moment of the spectrum, integral of tau^k dH.  Only k = 1 and k = 2
/// are meaningful here.
inline double spectrum_moment(const SpectrumSpec& spec, int k) {
  if (k != 1 && k != 2) {
    throw ArgError("spectrum_moment: order must be 1 or 2, got " +
                   std::to_string(k));
  }
  double sum = 0.0;
  for (const SpectrumAtom& a : spec.atoms()) {
    sum += a.mass * (k == 1 ? a.tau : a.tau * a.tau);
  }
  return sum;
}

/// Limit of (1/p)||S||_F^2 under concentration c = lim p/n:
///   phi = m2(H) + c * m1(H)^2.
inline double phi_limit(const SpectrumSpec& spec, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw ArgError("phi_limit: concentration must be a nonnegative real");
  }
  const double m1 = spectrum_moment(spec, 1);
  const double m2 = spectrum_moment(spec, 2);
  return m2 + c * m1 * m1;
}

/// Deterministic equivalent of ||S||_F^2 / p for a finite population matrix:
///   (1/p) * (||sigma||_F^2 + (c/p) * (tr sigma)^2).
inline double deterministic_frobenius(const SymMatrix& sigma, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw ArgError("deterministic_frobenius: concentration must be a nonnegative real");
  }
  const double p = static_cast<double>(sigma.dim());
  return (frobenius_norm_sq(sigma) + (c / p) * trace_norm_sq(sigma)) / p;
}

}  // namespace shrinkcov
