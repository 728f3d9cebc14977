#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gpwalk/marginals.hpp"
#include "gpwalk/rng.hpp"

namespace gpwalk {

// Atoms (t_k, j_k) of a Poisson random measure on [0, window] x (eps, inf)
// with mean measure LEB x mu_{a,b}, mu_{a,b}((x, inf]) = a x^{-b}. Marks
// below the truncation eps are not materialized; record_value restores their
// contribution through the drift closure term.
struct AtomSet {
  double intensity_a = 1.0;
  double intensity_b = 1.0;
  double window = 1.0;
  double truncation = 1e-4;
  std::vector<double> times;  // ascending in [0, window]
  std::vector<double> marks;  // parallel to times, each > truncation
};

class WindowTooShort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Times arrive as a Poisson process of rate a*eps^{-b} generated in sorted
// order (exponential gaps); marks are iid with P{j > x} = (eps/x)^b. Refuses
// when the expected atom count exceeds 1e8 (truncation too small).
AtomSet sample_prm(double a, double b, double window, double eps,
                   SplitMix64& rng);

// Running record max(mu^+ z, max_{t_k <= z} (mu t_k + j_k)); the drift term
// closes the gap left by the discarded sub-eps marks, so the value is within
// eps of the untruncated supremum.
double record_value(const AtomSet& atoms, double mu, double z);

// First z at which the record exceeds u: the earlier of the drift crossing
// u/mu (when mu > 0) and the first atom with mu t_k + j_k > u (strict, ties
// resolve to the earliest qualifying atom). Throws WindowTooShort when the
// window ends before any crossing.
double inverse_record(const AtomSet& atoms, double mu, double u);

// Marginal CDF of the inverse record process: three branches (mu > 0 beta
// type, mu < 0 Pareto type, mu = 0 exponential), 0 for y < 0.
double cdf_X(double mu, double c, double u, double y);

// Exponential with rate u^{-alpha}, by quantile inversion (one uniform); the
// analytic cross-check for inverse_record on (1, alpha) atoms with mu = 0.
template <UniformSource R>
double sample_Y_direct(double alpha, double u, R& rng) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("sample_Y_direct: alpha must lie in (0,1)");
  if (!(u > 0.0)) throw ConfigError("sample_Y_direct: u must be positive");
  return -std::pow(u, alpha) * std::log1p(-rng.next_unit());
}

// Values of a standard Brownian motion on the grid, built from independent
// Gaussian increments; covariance min(u_i, u_j).
std::vector<double> gaussian_fdd_reference(const std::vector<double>& u_grid,
                                           SplitMix64& rng);

// Samples (u/mu) * Beta(1, c/mu) by quantile inversion (one uniform, mu > 0);
// matches the mu > 0 branch of cdf_X in distribution.
template <UniformSource R>
double beta_cross_check(double mu, double c, double u, R& rng) {
  if (!(mu > 0.0)) throw ConfigError("beta_cross_check: mu must be positive");
  if (!(c > 0.0) || !(u > 0.0))
    throw ConfigError("beta_cross_check: c and u must be positive");
  const double p = rng.next_unit();
  return u / mu * (-std::expm1(std::log1p(-p) * mu / c));
}

// Self-contained inverse-record draw: samples a PRM window sized to the
// crossing scale and extends it (fresh atoms on the appended span, preserving
// the law exactly) whenever the crossing has not happened yet.
double sample_inverse_record(double a, double b, double mu, double u,
                             double eps, SplitMix64& rng);

}  // namespace gpwalk
