#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gpwalk/walk_engine.hpp"

namespace gpwalk {

// Closed-form limit marginals the harness tests against.
struct LimitLaw {
  enum class Kind { x_marginal, y_marginal, gaussian };
  Kind kind = Kind::gaussian;
  double mu = 0.0, c = 1.0, u = 1.0;  // x_marginal
  double alpha = 0.5;                 // y_marginal (uses u as well)
  double variance = 1.0;              // gaussian

  double cdf(double x) const;

  static LimitLaw x_marginal(double mu, double c, double u);
  static LimitLaw y_marginal(double alpha, double u);
  static LimitLaw gaussian(double variance);
};

struct KSReport {
  std::size_t n = 0;
  double statistic = 0.0;
  double critical = 0.0;  // sqrt(-ln(level/2)/2)/sqrt(n), asymptotic one-sample
  double level = 0.01;
  bool pass = false;
};

double ks_critical(std::size_t n, double level);

// Sup-distance max over the sorted sample of max(i/n - F(x_i),
// F(x_i) - (i-1)/n); throws on non-finite samples.
double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf);

// One-sample Kolmogorov-Smirnov report at the given level. Requires n >= 100
// (the asymptotic critical value is meaningless below that).
KSReport ks_one_sample(std::span<const double> samples,
                       const std::function<double(double)>& cdf,
                       double level = 0.01);
KSReport ks_one_sample(std::span<const double> samples, const LimitLaw& law,
                       double level = 0.01);

enum class LLNMode { weak, strong_proxy };

struct LLNReport {
  std::vector<double> t_grid;
  std::vector<double> ratio_mean;  // per t, mean of functional/t
  std::vector<double> dev_q50;     // per t, median of |ratio - target|
  std::vector<double> dev_q95;     // per t, 95% quantile of the same
  double target = 0.0;
  LLNMode mode = LLNMode::weak;
  double delta = 0.0;          // tolerance band around target
  double fail_fraction = 0.0;  // fraction of replications outside the band
  double fail_threshold = 0.0;
  bool pass = false;
};

enum class WalkFunctional { first_passage, visits, last_exit };

// Law-of-large-numbers diagnostic. Weak mode looks only at the top level;
// the strong proxy takes each replication's sup over the top decade of the
// grid (levels strictly above t_max/10), a finite-horizon stand-in for
// almost-sure convergence that is sensitive to oscillation, not just the
// endpoint. Defaults: delta = 0.05*target, allowed failure fraction 0.02.
// Requires >= 1000 replications and a grid spanning at least two decades.
LLNReport lln_diagnostic(std::span<const PathFunctionals> records,
                         WalkFunctional which, double target, LLNMode mode,
                         double delta = -1.0, double fail_threshold = 0.02);

// Ratio-matrix entry point (rows = replications, columns = grid points);
// lln_diagnostic reduces to this after dividing the functionals by t.
LLNReport lln_diagnostic_ratios(const std::vector<std::vector<double>>& ratios,
                                const std::vector<double>& t_grid, double target,
                                LLNMode mode, double delta = -1.0,
                                double fail_threshold = 0.02);

struct FddReport {
  std::vector<double> u_grid;
  std::vector<KSReport> marginal_ks;  // column i against Gaussian(0, u_i)
  std::vector<double> cov;            // k*k row-major empirical covariance
  std::vector<double> cov_target;     // min(u_i, u_j)
  std::vector<double> cov_se;         // delta-method standard errors
  double cov_tol_se = 5.0;
  bool cov_pass = false;
  bool pass = false;
};

// Finite-dimensional Gaussian check: per-column KS against Gaussian(0, u_i)
// plus the empirical covariance within cov_tol_se standard errors of
// min(u_i, u_j). vectors is n x k, n >= 1000, all entries finite (a NaN
// throws with the offending replication index).
FddReport fdd_gaussian_check(const std::vector<std::vector<double>>& vectors,
                             const std::vector<double>& u_grid,
                             double level = 0.01, double cov_tol_se = 5.0);

struct SandwichViolation {
  std::uint64_t seed = 0;
  std::size_t level_index = 0;
  double level = 0.0;
};

struct SandwichAudit {
  bool ok = true;
  std::vector<SandwichViolation> violations;
  explicit operator bool() const { return ok; }
};

// tau(t) - 1 <= N(t) <= rho(t) on every level of every replication.
SandwichAudit sandwich_audit(std::span<const PathFunctionals> records);

// Sorted copy plus empirical CDF heights i/n; plot/report helper.
std::vector<std::pair<double, double>> ecdf_points(std::span<const double> samples);

}  // namespace gpwalk
