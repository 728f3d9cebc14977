#include "gpwalk/stat_verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpwalk/limit_processes.hpp"
#include "gpwalk/normal.hpp"

namespace gpwalk {

namespace {
double quantile_of_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double w = pos - static_cast<double>(i);
  return sorted[i] * (1.0 - w) + sorted[i + 1] * w;
}

std::int64_t pick(const PathFunctionals& r, WalkFunctional which, std::size_t j) {
  switch (which) {
    case WalkFunctional::first_passage:
      return r.tau[j];
    case WalkFunctional::visits:
      return r.n_visits[j];
    case WalkFunctional::last_exit:
      return r.rho[j];
  }
  return 0;
}
}  // namespace

LimitLaw LimitLaw::x_marginal(double mu, double c, double u) {
  LimitLaw l;
  l.kind = Kind::x_marginal;
  l.mu = mu;
  l.c = c;
  l.u = u;
  return l;
}

LimitLaw LimitLaw::y_marginal(double alpha, double u) {
  LimitLaw l;
  l.kind = Kind::y_marginal;
  l.alpha = alpha;
  l.u = u;
  return l;
}

LimitLaw LimitLaw::gaussian(double variance) {
  LimitLaw l;
  l.kind = Kind::gaussian;
  l.variance = variance;
  return l;
}

double LimitLaw::cdf(double x) const {
  switch (kind) {
    case Kind::x_marginal:
      return cdf_X(mu, c, u, x);
    case Kind::y_marginal:
      return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(u, -alpha) * x);
    case Kind::gaussian:
      return norm_cdf(x / std::sqrt(variance));
  }
  return 0.0;
}

double ks_critical(std::size_t n, double level) {
  return std::sqrt(-std::log(level / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf) {
  std::vector<double> x(samples.begin(), samples.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]))
      throw ConfigError("ks: sample " + std::to_string(i) + " is not finite");
  }
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    const double hi = (static_cast<double>(i) + 1.0) / n - f;
    const double lo = f - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

KSReport ks_one_sample(std::span<const double> samples,
                       const std::function<double(double)>& cdf, double level) {
  if (samples.size() < 100)
    throw ConfigError("ks_one_sample: need at least 100 samples");
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("ks_one_sample: level must lie in (0,1)");
  KSReport r;
  r.n = samples.size();
  r.statistic = ks_statistic(samples, cdf);
  r.level = level;
  r.critical = ks_critical(samples.size(), level);
  r.pass = r.statistic < r.critical;
  return r;
}

KSReport ks_one_sample(std::span<const double> samples, const LimitLaw& law,
                       double level) {
  return ks_one_sample(samples, [&law](double x) { return law.cdf(x); }, level);
}

LLNReport lln_diagnostic_ratios(const std::vector<std::vector<double>>& ratios,
                                const std::vector<double>& t_grid, double target,
                                LLNMode mode, double delta,
                                double fail_threshold) {
  if (ratios.size() < 1000)
    throw ConfigError("lln_diagnostic: need at least 1000 replications");
  if (t_grid.size() < 2 || !(t_grid.front() > 0.0) ||
      !(t_grid.back() / t_grid.front() >= 100.0))
    throw ConfigError("lln_diagnostic: grid must span at least two decades");
  if (delta <= 0.0) delta = 0.05 * std::fabs(target);

  const std::size_t m = t_grid.size();
  const std::size_t n = ratios.size();
  LLNReport rep;
  rep.t_grid = t_grid;
  rep.target = target;
  rep.mode = mode;
  rep.delta = delta;
  rep.fail_threshold = fail_threshold;
  rep.ratio_mean.assign(m, 0.0);
  rep.dev_q50.assign(m, 0.0);
  rep.dev_q95.assign(m, 0.0);

  std::vector<double> devs(n);
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ratios[i][j];
      s += r;
      devs[i] = std::fabs(r - target);
    }
    rep.ratio_mean[j] = s / static_cast<double>(n);
    std::sort(devs.begin(), devs.end());
    rep.dev_q50[j] = quantile_of_sorted(devs, 0.5);
    rep.dev_q95[j] = quantile_of_sorted(devs, 0.95);
  }

  // top decade: levels strictly above t_max/10 (with a sliver of head room so
  // a grid point computed as t_max/10 + rounding noise stays excluded)
  const double cutoff = t_grid.back() / 10.0 * (1.0 + 1e-6);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double worst = 0.0;
    if (mode == LLNMode::weak) {
      worst = std::fabs(ratios[i][m - 1] - target);
    } else {
      for (std::size_t j = 0; j < m; ++j) {
        if (t_grid[j] > cutoff)
          worst = std::max(worst, std::fabs(ratios[i][j] - target));
      }
    }
    if (worst > delta) ++bad;
  }
  rep.fail_fraction = static_cast<double>(bad) / static_cast<double>(n);
  rep.pass = rep.fail_fraction <= fail_threshold;
  return rep;
}

LLNReport lln_diagnostic(std::span<const PathFunctionals> records,
                         WalkFunctional which, double target, LLNMode mode,
                         double delta, double fail_threshold) {
  if (records.empty()) throw ConfigError("lln_diagnostic: no records");
  const std::vector<double>& grid = records.front().levels;
  std::vector<std::vector<double>> ratios(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.levels != grid)
      throw ConfigError("lln_diagnostic: records use different grids");
    ratios[i].resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
      ratios[i][j] = static_cast<double>(pick(r, which, j)) / grid[j];
  }
  return lln_diagnostic_ratios(ratios, grid, target, mode, delta, fail_threshold);
}

FddReport fdd_gaussian_check(const std::vector<std::vector<double>>& vectors,
                             const std::vector<double>& u_grid, double level,
                             double cov_tol_se) {
  const std::size_t n = vectors.size();
  const std::size_t k = u_grid.size();
  if (n < 1000) throw ConfigError("fdd_gaussian_check: need at least 1000 rows");
  for (std::size_t j = 0; j < k; ++j) {
    if (!(u_grid[j] > 0.0) || (j > 0 && !(u_grid[j] > u_grid[j - 1])))
      throw ConfigError("fdd_gaussian_check: u grid must be positive increasing");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (vectors[i].size() != k)
      throw ConfigError("fdd_gaussian_check: ragged row " + std::to_string(i));
    for (double v : vectors[i]) {
      if (!std::isfinite(v))
        throw ConfigError("fdd_gaussian_check: non-finite value in replication " +
                          std::to_string(i));
    }
  }

  FddReport rep;
  rep.u_grid = u_grid;
  rep.cov_tol_se = cov_tol_se;

  std::vector<double> column(n);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = vectors[i][j];
    rep.marginal_ks.push_back(
        ks_one_sample(column, LimitLaw::gaussian(u_grid[j]), level));
  }

  std::vector<double> mean(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) mean[j] += vectors[i][j];
  for (std::size_t j = 0; j < k; ++j) mean[j] /= static_cast<double>(n);

  rep.cov.assign(k * k, 0.0);
  rep.cov_target.assign(k * k, 0.0);
  rep.cov_se.assign(k * k, 0.0);
  std::vector<double> m22(k * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      const double da = vectors[i][a] - mean[a];
      for (std::size_t b = a; b < k; ++b) {
        const double db = vectors[i][b] - mean[b];
        rep.cov[a * k + b] += da * db;
        m22[a * k + b] += da * da * db * db;
      }
    }
  }
  rep.cov_pass = true;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      const double cab = rep.cov[a * k + b] / static_cast<double>(n);
      const double m = m22[a * k + b] / static_cast<double>(n);
      const double se = std::sqrt(std::max(m - cab * cab, 0.0) /
                                  static_cast<double>(n));
      const double target = std::min(u_grid[a], u_grid[b]);
      rep.cov[a * k + b] = rep.cov[b * k + a] = cab;
      rep.cov_se[a * k + b] = rep.cov_se[b * k + a] = se;
      rep.cov_target[a * k + b] = rep.cov_target[b * k + a] = target;
      if (std::fabs(cab - target) > cov_tol_se * se) rep.cov_pass = false;
    }
  }
  rep.pass = rep.cov_pass;
  for (const auto& ks : rep.marginal_ks) rep.pass = rep.pass && ks.pass;
  return rep;
}

SandwichAudit sandwich_audit(std::span<const PathFunctionals> records) {
  SandwichAudit audit;
  for (const auto& r : records) {
    for (std::size_t j = 0; j < r.levels.size(); ++j) {
      if (!(r.tau[j] - 1 <= r.n_visits[j] && r.n_visits[j] <= r.rho[j])) {
        audit.ok = false;
        audit.violations.push_back({r.seed, j, r.levels[j]});
      }
    }
  }
  return audit;
}

std::vector<std::pair<double, double>> ecdf_points(
    std::span<const double> samples) {
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  std::vector<std::pair<double, double>> pts(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    pts[i] = {x[i], (static_cast<double>(i) + 1.0) / static_cast<double>(x.size())};
  }
  return pts;
}

}  // namespace gpwalk
