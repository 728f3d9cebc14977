#include "gpwalk/walk_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpwalk/normal.hpp"

namespace gpwalk {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Point below which P{eta <= x} is (numerically) zero: the essential infimum
// when eta is bounded below, a 40-sigma cutoff for the Gaussian family.
double eta_numeric_floor(const JointIncrementModel& m) {
  if (m.eta_lower_bound) return *m.eta_lower_bound;
  const auto& g = std::get<Gaussian>(m.eta);
  return g.mean - 40.0 * g.sd;
}
}  // namespace

LevelGrid::LevelGrid(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw ConfigError("level grid must be nonempty");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!std::isfinite(levels_[i])) throw ConfigError("level grid must be finite");
    if (i > 0 && !(levels_[i - 1] < levels_[i]))
      throw ConfigError("level grid must be strictly increasing");
  }
}

LevelGrid LevelGrid::geometric(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo) || count < 2)
    throw ConfigError("geometric grid needs 0 < lo < hi and count >= 2");
  std::vector<double> v(count);
  const double r = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    v[i] = lo * std::exp(r * static_cast<double>(i));
  v.front() = lo;
  v.back() = hi;
  return LevelGrid(std::move(v));
}

void HorizonPolicy::validate(const JointIncrementModel& m) const {
  switch (mode) {
    case HorizonMode::exact: {
      if (!m.eta_lower_bound)
        throw ConfigError(
            "exact horizon requires eta bounded below (no essential infimum)");
      const auto xi_inf = essential_infimum(m.xi);
      if (!xi_inf || *xi_inf < 0.0)
        throw ConfigError(
            "exact horizon requires nonnegative xi increments; use the "
            "budgeted policy instead");
      if (!(m.mu > 0.0)) throw ConfigError("exact horizon requires mu > 0");
      break;
    }
    case HorizonMode::budgeted: {
      if (!(miss_probability > 0.0 && miss_probability < 1.0))
        throw ConfigError("budgeted horizon: miss probability must lie in (0,1)");
      if (!(drift_fraction > 0.0 && drift_fraction < 1.0))
        throw ConfigError("budgeted horizon: drift fraction must lie in (0,1)");
      if (!(m.mu > 0.0)) throw ConfigError("budgeted horizon requires mu > 0");
      if (!m.eta_lower_bound && !std::holds_alternative<Gaussian>(m.eta))
        throw ConfigError(
            "budgeted horizon: eta family admits no analytic lower-tail bound");
      break;
    }
    case HorizonMode::fixed: {
      if (max_steps < 1) throw ConfigError("fixed horizon needs max_steps >= 1");
      break;
    }
  }
}

double horizon_miss_bound(const JointIncrementModel& m, double gap,
                          double step) {
  if (!(step > 0.0)) throw ConfigError("horizon_miss_bound: step must be > 0");
  if (m.eta_lower_bound) {
    const double lo = *m.eta_lower_bound;
    if (gap < lo) return 0.0;
    double total = 0.0;
    const double jmax = std::floor((gap - lo) / step);
    for (double j = 0.0; j <= jmax; j += 1.0) {
      total += cdf(m.eta, gap - j * step);
      if (total > 1.0) return total;  // useless as a certificate already
    }
    return total;
  }
  // Gaussian eta: Phi(z0) + sum_{j>=1} Phi(z0 - j*d) with the half-Gaussian
  // bound Phi(z) <= exp(-z^2/2)/2 for z < 0, summed geometrically.
  const auto& g = std::get<Gaussian>(m.eta);
  const double z0 = (gap - g.mean) / g.sd;
  if (z0 >= -1.0) return kInf;
  const double d = step / g.sd;
  const double r = std::exp(-d * (-z0));
  return norm_cdf(z0) + 0.5 * std::exp(-0.5 * z0 * z0) * r / (1.0 - r);
}

StopDecision certify_stop(const HorizonPolicy& policy,
                          const JointIncrementModel& m, std::int64_t n,
                          double current_walk, double max_level) {
  switch (policy.mode) {
    case HorizonMode::exact:
      return current_walk + *m.eta_lower_bound > max_level ? StopDecision::stop
                                                           : StopDecision::keep_going;
    case HorizonMode::budgeted: {
      const double bound = horizon_miss_bound(m, max_level - current_walk,
                                              policy.drift_fraction * m.mu);
      return bound <= policy.miss_probability ? StopDecision::stop
                                              : StopDecision::keep_going;
    }
    case HorizonMode::fixed:
      return n >= policy.max_steps ? StopDecision::stop : StopDecision::keep_going;
  }
  return StopDecision::keep_going;
}

FunctionalAccumulator::FunctionalAccumulator(const LevelGrid& grid)
    : levels_(&grid.levels()),
      tau_(grid.size(), 0),
      visit_add_(grid.size(), 0),
      last_visit_(grid.size(), 0) {}

void FunctionalAccumulator::observe(std::int64_t n, double t_value) {
  const auto& lv = *levels_;
  while (next_tau_ < lv.size() && t_value > lv[next_tau_]) {
    tau_[next_tau_++] = n;
  }
  if (t_value <= lv.back()) {
    const std::size_t idx =
        std::lower_bound(lv.begin(), lv.end(), t_value) - lv.begin();
    ++visit_add_[idx];
    last_visit_[idx] = n;
  }
}

void FunctionalAccumulator::fill(PathFunctionals& out) const {
  const std::size_t m = levels_->size();
  out.levels = *levels_;
  out.tau = tau_;
  out.n_visits.assign(m, 0);
  out.rho.assign(m, 0);
  std::int64_t visits = 0;
  std::int64_t last = 0;
  for (std::size_t i = 0; i < m; ++i) {
    visits += visit_add_[i];
    last = std::max(last, last_visit_[i]);
    out.n_visits[i] = visits;
    out.rho[i] = last;
  }
}

PathFunctionals simulate_functionals(const JointIncrementModel& m,
                                     const LevelGrid& grid,
                                     const HorizonPolicy& policy,
                                     std::uint64_t seed,
                                     FunctionalScope scope) {
  policy.validate(m);
  if (policy.mode != HorizonMode::fixed) {
    if (!(m.mu > 0.0))
      throw ConfigError("certified horizons require mu > 0; use a fixed horizon");
    if (scope == FunctionalScope::full &&
        m.eta_minus_tail.cls != TailClass::integrable)
      throw ConfigError(
          "visit/exit certification requires an integrable eta minus tail");
  }

  SplitMix64 rng(seed);
  const PairSampler draw(m);
  FunctionalAccumulator acc(grid);
  const double t_max = grid.max_level();

  double walk = 0.0;  // S_{n-1} at the top of the loop body
  std::int64_t n = 0;
  bool certified = false;
  double spent = 0.0;

  // budgeted-mode anchor: certificate taken at (anchor_n, anchor_walk) and
  // verified forward until the residual terms vanish
  bool anchored = false;
  std::int64_t anchor_n = 0;
  std::int64_t finish_n = 0;
  double anchor_walk = 0.0;
  double anchor_bound = 0.0;
  const double step_drift =
      policy.mode == HorizonMode::budgeted ? policy.drift_fraction * m.mu : 0.0;
  const double floor_eff =
      policy.mode == HorizonMode::budgeted ? eta_numeric_floor(m) : 0.0;

  for (;;) {
    ++n;
    double xi, eta;
    draw(rng, xi, eta);
    acc.observe(n, walk + eta);
    walk += xi;

    if (policy.mode == HorizonMode::fixed) {
      if (scope == FunctionalScope::passage_only && acc.all_passages_found())
        break;
      if (n >= policy.max_steps) {
        if (!acc.all_passages_found()) {
          PathFunctionals partial;
          acc.fill(partial);
          partial.steps_used = n;
          partial.seed = seed;
          throw HorizonExhausted(
              "fixed horizon of " + std::to_string(policy.max_steps) +
                  " steps exhausted before every level was passed",
              std::move(partial));
        }
        break;
      }
      continue;
    }

    if (!acc.all_passages_found()) continue;
    if (scope == FunctionalScope::passage_only) break;

    if (policy.mode == HorizonMode::exact) {
      if (walk + *m.eta_lower_bound > t_max) {
        certified = true;
        break;
      }
      continue;
    }

    // budgeted
    if (anchored) {
      if (walk < anchor_walk +
                     static_cast<double>(n - anchor_n) * step_drift) {
        anchored = false;  // realized drift fell below the certificate's line
      } else if (n >= finish_n) {
        certified = true;
        spent = anchor_bound;
        break;
      }
    }
    if (!anchored) {
      const double bound = horizon_miss_bound(m, t_max - walk, step_drift);
      if (bound <= policy.miss_probability) {
        anchored = true;
        anchor_n = n;
        anchor_walk = walk;
        anchor_bound = bound;
        const double span = (t_max - walk) - floor_eff;
        finish_n =
            span <= 0.0
                ? n
                : n + static_cast<std::int64_t>(std::ceil(span / step_drift));
        if (n >= finish_n) {
          certified = true;
          spent = anchor_bound;
          break;
        }
      }
    }
  }

  PathFunctionals out;
  acc.fill(out);
  out.steps_used = n;
  out.certified = certified && scope == FunctionalScope::full;
  out.miss_budget_spent = spent;
  out.seed = seed;
  return out;
}

RunningMaxSample simulate_running_max(const JointIncrementModel& m,
                                      std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("simulate_running_max: n must be >= 1");
  SplitMix64 rng(seed);
  const PairSampler draw(m);
  double walk = 0.0;
  double best = -kInf;
  for (std::int64_t k = 0; k < n; ++k) {
    double xi, eta;
    draw(rng, xi, eta);
    best = std::max(best, walk + eta);
    walk += xi;
  }
  return RunningMaxSample{n, best};
}

}  // namespace gpwalk
