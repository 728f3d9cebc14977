#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gpwalk/increment_models.hpp"
#include "gpwalk/level_grid.hpp"

namespace gpwalk {

enum class HorizonMode { exact, budgeted, fixed };

// Stopping rule for the open-ended visit/exit counts.
//
//  exact     stop once walk + ess-inf(eta) clears the top level; valid when
//            eta is bounded below and xi is nonnegative, then no later T_n
//            can revisit the window and the counts are exact.
//  budgeted  stop once the analytic union bound on future visits drops below
//            miss_probability; the bound assumes the walk keeps at least a
//            drift_fraction * mu slope past the anchor step, and the engine
//            verifies that on the realized path, resuming and re-anchoring
//            whenever the slope check fails.
//  fixed     simulate a hard step budget; counts are flagged uncertified.
struct HorizonPolicy {
  HorizonMode mode = HorizonMode::exact;
  double miss_probability = 1e-9;
  double drift_fraction = 0.5;
  std::int64_t max_steps = 0;

  static HorizonPolicy exact_policy() { return {}; }
  static HorizonPolicy budgeted(double eps = 1e-9, double delta = 0.5) {
    HorizonPolicy p;
    p.mode = HorizonMode::budgeted;
    p.miss_probability = eps;
    p.drift_fraction = delta;
    return p;
  }
  static HorizonPolicy fixed(std::int64_t n_max) {
    HorizonPolicy p;
    p.mode = HorizonMode::fixed;
    p.max_steps = n_max;
    return p;
  }

  void validate(const JointIncrementModel& m) const;  // throws ConfigError
};

// Which functionals the caller needs. passage_only runs stop as soon as the
// first passage over the top level is observed (tau is exact the moment it is
// seen); visit and exit counts are then partial and flagged uncertified.
enum class FunctionalScope { full, passage_only };

// Per-replication record of tau(t), N(t), rho(t) over the level grid.
// `certified` refers to the visit/exit counts; tau is exact whenever the
// simulation ran to completion.
struct PathFunctionals {
  std::vector<double> levels;
  std::vector<std::int64_t> tau;
  std::vector<std::int64_t> n_visits;
  std::vector<std::int64_t> rho;
  std::int64_t steps_used = 0;
  bool certified = false;
  double miss_budget_spent = 0.0;
  std::uint64_t seed = 0;
};

struct RunningMaxSample {
  std::int64_t n = 0;
  double max_T = 0.0;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed horizon ran out before every level was passed; carries the partial
// record (tau entries still 0 where passage was not observed).
class HorizonExhausted : public SimulationError {
 public:
  HorizonExhausted(std::string msg, PathFunctionals partial_record)
      : SimulationError(std::move(msg)), partial(std::move(partial_record)) {}
  PathFunctionals partial;
};

enum class StopDecision { keep_going, stop };

// Union bound sum_{j>=0} P{eta <= gap - j*step} on future visits below the
// top level, assuming the walk gains at least `step` per future increment.
// Evaluated in closed form: finitely many terms when eta is bounded below, a
// geometric Gaussian-tail bound otherwise.
double horizon_miss_bound(const JointIncrementModel& m, double gap, double step);

// Instantaneous certificate for the current state (walk = S_n after n steps).
// The engine layers the forward drift verification on top of this.
StopDecision certify_stop(const HorizonPolicy& policy,
                          const JointIncrementModel& m, std::int64_t n,
                          double current_walk, double max_level);

// One pass over a single trajectory serves every level of the grid, so the
// joint law of (tau, N, rho) across levels is preserved.
PathFunctionals simulate_functionals(const JointIncrementModel& m,
                                     const LevelGrid& grid,
                                     const HorizonPolicy& policy,
                                     std::uint64_t seed,
                                     FunctionalScope scope = FunctionalScope::full);

RunningMaxSample simulate_running_max(const JointIncrementModel& m,
                                      std::int64_t n, std::uint64_t seed);

// Counting core: feed perturbed-walk values T_1, T_2, ... in order and read
// off tau/N/rho per level. Comparisons are exactly tau: T_n > t (strict),
// visits: T_n <= t; levels equal to atoms of discrete laws are legitimate.
class FunctionalAccumulator {
 public:
  explicit FunctionalAccumulator(const LevelGrid& grid);

  void observe(std::int64_t n, double t_value);
  bool all_passages_found() const { return next_tau_ == levels_->size(); }
  void fill(PathFunctionals& out) const;

 private:
  const std::vector<double>* levels_;
  std::vector<std::int64_t> tau_;
  std::vector<std::int64_t> visit_add_;   // suffix increments, keyed by first level index
  std::vector<std::int64_t> last_visit_;  // suffix last-visit step, same keying
  std::size_t next_tau_ = 0;
};

}  // namespace gpwalk
