#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "gpwalk/parallel.hpp"
#include "gpwalk/stat_verify.hpp"
#include "gpwalk/walk_engine.hpp"

using namespace gpwalk;

namespace {

JointIncrementModel model_of(MarginalSpec xi, MarginalSpec eta,
                             DependenceSpec dep = DependenceSpec::independent()) {
  return JointIncrementModel::make(std::move(xi), std::move(eta), std::move(dep));
}

using Triple = std::tuple<std::int64_t, std::int64_t, std::int64_t>;

// exhaustive oracle over eta in {lo, hi}^horizon with constant xi: weights the
// functionals of each outcome sequence by its probability
std::map<Triple, double> enumerate_joint(double xi_v, double lo, double p_lo,
                                         double hi, double level, int horizon) {
  std::map<Triple, double> pmf;
  const int total = 1 << horizon;
  for (int mask = 0; mask < total; ++mask) {
    double prob = 1.0;
    std::int64_t tau = 0, visits = 0, rho = 0;
    double walk = 0.0;
    for (int n = 1; n <= horizon; ++n) {
      const bool take_hi = (mask >> (n - 1)) & 1;
      prob *= take_hi ? 1.0 - p_lo : p_lo;
      const double t_val = walk + (take_hi ? hi : lo);
      if (tau == 0 && t_val > level) tau = n;
      if (t_val <= level) {
        ++visits;
        rho = n;
      }
      walk += xi_v;
    }
    REQUIRE(tau != 0);  // horizon must settle every sequence
    pmf[{tau, visits, rho}] += prob;
  }
  return pmf;
}

double tv_distance(const std::map<Triple, double>& a,
                   const std::map<Triple, double>& b) {
  double tv = 0.0;
  for (const auto& [k, p] : a) {
    const auto it = b.find(k);
    tv += std::fabs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, q] : b) {
    if (!a.count(k)) tv += q;
  }
  return 0.5 * tv;
}

}  // namespace

TEST_CASE("deterministic walk oracle: T_n = n-1") {
  const auto m = model_of(make_constant(1.0), make_constant(0.0));
  const LevelGrid grid({0.0, 3.5, 10.2});
  const auto r = simulate_functionals(m, grid, HorizonPolicy::exact_policy(), 1);
  CHECK(r.tau == std::vector<std::int64_t>{2, 5, 12});
  CHECK(r.n_visits == std::vector<std::int64_t>{1, 4, 11});
  CHECK(r.rho == std::vector<std::int64_t>{1, 4, 11});
  CHECK(r.certified);
  CHECK(r.miss_budget_spent == 0.0);
}

TEST_CASE("accumulator oracle: alternating perturbation") {
  // T = -1, 3, 3, 7, ... at level 3: tau=4, N=3, rho=3
  const LevelGrid grid({3.0});
  FunctionalAccumulator acc(grid);
  const double t_vals[] = {-1.0, 3.0, 3.0, 7.0};
  for (int n = 1; n <= 4; ++n) acc.observe(n, t_vals[n - 1]);
  CHECK(acc.all_passages_found());
  PathFunctionals r;
  acc.fill(r);
  CHECK(r.tau[0] == 4);
  CHECK(r.n_visits[0] == 3);
  CHECK(r.rho[0] == 3);
}

TEST_CASE("tau(2) law for xi=1, eta in {0,5}: enumeration vs simulation") {
  // T_n = n-1+eta_n; passage iff eta=5 or n >= 4, so
  // P{tau=1}=1/2, P{tau=2}=1/4, P{tau=3}=1/8, P{tau=4}=1/8
  const auto m = model_of(make_constant(1.0), make_two_point(0.0, 0.5, 5.0));
  const LevelGrid grid({2.0});
  std::map<std::int64_t, double> freq;
  const std::size_t reps = 100000;
  std::map<Triple, double> joint_freq;
  for (std::size_t i = 0; i < reps; ++i) {
    const auto r = simulate_functionals(m, grid, HorizonPolicy::exact_policy(),
                                        substream_key(2024, i));
    freq[r.tau[0]] += 1.0 / reps;
    joint_freq[{r.tau[0], r.n_visits[0], r.rho[0]}] += 1.0 / reps;
  }
  CHECK(freq[1] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(freq[2] == doctest::Approx(0.25).epsilon(0.04));
  CHECK(freq[3] == doctest::Approx(0.125).epsilon(0.08));
  CHECK(freq[4] == doctest::Approx(0.125).epsilon(0.08));

  const auto oracle = enumerate_joint(1.0, 0.0, 0.5, 5.0, 2.0, 12);
  CHECK(tv_distance(oracle, joint_freq) < 0.01);
}

TEST_CASE("running max oracles") {
  const auto flat = model_of(make_constant(1.0), make_constant(0.0));
  CHECK(simulate_running_max(flat, 10, 1).max_T == doctest::Approx(9.0));
  const auto down = model_of(make_constant(1.0), make_constant(-3.0));
  CHECK(simulate_running_max(down, 5, 1).max_T == doctest::Approx(1.0));
  const auto unif = model_of(make_constant(0.0), make_uniform(0.0, 1.0));
  const double mx = simulate_running_max(unif, 10000, 3).max_T;
  CHECK(mx > 0.995);
  CHECK(mx < 1.0);
}

TEST_CASE("certify_stop examples") {
  const auto m = model_of(make_exponential(1.0), make_exponential(1.0));
  const auto exact = HorizonPolicy::exact_policy();
  CHECK(certify_stop(exact, m, 10, 4.5, 4.0) == StopDecision::stop);
  CHECK(certify_stop(exact, m, 10, 3.5, 4.0) == StopDecision::keep_going);

  // exact mode is a configuration error when eta is unbounded below
  const auto mg = model_of(make_exponential(1.0), make_gaussian(0.0, 1.0));
  CHECK_THROWS_AS(exact.validate(mg), ConfigError);
  // ... and when xi can step backwards
  const auto mxneg = model_of(make_gaussian(1.0, 1.0), make_exponential(1.0));
  CHECK_THROWS_AS(exact.validate(mxneg), ConfigError);

  // gaussian tail union bound at 50 sigma past the level is far below 1e-9
  const auto budget = HorizonPolicy::budgeted(1e-9, 0.5);
  CHECK(horizon_miss_bound(mg, -50.0, 0.5) < 1e-9);
  CHECK(certify_stop(budget, mg, 100, 50.0, 0.0) == StopDecision::stop);
  CHECK(certify_stop(budget, mg, 100, -1.0, 0.0) == StopDecision::keep_going);
}

TEST_CASE("budgeted horizon certifies with tiny spent budget") {
  const auto m = model_of(make_exponential(1.0), make_gaussian(0.0, 1.0));
  const LevelGrid grid({20.0, 40.0});
  const auto p = HorizonPolicy::budgeted(1e-9, 0.5);
  const auto r = simulate_functionals(m, grid, p, 7);
  CHECK(r.certified);
  CHECK(r.miss_budget_spent <= 1e-9 * static_cast<double>(grid.size()));
  CHECK(r.miss_budget_spent > 0.0);
}

TEST_CASE("fixed horizon: exhaustion carries partial state") {
  const auto m = model_of(make_constant(1.0), make_constant(0.0));
  const LevelGrid grid({1e6});
  try {
    simulate_functionals(m, grid, HorizonPolicy::fixed(10), 1);
    FAIL("expected HorizonExhausted");
  } catch (const HorizonExhausted& e) {
    CHECK(e.partial.tau[0] == 0);
    CHECK(e.partial.steps_used == 10);
    CHECK(e.partial.n_visits[0] == 10);
  }
  // passage-only runs stop early and do not certify counts
  const LevelGrid low({3.0});
  const auto r = simulate_functionals(m, low, HorizonPolicy::fixed(100), 1,
                                      FunctionalScope::passage_only);
  CHECK(r.tau[0] == 5);
  CHECK(!r.certified);
  CHECK(r.steps_used == 5);
}

TEST_CASE("sandwich and level monotonicity over random models") {
  std::vector<JointIncrementModel> models = {
      model_of(make_exponential(1.0), make_exponential(1.0)),
      model_of(make_exponential(1.0), make_gaussian(0.0, 2.0)),
      model_of(make_constant(1.0), make_two_point(-2.0, 0.5, 6.0)),
      model_of(make_uniform(0.0, 2.0), make_shifted_pareto(0.5, 1.0, 0.0)),
      model_of(make_exponential(1.0), make_uniform(-4.0, 4.0),
               DependenceSpec::comonotone()),
  };
  const LevelGrid grid({2.0, 5.0, 11.0, 23.0});
  std::vector<PathFunctionals> records;
  for (const auto& m : models) {
    const bool exact_ok = m.eta_lower_bound.has_value();
    const auto policy =
        exact_ok ? HorizonPolicy::exact_policy() : HorizonPolicy::budgeted();
    for (std::uint64_t s = 0; s < 60; ++s) {
      const auto r = simulate_functionals(m, grid, policy, substream_key(55, s));
      records.push_back(r);
      for (std::size_t j = 1; j < grid.size(); ++j) {
        CHECK(r.tau[j] >= r.tau[j - 1]);
        CHECK(r.n_visits[j] >= r.n_visits[j - 1]);
        CHECK(r.rho[j] >= r.rho[j - 1]);
      }
    }
  }
  CHECK(sandwich_audit(records).ok);
}

TEST_CASE("determinism: same seed, same record; workers do not matter") {
  const auto m = model_of(make_exponential(1.0), make_gaussian(0.0, 1.0));
  const LevelGrid grid({5.0, 9.0});
  const auto p = HorizonPolicy::budgeted();
  const auto a = simulate_functionals(m, grid, p, 42);
  const auto b = simulate_functionals(m, grid, p, 42);
  CHECK(a.tau == b.tau);
  CHECK(a.n_visits == b.n_visits);
  CHECK(a.rho == b.rho);
  CHECK(a.steps_used == b.steps_used);
  CHECK(a.miss_budget_spent == b.miss_budget_spent);

  auto run_with = [&](unsigned workers) {
    return run_replications<std::int64_t>(64, workers, [&](std::size_t i) {
      return simulate_functionals(m, grid, p, substream_key(9, i)).tau[0];
    });
  };
  CHECK(run_with(1) == run_with(3));
}
