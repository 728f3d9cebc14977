// Acceptance suite: runs every verification scenario end to end and prints
// one pass/fail line per criterion. Exit status 0 iff all pass.
//
//   acceptance_suite <path-to-gpwalk-cli>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gpwalk/experiment.hpp"
#include "gpwalk/limit_processes.hpp"
#include "gpwalk/parallel.hpp"
#include "gpwalk/stat_verify.hpp"

using namespace gpwalk;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSuiteSeed = 424243;

struct Suite {
  int failures = 0;
  std::size_t audited_records = 0;
  std::size_t sandwich_violations = 0;
  std::string cli;
  unsigned workers = default_worker_count();

  void line(const char* id, bool pass, const std::string& detail) {
    const auto now = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(now - mark).count();
    std::printf("[%s] %-3s %s (%.1f s)\n", pass ? "PASS" : "FAIL", id,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
    mark = now;
  }

  void audit(std::span<const PathFunctionals> records) {
    const auto a = sandwich_audit(records);
    audited_records += records.size();
    sandwich_violations += a.violations.size();
  }

  // folds an experiment run's own sandwich row into the global tally
  RunReport run_cfg(ExperimentConfig cfg, std::size_t record_count) {
    validate_config(cfg);
    RunReport rep = run_experiment(cfg, workers);
    for (const auto& c : rep.checks) {
      if (c.name == "sandwich_audit") {
        audited_records += record_count;
        sandwich_violations += static_cast<std::size_t>(c.statistic);
      }
    }
    return rep;
  }

  std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();
};

JointIncrementModel model_of(MarginalSpec xi, MarginalSpec eta) {
  return JointIncrementModel::make(std::move(xi), std::move(eta),
                                   DependenceSpec::independent());
}

const CheckRow* find_row(const RunReport& rep, const std::string& name) {
  for (const auto& c : rep.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::uint64_t seed_for(int criterion) {
  return substream_key(kSuiteSeed, static_cast<std::uint64_t>(criterion));
}

// ----- criteria ------------------------------------------------------------

void c2_deterministic_oracle(Suite& s) {
  const auto m = model_of(make_constant(1.0), make_constant(0.0));
  const LevelGrid grid({0.0, 3.5, 10.2});
  const auto r = simulate_functionals(m, grid, HorizonPolicy::exact_policy(), 1);
  s.audit(std::vector<PathFunctionals>{r});
  const bool pass = r.tau == std::vector<std::int64_t>{2, 5, 12} &&
                    r.n_visits == std::vector<std::int64_t>{1, 4, 11} &&
                    r.rho == std::vector<std::int64_t>{1, 4, 11};
  s.line("C2", pass,
         "deterministic walk: (tau,N,rho) at levels {0, 3.5, 10.2} = "
         "(2,1,1), (5,4,4), (12,11,11)");
}

void c3_enumeration_oracle(Suite& s) {
  const auto m = model_of(make_constant(1.0), make_two_point(0.0, 0.5, 5.0));
  const LevelGrid grid({2.0});
  const std::size_t reps = 100000;
  const std::uint64_t master = seed_for(3);
  const auto records = run_replications<PathFunctionals>(
      reps, s.workers, [&](std::size_t i) {
        return simulate_functionals(m, grid, HorizonPolicy::exact_policy(),
                                    substream_key(master, i));
      });
  s.audit(records);
  std::map<std::int64_t, double> freq;
  for (const auto& r : records) freq[r.tau[0]] += 1.0 / static_cast<double>(reps);
  const std::map<std::int64_t, double> exact{{1, 0.5}, {2, 0.25}, {3, 0.125}, {4, 0.125}};
  double tv = 0.0;
  for (const auto& [k, p] : exact) tv += std::fabs(freq[k] - p);
  for (const auto& [k, p] : freq)
    if (!exact.count(k)) tv += p;
  tv *= 0.5;
  s.line("C3", tv <= 0.01,
         "tau(2) law vs exhaustive enumeration: TV = " + fmt(tv) + " <= 0.01");
}

void c4_strong_lln(Suite& s) {
  const auto m = model_of(make_exponential(1.0), make_exponential(1.0));
  const LevelGrid grid = LevelGrid::geometric(100.0, 10000.0, 5);
  const std::uint64_t master = seed_for(4);
  const auto records = run_replications<PathFunctionals>(
      2000, s.workers, [&](std::size_t i) {
        return simulate_functionals(m, grid, HorizonPolicy::exact_policy(),
                                    substream_key(master, i));
      });
  s.audit(records);
  const auto tau = lln_diagnostic(records, WalkFunctional::first_passage, 1.0,
                                  LLNMode::strong_proxy);
  const auto vis =
      lln_diagnostic(records, WalkFunctional::visits, 1.0, LLNMode::strong_proxy);
  const auto rho = lln_diagnostic(records, WalkFunctional::last_exit, 1.0,
                                  LLNMode::strong_proxy);
  const double worst =
      std::max({tau.fail_fraction, vis.fail_fraction, rho.fail_fraction});
  s.line("C4", tau.pass && vis.pass && rho.pass,
         "strong LLN proxy for tau, N, rho at delta 5%: worst failure "
         "fraction " + fmt(worst) + " <= 0.02");
}

void c5_weak_lln_failure(Suite& s) {
  const auto m = model_of(make_exponential(1.0), make_shifted_pareto(1, 1, 0));
  const LevelGrid grid = LevelGrid::geometric(100.0, 10000.0, 5);
  const std::uint64_t master = seed_for(5);
  const auto records = run_replications<PathFunctionals>(
      2000, s.workers, [&](std::size_t i) {
        return simulate_functionals(m, grid, HorizonPolicy::exact_policy(),
                                    substream_key(master, i),
                                    FunctionalScope::passage_only);
      });
  s.audit(records);
  const auto diag = lln_diagnostic(records, WalkFunctional::first_passage, 1.0,
                                   LLNMode::weak);
  s.line("C5", !diag.pass,
         "boundary tail breaks the weak LLN as predicted: diagnostic fail "
         "fraction " + fmt(diag.fail_fraction) + " (expected to reject)");
}

ExperimentConfig flt_config(MarginalSpec xi, double t, std::size_t reps,
                            std::uint64_t master, HorizonPolicy policy,
                            bool policy_set) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::flt_boundary;
  cfg.model = JointIncrementModel::make(std::move(xi),
                                        make_shifted_pareto(1.0, 1.0, 0.0),
                                        DependenceSpec::independent());
  cfg.t = t;
  cfg.u_grid = {1.0};
  cfg.replications = reps;
  cfg.master_seed = master;
  cfg.policy = policy;
  cfg.policy_given = policy_set;
  return cfg;
}

void c6_boundary_flt(Suite& s) {
  const double t = 1e4;
  const std::size_t reps = 20000;
  bool pass = true;
  std::string detail = "tau(t)/t vs the three marginal branches:";

  {
    auto cfg = flt_config(make_exponential(1.0), t, reps, seed_for(61),
                          HorizonPolicy::exact_policy(), true);
    const auto rep = s.run_cfg(cfg, reps);
    const auto* row = find_row(rep, "ks_tau_over_t_u1");
    pass = pass && row && row->pass;
    detail += " mu=1 KS=" + fmt(row ? row->statistic : 1.0);
  }
  {
    auto cfg = flt_config(make_gaussian(-1.0, 1.0), t, reps, seed_for(62),
                          HorizonPolicy::fixed(static_cast<std::int64_t>(1000 * t)),
                          true);
    const auto rep = s.run_cfg(cfg, reps);
    const auto* row = find_row(rep, "ks_tau_over_t_u1");
    pass = pass && row && row->pass;
    detail += " mu=-1 KS=" + fmt(row ? row->statistic : 1.0);
  }
  {
    auto cfg = flt_config(make_gaussian(0.0, 1.0), t, reps, seed_for(63),
                          HorizonPolicy::fixed(static_cast<std::int64_t>(40 * t)),
                          true);
    const auto rep = s.run_cfg(cfg, reps);
    const auto* row = find_row(rep, "ks_tau_over_t_u1");
    pass = pass && row && row->pass;
    detail += " mu=0 KS=" + fmt(row ? row->statistic : 1.0);
  }
  detail += " (critical " + fmt(ks_critical(reps, 0.01)) + ")";
  s.line("C6", pass, detail);
}

void c7_regvar_flt(Suite& s) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::flt_regvar;
  cfg.model = JointIncrementModel::make(make_exponential(1.0),
                                        make_shifted_pareto(0.5, 1.0, 0.0),
                                        DependenceSpec::independent());
  cfg.t = 1e6;
  cfg.u_grid = {1.0};
  cfg.replications = 20000;
  cfg.master_seed = seed_for(7);
  cfg.policy = HorizonPolicy::exact_policy();
  cfg.policy_given = true;
  const auto rep = s.run_cfg(cfg, cfg.replications);
  const auto* row = find_row(rep, "ks_tau_tail_u1");
  s.line("C7", row && row->pass,
         "P{eta>t} tau(t) vs Exp(1): KS = " + fmt(row ? row->statistic : 1.0) +
             " < " + fmt(row ? row->threshold : 0.0));
}

void c8_limit_self_consistency(Suite& s) {
  const std::size_t draws = 100000;
  ExperimentConfig ycfg;
  ycfg.kind = ExperimentKind::limit_sample;
  ycfg.limit.kind = "inverse_extremal";
  ycfg.limit.alpha = 0.5;
  ycfg.limit.u = 1.0;
  ycfg.limit.draws = draws;
  ycfg.master_seed = seed_for(81);
  const auto yrep = s.run_cfg(ycfg, 0);
  const auto* yrow = find_row(yrep, "ks_inverse_record_y");

  ExperimentConfig bcfg;
  bcfg.kind = ExperimentKind::limit_sample;
  bcfg.limit.kind = "beta";
  bcfg.limit.mu = 1.0;
  bcfg.limit.c = 1.0;
  bcfg.limit.u = 1.0;
  bcfg.limit.draws = draws;
  bcfg.master_seed = seed_for(82);
  const auto brep = s.run_cfg(bcfg, 0);
  const auto* brow = find_row(brep, "ks_inverse_record_beta");

  const bool pass = yrow && yrow->pass && brow && brow->pass;
  s.line("C8", pass,
         "inverse record vs closed forms: exponential KS = " +
             fmt(yrow ? yrow->statistic : 1.0) + ", beta KS = " +
             fmt(brow ? brow->statistic : 1.0) + " (critical " +
             fmt(ks_critical(draws, 0.01)) + ")");
}

void c9_brownian_fdd(Suite& s) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::clt_joint;
  cfg.model = JointIncrementModel::make(make_exponential(1.0),
                                        make_gaussian(0.0, 1.0),
                                        DependenceSpec::independent());
  cfg.t = 1e4;
  cfg.u_grid = {0.5, 1.0, 2.0};
  cfg.replications = 20000;
  cfg.master_seed = seed_for(9);
  cfg.policy = HorizonPolicy::budgeted(1e-9, 0.5);
  cfg.policy_given = true;
  const auto rep = s.run_cfg(cfg, cfg.replications);
  const auto* spread = find_row(rep, "joint_spread_sd_u1");
  s.line("C9", rep.pass,
         "Brownian fdd for tau and rho (marginal KS + covariance) and joint "
         "triple spread sd = " + fmt(spread ? spread->statistic : 1.0) +
             " < 0.05");
}

void c10_two_term_centering(Suite& s) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::clt_visits_centered;
  cfg.model = JointIncrementModel::make(make_exponential(1.0),
                                        make_shifted_pareto(0.4, 1.0, 0.0),
                                        DependenceSpec::independent());
  cfg.t = 1e4;
  cfg.u_grid = {1.0};
  cfg.replications = 20000;
  cfg.master_seed = seed_for(10);
  cfg.policy = HorizonPolicy::exact_policy();
  cfg.policy_given = true;
  const auto rep = s.run_cfg(cfg, cfg.replications);
  const auto* two = find_row(rep, "ks_visits_two_term_u1");
  const auto* one = find_row(rep, "ks_visits_single_term_fails_u1");
  const bool pass = two && two->pass && one && one->pass;
  s.line("C10", pass,
         "two-term centering: KS = " + fmt(two ? two->statistic : 1.0) +
             " passes; single-term KS = " + fmt(one ? one->statistic : 0.0) +
             " > 3x critical as required");
}

void c11_null_calibration(Suite& s) {
  SplitMix64 rng(seed_for(11));
  const auto exp_cdf = [](double x) { return x < 0 ? 0.0 : -std::expm1(-x); };
  int rejections = 0;
  std::vector<double> x(2000);
  for (int run = 0; run < 200; ++run) {
    for (auto& v : x) v = -std::log1p(-rng.next_unit());
    if (!ks_one_sample(x, exp_cdf).pass) ++rejections;
  }
  const double rate = rejections / 200.0;

  const std::vector<double> grid{0.5, 1.0, 2.0};
  int fdd_passes = 0;
  std::vector<std::vector<double>> rows(2000);
  for (int run = 0; run < 100; ++run) {
    for (auto& r : rows) r = gaussian_fdd_reference(grid, rng);
    if (fdd_gaussian_check(rows, grid).pass) ++fdd_passes;
  }
  const bool pass = rate <= 0.04 && fdd_passes >= 95;
  s.line("C11", pass,
         "null calibration: KS rejection rate " + fmt(rate) +
             " in [0, 0.04], fdd reference passes " +
             std::to_string(fdd_passes) + "/100 >= 95");
}

void c12_reproducibility(Suite& s) {
  const fs::path tmp = fs::current_path() / "acceptance_c12";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const fs::path cfg_path = tmp / "config.json";
  {
    std::ofstream out(cfg_path);
    out << R"({
  "experiment": "flt_boundary",
  "model": {
    "xi": {"family": "exponential", "rate": 1.0},
    "eta": {"family": "shifted_pareto", "alpha": 1.0, "scale": 1.0, "shift": 0.0}
  },
  "t": 1000.0,
  "u_grid": [1.0],
  "replications": 2000,
  "master_seed": 31415,
  "policy": {"mode": "exact"}
})";
  }
  const fs::path out1 = tmp / "out1";
  const fs::path out8 = tmp / "out8";
  auto run_cli = [&](const fs::path& out, int workers) {
    const std::string cmd = s.cli + " run " + cfg_path.string() + " --workers " +
                            std::to_string(workers) + " --out " + out.string() +
                            " > " + (tmp / "cli_log.txt").string() + " 2>&1";
    return std::system(cmd.c_str());
  };
  const int rc1 = run_cli(out1, 1);
  const int rc8 = run_cli(out8, 8);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool identical = rc1 == 0 && rc8 == 0;
  std::size_t files = 0;
  if (identical) {
    for (const auto& entry : fs::directory_iterator(out1)) {
      ++files;
      const auto other = out8 / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        identical = false;
        break;
      }
    }
    identical = identical && files > 0;
  }
  s.line("C12", identical,
         "byte-identical report.json and CSVs across 1 vs 8 workers (" +
             std::to_string(files) + " files compared)");
  fs::remove_all(tmp);
}

}  // namespace

int main(int argc, char** argv) {
  Suite s;
  s.cli = argc > 1 ? argv[1] : "gpwalk";
  std::printf("acceptance suite: seed %llu, %u workers\n",
              static_cast<unsigned long long>(kSuiteSeed), s.workers);

  struct Item {
    const char* id;
    void (*fn)(Suite&);
  };
  const Item items[] = {
      {"C2", c2_deterministic_oracle}, {"C3", c3_enumeration_oracle},
      {"C4", c4_strong_lln},           {"C5", c5_weak_lln_failure},
      {"C6", c6_boundary_flt},         {"C7", c7_regvar_flt},
      {"C8", c8_limit_self_consistency}, {"C9", c9_brownian_fdd},
      {"C10", c10_two_term_centering}, {"C11", c11_null_calibration},
      {"C12", c12_reproducibility},
  };
  for (const auto& item : items) {
    try {
      item.fn(s);
    } catch (const std::exception& e) {
      s.line(item.id, false, std::string("exception: ") + e.what());
    }
  }

  // C1 aggregates the inline audits of every run above
  s.line("C1", s.sandwich_violations == 0 && s.audited_records > 0,
         "sandwich tau-1 <= N <= rho held on " +
             std::to_string(s.audited_records) + " replications, " +
             std::to_string(s.sandwich_violations) + " violations");

  std::printf("%d criterion(s) failed\n", s.failures);
  return s.failures == 0 ? 0 : 1;
}
