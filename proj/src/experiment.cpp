#include "gpwalk/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "gpwalk/limit_processes.hpp"
#include "gpwalk/parallel.hpp"

namespace gpwalk {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json marginal_to_json(const MarginalSpec& m) {
  json j;
  std::visit(
      [&j](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          j = {{"family", "constant"}, {"value", f.value}};
        } else if constexpr (std::is_same_v<T, Exponential>) {
          j = {{"family", "exponential"}, {"rate", f.rate}};
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          j = {{"family", "gaussian"}, {"mean", f.mean}, {"sd", f.sd}};
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          j = {{"family", "shifted_pareto"},
               {"alpha", f.alpha},
               {"scale", f.scale},
               {"shift", f.shift}};
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          j = {{"family", "two_point"}, {"v1", f.lo}, {"p1", f.p_lo}, {"v2", f.hi}};
        } else if constexpr (std::is_same_v<T, Uniform>) {
          j = {{"family", "uniform"}, {"lo", f.lo}, {"hi", f.hi}};
        }
      },
      m);
  return j;
}

double need_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError(where + ": missing numeric field '" + key + "'");
  return j[key].get<double>();
}

MarginalSpec marginal_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("family"))
    throw ConfigError(where + ": expected an object with a 'family' field");
  const std::string fam = j["family"].get<std::string>();
  if (fam == "constant") return make_constant(need_number(j, "value", where));
  if (fam == "exponential") return make_exponential(need_number(j, "rate", where));
  if (fam == "gaussian")
    return make_gaussian(need_number(j, "mean", where), need_number(j, "sd", where));
  if (fam == "shifted_pareto")
    return make_shifted_pareto(need_number(j, "alpha", where),
                               need_number(j, "scale", where),
                               need_number(j, "shift", where));
  if (fam == "two_point")
    return make_two_point(need_number(j, "v1", where), need_number(j, "p1", where),
                          need_number(j, "v2", where));
  if (fam == "uniform")
    return make_uniform(need_number(j, "lo", where), need_number(j, "hi", where));
  throw ConfigError(where + ": unknown family '" + fam + "'");
}

json dependence_to_json(const DependenceSpec& d) {
  switch (d.mode) {
    case DependenceMode::independent:
      return {{"mode", "independent"}};
    case DependenceMode::comonotone:
      return {{"mode", "comonotone"}};
    case DependenceMode::functional:
      return {{"mode", "functional"},
              {"a", d.coeff_a},
              {"b", d.coeff_b},
              {"noise", marginal_to_json(*d.noise)}};
  }
  return {};
}

DependenceSpec dependence_from_json(const json& j) {
  if (j.is_null()) return DependenceSpec::independent();
  const std::string mode = j.value("mode", "independent");
  if (mode == "independent") return DependenceSpec::independent();
  if (mode == "comonotone") return DependenceSpec::comonotone();
  if (mode == "functional") {
    if (!j.contains("noise"))
      throw ConfigError("dependence: functional mode needs a 'noise' marginal");
    return DependenceSpec::functional(need_number(j, "a", "dependence"),
                                      need_number(j, "b", "dependence"),
                                      marginal_from_json(j["noise"], "noise"));
  }
  throw ConfigError("dependence: unknown mode '" + mode + "'");
}

json policy_to_json(const HorizonPolicy& p) {
  switch (p.mode) {
    case HorizonMode::exact:
      return {{"mode", "exact"}};
    case HorizonMode::budgeted:
      return {{"mode", "budgeted"},
              {"miss_probability", p.miss_probability},
              {"drift_fraction", p.drift_fraction}};
    case HorizonMode::fixed:
      return {{"mode", "fixed"}, {"n_max", p.max_steps}};
  }
  return {};
}

HorizonPolicy policy_from_json(const json& j) {
  const std::string mode = j.value("mode", "exact");
  if (mode == "exact") return HorizonPolicy::exact_policy();
  if (mode == "budgeted")
    return HorizonPolicy::budgeted(j.value("miss_probability", 1e-9),
                                   j.value("drift_fraction", 0.5));
  if (mode == "fixed") {
    if (!j.contains("n_max"))
      throw ConfigError("policy: fixed mode needs 'n_max'");
    return HorizonPolicy::fixed(j["n_max"].get<std::int64_t>());
  }
  throw ConfigError("policy: unknown mode '" + mode + "'");
}

// ---------------------------------------------------------------------------
// experiment drivers

struct Workspace {
  const ExperimentConfig* cfg;
  unsigned workers;
  RunReport* report;
};

void add_check(RunReport& r, std::string name, double stat, double thr, bool pass) {
  r.checks.push_back({std::move(name), stat, thr, pass});
}

std::string ecdf_csv(std::span<const double> samples,
                     const std::function<double(double)>& cdf,
                     const std::string& label) {
  std::string out = "# columns: " + label + ", ecdf, analytic_cdf\n";
  for (const auto& [x, p] : ecdf_points(samples)) {
    out += fmt17(x);
    out += ',';
    out += fmt17(p);
    out += ',';
    out += fmt17(cdf(x));
    out += '\n';
  }
  return out;
}

std::string u_tag(double u) {
  std::string s = fmt17(u);
  for (char& ch : s) {
    if (ch == '.') ch = 'p';
    if (ch == '-') ch = 'm';
  }
  return s;
}

std::vector<PathFunctionals> run_paths(const Workspace& ws, const LevelGrid& grid,
                                       FunctionalScope scope) {
  const auto& cfg = *ws.cfg;
  return run_replications<PathFunctionals>(
      cfg.replications, ws.workers, [&](std::size_t i) {
        return simulate_functionals(cfg.model, grid, cfg.policy,
                                    substream_key(cfg.master_seed, i), scope);
      });
}

// Fixed-horizon runs may exhaust the budget on heavy-tailed paths; those
// replications carry no certified passage time and are skipped.
std::vector<std::optional<PathFunctionals>> run_paths_censored(
    const Workspace& ws, const LevelGrid& grid, FunctionalScope scope) {
  const auto& cfg = *ws.cfg;
  return run_replications<std::optional<PathFunctionals>>(
      cfg.replications, ws.workers,
      [&](std::size_t i) -> std::optional<PathFunctionals> {
        try {
          return simulate_functionals(cfg.model, grid, cfg.policy,
                                      substream_key(cfg.master_seed, i), scope);
        } catch (const HorizonExhausted&) {
          return std::nullopt;
        }
      });
}

void audit_and_report(RunReport& rep, std::span<const PathFunctionals> records) {
  const auto audit = sandwich_audit(records);
  add_check(rep, "sandwich_audit",
            static_cast<double>(audit.violations.size()), 0.0, audit.ok);
}

std::string ratio_trace_csv(const LLNReport& d) {
  std::string out = "# columns: t, mean_ratio, dev_q50, dev_q95, target\n";
  for (std::size_t j = 0; j < d.t_grid.size(); ++j) {
    out += fmt17(d.t_grid[j]) + "," + fmt17(d.ratio_mean[j]) + "," +
           fmt17(d.dev_q50[j]) + "," + fmt17(d.dev_q95[j]) + "," +
           fmt17(d.target) + "\n";
  }
  return out;
}

void run_lln(const Workspace& ws) {
  const auto& cfg = *ws.cfg;
  auto& rep = *ws.report;
  const LevelGrid grid = LevelGrid::geometric(cfg.t / 100.0, cfg.t, 5);
  const auto records = run_paths(ws, grid, FunctionalScope::full);
  const double target = 1.0 / cfg.model.mu;

  auto emit = [&](WalkFunctional f, LLNMode mode, const std::string& name,
                  const std::string& trace) {
    const LLNReport d = lln_diagnostic(records, f, target, mode);
    add_check(rep, name, d.fail_fraction, d.fail_threshold, d.pass);
    rep.csv_files.emplace_back(trace, ratio_trace_csv(d));
  };
  switch (cfg.kind) {
    case ExperimentKind::lln_weak:
      emit(WalkFunctional::first_passage, LLNMode::weak, "lln_weak_tau",
           "ratio_trace_tau.csv");
      break;
    case ExperimentKind::lln_strong:
      emit(WalkFunctional::first_passage, LLNMode::strong_proxy, "lln_strong_tau",
           "ratio_trace_tau.csv");
      break;
    default:
      emit(WalkFunctional::visits, LLNMode::strong_proxy, "lln_strong_visits",
           "ratio_trace_visits.csv");
      emit(WalkFunctional::last_exit, LLNMode::strong_proxy,
           "lln_strong_last_exit", "ratio_trace_last_exit.csv");
      break;
  }
  audit_and_report(rep, records);
}

void run_flt(const Workspace& ws) {
  const auto& cfg = *ws.cfg;
  auto& rep = *ws.report;
  std::vector<double> levels;
  for (double u : cfg.u_grid) levels.push_back(u * cfg.t);
  const LevelGrid grid{std::move(levels)};

  const auto maybe = run_paths_censored(ws, grid, FunctionalScope::passage_only);
  std::vector<const PathFunctionals*> found;
  for (const auto& r : maybe) {
    if (r) found.push_back(&*r);
  }
  const double found_fraction =
      static_cast<double>(found.size()) / static_cast<double>(maybe.size());
  if (cfg.policy.mode == HorizonMode::fixed) {
    add_check(rep, "horizon_found_fraction", found_fraction, 0.5,
              found_fraction > 0.5);
  }

  const bool boundary = cfg.kind == ExperimentKind::flt_boundary;
  const double scale_factor =
      boundary ? 1.0 / cfg.t : tail_eta(cfg.model, cfg.t);
  for (std::size_t j = 0; j < cfg.u_grid.size(); ++j) {
    const double u = cfg.u_grid[j];
    std::vector<double> samples;
    samples.reserve(found.size());
    for (const auto* r : found)
      samples.push_back(static_cast<double>(r->tau[j]) * scale_factor);
    const LimitLaw law =
        boundary ? LimitLaw::x_marginal(cfg.model.mu, cfg.model.eta_plus_tail.c, u)
                 : LimitLaw::y_marginal(cfg.model.eta_plus_tail.alpha, u);
    const KSReport ks = ks_one_sample(samples, law);
    const std::string name =
        (boundary ? std::string("ks_tau_over_t_u") : std::string("ks_tau_tail_u")) +
        u_tag(u);
    add_check(rep, name, ks.statistic, ks.critical, ks.pass);
    rep.csv_files.emplace_back(
        "ecdf_" + name + ".csv",
        ecdf_csv(samples, [&law](double x) { return law.cdf(x); },
                 boundary ? "tau_over_t" : "scaled_tau"));
  }

  std::vector<PathFunctionals> records;
  records.reserve(found.size());
  for (const auto* r : found) records.push_back(*r);
  audit_and_report(rep, records);
}

std::string cov_csv(const FddReport& f) {
  std::string out = "# columns: i, j, u_i, u_j, cov, target, se\n";
  const std::size_t k = f.u_grid.size();
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      out += std::to_string(a) + "," + std::to_string(b) + "," +
             fmt17(f.u_grid[a]) + "," + fmt17(f.u_grid[b]) + "," +
             fmt17(f.cov[a * k + b]) + "," + fmt17(f.cov_target[a * k + b]) +
             "," + fmt17(f.cov_se[a * k + b]) + "\n";
    }
  }
  return out;
}

void report_fdd(RunReport& rep, const FddReport& f, const std::string& prefix) {
  for (std::size_t j = 0; j < f.u_grid.size(); ++j) {
    const auto& ks = f.marginal_ks[j];
    add_check(rep, prefix + "_ks_u" + u_tag(f.u_grid[j]), ks.statistic,
              ks.critical, ks.pass);
  }
  const std::size_t k = f.u_grid.size();
  double worst = 0.0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b)
      if (f.cov_se[a * k + b] > 0.0)
        worst = std::max(worst, std::fabs(f.cov[a * k + b] - f.cov_target[a * k + b]) /
                                    f.cov_se[a * k + b]);
  add_check(rep, prefix + "_cov_se_dist", worst, f.cov_tol_se, f.cov_pass);
  rep.csv_files.emplace_back(prefix + "_cov.csv", cov_csv(f));
}

void run_clt(const Workspace& ws) {
  const auto& cfg = *ws.cfg;
  auto& rep = *ws.report;
  std::vector<double> levels;
  for (double u : cfg.u_grid) levels.push_back(u * cfg.t);
  const LevelGrid grid{std::move(levels)};
  const bool tau_only = cfg.kind == ExperimentKind::clt_tau;
  const auto records = run_paths(
      ws, grid, tau_only ? FunctionalScope::passage_only : FunctionalScope::full);

  const double mu = cfg.model.mu;
  const double scale =
      std::sqrt(cfg.model.sigma2 * cfg.t / (mu * mu * mu));
  const std::size_t k = cfg.u_grid.size();

  auto centered = [&](WalkFunctional which, bool two_term) {
    std::vector<std::vector<double>> rows(records.size(), std::vector<double>(k));
    for (std::size_t i = 0; i < records.size(); ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double level = cfg.u_grid[j] * cfg.t;
        double center = level / mu;
        if (two_term) center -= centering_integral(cfg.model, level);
        double value = 0.0;
        switch (which) {
          case WalkFunctional::first_passage:
            value = static_cast<double>(records[i].tau[j]);
            break;
          case WalkFunctional::visits:
            value = static_cast<double>(records[i].n_visits[j]);
            break;
          case WalkFunctional::last_exit:
            value = static_cast<double>(records[i].rho[j]);
            break;
        }
        rows[i][j] = (value - center) / scale;
      }
    }
    return rows;
  };

  switch (cfg.kind) {
    case ExperimentKind::clt_tau: {
      report_fdd(rep, fdd_gaussian_check(centered(WalkFunctional::first_passage, false),
                                         cfg.u_grid),
                 "fdd_tau");
      break;
    }
    case ExperimentKind::clt_rho: {
      report_fdd(rep, fdd_gaussian_check(centered(WalkFunctional::last_exit, false),
                                         cfg.u_grid),
                 "fdd_rho");
      break;
    }
    case ExperimentKind::clt_joint: {
      const auto tau_rows = centered(WalkFunctional::first_passage, false);
      const auto rho_rows = centered(WalkFunctional::last_exit, false);
      const auto n_rows = centered(WalkFunctional::visits, false);
      report_fdd(rep, fdd_gaussian_check(tau_rows, cfg.u_grid), "fdd_tau");
      report_fdd(rep, fdd_gaussian_check(rho_rows, cfg.u_grid), "fdd_rho");
      // the three scaled functionals share one Brownian limit; their spread
      // at u = 1 must collapse
      const std::size_t j1 =
          std::find(cfg.u_grid.begin(), cfg.u_grid.end(), 1.0) - cfg.u_grid.begin();
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t i = 0; i < records.size(); ++i) {
        const double a = tau_rows[i][j1];
        const double b = n_rows[i][j1];
        const double c = rho_rows[i][j1];
        const double spread = std::max({std::fabs(a - b), std::fabs(a - c),
                                        std::fabs(b - c)});
        s1 += spread;
        s2 += spread * spread;
      }
      const double n = static_cast<double>(records.size());
      const double sd = std::sqrt(std::max(s2 / n - (s1 / n) * (s1 / n), 0.0));
      add_check(rep, "joint_spread_sd_u1", sd, 0.05, sd < 0.05);
      break;
    }
    default: {  // clt_visits_centered
      const auto two = centered(WalkFunctional::visits, true);
      const auto one = centered(WalkFunctional::visits, false);
      std::vector<double> col(records.size());
      for (std::size_t j = 0; j < k; ++j) {
        const LimitLaw law = LimitLaw::gaussian(cfg.u_grid[j]);
        for (std::size_t i = 0; i < records.size(); ++i) col[i] = two[i][j];
        const KSReport ks2 = ks_one_sample(col, law);
        add_check(rep, "ks_visits_two_term_u" + u_tag(cfg.u_grid[j]),
                  ks2.statistic, ks2.critical, ks2.pass);
        rep.csv_files.emplace_back(
            "ecdf_visits_two_term_u" + u_tag(cfg.u_grid[j]) + ".csv",
            ecdf_csv(col, [&law](double x) { return law.cdf(x); },
                     "scaled_visits"));
        for (std::size_t i = 0; i < records.size(); ++i) col[i] = one[i][j];
        const KSReport ks1 = ks_one_sample(col, law);
        // necessity of the two-term centering: the single-term statistic has
        // to blow far past the critical value
        add_check(rep, "ks_visits_single_term_fails_u" + u_tag(cfg.u_grid[j]),
                  ks1.statistic, 3.0 * ks1.critical,
                  ks1.statistic > 3.0 * ks1.critical);
      }
      break;
    }
  }
  audit_and_report(rep, records);
}

void run_limit_sample(const Workspace& ws) {
  const auto& cfg = *ws.cfg;
  auto& rep = *ws.report;
  const auto& ls = cfg.limit;
  const double eps = 1e-4 * ls.u;
  std::vector<double> samples;
  LimitLaw law = LimitLaw::gaussian(1.0);
  std::string name;
  if (ls.kind == "beta") {
    law = LimitLaw::x_marginal(ls.mu, ls.c, ls.u);
    name = "ks_inverse_record_beta";
    samples = run_replications<double>(ls.draws, ws.workers, [&](std::size_t i) {
      SplitMix64 rng(substream_key(cfg.master_seed, i));
      return sample_inverse_record(ls.c, 1.0, ls.mu, ls.u, eps, rng);
    });
  } else {
    law = LimitLaw::y_marginal(ls.alpha, ls.u);
    name = "ks_inverse_record_y";
    samples = run_replications<double>(ls.draws, ws.workers, [&](std::size_t i) {
      SplitMix64 rng(substream_key(cfg.master_seed, i));
      return sample_inverse_record(1.0, ls.alpha, 0.0, ls.u, eps, rng);
    });
  }
  const KSReport ks = ks_one_sample(samples, law);
  add_check(rep, name, ks.statistic, ks.critical, ks.pass);
  rep.csv_files.emplace_back(
      "ecdf_" + name + ".csv",
      ecdf_csv(samples, [&law](double x) { return law.cdf(x); }, "value"));
}

void require(bool ok, std::vector<std::string>& problems, const std::string& msg) {
  if (!ok) problems.push_back(msg);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::lln_weak: return "lln_weak";
    case ExperimentKind::lln_strong: return "lln_strong";
    case ExperimentKind::lln_visits: return "lln_visits";
    case ExperimentKind::flt_boundary: return "flt_boundary";
    case ExperimentKind::flt_regvar: return "flt_regvar";
    case ExperimentKind::clt_tau: return "clt_tau";
    case ExperimentKind::clt_rho: return "clt_rho";
    case ExperimentKind::clt_joint: return "clt_joint";
    case ExperimentKind::clt_visits_centered: return "clt_visits_centered";
    case ExperimentKind::limit_sample: return "limit_sample";
  }
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& name) {
  for (int k = 0; k <= static_cast<int>(ExperimentKind::limit_sample); ++k) {
    if (to_string(static_cast<ExperimentKind>(k)) == name)
      return static_cast<ExperimentKind>(k);
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  if (!j.contains("experiment"))
    throw ConfigError("config: missing 'experiment'");
  cfg.kind = experiment_from_string(j["experiment"].get<std::string>());

  if (cfg.kind != ExperimentKind::limit_sample) {
    if (!j.contains("model")) throw ConfigError("config: missing 'model'");
    const json& jm = j["model"];
    if (!jm.contains("xi") || !jm.contains("eta"))
      throw ConfigError("config: model needs 'xi' and 'eta'");
    cfg.model = JointIncrementModel::make(
        marginal_from_json(jm["xi"], "model.xi"),
        marginal_from_json(jm["eta"], "model.eta"),
        dependence_from_json(jm.contains("dependence") ? jm["dependence"]
                                                       : json{}));
  }
  if (j.contains("t")) cfg.t = j["t"].get<double>();
  if (j.contains("u_grid")) {
    cfg.u_grid = j["u_grid"].get<std::vector<double>>();
    if (cfg.u_grid.empty()) throw ConfigError("config: u_grid must be nonempty");
    for (std::size_t i = 0; i < cfg.u_grid.size(); ++i) {
      if (!(cfg.u_grid[i] > 0.0) ||
          (i > 0 && !(cfg.u_grid[i] > cfg.u_grid[i - 1])))
        throw ConfigError("config: u_grid must be positive and increasing");
    }
  }
  if (j.contains("replications"))
    cfg.replications = j["replications"].get<std::size_t>();
  if (j.contains("master_seed"))
    cfg.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("policy")) {
    cfg.policy = policy_from_json(j["policy"]);
    cfg.policy_given = true;
  }
  if (j.contains("limit")) {
    const json& jl = j["limit"];
    cfg.limit.kind = jl.value("kind", "beta");
    cfg.limit.mu = jl.value("mu", 1.0);
    cfg.limit.c = jl.value("c", 1.0);
    cfg.limit.alpha = jl.value("alpha", 0.5);
    cfg.limit.u = jl.value("u", 1.0);
    cfg.limit.draws = jl.value("draws", std::size_t{100000});
  }
  if (j.contains("output") && j["output"].contains("dir"))
    cfg.out_dir = j["output"]["dir"].get<std::string>();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate_config(ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.kind == ExperimentKind::limit_sample) {
    const auto& ls = cfg.limit;
    require(ls.kind == "beta" || ls.kind == "inverse_extremal", problems,
            "limit kind must be 'beta' or 'inverse_extremal'");
    require(ls.u > 0.0, problems, "limit u must be positive");
    require(ls.draws >= 100, problems, "limit draws must be at least 100");
    if (ls.kind == "beta") {
      require(ls.mu > 0.0, problems, "beta cross-check requires mu > 0");
      require(ls.c > 0.0, problems, "beta cross-check requires c > 0");
    } else {
      require(ls.alpha > 0.0 && ls.alpha < 1.0, problems,
              "inverse extremal requires alpha in (0,1)");
    }
    if (!problems.empty()) {
      std::string msg = "config refused:";
      for (const auto& p : problems) msg += "\n  - " + p;
      throw ConfigError(msg);
    }
    return;
  }

  cfg.model.validate();
  const HypothesisFlags flags = hypothesis_flags(cfg.model);
  const bool mu_pos = cfg.model.mu > 0.0;
  const bool sigma_ok = flags.sigma2_finite && cfg.model.sigma2 > 0.0;

  require(cfg.t > 0.0, problems, "t must be positive");
  require(cfg.replications >= 100, problems, "need at least 100 replications");

  switch (cfg.kind) {
    case ExperimentKind::lln_weak:
      require(mu_pos, problems, "requires E[xi] in (0,inf)");
      require(flags.weak_lln_tail, problems,
              "requires t*P{eta>t} -> 0 (W3); this right tail is too heavy");
      break;
    case ExperimentKind::lln_strong:
      require(mu_pos, problems, "requires E[xi] in (0,inf)");
      require(flags.eta_plus_integrable, problems,
              "requires E[eta+] < inf (S3)");
      break;
    case ExperimentKind::lln_visits:
      require(mu_pos, problems, "requires E[xi] in (0,inf)");
      require(flags.eta_minus_integrable, problems, "requires E[eta-] < inf");
      break;
    case ExperimentKind::flt_boundary:
      require(cfg.model.eta_plus_tail.cls == TailClass::boundary, problems,
              "requires a boundary-class right tail, P{eta>t} ~ c/t");
      break;
    case ExperimentKind::flt_regvar:
      require(cfg.model.eta_plus_tail.cls == TailClass::regvar, problems,
              "requires a regularly varying right tail with alpha in (0,1)");
      break;
    case ExperimentKind::clt_tau:
      require(mu_pos, problems, "requires E[xi] in (0,inf)");
      require(sigma_ok, problems, "requires Var[xi] in (0,inf)");
      require(flags.eta_plus_integrable, problems, "requires E[eta+] < inf");
      break;
    case ExperimentKind::clt_rho:
      require(mu_pos, problems, "requires E[xi] in (0,inf)");
      require(sigma_ok, problems, "requires Var[xi] in (0,inf)");
      require(flags.eta_minus_integrable, problems, "requires E[eta-] < inf");
      break;
    case ExperimentKind::clt_joint:
      require(mu_pos, problems, "requires E[xi] in (0,inf)");
      require(sigma_ok, problems, "requires Var[xi] in (0,inf)");
      require(flags.eta_plus_integrable && flags.eta_minus_integrable, problems,
              "requires E[eta] finite (both tails integrable)");
      require(std::find(cfg.u_grid.begin(), cfg.u_grid.end(), 1.0) !=
                  cfg.u_grid.end(),
              problems, "joint spread check needs u = 1 in the grid");
      break;
    case ExperimentKind::clt_visits_centered:
      require(mu_pos, problems, "requires E[xi] in (0,inf)");
      require(sigma_ok, problems, "requires Var[xi] in (0,inf)");
      require(flags.eta_minus_integrable, problems, "requires E[eta-] < inf");
      break;
    default:
      break;
  }

  if (!cfg.policy_given) {
    const auto xi_inf = essential_infimum(cfg.model.xi);
    if (mu_pos && cfg.model.eta_lower_bound && xi_inf && *xi_inf >= 0.0) {
      cfg.policy = HorizonPolicy::exact_policy();
    } else if (mu_pos) {
      cfg.policy = HorizonPolicy::budgeted();
    } else {
      problems.push_back(
          "no certifying policy exists for mu <= 0; specify a fixed horizon");
    }
    cfg.policy_given = problems.empty();
  }
  if (problems.empty()) {
    try {
      cfg.policy.validate(cfg.model);
    } catch (const ConfigError& e) {
      problems.push_back(e.what());
    }
  }

  if (!problems.empty()) {
    std::string msg = "config refused:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = to_string(cfg.kind);
  j["master_seed"] = cfg.master_seed;
  if (cfg.kind == ExperimentKind::limit_sample) {
    j["limit"] = {{"kind", cfg.limit.kind}, {"mu", cfg.limit.mu},
                  {"c", cfg.limit.c},       {"alpha", cfg.limit.alpha},
                  {"u", cfg.limit.u},       {"draws", cfg.limit.draws}};
  } else {
    j["model"] = {{"xi", marginal_to_json(cfg.model.xi)},
                  {"eta", marginal_to_json(cfg.model.eta)},
                  {"dependence", dependence_to_json(cfg.model.dependence)}};
    j["t"] = cfg.t;
    j["u_grid"] = cfg.u_grid;
    j["replications"] = cfg.replications;
    j["policy"] = policy_to_json(cfg.policy);
  }
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  return hex64(fnv1a64(canonical_config_text(cfg)));
}

RunReport run_experiment(const ExperimentConfig& cfg, unsigned workers) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.experiment = to_string(cfg.kind);
  rep.config_hash = config_hash(cfg);
  rep.master_seed = cfg.master_seed;
  rep.replications = cfg.kind == ExperimentKind::limit_sample
                         ? cfg.limit.draws
                         : cfg.replications;
  Workspace ws{&cfg, workers, &rep};
  switch (cfg.kind) {
    case ExperimentKind::lln_weak:
    case ExperimentKind::lln_strong:
    case ExperimentKind::lln_visits:
      run_lln(ws);
      break;
    case ExperimentKind::flt_boundary:
    case ExperimentKind::flt_regvar:
      run_flt(ws);
      break;
    case ExperimentKind::clt_tau:
    case ExperimentKind::clt_rho:
    case ExperimentKind::clt_joint:
    case ExperimentKind::clt_visits_centered:
      run_clt(ws);
      break;
    case ExperimentKind::limit_sample:
      run_limit_sample(ws);
      break;
  }
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

void write_report(const RunReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  json j;
  j["schema_version"] = 1;
  j["experiment"] = report.experiment;
  j["config_hash"] = report.config_hash;
  j["master_seed"] = report.master_seed;
  j["replications"] = report.replications;
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"statistic", c.statistic},
                      {"threshold", c.threshold},
                      {"pass", c.pass}});
  }
  j["checks"] = checks;
  j["pass"] = report.pass;
  {
    std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
    out << j.dump(2) << "\n";
  }
  for (const auto& [name, payload] : report.csv_files) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    out << payload;
  }
}

std::string format_report_file(const std::string& report_path) {
  std::ifstream in(report_path);
  if (!in) throw ConfigError("cannot open report: " + report_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report parse error: ") + e.what());
  }
  std::ostringstream os;
  os << "experiment:  " << j.value("experiment", "?") << "\n"
     << "config hash: " << j.value("config_hash", "?") << "\n"
     << "master seed: " << j.value("master_seed", 0ull) << "\n"
     << "replications: " << j.value("replications", 0ull) << "\n";
  for (const auto& c : j.value("checks", json::array())) {
    os << "  [" << (c.value("pass", false) ? "pass" : "FAIL") << "] "
       << c.value("name", "?") << "  statistic=" << c.value("statistic", 0.0)
       << "  threshold=" << c.value("threshold", 0.0) << "\n";
  }
  os << (j.value("pass", false) ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace gpwalk
