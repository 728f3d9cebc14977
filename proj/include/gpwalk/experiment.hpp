#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpwalk/stat_verify.hpp"
#include "gpwalk/walk_engine.hpp"

namespace gpwalk {

enum class ExperimentKind {
  lln_weak,
  lln_strong,
  lln_visits,
  flt_boundary,
  flt_regvar,
  clt_tau,
  clt_rho,
  clt_joint,
  clt_visits_centered,
  limit_sample,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& name);

// Parameters of a limit_sample run (the limit objects need no walk model).
struct LimitSampleParams {
  std::string kind = "beta";  // "beta" or "inverse_extremal"
  double mu = 1.0;
  double c = 1.0;
  double alpha = 0.5;
  double u = 1.0;
  std::size_t draws = 100000;
};

// Declarative experiment description. Everything that affects the sampled
// numbers lives here and is covered by the canonical hash; execution details
// (worker count, output paths) deliberately are not.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::lln_strong;
  JointIncrementModel model;
  double t = 1e4;
  std::vector<double> u_grid = {1.0};
  std::size_t replications = 2000;
  std::uint64_t master_seed = 1;
  HorizonPolicy policy;
  bool policy_given = false;
  LimitSampleParams limit;
  std::string out_dir = "gpwalk_out";
};

ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Refuses any experiment whose theorem hypotheses the model does not satisfy,
// naming the violated condition; fills in a default policy when none given.
void validate_config(ExperimentConfig& cfg);

// Canonical serialization (sorted keys, shortest round-trip numbers) and its
// FNV-1a 64 hash; stable across platforms and worker counts.
std::string canonical_config_text(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

struct CheckRow {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RunReport {
  std::string experiment;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::size_t replications = 0;
  std::vector<CheckRow> checks;
  bool pass = false;
  double wall_seconds = 0.0;  // stdout only; never serialized (reports must
                              // be byte-identical across reruns)
  std::vector<std::pair<std::string, std::string>> csv_files;  // name, payload
};

RunReport run_experiment(const ExperimentConfig& cfg, unsigned workers);

// Writes report.json plus one CSV per check into out_dir.
void write_report(const RunReport& report, const std::string& out_dir);

// Pretty-prints a previously written report.json.
std::string format_report_file(const std::string& report_path);

}  // namespace gpwalk
