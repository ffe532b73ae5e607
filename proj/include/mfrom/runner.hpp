#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mfrom/config.hpp"
#include "mfrom/mf_driver.hpp"
#include "mfrom/problem.hpp"

namespace mfrom {

enum ExitCode : int {
  exit_converged = 0,
  exit_failure = 1,
  exit_stalled = 2,
  exit_max_iter = 3,
  exit_config = 4,
};

int exit_code(RunStatus status);

struct Experiment {
  RunConfig cfg;
  std::unique_ptr<Problem> fine;
  std::unique_ptr<Problem> coarse;
  ParameterGrid grid;
  std::vector<int> train_rows;  // grid rows of the training set
  std::vector<int> val_rows;
  MfContext ctx;
};

ParameterGrid make_grid(const GridSpec &spec);

// Meshes, problems, parameter sets and (optionally) validation snapshots.
// Training snapshots are solved only when `train_snapshots` is set.
std::unique_ptr<Experiment> build_experiment(const RunConfig &cfg, bool validation, bool train_snapshots);

struct RankRow {
  int rank = 0;
  double eps_rom = 0.0;
  double eps_pod = 0.0;
  double bound = 0.0;
};

struct SelectedPoint {
  int iteration = 0;  // 0 for sketch points
  int train_index = 0;
};

struct RunResult {
  RunStatus status = RunStatus::max_iter;
  std::vector<ErrorRow> rows;
  std::vector<SelectedPoint> points;
  std::vector<Eigen::VectorXd> sigma;  // per iteration
  std::vector<RankRow> by_rank;
  std::vector<std::string> provenance;
  ReducedBasis basis;
};

RunResult execute(const Experiment &exp);

// convergence.csv, points.csv, singular_values.csv, by_rank.csv, report.json
void write_artifacts(const Experiment &exp, const RunResult &result, const std::string &dir);

// Builds, runs, writes artifacts to cfg.out_dir. Returns the exit code.
int run_experiment(const RunConfig &cfg);

// `a` and `b` are run directories or config files (their output.dir is used).
// Writes comparison.csv (per rank) and comparison_points.csv to out_dir.
void compare(const std::string &a, const std::string &b, const std::string &out_dir);

struct TrialsSummary {
  std::vector<std::vector<int>> selected;  // per trial, in selection order
  std::vector<RunResult> results;
};

// Random-sketch runs over seeds cfg.mf.seed, cfg.mf.seed + 1, ...; writes
// trials.csv and selection_frequency.csv. Throws ConfigError for n < 2.
TrialsSummary trials(const RunConfig &cfg, int n, const std::string &out_dir);

void gen_params(const RunConfig &cfg, const std::string &path);

// Solves the validation set and writes the cache read by later runs.
void precompute_validation(const RunConfig &cfg, const std::string &path);

std::string default_cache_path(const RunConfig &cfg);

} // namespace mfrom
