#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "mfrom/config.hpp"
#include "mfrom/errors.hpp"
#include "mfrom/runner.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> points_per_iter;
  std::string out_dir;
  bool require_val = false;
};

mfrom::RunConfig resolve(const std::string &path, const Overrides &o) {
  mfrom::RunConfig cfg = path.empty() ? mfrom::default_config(mfrom::Layout::heat2d) : mfrom::load_config(path);
  if (o.seed)
    cfg.mf.seed = *o.seed;
  if (o.tol)
    cfg.mf.tol = cfg.greedy.tol = *o.tol;
  if (o.points_per_iter)
    cfg.mf.points_per_iter = *o.points_per_iter;
  if (!o.out_dir.empty())
    cfg.out_dir = o.out_dir;
  if (o.require_val)
    cfg.mf.require_val = true;
  mfrom::validate(cfg);
  return cfg;
}

void add_common(CLI::App *cmd, std::string &config, Overrides &o) {
  cmd->add_option("-c,--config", config, "configuration file (.cfg/.ini or .json)");
  cmd->add_option("-o,--out-dir", o.out_dir, "output directory (overrides output.dir)");
  cmd->add_option("--seed", o.seed, "sketch seed (overrides method.seed)");
  cmd->add_option("--tol", o.tol, "stopping tolerance (overrides method.tol)");
  cmd->add_option("--points-per-iter", o.points_per_iter, "points per iteration (overrides method.points_per_iter)");
  cmd->add_flag("--require-val-convergence", o.require_val, "also require the validation error below tol");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Multi-fidelity reduced-basis sampling"};
  app.require_subcommand(1);
  std::string level = "info";
  app.add_option("--log-level", level, "trace, debug, info, warn, error, off");

  std::string config;
  Overrides o;
  bool dry_run = false;
  int n_trials = 0;
  std::string output;
  std::vector<std::string> pair;

  auto *run = app.add_subcommand("run", "run one experiment");
  add_common(run, config, o);
  run->add_flag("--dry-run", dry_run, "validate the config, print the plan, solve nothing");

  auto *cmp = app.add_subcommand("compare", "merge two finished runs by rank");
  cmp->add_option("runs", pair, "two run directories or config files")->expected(2)->required();
  cmp->add_option("-o,--out-dir", o.out_dir, "output directory")->required();

  auto *tri = app.add_subcommand("trials", "repeat a random-sketch run over consecutive seeds");
  add_common(tri, config, o);
  tri->add_option("-n,--trials", n_trials, "number of trials (default diagnostics.trials)");

  auto *gen = app.add_subcommand("gen-params", "write the parameter set as CSV");
  add_common(gen, config, o);
  gen->add_option("--output", output, "CSV path, '-' for stdout")->default_val("-");

  auto *pre = app.add_subcommand("precompute-validation", "solve and cache the validation snapshots");
  add_common(pre, config, o);
  pre->add_option("--output", output, "cache path (default diagnostics.validation_cache or <out-dir>/validation.bin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mfrom::exit_config;
  }
  spdlog::set_level(spdlog::level::from_str(level));
  spdlog::set_pattern("[%l] %v");

  try {
    if (*cmp) {
      mfrom::compare(pair[0], pair[1], o.out_dir);
      return mfrom::exit_converged;
    }
    const mfrom::RunConfig cfg = resolve(config, o);
    if (*run) {
      if (dry_run) {
        std::cout << mfrom::describe(cfg);
        return mfrom::exit_converged;
      }
      return mfrom::run_experiment(cfg);
    }
    if (*tri) {
      mfrom::trials(cfg, n_trials > 0 ? n_trials : cfg.trials, cfg.out_dir);
      return mfrom::exit_converged;
    }
    if (*gen) {
      mfrom::gen_params(cfg, output);
      return mfrom::exit_converged;
    }
    if (*pre) {
      mfrom::precompute_validation(cfg, output.empty() ? mfrom::default_cache_path(cfg) : output);
      return mfrom::exit_converged;
    }
  } catch (const mfrom::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return mfrom::exit_config;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return mfrom::exit_failure;
  }
  return mfrom::exit_failure;
}
