#include "mfrom/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "mfrom/errors.hpp"
#include "mfrom/greedy_rbm.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace mfrom {

namespace {

std::string num(double v) { return std::isnan(v) ? "nan" : fmt::format("{:.10e}", v); }

std::ofstream open_out(const fs::path &path) {
  std::ofstream os(path);
  if (!os)
    throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

Eigen::MatrixXd rows_of(const ParameterGrid &grid, const std::vector<int> &rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), grid.dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = grid.points.row(rows[i]);
  return out;
}

// Binary cache: magic, rows, cols, param dim, parameters, snapshots.
void write_cache(const std::string &path, const Eigen::MatrixXd &params, const Eigen::MatrixXd &snaps) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw ConfigError("cannot write validation cache '" + path + "'");
  const std::int64_t head[4] = {0x6d66726f6d766131, snaps.rows(), snaps.cols(), params.cols()};
  os.write(reinterpret_cast<const char *>(head), sizeof head);
  os.write(reinterpret_cast<const char *>(params.data()), static_cast<std::streamsize>(params.size() * sizeof(double)));
  os.write(reinterpret_cast<const char *>(snaps.data()), static_cast<std::streamsize>(snaps.size() * sizeof(double)));
}

std::optional<Eigen::MatrixXd> read_cache(const std::string &path, const Eigen::MatrixXd &params, Eigen::Index dim) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    return std::nullopt;
  std::int64_t head[4];
  if (!is.read(reinterpret_cast<char *>(head), sizeof head) || head[0] != 0x6d66726f6d766131 || head[1] != dim ||
      head[2] != params.rows() || head[3] != params.cols()) {
    spdlog::warn("validation cache '{}' does not match this configuration, recomputing", path);
    return std::nullopt;
  }
  Eigen::MatrixXd p(head[2], head[3]);
  Eigen::MatrixXd s(head[1], head[2]);
  is.read(reinterpret_cast<char *>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
  is.read(reinterpret_cast<char *>(s.data()), static_cast<std::streamsize>(s.size() * sizeof(double)));
  if (!is || p != params) {
    spdlog::warn("validation cache '{}' does not match this configuration, recomputing", path);
    return std::nullopt;
  }
  return s;
}

json row_json(const ErrorRow &r) {
  return json{{"iteration", r.iteration},        {"n_points", r.n_points},   {"rank", r.rank},
              {"eps_train", r.eps_train},        {"eps_val", r.eps_val},     {"eps_consistency", r.eps_consistency},
              {"eps_rom", r.eps_rom},            {"eps_pod", r.eps_pod},     {"seconds", r.seconds},
              {"basis_defect", r.basis_defect}, {"new_points", r.new_points}};
}

json config_json(const RunConfig &c) {
  json axes = json::array();
  for (const auto &a : c.grid.axes)
    axes.push_back({{"kind", a.kind == AxisKind::log ? "log" : a.kind == AxisKind::symlog ? "symlog" : "uniform"},
                    {"lo", a.range.lo},
                    {"hi", a.range.hi},
                    {"count", a.count}});
  return json{
      {"problem", {{"name", to_string(c.problem)}, {"fine_nodes", c.fine_nodes}, {"coarse_nodes", c.coarse_nodes},
                   {"block_side", c.block_side}}},
      {"params", {{"kind", c.grid.kind}, {"axes", axes}, {"n", c.grid.lhs_n}, {"dim", c.grid.lhs_dim},
                  {"lo", c.grid.lhs_range.lo}, {"hi", c.grid.lhs_range.hi},
                  {"scale", c.grid.lhs_scale == Scale::log ? "log" : "linear"}, {"path", c.grid.csv_path},
                  {"n_val", c.grid.n_val}, {"seed", c.grid.seed}}},
      {"method", {{"name", to_string(c.method)}, {"sketch", to_string(c.mf.sketch)}, {"sketch_size", c.mf.sketch_size},
                  {"points_per_iter", c.mf.points_per_iter}, {"tol", c.mf.tol}, {"max_iter", c.mf.max_iter},
                  {"seed", c.mf.seed}, {"require_val", c.mf.require_val}, {"gs_tol", c.mf.gs_tol},
                  {"rank_tol", c.mf.rank_tol},
                  {"deim_rows", c.mf.deim.rows == InterpRows::selected ? "selected" : "leading"},
                  {"history", c.mf.history == HistoryPolicy::returned ? "returned" : "consumed"},
                  {"ortho", c.mf.ortho == OrthoOrder::energy ? "energy" : "columns"},
                  {"normalize", c.mf.normalize},
                  {"greedy_relative", c.greedy.relative}}},
      {"diagnostics", {{"validation", c.validation}, {"global_errors", c.mf.global_errors}, {"timings", c.mf.timings},
                       {"trials", c.trials}}},
      {"output", {{"dir", c.out_dir}}}};
}

RunResult execute_mf(const Experiment &exp) {
  const MfReport rep = run(exp.ctx, exp.cfg.mf);
  RunResult out;
  out.status = rep.status;
  out.rows = rep.state.history;
  out.sigma = rep.state.lofi_sigma;
  out.basis = rep.state.basis;
  out.provenance = rep.state.basis.provenance;
  const int k0 = exp.cfg.mf.sketch == SketchKind::random ? exp.cfg.mf.sketch_size : 0;
  for (int k = 0; k < k0 && k < static_cast<int>(rep.state.deim.selected.size()); ++k)
    out.points.push_back({0, rep.state.deim.selected[static_cast<std::size_t>(k)]});
  for (const auto &row : out.rows) {
    for (int idx : row.new_points)
      out.points.push_back({row.iteration, idx});
    out.by_rank.push_back({row.rank, row.eps_rom, row.eps_pod, std::numeric_limits<double>::quiet_NaN()});
  }
  return out;
}

RunResult execute_greedy(const Experiment &exp) {
  const GreedyState st = greedy_loop(exp.ctx, exp.cfg.greedy);
  RunResult out;
  out.status = st.status;
  out.rows = st.history;
  out.basis = st.basis;
  out.provenance = st.basis.provenance;
  for (const auto &row : out.rows)
    out.points.push_back({row.iteration, row.new_points.front()});
  // max_indicator[k] was computed with a rank-k basis
  for (const auto &row : out.rows) {
    const std::size_t k = static_cast<std::size_t>(row.rank);
    const double bound = k < st.max_indicator.size() ? st.max_indicator[k] : std::numeric_limits<double>::quiet_NaN();
    out.by_rank.push_back({row.rank, row.eps_rom, row.eps_pod, bound});
  }
  return out;
}

RunResult execute_pod(const Experiment &exp) {
  const MfContext &ctx = exp.ctx;
  const SvdTriple svd = thin_svd(ctx.train_snapshots);
  const int rmax = std::min(svd.rank(exp.cfg.mf.rank_tol), exp.cfg.mf.max_iter);
  RunResult out;
  out.status = RunStatus::max_iter;
  out.sigma.push_back(svd.sigma.head(svd.rank(exp.cfg.mf.rank_tol)));
  int r_final = rmax;
  for (int r = 1; r <= rmax; ++r) {
    const PodTruncation pod = pod_truncate(svd, FixedRank{r}, exp.cfg.mf.rank_tol);
    MfState probe;
    probe.basis = pod.basis;
    probe.coefficients = rom_coefficients(*ctx.fine, pod.basis, ctx.train);
    const Eigen::MatrixXd approx = pod.basis.columns * probe.coefficients;
    ErrorRow row;
    row.iteration = r;
    row.n_points = r;
    row.rank = r;
    row.basis_defect = pod.basis.orthonormality_defect();
    row.eps_train = max_relative_error(ctx.train_snapshots, approx);
    row.eps_consistency = std::numeric_limits<double>::quiet_NaN();
    row.eps_val = error_val(ctx, pod.basis);
    row.eps_rom = rss_relative_error(ctx.train_snapshots, approx);
    row.eps_pod = projection_error(ctx.train_snapshots, pod.basis);
    out.rows.push_back(row);
    out.by_rank.push_back({r, row.eps_rom, row.eps_pod, std::numeric_limits<double>::quiet_NaN()});
    spdlog::info("pod rank {}: eps_rom {:.3e}, eps_pod {:.3e}, max {:.3e}", r, row.eps_rom, row.eps_pod, row.eps_train);
    if (row.eps_train < exp.cfg.mf.tol) {
      out.status = RunStatus::converged;
      r_final = r;
      break;
    }
  }
  const PodTruncation pod = pod_truncate(svd, FixedRank{r_final}, exp.cfg.mf.rank_tol);
  out.basis = pod.basis;
  out.provenance = pod.basis.provenance;
  DeimLog log;
  deim_select(pod.modes, r_final, DeimState::empty(static_cast<int>(ctx.train.rows())), exp.cfg.mf.deim, &log);
  for (std::size_t k = 0; k < log.new_indices.size(); ++k) {
    out.points.push_back({static_cast<int>(k) + 1, log.new_indices[k]});
    if (k < out.rows.size())
      out.rows[k].new_points = {log.new_indices[k]};
  }
  return out;
}

} // namespace

int exit_code(RunStatus status) {
  switch (status) {
  case RunStatus::converged:
    return exit_converged;
  case RunStatus::stalled:
    return exit_stalled;
  case RunStatus::max_iter:
    return exit_max_iter;
  }
  return exit_failure;
}

ParameterGrid make_grid(const GridSpec &spec) {
  ParameterGrid grid;
  if (spec.kind == "tensor") {
    std::vector<std::vector<double>> axes;
    for (const auto &a : spec.axes)
      axes.push_back(grid_1d(a.kind, a.range, a.count));
    grid = tensor_grid(axes);
  } else if (spec.kind == "lhs") {
    grid = lhs(spec.lhs_dim, spec.lhs_n, std::vector<Range>(static_cast<std::size_t>(spec.lhs_dim), spec.lhs_range),
               spec.seed, std::vector<Scale>(static_cast<std::size_t>(spec.lhs_dim), spec.lhs_scale));
  } else {
    std::ifstream in(spec.csv_path);
    if (!in)
      throw ConfigError("params.path: cannot open '" + spec.csv_path + "'");
    return read_grid_csv(in);
  }
  return split_train_val(grid, spec.n_val, spec.seed);
}

std::string default_cache_path(const RunConfig &cfg) {
  return cfg.validation_cache.empty() ? (fs::path(cfg.out_dir) / "validation.bin").string() : cfg.validation_cache;
}

std::unique_ptr<Experiment> build_experiment(const RunConfig &cfg, bool validation, bool train_snapshots) {
  validate(cfg);
  auto exp = std::make_unique<Experiment>();
  exp->cfg = cfg;
  MeshOptions mopts;
  mopts.block_side = cfg.block_side;
  const Mesh fine_mesh = build_mesh_for_node_target(cfg.fine_nodes, cfg.problem, mopts);
  exp->fine = make_problem(cfg.problem, fine_mesh);
  spdlog::info("fine mesh: {} nodes, {} dofs", fine_mesh.num_nodes(), exp->fine->dim());
  if (cfg.method == Method::mf && cfg.mf.sketch == SketchKind::coarse) {
    const Mesh coarse_mesh = build_mesh_for_node_target(cfg.coarse_nodes, cfg.problem, mopts);
    exp->coarse = make_problem(cfg.problem, coarse_mesh);
    spdlog::info("coarse mesh: {} nodes, {} dofs", coarse_mesh.num_nodes(), exp->coarse->dim());
  }
  exp->grid = make_grid(cfg.grid);
  if (exp->grid.dim != exp->fine->param_dim())
    throw ConfigError("parameter set has dimension " + std::to_string(exp->grid.dim) + ", problem needs " +
                      std::to_string(exp->fine->param_dim()));
  exp->train_rows = exp->grid.indices(Role::train);
  exp->val_rows = exp->grid.indices(Role::validation);
  exp->ctx.fine = exp->fine.get();
  exp->ctx.coarse = exp->coarse.get();
  exp->ctx.train = rows_of(exp->grid, exp->train_rows);
  spdlog::info("parameters: {} train, {} validation", exp->train_rows.size(), exp->val_rows.size());
  if (validation && cfg.validation && !exp->val_rows.empty()) {
    exp->ctx.val = rows_of(exp->grid, exp->val_rows);
    const std::string cache = default_cache_path(cfg);
    if (auto cached = read_cache(cache, exp->ctx.val, exp->fine->dim())) {
      exp->ctx.val_snapshots = *cached;
      spdlog::info("validation snapshots read from {}", cache);
    } else {
      exp->ctx.val_snapshots = solve_all(*exp->fine, exp->ctx.val);
    }
  }
  if (train_snapshots)
    exp->ctx.train_snapshots = solve_all(*exp->fine, exp->ctx.train);
  return exp;
}

RunResult execute(const Experiment &exp) {
  switch (exp.cfg.method) {
  case Method::mf:
    return execute_mf(exp);
  case Method::greedy:
    return execute_greedy(exp);
  case Method::pod:
    return execute_pod(exp);
  }
  throw ConfigError("unknown method");
}

void write_artifacts(const Experiment &exp, const RunResult &res, const std::string &dir) {
  fs::create_directories(dir);
  const fs::path d(dir);
  const int dim = exp.grid.dim;
  auto mu_of = [&](int train_index) { return exp.ctx.train.row(train_index); };
  {
    auto os = open_out(d / "convergence.csv");
    os << "iteration,n_points,eps_train,eps_val,seconds\n";
    for (const auto &r : res.rows)
      os << r.iteration << ',' << r.n_points << ',' << num(r.eps_train) << ',' << num(r.eps_val) << ','
         << fmt::format("{:.6f}", r.seconds) << '\n';
  }
  {
    auto os = open_out(d / "points.csv");
    os << "iteration,train_index";
    for (int k = 1; k <= dim; ++k)
      os << ",mu_" << k;
    os << '\n';
    for (const auto &p : res.points) {
      os << p.iteration << ',' << p.train_index;
      for (int k = 0; k < dim; ++k)
        os << ',' << fmt::format("{:.17g}", mu_of(p.train_index)[k]);
      os << '\n';
    }
  }
  {
    auto os = open_out(d / "singular_values.csv");
    os << "iteration,index,sigma\n";
    for (std::size_t it = 0; it < res.sigma.size(); ++it)
      for (Eigen::Index i = 0; i < res.sigma[it].size(); ++i)
        os << it + 1 << ',' << i + 1 << ',' << num(res.sigma[it][i]) << '\n';
  }
  {
    auto os = open_out(d / "by_rank.csv");
    os << "rank,eps_rom,eps_pod,bound\n";
    for (const auto &r : res.by_rank)
      os << r.rank << ',' << num(r.eps_rom) << ',' << num(r.eps_pod) << ',' << num(r.bound) << '\n';
  }
  json rep;
  rep["config"] = config_json(exp.cfg);
  rep["status"] = to_string(res.status);
  rep["fine_dofs"] = exp.fine->dim();
  rep["fine_nodes"] = exp.fine->mesh().num_nodes();
  if (exp.coarse)
    rep["coarse_nodes"] = exp.coarse->mesh().num_nodes();
  rep["n_train"] = exp.ctx.train.rows();
  rep["n_val"] = exp.ctx.val.rows();
  rep["iterations"] = json::array();
  for (const auto &r : res.rows)
    rep["iterations"].push_back(row_json(r));
  rep["by_rank"] = json::array();
  for (const auto &r : res.by_rank)
    rep["by_rank"].push_back({{"rank", r.rank}, {"eps_rom", r.eps_rom}, {"eps_pod", r.eps_pod}, {"bound", r.bound}});
  rep["selected"] = json::array();
  for (const auto &p : res.points) {
    std::vector<double> mu(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k)
      mu[static_cast<std::size_t>(k)] = mu_of(p.train_index)[k];
    rep["selected"].push_back({{"iteration", p.iteration}, {"train_index", p.train_index}, {"mu", mu}});
  }
  rep["basis"] = {{"rank", res.basis.rank()}, {"provenance", res.provenance}};
  auto os = open_out(d / "report.json");
  os << rep.dump(2) << '\n';
}

int run_experiment(const RunConfig &cfg) {
  const bool global = cfg.method == Method::pod || cfg.mf.global_errors;
  const auto exp = build_experiment(cfg, true, global);
  const RunResult res = execute(*exp);
  write_artifacts(*exp, res, cfg.out_dir);
  spdlog::info("{}: {} after {} iterations, {} points, rank {}", to_string(cfg.method), to_string(res.status),
               res.rows.size(), res.points.size(), res.basis.rank());
  return exit_code(res.status);
}

namespace {

fs::path run_dir(const std::string &arg) {
  const fs::path p(arg);
  if (fs::is_directory(p))
    return p;
  return fs::path(load_config(arg).out_dir);
}

json read_report(const fs::path &dir) {
  std::ifstream in(dir / "report.json");
  if (!in)
    throw ConfigError("no report.json in '" + dir.string() + "' (run it first)");
  return json::parse(in);
}

std::string cell(const json &v) { return v.is_number() ? num(v.get<double>()) : "NA"; }

} // namespace

void compare(const std::string &a, const std::string &b, const std::string &out_dir) {
  const fs::path da = run_dir(a), db = run_dir(b);
  const json ra = read_report(da), rb = read_report(db);
  const std::string la = ra["config"]["method"]["name"].get<std::string>() + "_a";
  const std::string lb = rb["config"]["method"]["name"].get<std::string>() + "_b";
  std::map<int, std::pair<const json *, const json *>> ranks;
  for (const auto &r : ra["by_rank"])
    ranks[r["rank"].get<int>()].first = &r;
  for (const auto &r : rb["by_rank"])
    ranks[r["rank"].get<int>()].second = &r;
  fs::create_directories(out_dir);
  {
    auto os = open_out(fs::path(out_dir) / "comparison.csv");
    os << "rank";
    for (const auto &l : {la, lb})
      os << ',' << l << "_eps_rom," << l << "_eps_pod," << l << "_bound";
    os << '\n';
    for (const auto &[rank, pair] : ranks) {
      os << rank;
      for (const json *r : {pair.first, pair.second}) {
        if (r)
          os << ',' << cell((*r)["eps_rom"]) << ',' << cell((*r)["eps_pod"]) << ',' << cell((*r)["bound"]);
        else
          os << ",NA,NA,NA";
      }
      os << '\n';
    }
  }
  auto os = open_out(fs::path(out_dir) / "comparison_points.csv");
  const std::size_t dim = ra["selected"].empty() ? 0 : ra["selected"][0]["mu"].size();
  os << "run,order,iteration,train_index";
  for (std::size_t k = 1; k <= dim; ++k)
    os << ",mu_" << k;
  os << '\n';
  for (const auto &[label, rep] : {std::pair{la, &ra}, std::pair{lb, &rb}}) {
    int order = 0;
    for (const auto &p : (*rep)["selected"]) {
      os << label << ',' << ++order << ',' << p["iteration"].get<int>() << ',' << p["train_index"].get<int>();
      for (const auto &m : p["mu"])
        os << ',' << fmt::format("{:.17g}", m.get<double>());
      os << '\n';
    }
  }
}

TrialsSummary trials(const RunConfig &cfg, int n, const std::string &out_dir) {
  if (n < 2)
    throw ConfigError("trials: need at least 2 trials, got " + std::to_string(n));
  if (cfg.method != Method::mf || cfg.mf.sketch != SketchKind::random)
    throw ConfigError("trials: needs method.name = mf with method.sketch = random");
  auto exp = build_experiment(cfg, true, cfg.mf.global_errors);
  TrialsSummary out;
  std::map<int, int> freq;
  for (int t = 0; t < n; ++t) {
    exp->cfg.mf.seed = cfg.mf.seed + static_cast<std::uint64_t>(t);
    RunResult res = execute(*exp);
    write_artifacts(*exp, res, (fs::path(out_dir) / fmt::format("trial_{:02d}", t)).string());
    std::vector<int> sel;
    for (const auto &p : res.points) {
      sel.push_back(p.train_index);
      ++freq[p.train_index];
    }
    spdlog::info("trial {}: {} after {} iterations, {} points", t, to_string(res.status), res.rows.size(), sel.size());
    out.selected.push_back(sel);
    out.results.push_back(std::move(res));
  }
  fs::create_directories(out_dir);
  {
    auto os = open_out(fs::path(out_dir) / "trials.csv");
    os << "iteration,n_trials,eps_train_mean,eps_train_std,eps_val_mean,eps_val_std\n";
    std::size_t max_it = 0;
    for (const auto &r : out.results)
      max_it = std::max(max_it, r.rows.size());
    for (std::size_t it = 0; it < max_it; ++it) {
      std::vector<double> et, ev;
      for (const auto &r : out.results)
        if (it < r.rows.size()) {
          et.push_back(r.rows[it].eps_train);
          ev.push_back(r.rows[it].eps_val);
        }
      auto stats = [](const std::vector<double> &v) {
        double m = 0.0, s = 0.0;
        for (double x : v)
          m += x;
        m /= static_cast<double>(v.size());
        for (double x : v)
          s += (x - m) * (x - m);
        s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
        return std::pair{m, s};
      };
      const auto [tm, ts] = stats(et);
      const auto [vm, vs] = stats(ev);
      os << it + 1 << ',' << et.size() << ',' << num(tm) << ',' << num(ts) << ',' << num(vm) << ',' << num(vs) << '\n';
    }
  }
  auto os = open_out(fs::path(out_dir) / "selection_frequency.csv");
  os << "train_index,count";
  for (int k = 1; k <= exp->grid.dim; ++k)
    os << ",mu_" << k;
  os << '\n';
  for (const auto &[idx, count] : freq) {
    os << idx << ',' << count;
    for (int k = 0; k < exp->grid.dim; ++k)
      os << ',' << fmt::format("{:.17g}", exp->ctx.train(idx, k));
    os << '\n';
  }
  return out;
}

void gen_params(const RunConfig &cfg, const std::string &path) {
  const ParameterGrid grid = make_grid(cfg.grid);
  if (path.empty() || path == "-") {
    write_grid_csv(std::cout, grid);
    return;
  }
  if (fs::path(path).has_parent_path())
    fs::create_directories(fs::path(path).parent_path());
  auto os = open_out(path);
  write_grid_csv(os, grid);
}

void precompute_validation(const RunConfig &cfg, const std::string &path) {
  RunConfig c = cfg;
  c.validation = false;
  const auto exp = build_experiment(c, false, false);
  const Eigen::MatrixXd val = rows_of(exp->grid, exp->val_rows);
  if (val.rows() == 0)
    throw ConfigError("params.n_val is zero: nothing to precompute");
  const Eigen::MatrixXd snaps = solve_all(*exp->fine, val);
  if (fs::path(path).has_parent_path())
    fs::create_directories(fs::path(path).parent_path());
  write_cache(path, val, snaps);
  spdlog::info("wrote {} validation snapshots to {}", val.rows(), path);
}

} // namespace mfrom
