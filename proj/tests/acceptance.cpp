// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and not configurable. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "deim_oracle.hpp"
#include "mfrom/config.hpp"
#include "mfrom/deim.hpp"
#include "mfrom/fem.hpp"
#include "mfrom/greedy_rbm.hpp"
#include "mfrom/rng.hpp"
#include "mfrom/rom.hpp"
#include "mfrom/runner.hpp"

using namespace mfrom;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kOrthoTol = 1e-10;
constexpr double kAffineTol = 1e-13;
constexpr double kGalerkinTol = 1e-9;
constexpr double kAnalyticTol = 1e-12;
// Errors below this fraction of |u|_X are round-off in the reference snapshot.
constexpr double kBoundFloor = 1e-13;
constexpr double kMonotoneBand = 0.05;
constexpr double kValDecayOrders = 3.0;
constexpr double kDeskSeconds = 900.0;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Run {
  std::unique_ptr<Experiment> exp;
  RunResult res;
  double seconds = 0.0;
};

fs::path g_work;
fs::path g_configs = fs::path(MFROM_SOURCE_DIR) / "configs";

RunConfig config(const std::string &name, const std::string &out) {
  RunConfig c = load_config((g_configs / name).string());
  c.out_dir = (g_work / out).string();
  c.mf.timings = c.greedy.timings = false;
  return c;
}

Run execute_config(const RunConfig &cfg) {
  Run r;
  const auto t0 = std::chrono::steady_clock::now();
  const bool global = cfg.method == Method::pod || cfg.mf.global_errors || cfg.greedy.global_errors;
  r.exp = build_experiment(cfg, true, global);
  r.res = execute(*r.exp);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_artifacts(*r.exp, r.res, cfg.out_dir);
  return r;
}

// Runs shared between criteria, computed on first use.
struct Runs {
  std::unique_ptr<Run> heat_random, heat_coarse, heat_greedy, desk_p5, desk_p2;

  Run &get(std::unique_ptr<Run> &slot, const std::function<RunConfig()> &make) {
    if (!slot)
      slot = std::make_unique<Run>(execute_config(make()));
    return *slot;
  }
  Run &random() { return get(heat_random, [] { return config("heat2d-random.cfg", "heat2d-random"); }); }
  Run &coarse() { return get(heat_coarse, [] { return config("heat2d-coarse.cfg", "heat2d-coarse"); }); }
  Run &greedy() { return get(heat_greedy, [] { return config("heat2d-greedy.cfg", "heat2d-greedy"); }); }
  Run &p5() {
    return get(desk_p5, [] {
      RunConfig c = config("advdiff9d-desk.cfg", "advdiff9d-desk-p5");
      c.mf.global_errors = true;
      return c;
    });
  }
  Run &p2() {
    return get(desk_p2, [] {
      RunConfig c = config("advdiff9d-desk.cfg", "advdiff9d-desk-p2");
      c.mf.points_per_iter = 2;
      return c;
    });
  }
} g_runs;

int iterations(const Run &r) { return static_cast<int>(r.res.rows.size()); }
int points(const Run &r) { return static_cast<int>(r.res.points.size()); }

Verdict c1_heat_random() {
  Run &r = g_runs.random();
  const int it = iterations(r), n = points(r);
  const bool ok = r.res.status == RunStatus::converged && std::abs(it - 6) <= 1 && std::abs(n - 7) <= 1;
  return {ok, fmt::format("{}: {} iterations (6 +- 1), {} points (7 +- 1), {:.1f} s", to_string(r.res.status), it, n,
                          r.seconds)};
}

Verdict c2_sketch_independence() {
  Run &a = g_runs.random();
  Run &b = g_runs.coarse();
  const bool ok = b.res.status == RunStatus::converged && std::abs(points(a) - points(b)) <= 1;
  return {ok, fmt::format("coarse sketch {}: {} points, {} iterations; random sketch {} points",
                          to_string(b.res.status), points(b), iterations(b), points(a))};
}

Verdict c3_greedy_parity() {
  Run &g = g_runs.greedy();
  const Experiment &exp = *g.exp;
  const AffineSystem &sys = *exp.fine->affine();
  const Eigen::VectorXd bar = Eigen::VectorXd::Ones(2);
  const SparseMatrix X = sys.operator_at(bar);
  const double alpha = coercivity_constant(X, X);
  const Eigen::MatrixXd &U = exp.ctx.train_snapshots;
  const int rank = g.res.basis.rank();
  int checked = 0, violations = 0;
  double worst_ratio = 0.0;
  for (int k = 1; k <= rank; ++k) {
    ReducedBasis b{g.res.basis.columns.leftCols(k), {}};
    b.provenance.assign(static_cast<std::size_t>(k), "");
    const Eigen::VectorXd delta = error_indicator(sys, b, X, alpha, bar, exp.ctx.train, false);
    const ReducedAffineSystem rsys = project_affine(sys, b);
    for (Eigen::Index i = 0; i < exp.ctx.train.rows(); ++i) {
      const Eigen::VectorXd e = U.col(i) - b.columns * solve_rom_affine(rsys, exp.ctx.train.row(i).transpose()).coefficients;
      const double err = std::sqrt(std::max(e.dot(X * e), 0.0));
      ++checked;
      const double unorm = std::sqrt(U.col(i).dot(X * U.col(i)));
      if (err > kBoundFloor * unorm)
        worst_ratio = std::max(worst_ratio, err / delta[i]);
      if (delta[i] * (1 + 1e-8) + kBoundFloor * unorm < err)
        ++violations;
    }
  }
  const bool ok = g.res.status == RunStatus::converged && std::abs(rank - 7) <= 1 && violations == 0;
  return {ok, fmt::format("{} with {} basis functions (7 +- 1); bound below error at {} of {} checks (max "
                          "error/bound {:.3f})",
                          to_string(g.res.status), rank, violations, checked, worst_ratio)};
}

// Ordering and near-monotone decay of the per-rank errors of one run.
std::string error_ordering(const Run &r, bool &ok) {
  int order_bad = 0, mono_bad = 0;
  const auto &rows = r.res.by_rank;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!(rows[k].eps_pod <= rows[k].eps_rom * (1 + 1e-12)))
      ++order_bad;
    if (k > 0 && (rows[k].eps_rom > (1 + kMonotoneBand) * rows[k - 1].eps_rom ||
                  rows[k].eps_pod > (1 + kMonotoneBand) * rows[k - 1].eps_pod))
      ++mono_bad;
  }
  ok = ok && !rows.empty() && order_bad == 0 && mono_bad == 0;
  return fmt::format("{} ranks, ordering violations {}, monotonicity violations {}", rows.size(), order_bad, mono_bad);
}

Verdict c4_error_ordering() {
  bool ok = true;
  const std::string h = error_ordering(g_runs.random(), ok);
  const std::string a = error_ordering(g_runs.p5(), ok);
  return {ok, "heat2d: " + h + "; advdiff9d desk: " + a};
}

Verdict c5_desk_run() {
  Run &r = g_runs.p5();
  const auto &rows = r.res.rows;
  if (rows.empty())
    return {false, "no iterations"};
  const double first = rows.front().eps_val, last = rows.back().eps_val;
  const double orders = std::log10(first / last);
  std::set<int> distinct;
  for (const auto &p : r.res.points)
    distinct.insert(p.train_index);
  const bool unique = distinct.size() == r.res.points.size();
  const bool ok = r.res.status == RunStatus::converged && orders >= kValDecayOrders && unique && r.seconds <= kDeskSeconds;
  return {ok, fmt::format("{} in {} iterations, {} points ({}), eps_val {:.2e} -> {:.2e} ({:.2f} orders, need {:.0f}), "
                          "{:.0f} s",
                          to_string(r.res.status), rows.size(), r.res.points.size(), unique ? "distinct" : "repeated",
                          first, last, orders, kValDecayOrders, r.seconds)};
}

Verdict c6_greediness() {
  Run &a = g_runs.p2();
  Run &b = g_runs.p5();
  const bool ok = a.res.status == RunStatus::converged && b.res.status == RunStatus::converged &&
                  points(a) <= points(b) && iterations(a) > iterations(b);
  return {ok, fmt::format("p=2: {} points, {} iterations ({}); p=5: {} points, {} iterations ({})", points(a),
                          iterations(a), to_string(a.res.status), points(b), iterations(b), to_string(b.res.status))};
}

Verdict c7_deim_oracle() {
  Rng rng(20240601);
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const int m = 1 + static_cast<int>(rng.below(12));
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(m, 6))));
    Eigen::MatrixXd psi(m, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < m; ++i)
        psi(i, j) = 2.0 * rng.uniform() - 1.0;
    if (deim_select(psi, k, DeimState::empty(m)).selected != oracle::standard_deim(psi))
      ++mismatches;
  }
  return {mismatches == 0, fmt::format("{} of 200 random matrices differ from the reference", mismatches)};
}

Verdict c8_analytic_fem() {
  const RunConfig cfg = config("heat2d-random.cfg", "unused");
  const Mesh mesh = build_mesh_for_node_target(cfg.fine_nodes, Layout::heat2d, {cfg.block_side});
  const AffineSystem sys = assemble_heat_affine(mesh);
  Eigen::VectorXd mu(2);
  mu << 1, 1;
  const FomSolution s = solve_fom(sys, mu);
  double exact = 0.0;
  for (int i = 0; i < mesh.num_nodes(); ++i)
    exact = std::max(exact, std::abs(s.nodal[i] - (1.0 - mesh.nodes[static_cast<std::size_t>(i)].y())));
  double linear = 0.0;
  for (double m1 : {0.1, 1.3, 10.0}) {
    Eigen::VectorXd a(2), b(2);
    a << m1, 0.35;
    b << m1, 0.7;
    const Eigen::VectorXd ua = solve_fom(sys, a).nodal, ub = solve_fom(sys, b).nodal;
    linear = std::max(linear, (ub - 2 * ua).cwiseAbs().maxCoeff() / ub.cwiseAbs().maxCoeff());
  }
  return {exact <= kAnalyticTol && linear <= kAnalyticTol,
          fmt::format("{} nodes: max |u - (1 - y)| = {:.2e}, flux linearity defect {:.2e} (tol {:.0e})",
                      mesh.num_nodes(), exact, linear, kAnalyticTol)};
}

Verdict c9_invariants() {
  // Orthonormality after every enrichment, in every run of this suite.
  double ortho = 0.0;
  int enrichments = 0;
  for (Run *r : {&g_runs.random(), &g_runs.coarse(), &g_runs.greedy(), &g_runs.p5(), &g_runs.p2()}) {
    for (const auto &row : r->res.rows) {
      ortho = std::max(ortho, row.basis_defect);
      ++enrichments;
    }
    ortho = std::max(ortho, r->res.basis.orthonormality_defect());
  }

  // Affine reassembly on the heat mesh.
  const Experiment &heat = *g_runs.random().exp;
  const AffineSystem &sys = *heat.fine->affine();
  double affine = 0.0;
  for (Eigen::Index i = 0; i < heat.ctx.train.rows(); i += 97) {
    const Eigen::VectorXd mu = heat.ctx.train.row(i).transpose();
    const auto [A, f] = assemble_heat_full(heat.fine->mesh(), mu);
    affine = std::max(affine, Eigen::MatrixXd(sys.operator_at(mu) - A).norm() / Eigen::MatrixXd(A).norm());
    if (f.norm() > 0)
      affine = std::max(affine, (sys.rhs_at(mu) - f).norm() / f.norm());
  }

  // Galerkin orthogonality of the residual on both benchmarks.
  double galerkin = 0.0;
  {
    const ReducedBasis &b = g_runs.random().res.basis;
    const ReducedAffineSystem rsys = project_affine(sys, b);
    for (Eigen::Index i = 0; i < heat.ctx.train.rows(); i += 97) {
      const Eigen::VectorXd mu = heat.ctx.train.row(i).transpose();
      const Eigen::VectorXd f = sys.rhs_at(mu);
      const double ref = (b.columns.transpose() * f).norm();
      if (ref == 0.0)
        continue;
      const Eigen::VectorXd c = solve_rom_affine(rsys, mu).coefficients;
      galerkin = std::max(galerkin, (b.columns.transpose() * (sys.operator_at(mu) * (b.columns * c) - f)).norm() / ref);
    }
    const Experiment &ad = *g_runs.p5().exp;
    const auto &model = dynamic_cast<const AdvDiffProblem &>(*ad.fine).model();
    const ReducedBasis &ab = g_runs.p5().res.basis;
    for (Eigen::Index i = 0; i < ad.ctx.train.rows(); i += 50) {
      const Eigen::VectorXd mu = ad.ctx.train.row(i).transpose();
      const LinearSystem ls = model.assemble(mu);
      const Eigen::VectorXd c = solve_rom_nonaffine(model, ab, mu).coefficients;
      const double ref = (ab.columns.transpose() * ls.f).norm();
      galerkin = std::max(galerkin, (ab.columns.transpose() * (ls.A * (ab.columns * c) - ls.f)).norm() / ref);
    }
  }

  // Determinism: two independent runs from the same config and seed.
  RunConfig ca = config("heat2d-random.cfg", "determinism-a");
  RunConfig cb = config("heat2d-random.cfg", "determinism-b");
  run_experiment(ca);
  run_experiment(cb);
  const auto slurp = [](const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string fa = slurp(fs::path(ca.out_dir) / "convergence.csv");
  const bool same = !fa.empty() && fa == slurp(fs::path(cb.out_dir) / "convergence.csv");

  const bool ok = ortho <= kOrthoTol && affine <= kAffineTol && galerkin <= kGalerkinTol && same;
  return {ok, fmt::format("orthonormality {:.1e} over {} enrichments (tol {:.0e}); affine reassembly {:.1e} (tol {:.0e}); "
                          "Galerkin residual {:.1e} (tol {:.0e}); convergence.csv {}",
                          ortho, enrichments, kOrthoTol, affine, kAffineTol, galerkin, kGalerkinTol,
                          same ? "byte-identical" : "differs")};
}

Verdict c10_trials() {
  RunConfig cfg = config("heat2d-random.cfg", "trials");
  cfg.mf.global_errors = false;
  const TrialsSummary s = trials(cfg, 10, cfg.out_dir);
  // Training index -> (mu_1 index, mu_2 index) on the tensor grid.
  const auto exp = build_experiment(cfg, false, false);
  const int n2 = cfg.grid.axes[1].count;
  const auto cell = [&](int train_index) {
    const int row = exp->train_rows[static_cast<std::size_t>(train_index)];
    return std::pair{row / n2, row % n2};
  };
  const std::vector<int> &ref = s.selected.front();
  int stable = 0;
  for (int p : ref) {
    const auto [a1, a2] = cell(p);
    bool everywhere = true;
    for (std::size_t t = 1; t < s.selected.size() && everywhere; ++t) {
      bool found = false;
      for (int q : s.selected[t]) {
        const auto [b1, b2] = cell(q);
        found = found || (std::abs(a1 - b1) <= 1 && std::abs(a2 - b2) <= 1);
      }
      everywhere = found;
    }
    stable += everywhere;
  }
  std::size_t lo = ref.size(), hi = ref.size();
  for (const auto &sel : s.selected) {
    lo = std::min(lo, sel.size());
    hi = std::max(hi, sel.size());
  }
  const bool ok = stable >= 6;
  return {ok, fmt::format("{} of {} locations of trial 1 recur within one grid cell in all 10 trials (need 6); "
                          "points per trial {}..{}",
                          stable, ref.size(), lo, hi)};
}

} // namespace

int main(int argc, char **argv) {
  g_work = fs::current_path() / "acceptance_out";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--work-dir") && i + 1 < argc)
      g_work = argv[++i];
    else if (!std::strcmp(argv[i], "--only") && i + 1 < argc)
      only.insert(std::atoi(argv[++i]));
    else {
      std::cerr << "usage: acceptance [--work-dir DIR] [--only N]...\n";
      return 2;
    }
  }
  spdlog::set_level(spdlog::level::warn);
  fs::create_directories(g_work);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"heat2d random-sketch reproduction", c1_heat_random},
      {"sketch independence", c2_sketch_independence},
      {"greedy RBM parity", c3_greedy_parity},
      {"error ordering", c4_error_ordering},
      {"advdiff9d desk-scale run", c5_desk_run},
      {"greediness trade-off", c6_greediness},
      {"DEIM oracle equivalence", c7_deim_oracle},
      {"analytic FEM check", c8_analytic_fem},
      {"invariant suite", c9_invariants},
      {"trials stability", c10_trials},
  };
  int passed = 0, run = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id))
      continue;
    ++run;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception &e) {
      v = {false, std::string("error: ") + e.what()};
    }
    passed += v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  [" << id << "] " << criteria[k].first << ": " << v.detail << std::endl;
  }
  std::cout << passed << " of " << run << " criteria passed" << std::endl;
  return passed == run ? 0 : 1;
}
