#include "mfrom/mf_driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "mfrom/errors.hpp"
#include "mfrom/rng.hpp"

namespace mfrom {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd hf_solve(const MfContext &ctx, int index) {
  try {
    return ctx.fine->solve(ctx.train.row(index).transpose());
  } catch (const SolverError &e) {
    throw SolverError(std::string(e.what()) + " (training index " + std::to_string(index) + ")");
  }
}

void append_columns(Eigen::MatrixXd &m, const Eigen::MatrixXd &cols) {
  if (m.cols() == 0) {
    m = cols;
    return;
  }
  const Eigen::Index c0 = m.cols();
  m.conservativeResize(Eigen::NoChange, c0 + cols.cols());
  m.rightCols(cols.cols()) = cols;
}

} // namespace

std::string to_string(SketchKind kind) { return kind == SketchKind::random ? "random" : "coarse"; }

std::string to_string(RunStatus status) {
  switch (status) {
  case RunStatus::converged:
    return "converged";
  case RunStatus::stalled:
    return "stalled";
  case RunStatus::max_iter:
    return "max-iter";
  }
  return "unknown";
}

Eigen::MatrixXd rom_coefficients(const Problem &problem, const ReducedBasis &basis, const Eigen::MatrixXd &params) {
  Eigen::MatrixXd out(basis.rank(), params.rows());
  if (basis.empty())
    return out;
  const auto rom = problem.reduce(basis);
  for (Eigen::Index i = 0; i < params.rows(); ++i)
    out.col(i) = rom->coefficients(params.row(i).transpose());
  return out;
}

LofiModel init_lofi_coarse(const Problem &coarse, const Eigen::MatrixXd &train) {
  LofiModel lofi;
  lofi.mode = LofiMode::coarse_snapshots;
  lofi.data = solve_all(coarse, train);
  return lofi;
}

MfState init_lofi_random(const MfContext &ctx, const MfOptions &opts) {
  const int n_train = static_cast<int>(ctx.train.rows());
  const int K = opts.sketch_size;
  if (K < 1 || K > n_train)
    throw ConfigError("sketch_size " + std::to_string(K) + " must lie in [1, " + std::to_string(n_train) + "]");
  MfState state;
  state.seed = opts.seed;
  state.deim = DeimState::empty(n_train);
  Rng rng(opts.seed);
  const std::vector<int> order = rng.permutation(n_train);
  ReducedBasis probe = ReducedBasis::empty_of_dim(ctx.fine->dim());
  std::vector<int> drawn;
  Eigen::MatrixXd snaps(ctx.fine->dim(), 0);
  for (int idx : order) {
    if (static_cast<int>(drawn.size()) == K)
      break;
    const Eigen::VectorXd s = hf_solve(ctx, idx);
    EnrichLog log;
    probe = gram_schmidt_enrich(probe, SnapshotMatrix{s, {idx}, SpaceTag::fine}, opts.gs_tol, &log);
    if (log.accepted.empty()) {
      spdlog::warn("random sketch: snapshot at training index {} is linearly dependent, drawing another", idx);
      continue;
    }
    drawn.push_back(idx);
    append_columns(snaps, s);
  }
  if (static_cast<int>(drawn.size()) < K)
    throw NumericalError("random sketch: only " + std::to_string(drawn.size()) +
                         " linearly independent snapshots in the training set");
  const PodTruncation pod = pod_truncate(thin_svd(snaps), RelativeThreshold{opts.rank_tol}, opts.rank_tol);
  state.basis = pod.basis;
  for (int i = 0; i < state.basis.rank(); ++i)
    state.basis.provenance[static_cast<std::size_t>(i)] = "random sketch mode " + std::to_string(i + 1);
  state.deim.selected = drawn;
  state.snapshots = snaps;
  state.coefficients = rom_coefficients(*ctx.fine, state.basis, ctx.train);
  state.lofi = LofiModel{LofiMode::rom_coefficients, state.coefficients};
  spdlog::info("random sketch: K = {}, rank {}", K, state.basis.rank());
  return state;
}

MfState init_state(const MfContext &ctx, const MfOptions &opts) {
  if (!ctx.fine)
    throw ConfigError("multi-fidelity run needs a fine problem");
  if (opts.sketch == SketchKind::random)
    return init_lofi_random(ctx, opts);
  if (!ctx.coarse)
    throw ConfigError("coarse sketch needs a coarse problem");
  MfState state;
  state.seed = opts.seed;
  const int n_train = static_cast<int>(ctx.train.rows());
  state.deim = DeimState::empty(n_train);
  state.basis = ReducedBasis::empty_of_dim(ctx.fine->dim());
  state.coefficients.resize(0, n_train);
  state.snapshots.resize(ctx.fine->dim(), 0);
  state.lofi = init_lofi_coarse(*ctx.coarse, ctx.train);
  spdlog::info("coarse sketch: {} dofs x {} parameters", state.lofi.data.rows(), n_train);
  return state;
}

ParametricModes parametric_modes(const LofiModel &lofi, double rank_tol, bool normalize) {
  if (lofi.data.size() == 0 || lofi.data.cwiseAbs().maxCoeff() == 0.0)
    throw NumericalError("parametric_modes: low-fidelity data is zero");
  Eigen::MatrixXd data = lofi.data;
  if (normalize)
    for (Eigen::Index j = 0; j < data.cols(); ++j)
      if (const double n = data.col(j).norm(); n > 0.0)
        data.col(j) /= n;
  const SvdTriple svd = thin_svd(data);
  const int r = svd.rank(rank_tol);
  ParametricModes out;
  out.modes = svd.right.leftCols(r);
  out.sigma = svd.sigma.head(r);
  if (lofi.mode == LofiMode::rom_coefficients)
    out.rotation = svd.left;
  return out;
}

double error_train(const MfState &state) {
  double worst = 0.0;
  for (std::size_t k = 0; k < state.deim.selected.size(); ++k) {
    const int idx = state.deim.selected[k];
    const Eigen::VectorXd u = state.snapshots.col(static_cast<Eigen::Index>(k));
    const Eigen::VectorXd approx = state.basis.empty() ? Eigen::VectorXd::Zero(u.size())
                                                       : Eigen::VectorXd(state.basis.columns * state.coefficients.col(idx));
    const double e = relative_error(u, approx);
    if (!std::isnan(e))
      worst = std::max(worst, e);
  }
  return worst;
}

double predicted_error(const MfState &state, const std::vector<int> &points, const Eigen::MatrixXd &snapshots) {
  double worst = nan;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Eigen::VectorXd u = snapshots.col(static_cast<Eigen::Index>(k));
    double e;
    if (state.basis.empty() || state.coefficients.rows() == 0)
      e = u.norm() > 0.0 ? 1.0 : nan;
    else
      e = relative_error(u, state.basis.columns * state.coefficients.col(points[k]));
    if (!std::isnan(e))
      worst = std::isnan(worst) ? e : std::max(worst, e);
  }
  return worst;
}

double error_val(const MfContext &ctx, const ReducedBasis &basis) {
  if (ctx.val.rows() == 0)
    return nan;
  if (ctx.val_snapshots.cols() != ctx.val.rows())
    throw ConfigError("validation snapshots missing: run precompute-validation or enable diagnostics");
  if (basis.empty())
    return 1.0;
  const Eigen::MatrixXd coeffs = rom_coefficients(*ctx.fine, basis, ctx.val);
  return max_relative_error(ctx.val_snapshots, basis.columns * coeffs);
}

double error_rom_global(const MfContext &ctx, const MfState &state) {
  if (ctx.train_snapshots.cols() != ctx.train.rows())
    throw ConfigError("global errors need every training snapshot (diagnostics disabled)");
  if (state.basis.empty())
    return rss_relative_error(ctx.train_snapshots, Eigen::MatrixXd::Zero(ctx.train_snapshots.rows(), ctx.train_snapshots.cols()));
  return rss_relative_error(ctx.train_snapshots, state.basis.columns * state.coefficients);
}

double error_pod_global(const MfContext &ctx, const ReducedBasis &basis) {
  if (ctx.train_snapshots.cols() != ctx.train.rows())
    throw ConfigError("global errors need every training snapshot (diagnostics disabled)");
  return projection_error(ctx.train_snapshots, basis);
}

MfState mf_step(const MfContext &ctx, MfState state, const MfOptions &opts) {
  const auto t0 = std::chrono::steady_clock::now();
  ++state.iteration;
  state.deim.iteration = state.iteration;

  // (a) parametric modes; in coefficient mode the basis absorbs the left factor
  // so that B becomes Sigma Psi^T.
  ParametricModes pm = parametric_modes(state.lofi, opts.rank_tol, opts.normalize);
  if (state.lofi.mode == LofiMode::rom_coefficients) {
    state.basis.columns = state.basis.columns * pm.rotation;
    for (int i = 0; i < state.basis.rank(); ++i)
      state.basis.provenance[static_cast<std::size_t>(i)] = "rotated mode " + std::to_string(i + 1);
    state.coefficients = pm.rotation.transpose() * state.coefficients;
    state.lofi.data = state.coefficients;
  }
  state.lofi_sigma.push_back(pm.sigma);

  // (b) new parametric information only
  const OrthoResult orth = opts.ortho == OrthoOrder::energy
                               ? orthogonalize_against_history(pm.modes, pm.sigma, state.deim, opts.rank_tol)
                               : orthogonalize_against_history(pm.modes, state.deim, opts.rank_tol);
  if (orth.no_new_information()) {
    state.stalled = true;
    return state;
  }

  // (c) sampling
  const int p = std::min<int>(opts.points_per_iter, static_cast<int>(orth.modes.cols()));
  DeimLog dlog;
  state.deim = deim_select(orth.modes, p, state.deim, opts.deim, &dlog);
  if (opts.history == HistoryPolicy::returned) {
    extend_history(state.deim, orth.modes);
  } else {
    Eigen::MatrixXd used(orth.modes.rows(), static_cast<Eigen::Index>(dlog.consumed_columns.size()));
    for (std::size_t k = 0; k < dlog.consumed_columns.size(); ++k)
      used.col(static_cast<Eigen::Index>(k)) = orth.modes.col(dlog.consumed_columns[k]);
    extend_history(state.deim, used);
  }
  if (dlog.new_indices.empty()) {
    state.stalled = true;
    return state;
  }

  // (d) high-fidelity snapshots and enrichment
  Eigen::MatrixXd snaps(ctx.fine->dim(), static_cast<Eigen::Index>(dlog.new_indices.size()));
  for (std::size_t k = 0; k < dlog.new_indices.size(); ++k)
    snaps.col(static_cast<Eigen::Index>(k)) = hf_solve(ctx, dlog.new_indices[k]);
  ErrorRow row;
  row.iteration = state.iteration;
  row.new_points = dlog.new_indices;
  row.eps_train = predicted_error(state, dlog.new_indices, snaps);

  EnrichLog elog;
  state.basis = gram_schmidt_enrich(state.basis, SnapshotMatrix{snaps, dlog.new_indices, SpaceTag::fine},
                                    opts.gs_tol, &elog);
  if (!elog.rejected.empty())
    spdlog::info("iteration {}: {} snapshots already in the span", state.iteration, elog.rejected.size());
  append_columns(state.snapshots, snaps);

  // (e) ROM over the training set, (f) low-fidelity update
  state.coefficients = rom_coefficients(*ctx.fine, state.basis, ctx.train);
  state.lofi = LofiModel{LofiMode::rom_coefficients, state.coefficients};

  row.n_points = static_cast<int>(state.deim.selected.size());
  row.rank = state.basis.rank();
  row.basis_defect = state.basis.orthonormality_defect();
  row.eps_consistency = error_train(state);
  row.eps_val = error_val(ctx, state.basis);
  row.eps_rom = opts.global_errors ? error_rom_global(ctx, state) : nan;
  row.eps_pod = opts.global_errors ? error_pod_global(ctx, state.basis) : nan;
  row.seconds = opts.timings ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;
  state.history.push_back(row);
  spdlog::info("iteration {}: points {}, rank {}, eps_train {:.3e}, eps_val {:.3e}", row.iteration, row.n_points,
               row.rank, row.eps_train, row.eps_val);
  return state;
}

MfReport run(const MfContext &ctx, const MfOptions &opts) {
  MfReport report;
  report.options = opts;
  report.state = init_state(ctx, opts);
  while (report.state.iteration < opts.max_iter) {
    report.state = mf_step(ctx, std::move(report.state), opts);
    if (report.state.stalled) {
      report.status = RunStatus::stalled;
      return report;
    }
    const ErrorRow &row = report.state.history.back();
    const bool train_ok = row.eps_train < opts.tol;
    const bool val_ok = !opts.require_val || row.eps_val < opts.tol;
    if (train_ok && val_ok) {
      report.status = RunStatus::converged;
      return report;
    }
  }
  report.status = RunStatus::max_iter;
  return report;
}

} // namespace mfrom
