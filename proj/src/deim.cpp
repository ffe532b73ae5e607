#include "mfrom/deim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <spdlog/spdlog.h>

#include "mfrom/errors.hpp"
#include "mfrom/linalg.hpp"

namespace mfrom {

namespace {

// Lowest row index attaining max |v|.
int argmax_abs(const Eigen::VectorXd &v) {
  int best = 0;
  double value = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > value) {
      value = std::abs(v[i]);
      best = static_cast<int>(i);
    }
  }
  return best;
}

Eigen::VectorXd interpolation_residual(const Eigen::VectorXd &col, const DeimState &s, InterpRows rows,
                                       double singular_tol, int column_id) {
  const Eigen::Index k = s.interp_basis.cols();
  if (k == 0)
    return col;
  Eigen::MatrixXd block(k, k);
  Eigen::VectorXd rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index row = rows == InterpRows::selected ? s.interp_rows[static_cast<std::size_t>(i)] : i;
    block.row(i) = s.interp_basis.row(row);
    rhs[i] = col[row];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(block);
  const double rcond = lu.rcond();
  if (!(rcond > singular_tol))
    throw NumericalError("deim_select: interpolation block singular (rcond " + std::to_string(rcond) +
                         ") while processing column " + std::to_string(column_id));
  return col - s.interp_basis * lu.solve(rhs);
}

} // namespace

DeimState DeimState::empty(int n_train) {
  DeimState s;
  s.history.resize(n_train, 0);
  s.interp_basis.resize(n_train, 0);
  return s;
}

bool DeimState::is_selected(int index) const {
  return std::find(selected.begin(), selected.end(), index) != selected.end();
}

void DeimState::check(double tol) const {
  std::vector<int> sorted = selected;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw NumericalError("deim state: repeated selection");
  if (history.cols() > 0) {
    const Eigen::MatrixXd g = history.transpose() * history;
    const double defect = (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    if (defect > tol)
      throw NumericalError("deim state: history orthonormality defect " + std::to_string(defect));
  }
}

DeimState deim_select(const Eigen::MatrixXd &psi, int p, const DeimState &state, const DeimOptions &opts,
                      DeimLog *log) {
  if (p < 0 || p > psi.cols())
    throw NumericalError("deim_select: " + std::to_string(p) + " points requested from " +
                         std::to_string(psi.cols()) + " modes");
  DeimState out = state;
  if (out.interp_basis.cols() == 0)
    out.interp_basis.resize(psi.rows(), 0);
  if (out.history.cols() == 0 && out.history.rows() != psi.rows())
    out.history.resize(psi.rows(), 0);
  if (out.interp_basis.rows() != psi.rows())
    throw NumericalError("deim_select: modes have " + std::to_string(psi.rows()) + " rows, state has " +
                         std::to_string(out.interp_basis.rows()));
  if (opts.rows == InterpRows::leading && out.interp_basis.cols() + p > psi.rows())
    throw NumericalError("deim_select: leading-rows variant needs more rows than available");

  int found = 0;
  for (int l = 0; l < psi.cols() && found < p; ++l) {
    const Eigen::VectorXd r = interpolation_residual(psi.col(l), out, opts.rows, opts.singular_tol, l);
    const double scale = psi.col(l).cwiseAbs().maxCoeff();
    const int idx = argmax_abs(r);
    if (!(std::abs(r[idx]) > opts.rank_tol * std::max(scale, 1e-300))) {
      spdlog::debug("deim_select: column {} is interpolated exactly, skipped", l);
      if (log)
        log->exhausted_columns.push_back(l);
      continue;
    }
    if (out.is_selected(idx)) {
      spdlog::info("deim_select: column {} points at already selected index {}, skipped", l, idx);
      if (log)
        log->skipped_columns.push_back(l);
      continue;
    }
    out.interp_basis.conservativeResize(Eigen::NoChange, out.interp_basis.cols() + 1);
    out.interp_basis.col(out.interp_basis.cols() - 1) = psi.col(l);
    out.interp_rows.push_back(idx);
    out.selected.push_back(idx);
    ++found;
    if (log) {
      log->new_indices.push_back(idx);
      log->consumed_columns.push_back(l);
    }
  }
  return out;
}

OrthoResult orthogonalize_against_history(const Eigen::MatrixXd &psi, const DeimState &state, double rank_tol) {
  const Eigen::Index n = psi.rows();
  if (state.history.cols() > 0 && state.history.rows() != n)
    throw NumericalError("orthogonalize_against_history: modes have " + std::to_string(n) +
                         " rows, history has " + std::to_string(state.history.rows()));
  OrthoResult out;
  out.modes.resize(n, 0);
  for (Eigen::Index l = 0; l < psi.cols(); ++l) {
    const double norm0 = psi.col(l).norm();
    Eigen::VectorXd v = psi.col(l);
    for (int pass = 0; pass < 2; ++pass) {
      if (state.history.cols() > 0)
        v -= state.history * (state.history.transpose() * v);
      if (out.modes.cols() > 0)
        v -= out.modes * (out.modes.transpose() * v);
    }
    const double norm = v.norm();
    if (!(norm > rank_tol * norm0)) {
      spdlog::debug("orthogonalize_against_history: column {} dropped (residual {:.3e})", l, norm / norm0);
      out.dropped.push_back(static_cast<int>(l));
      continue;
    }
    out.modes.conservativeResize(Eigen::NoChange, out.modes.cols() + 1);
    out.modes.col(out.modes.cols() - 1) = v / norm;
    out.source.push_back(static_cast<int>(l));
  }
  if (out.no_new_information())
    spdlog::info("orthogonalize_against_history: no new parametric information");
  return out;
}

OrthoResult orthogonalize_against_history(const Eigen::MatrixXd &psi, const Eigen::VectorXd &weights,
                                          const DeimState &state, double rank_tol) {
  const Eigen::Index n = psi.rows();
  if (weights.size() != psi.cols())
    throw NumericalError("orthogonalize_against_history: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(psi.cols()) + " modes");
  if (state.history.cols() > 0 && state.history.rows() != n)
    throw NumericalError("orthogonalize_against_history: modes have " + std::to_string(n) +
                         " rows, history has " + std::to_string(state.history.rows()));
  OrthoResult out;
  out.modes.resize(n, 0);
  if (psi.cols() == 0 || weights.maxCoeff() <= 0.0)
    return out;
  Eigen::MatrixXd v = psi * weights.asDiagonal();
  for (int pass = 0; pass < 2; ++pass)
    if (state.history.cols() > 0)
      v -= state.history * (state.history.transpose() * v);
  const SvdTriple svd = thin_svd(v);
  const double cut = rank_tol * weights.maxCoeff();
  int keep = 0;
  while (keep < svd.sigma.size() && svd.sigma[keep] > cut)
    ++keep;
  for (Eigen::Index l = keep; l < svd.sigma.size(); ++l)
    out.dropped.push_back(static_cast<int>(l));
  spdlog::debug("orthogonalize_against_history: kept {} of {}, leading {:.3e}, last {:.3e}", keep, psi.cols(),
                svd.sigma.size() ? svd.sigma[0] / weights.maxCoeff() : 0.0, keep ? svd.sigma[keep - 1] / weights.maxCoeff() : 0.0);
  out.modes = svd.left.leftCols(keep);
  if (out.no_new_information())
    spdlog::info("orthogonalize_against_history: no new parametric information");
  return out;
}

void extend_history(DeimState &state, const Eigen::MatrixXd &columns) {
  if (columns.cols() == 0)
    return;
  if (state.history.cols() == 0)
    state.history.resize(columns.rows(), 0);
  for (Eigen::Index l = 0; l < columns.cols(); ++l) {
    Eigen::VectorXd v = columns.col(l);
    if (state.history.cols() > 0)
      v -= state.history * (state.history.transpose() * v);
    const double norm = v.norm();
    if (!(norm > 1e-12))
      continue;
    state.history.conservativeResize(Eigen::NoChange, state.history.cols() + 1);
    state.history.col(state.history.cols() - 1) = v / norm;
  }
}

} // namespace mfrom
