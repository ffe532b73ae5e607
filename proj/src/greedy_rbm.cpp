#include "mfrom/greedy_rbm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <spdlog/spdlog.h>

#include "mfrom/errors.hpp"
#include "mfrom/rom.hpp"

namespace mfrom {

double RieszBlocks::dual_norm(const Eigen::VectorXd &theta_lhs, const Eigen::VectorXd &theta_rhs,
                              const Eigen::VectorXd &b) const {
  Eigen::VectorXd w(qf + qa * r);
  w.head(qf) = theta_rhs;
  for (int q = 0; q < qa; ++q)
    w.segment(qf + q * r, r) = -theta_lhs[q] * b;
  return (factor.triangularView<Eigen::Upper>() * w).norm();
}

RieszBlocks riesz_blocks(const AffineSystem &system, const ReducedBasis &basis, const SparseMatrix &inner) {
  Eigen::SimplicialLLT<SparseMatrix> llt(inner);
  if (llt.info() != Eigen::Success)
    throw NumericalError("riesz_blocks: inner product matrix is not SPD");
  RieszBlocks out;
  out.qf = static_cast<int>(system.rhs.size());
  out.qa = static_cast<int>(system.lhs.size());
  out.r = basis.rank();
  const Eigen::Index n = system.dim();
  Eigen::MatrixXd terms(n, out.qf + out.qa * out.r);
  for (int p = 0; p < out.qf; ++p)
    terms.col(p) = system.rhs[static_cast<std::size_t>(p)].value;
  for (int q = 0; q < out.qa; ++q)
    if (out.r > 0)
      terms.middleCols(out.qf + q * out.r, out.r) = system.lhs[static_cast<std::size_t>(q)].value * basis.columns;
  // P X P^T = L L^T, so t^T X^{-1} t = |L^{-1} P t|^2.
  const Eigen::MatrixXd scaled = llt.matrixL().solve(llt.permutationP() * terms);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(scaled);
  const Eigen::Index m = terms.cols(), k = std::min<Eigen::Index>(m, n);
  out.factor = Eigen::MatrixXd::Zero(m, m);
  out.factor.topRows(k) = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

double coercivity_constant(const SparseMatrix &A, const SparseMatrix &X) {
  const Eigen::MatrixXd Ad(A), Xd(X);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Xd, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw NumericalError("coercivity_constant: generalized eigenproblem failed");
  return es.eigenvalues()[0];
}

double coercivity_lb(const Eigen::VectorXd &theta_mu, const Eigen::VectorXd &theta_bar, double alpha_bar) {
  double ratio = std::numeric_limits<double>::infinity();
  for (Eigen::Index q = 0; q < theta_mu.size(); ++q) {
    if (!(theta_mu[q] > 0.0) || !(theta_bar[q] > 0.0))
      throw DomainError("coercivity_lb: theta_" + std::to_string(q) + " is not positive");
    ratio = std::min(ratio, theta_mu[q] / theta_bar[q]);
  }
  return alpha_bar * ratio;
}

Eigen::VectorXd error_indicator(const AffineSystem &system, const ReducedBasis &basis, const SparseMatrix &inner,
                                double alpha_bar, const Eigen::VectorXd &mu_bar, const Eigen::MatrixXd &params,
                                bool relative) {
  const RieszBlocks blocks = riesz_blocks(system, basis, inner);
  const Eigen::VectorXd theta_bar = system.theta.lhs(mu_bar);
  std::unique_ptr<ReducedAffineSystem> rsys;
  Eigen::MatrixXd gram;
  if (!basis.empty()) {
    rsys = std::make_unique<ReducedAffineSystem>(project_affine(system, basis));
    gram = basis.columns.transpose() * (inner * basis.columns);
  }
  Eigen::VectorXd out(params.rows());
  for (Eigen::Index i = 0; i < params.rows(); ++i) {
    const Eigen::VectorXd mu = params.row(i).transpose();
    const Eigen::VectorXd th_a = system.theta.lhs(mu);
    const Eigen::VectorXd b = rsys ? solve_rom_affine(*rsys, mu).coefficients : Eigen::VectorXd(0);
    const double delta = blocks.dual_norm(th_a, system.theta.rhs(mu), b) / coercivity_lb(th_a, theta_bar, alpha_bar);
    if (!relative || !rsys) {
      out[i] = delta;
      continue;
    }
    const double unorm = std::sqrt(std::max(b.dot(gram * b), 0.0));
    out[i] = unorm > 0.0 ? delta / unorm : (delta > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
  return out;
}

GreedyState greedy_loop(const MfContext &ctx, const GreedyOptions &opts) {
  if (!ctx.fine || !ctx.fine->affine())
    throw ConfigError("greedy baseline needs an affine problem");
  const AffineSystem &system = *ctx.fine->affine();
  GreedyState state;
  state.mu_bar = opts.mu_bar.size() ? opts.mu_bar : Eigen::VectorXd::Ones(system.theta.param_dim);
  const SparseMatrix inner = system.operator_at(state.mu_bar);
  state.alpha_bar = coercivity_constant(inner, inner);
  state.basis = ReducedBasis::empty_of_dim(system.dim());
  MfState probe;  // shares the error helpers with the multi-fidelity driver

  for (int it = 1; it <= opts.max_iter; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd delta = error_indicator(system, state.basis, inner, state.alpha_bar, state.mu_bar,
                                                  ctx.train, opts.relative && !state.basis.empty());
    Eigen::Index arg = 0;
    const double worst = delta.maxCoeff(&arg);
    state.max_indicator.push_back(worst);
    spdlog::info("greedy iteration {}: rank {}, max indicator {:.3e} at {}", it, state.basis.rank(), worst, arg);
    if (!state.basis.empty() && worst < opts.tol) {
      state.status = RunStatus::converged;
      return state;
    }
    const int idx = static_cast<int>(arg);
    if (std::find(state.selected.begin(), state.selected.end(), idx) != state.selected.end()) {
      spdlog::warn("greedy: argmax repeats training index {}", idx);
      state.status = RunStatus::stalled;
      return state;
    }
    const Eigen::VectorXd snap = ctx.fine->solve(ctx.train.row(idx).transpose());
    EnrichLog log;
    state.basis = gram_schmidt_enrich(state.basis, SnapshotMatrix{snap, {idx}, SpaceTag::fine}, opts.gs_tol, &log);
    if (log.accepted.empty()) {
      spdlog::warn("greedy: snapshot at training index {} adds nothing", idx);
      state.status = RunStatus::stalled;
      return state;
    }
    state.selected.push_back(idx);

    ErrorRow row;
    row.iteration = it;
    row.n_points = static_cast<int>(state.selected.size());
    row.rank = state.basis.rank();
    row.basis_defect = state.basis.orthonormality_defect();
    row.eps_train = worst;
    row.new_points = {idx};
    probe.basis = state.basis;
    row.eps_consistency = std::numeric_limits<double>::quiet_NaN();
    row.eps_val = error_val(ctx, state.basis);
    if (opts.global_errors) {
      probe.coefficients = rom_coefficients(*ctx.fine, state.basis, ctx.train);
      row.eps_rom = error_rom_global(ctx, probe);
      row.eps_pod = error_pod_global(ctx, state.basis);
    } else {
      row.eps_rom = row.eps_pod = std::numeric_limits<double>::quiet_NaN();
    }
    row.seconds = opts.timings ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;
    state.history.push_back(row);
  }
  state.status = RunStatus::max_iter;
  return state;
}

} // namespace mfrom
