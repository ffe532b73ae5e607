#pragma once

#include <vector>

#include <Eigen/Core>

#include "mfrom/fem.hpp"
#include "mfrom/linalg.hpp"
#include "mfrom/mf_driver.hpp"

namespace mfrom {

// Triangular factor R of the Riesz representors of the affine residual terms
// f_p and A_q phi_j (columns p, then qf + q * r + j), with R^T R their X-Gram
// matrix. |r(mu, b)|_{X'} = |R w| costs O(Q^2 r^2) and, unlike expanding the
// squared norm, keeps full relative accuracy when the residual is tiny.
struct RieszBlocks {
  int qf = 0;
  int qa = 0;
  int r = 0;
  Eigen::MatrixXd factor;  // upper triangular, (qf + qa r) columns

  double dual_norm(const Eigen::VectorXd &theta_lhs, const Eigen::VectorXd &theta_rhs,
                   const Eigen::VectorXd &b) const;
};

// Throws NumericalError if `inner` is not SPD.
RieszBlocks riesz_blocks(const AffineSystem &system, const ReducedBasis &basis, const SparseMatrix &inner);

// Smallest generalized eigenvalue of (A, X), dense.
double coercivity_constant(const SparseMatrix &A, const SparseMatrix &X);

// alpha_bar * min_q theta_q(mu) / theta_q(mu_bar). Throws DomainError for a
// nonpositive theta.
double coercivity_lb(const Eigen::VectorXd &theta_mu, const Eigen::VectorXd &theta_bar, double alpha_bar);

struct GreedyOptions {
  double tol = 1e-6;
  int max_iter = 200;
  Eigen::VectorXd mu_bar;      // defaults to all ones
  bool relative = true;        // indicator divided by |u_R(mu)|_X
  double gs_tol = 1e-10;
  bool global_errors = false;
  bool timings = true;
};

struct GreedyState {
  ReducedBasis basis;
  std::vector<int> selected;
  std::vector<double> max_indicator;
  Eigen::VectorXd mu_bar;
  double alpha_bar = 0.0;
  std::vector<ErrorRow> history;  // eps_train holds the max indicator
  RunStatus status = RunStatus::max_iter;
};

// Residual-based error indicator at every row of `params`.
Eigen::VectorXd error_indicator(const AffineSystem &system, const ReducedBasis &basis, const SparseMatrix &inner,
                                double alpha_bar, const Eigen::VectorXd &mu_bar, const Eigen::MatrixXd &params,
                                bool relative);

// Requires an affine fine problem in ctx.
GreedyState greedy_loop(const MfContext &ctx, const GreedyOptions &opts);

} // namespace mfrom
