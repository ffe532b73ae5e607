#pragma once

#include <vector>

#include <Eigen/Core>

namespace mfrom {

enum class InterpRows {
  selected,  // rows of the previously selected indices (standard DEIM)
  leading,   // first k rows, as Algorithm 1 is literally printed
};

enum class HistoryPolicy {
  returned,  // every column returned by orthogonalize_against_history
  consumed,  // only columns that produced a selection
};

struct DeimOptions {
  InterpRows rows = InterpRows::selected;
  double rank_tol = 1e-12;       // drop threshold for orthogonalized modes
  double singular_tol = 1e-13;   // reciprocal condition of the interpolation block
};

// Sampler state carried across multi-fidelity iterations. `selected` holds
// every point that already has a high-fidelity snapshot (sketch points
// included); `interp_rows`/`interp_basis` hold only points chosen by DEIM and
// the mode columns that chose them.
struct DeimState {
  std::vector<int> selected;
  Eigen::MatrixXd history;       // n_train x h, orthonormal
  Eigen::MatrixXd interp_basis;  // n_train x k
  std::vector<int> interp_rows;  // k entries
  int iteration = 0;

  static DeimState empty(int n_train);
  int n_train() const { return static_cast<int>(history.rows()); }
  bool is_selected(int index) const;

  // Throws NumericalError when selections repeat or the history has drifted
  // from orthonormality by more than `tol`.
  void check(double tol = 1e-10) const;
};

struct DeimLog {
  std::vector<int> new_indices;
  std::vector<int> consumed_columns;
  std::vector<int> skipped_columns;   // argmax collided with an earlier selection
  std::vector<int> exhausted_columns; // residual vanished
};

// Greedy interpolation-point selection over the columns of `psi`
// (n_train x m), resuming from `state`. Columns are consumed in order until
// `p` new indices are found. Each column is first reduced by interpolation
// on the current DEIM rows, and its residual argmax (ties to the lowest row)
// is the candidate. Throws NumericalError if p exceeds the column count or an
// interpolation block is singular.
DeimState deim_select(const Eigen::MatrixXd &psi, int p, const DeimState &state,
                      const DeimOptions &opts = {}, DeimLog *log = nullptr);

struct OrthoResult {
  Eigen::MatrixXd modes;        // orthonormal, orthogonal to the history
  std::vector<int> source;      // originating column of psi per returned column
  std::vector<int> dropped;
  bool no_new_information() const { return modes.cols() == 0; }
};

// Removes the history components from the columns of psi and orthonormalizes
// the remainder. Columns whose residual norm falls below `rank_tol` times
// their original norm are dropped.
OrthoResult orthogonalize_against_history(const Eigen::MatrixXd &psi, const DeimState &state,
                                          double rank_tol = 1e-12);

// Energy-ordered variant: left singular vectors of (I - H H^T) psi diag(w),
// kept while the singular value exceeds rank_tol * max(w). New directions
// with large weight come first; `source` is left empty.
OrthoResult orthogonalize_against_history(const Eigen::MatrixXd &psi, const Eigen::VectorXd &weights,
                                          const DeimState &state, double rank_tol = 1e-12);

// Appends orthonormal columns to the history, re-orthogonalizing them once
// more against it.
void extend_history(DeimState &state, const Eigen::MatrixXd &columns);

} // namespace mfrom
