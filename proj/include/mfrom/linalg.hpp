#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace mfrom {

enum class SpaceTag { fine, coarse, coefficient };

// Columns are solutions (or reduced coefficients) at training parameters.
struct SnapshotMatrix {
  Eigen::MatrixXd values;
  std::vector<int> col_params;  // training index per column
  SpaceTag space = SpaceTag::fine;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }

  // Throws NumericalError on non-finite entries or a col_params size mismatch.
  void validate() const;
};

struct SvdTriple {
  Eigen::MatrixXd left;    // Phi
  Eigen::VectorXd sigma;   // nonincreasing
  Eigen::MatrixXd right;   // Psi

  // Count of singular values above rank_tol * sigma_1.
  int rank(double rank_tol = 1e-12) const;
};

// Orthonormal basis with one provenance entry per column.
struct ReducedBasis {
  Eigen::MatrixXd columns;
  std::vector<std::string> provenance;

  int rank() const { return static_cast<int>(columns.cols()); }
  bool empty() const { return columns.cols() == 0; }

  // max |Phi^T Phi - I|.
  double orthonormality_defect() const;

  static ReducedBasis empty_of_dim(int rows);
};

// Thin SVD (divide and conquer). Throws NumericalError for empty input or a
// failed decomposition.
SvdTriple thin_svd(const Eigen::MatrixXd &matrix);
SvdTriple thin_svd(const SnapshotMatrix &snapshots);

struct FixedRank {
  int r;
};
struct RelativeThreshold {
  double tol;  // keep sigma_i > tol * sigma_1
};
using TruncationCriterion = std::variant<FixedRank, RelativeThreshold>;

struct PodTruncation {
  ReducedBasis basis;
  Eigen::MatrixXd modes;   // leading right singular vectors
  Eigen::VectorXd sigma;
};

// Throws NumericalError when a fixed rank exceeds the numerical rank.
PodTruncation pod_truncate(const SvdTriple &svd, const TruncationCriterion &criterion,
                           double rank_tol = 1e-12);

// Cumulative energy fraction sum_{i<=r} sigma_i^2 / sum sigma_i^2 for r = 1..n.
Eigen::VectorXd energy_captured(const Eigen::VectorXd &sigma);

struct EnrichLog {
  std::vector<int> accepted;       // candidate columns appended
  std::vector<int> rejected;       // numerically inside the span
  std::vector<int> zero;           // zero candidates, skipped
};

// Orthonormalizes each candidate against the current basis, which grows as
// candidates are accepted. A candidate is appended when its residual ratio
// exceeds `gs_tol`. Each residual is orthogonalized twice; a third pass runs
// if the new column still deviates from orthonormality by more than 1e-12.
ReducedBasis gram_schmidt_enrich(const ReducedBasis &basis, const SnapshotMatrix &candidates,
                                 double gs_tol = 1e-10, EnrichLog *log = nullptr);

// sqrt(sum_i |u_i - u~_i|^2 / |u_i|^2) over the nonzero reference columns.
double rss_relative_error(const Eigen::MatrixXd &reference, const Eigen::MatrixXd &approx);

// max_i |u_i - u~_i| / |u_i| over the nonzero reference columns; 0 if none.
double max_relative_error(const Eigen::MatrixXd &reference, const Eigen::MatrixXd &approx);

// |u - v| / |u|; NaN when u is zero.
double relative_error(const Eigen::VectorXd &reference, const Eigen::VectorXd &approx);

// POD projection error with Pi = Phi Phi^T; zero columns are excluded with a
// warning. Throws NumericalError on a row mismatch.
double projection_error(const SnapshotMatrix &snapshots, const ReducedBasis &basis);
double projection_error(const Eigen::MatrixXd &snapshots, const ReducedBasis &basis);

} // namespace mfrom
