#include "mfrom/linalg.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>
#include <spdlog/spdlog.h>

#include "mfrom/errors.hpp"

namespace mfrom {

void SnapshotMatrix::validate() const {
  if (!values.allFinite())
    throw NumericalError("snapshot matrix has non-finite entries");
  if (col_params.size() != static_cast<std::size_t>(values.cols()))
    throw NumericalError("snapshot matrix: col_params has " + std::to_string(col_params.size()) +
                         " entries for " + std::to_string(values.cols()) + " columns");
}

int SvdTriple::rank(double rank_tol) const {
  if (sigma.size() == 0 || sigma[0] <= 0.0)
    return 0;
  int r = 0;
  while (r < sigma.size() && sigma[r] > rank_tol * sigma[0])
    ++r;
  return r;
}

double ReducedBasis::orthonormality_defect() const {
  if (columns.cols() == 0)
    return 0.0;
  const Eigen::MatrixXd gram = columns.transpose() * columns;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

ReducedBasis ReducedBasis::empty_of_dim(int rows) {
  return ReducedBasis{Eigen::MatrixXd(rows, 0), {}};
}

SvdTriple thin_svd(const Eigen::MatrixXd &matrix) {
  if (matrix.rows() == 0 || matrix.cols() == 0)
    throw NumericalError("thin_svd: empty matrix");
  if (!matrix.allFinite())
    throw NumericalError("thin_svd: non-finite entries in a " + std::to_string(matrix.rows()) + "x" +
                         std::to_string(matrix.cols()) + " matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("thin_svd: decomposition failed for a " + std::to_string(matrix.rows()) + "x" +
                         std::to_string(matrix.cols()) + " matrix");
  return SvdTriple{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

SvdTriple thin_svd(const SnapshotMatrix &snapshots) {
  snapshots.validate();
  return thin_svd(snapshots.values);
}

PodTruncation pod_truncate(const SvdTriple &svd, const TruncationCriterion &criterion, double rank_tol) {
  const int numerical_rank = svd.rank(rank_tol);
  int r = 0;
  if (const auto *fixed = std::get_if<FixedRank>(&criterion)) {
    if (fixed->r < 0 || fixed->r > numerical_rank)
      throw NumericalError("pod_truncate: requested rank " + std::to_string(fixed->r) +
                           " exceeds the numerical rank " + std::to_string(numerical_rank));
    r = fixed->r;
  } else {
    r = svd.rank(std::get<RelativeThreshold>(criterion).tol);
  }
  PodTruncation out;
  out.basis.columns = svd.left.leftCols(r);
  for (int i = 0; i < r; ++i)
    out.basis.provenance.push_back("pod mode " + std::to_string(i + 1));
  out.modes = svd.right.leftCols(r);
  out.sigma = svd.sigma.head(r);
  return out;
}

Eigen::VectorXd energy_captured(const Eigen::VectorXd &sigma) {
  Eigen::VectorXd energy(sigma.size());
  const double total = sigma.squaredNorm();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    acc += sigma[i] * sigma[i];
    energy[i] = total > 0.0 ? acc / total : 1.0;
  }
  return energy;
}

ReducedBasis gram_schmidt_enrich(const ReducedBasis &basis, const SnapshotMatrix &candidates,
                                 double gs_tol, EnrichLog *log) {
  if (basis.columns.rows() != 0 && candidates.rows() != basis.columns.rows())
    throw NumericalError("gram_schmidt_enrich: candidate rows " + std::to_string(candidates.rows()) +
                         " do not match basis rows " + std::to_string(basis.columns.rows()));
  ReducedBasis out = basis;
  if (out.empty())
    out.columns.resize(candidates.rows(), 0);

  for (int l = 0; l < candidates.cols(); ++l) {
    const Eigen::VectorXd s = candidates.values.col(l);
    const double snorm = s.norm();
    if (snorm == 0.0) {
      spdlog::debug("gram_schmidt_enrich: candidate {} is zero, skipped", l);
      if (log)
        log->zero.push_back(l);
      continue;
    }
    Eigen::VectorXd phi = s;
    const auto &V = out.columns;
    for (int pass = 0; pass < 2; ++pass)
      phi -= V * (V.transpose() * phi);
    const double ratio = phi.norm() / snorm;
    if (!(ratio > gs_tol)) {
      spdlog::debug("gram_schmidt_enrich: candidate {} rejected (residual ratio {:.3e})", l, ratio);
      if (log)
        log->rejected.push_back(l);
      continue;
    }
    phi /= phi.norm();
    if (V.cols() > 0 && (V.transpose() * phi).cwiseAbs().maxCoeff() > 1e-12) {
      phi -= V * (V.transpose() * phi);
      phi /= phi.norm();
    }
    out.columns.conservativeResize(Eigen::NoChange, out.columns.cols() + 1);
    out.columns.col(out.columns.cols() - 1) = phi;
    const int param = l < static_cast<int>(candidates.col_params.size()) ? candidates.col_params[static_cast<std::size_t>(l)] : -1;
    out.provenance.push_back("snapshot at train index " + std::to_string(param));
    if (log)
      log->accepted.push_back(l);
  }
  return out;
}

double relative_error(const Eigen::VectorXd &reference, const Eigen::VectorXd &approx) {
  const double n = reference.norm();
  if (n == 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return (reference - approx).norm() / n;
}

double rss_relative_error(const Eigen::MatrixXd &reference, const Eigen::MatrixXd &approx) {
  double acc = 0.0;
  int skipped = 0;
  for (Eigen::Index i = 0; i < reference.cols(); ++i) {
    const double e = relative_error(reference.col(i), approx.col(i));
    if (std::isnan(e)) {
      ++skipped;
      continue;
    }
    acc += e * e;
  }
  if (skipped > 0)
    spdlog::debug("relative error: {} zero reference columns excluded", skipped);
  return std::sqrt(acc);
}

double max_relative_error(const Eigen::MatrixXd &reference, const Eigen::MatrixXd &approx) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < reference.cols(); ++i) {
    const double e = relative_error(reference.col(i), approx.col(i));
    if (!std::isnan(e))
      worst = std::max(worst, e);
  }
  return worst;
}

double projection_error(const Eigen::MatrixXd &snapshots, const ReducedBasis &basis) {
  if (basis.columns.rows() != 0 && basis.columns.rows() != snapshots.rows())
    throw NumericalError("projection_error: snapshot rows " + std::to_string(snapshots.rows()) +
                         " do not match basis rows " + std::to_string(basis.columns.rows()));
  int zero = 0;
  for (Eigen::Index i = 0; i < snapshots.cols(); ++i)
    zero += snapshots.col(i).norm() == 0.0 ? 1 : 0;
  if (zero > 0)
    spdlog::debug("projection_error: {} zero snapshot columns excluded", zero);
  if (basis.empty())
    return rss_relative_error(snapshots, Eigen::MatrixXd::Zero(snapshots.rows(), snapshots.cols()));
  const Eigen::MatrixXd projected = basis.columns * (basis.columns.transpose() * snapshots);
  return rss_relative_error(snapshots, projected);
}

double projection_error(const SnapshotMatrix &snapshots, const ReducedBasis &basis) {
  return projection_error(snapshots.values, basis);
}

} // namespace mfrom
