#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mfrom/fem.hpp"
#include "mfrom/linalg.hpp"

namespace mfrom {

// Reduced affine operators. Holds no reference to the full-order data, so the
// online solve cost depends on r and the number of terms only.
struct ReducedAffineSystem {
  std::vector<AffineTerm<Eigen::MatrixXd>> lhs;
  std::vector<AffineTerm<Eigen::VectorXd>> rhs;
  ThetaRule theta;
  int r = 0;

  Eigen::MatrixXd operator_at(const Eigen::VectorXd &mu) const;
  Eigen::VectorXd rhs_at(const Eigen::VectorXd &mu) const;
};

struct RomSolution {
  Eigen::VectorXd mu;
  Eigen::VectorXd coefficients;
};

// A_q -> Phi^T A_q Phi, f_q -> Phi^T f_q. Throws NumericalError on a
// dimension mismatch.
ReducedAffineSystem project_affine(const AffineSystem &system, const ReducedBasis &basis);

// Throws NumericalError if the reduced operator is singular at mu.
RomSolution solve_rom_affine(const ReducedAffineSystem &rsys, const Eigen::VectorXd &mu);

// Assembles the full system at mu, projects it and solves the r x r system.
// Cost is O(N) per parameter.
RomSolution solve_rom_nonaffine(const AdvDiffModel &model, const ReducedBasis &basis, const Eigen::VectorXd &mu);

// Phi b on the free dofs.
Eigen::VectorXd reconstruct(const ReducedBasis &basis, const RomSolution &sol);
Eigen::VectorXd reconstruct(const ReducedBasis &basis, const Eigen::VectorXd &coefficients);

// Dense solve of a small reduced system; symmetric systems use LDL^T.
Eigen::VectorXd solve_reduced(const Eigen::MatrixXd &A, const Eigen::VectorXd &f, bool symmetric,
                              const std::string &context);

std::string format_mu(const Eigen::VectorXd &mu);

} // namespace mfrom
