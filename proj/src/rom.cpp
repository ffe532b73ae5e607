#include "mfrom/rom.hpp"

#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "mfrom/errors.hpp"

namespace mfrom {

std::string format_mu(const Eigen::VectorXd &mu) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    os << (i ? ", " : "") << mu[i];
  os << ')';
  return os.str();
}

Eigen::MatrixXd ReducedAffineSystem::operator_at(const Eigen::VectorXd &mu) const {
  const Eigen::VectorXd th = theta.lhs(mu);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(r, r);
  for (std::size_t q = 0; q < lhs.size(); ++q)
    A += th[static_cast<Eigen::Index>(q)] * lhs[q].value;
  return A;
}

Eigen::VectorXd ReducedAffineSystem::rhs_at(const Eigen::VectorXd &mu) const {
  const Eigen::VectorXd th = theta.rhs(mu);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(r);
  for (std::size_t q = 0; q < rhs.size(); ++q)
    f += th[static_cast<Eigen::Index>(q)] * rhs[q].value;
  return f;
}

ReducedAffineSystem project_affine(const AffineSystem &system, const ReducedBasis &basis) {
  const auto &Phi = basis.columns;
  if (Phi.rows() != system.dim())
    throw NumericalError("project_affine: basis has " + std::to_string(Phi.rows()) + " rows, system has " +
                         std::to_string(system.dim()) + " dofs");
  ReducedAffineSystem out;
  out.theta = system.theta;
  out.r = basis.rank();
  for (const auto &term : system.lhs) {
    const Eigen::MatrixXd APhi = term.value * Phi;
    out.lhs.push_back({term.tag, Phi.transpose() * APhi});
  }
  for (const auto &term : system.rhs)
    out.rhs.push_back({term.tag, Phi.transpose() * term.value});
  return out;
}

Eigen::VectorXd solve_reduced(const Eigen::MatrixXd &A, const Eigen::VectorXd &f, bool symmetric,
                              const std::string &context) {
  if (A.rows() == 0)
    return Eigen::VectorXd(0);
  if (symmetric) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-15)
      return ldlt.solve(f);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15))
    throw NumericalError("reduced operator singular (rcond " + std::to_string(rcond) + ") " + context);
  return lu.solve(f);
}

RomSolution solve_rom_affine(const ReducedAffineSystem &rsys, const Eigen::VectorXd &mu) {
  if (mu.size() != rsys.theta.param_dim)
    throw DomainError("solve_rom_affine: parameter has " + std::to_string(mu.size()) + " entries, expected " +
                      std::to_string(rsys.theta.param_dim));
  return {mu, solve_reduced(rsys.operator_at(mu), rsys.rhs_at(mu), true, "at mu = " + format_mu(mu))};
}

RomSolution solve_rom_nonaffine(const AdvDiffModel &model, const ReducedBasis &basis, const Eigen::VectorXd &mu) {
  const auto &Phi = basis.columns;
  if (Phi.rows() != model.dim())
    throw NumericalError("solve_rom_nonaffine: basis has " + std::to_string(Phi.rows()) + " rows, model has " +
                         std::to_string(model.dim()) + " dofs");
  const LinearSystem sys = model.assemble(mu);
  const Eigen::MatrixXd APhi = sys.A * Phi;
  const Eigen::MatrixXd Ar = Phi.transpose() * APhi;
  const Eigen::VectorXd fr = Phi.transpose() * sys.f;
  return {mu, solve_reduced(Ar, fr, false, "at mu = " + format_mu(mu))};
}

Eigen::VectorXd reconstruct(const ReducedBasis &basis, const Eigen::VectorXd &coefficients) {
  if (coefficients.size() != basis.rank())
    throw NumericalError("reconstruct: " + std::to_string(coefficients.size()) + " coefficients for rank " +
                         std::to_string(basis.rank()));
  return basis.columns * coefficients;
}

Eigen::VectorXd reconstruct(const ReducedBasis &basis, const RomSolution &sol) {
  return reconstruct(basis, sol.coefficients);
}

} // namespace mfrom
