#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mfrom/mesh.hpp"

namespace mfrom {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Numbering of the free (non-Dirichlet) nodes. Eliminated nodes map to -1.
struct DofMap {
  std::vector<int> node_to_dof;
  std::vector<int> dof_to_node;

  int num_dofs() const { return static_cast<int>(dof_to_node.size()); }
  int num_nodes() const { return static_cast<int>(node_to_dof.size()); }

  // Eliminated nodes receive `dirichlet_value`.
  Eigen::VectorXd to_nodal(const Eigen::VectorXd &free, double dirichlet_value = 0.0) const;
  Eigen::VectorXd to_free(const Eigen::VectorXd &nodal) const;
};

// Nodes carrying any of the tags in `mask` are eliminated.
DofMap make_dof_map(const Mesh &mesh, std::uint8_t dirichlet_mask);

// Maps a parameter vector to the scalar coefficients of the affine terms.
struct ThetaRule {
  int param_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd &)> lhs;
  std::function<Eigen::VectorXd(const Eigen::VectorXd &)> rhs;
};

template <class T>
struct AffineTerm {
  std::string tag;
  T value;
};

// A(mu) = sum_q theta_q(mu) A_q, f(mu) = sum_q theta_q(mu) f_q on the free dofs.
struct AffineSystem {
  std::vector<AffineTerm<SparseMatrix>> lhs;
  std::vector<AffineTerm<Eigen::VectorXd>> rhs;
  ThetaRule theta;
  DofMap dofs;
  bool symmetric = true;

  int dim() const { return dofs.num_dofs(); }

  // LHS coefficients followed by RHS coefficients.
  Eigen::VectorXd theta_all(const Eigen::VectorXd &mu) const;
  SparseMatrix operator_at(const Eigen::VectorXd &mu) const;
  Eigen::VectorXd rhs_at(const Eigen::VectorXd &mu) const;

  // Throws AssemblyError on dimension mismatches or duplicate tags.
  void validate() const;
};

struct FomSolution {
  Eigen::VectorXd mu;
  Eigen::VectorXd nodal;  // all mesh nodes
  Eigen::VectorXd free;   // free dofs only
};

// Sparse direct solve. `symmetric` selects LDL^T over LU. Throws SolverError
// with `context` on factorization failure or if the residual check fails.
Eigen::VectorXd solve_sparse(const SparseMatrix &A, const Eigen::VectorXd &f, bool symmetric,
                             const std::string &context);

// --- heat conduction -------------------------------------------------------

// Stiffness on Omega_1 (theta = 1) and Omega_0 (theta = mu[0]), unit flux on
// the base (theta = mu[1]); homogeneous Dirichlet on the top edge.
AffineSystem assemble_heat_affine(const Mesh &mesh);

// Direct assembly with kappa = 1 + (mu[0] - 1) * chi_{Omega_0}; used to check
// the affine split.
std::pair<SparseMatrix, Eigen::VectorXd> assemble_heat_full(const Mesh &mesh, const Eigen::VectorXd &mu);

// H1 seminorm Gram matrix on the free dofs of `dofs`.
SparseMatrix assemble_laplacian(const Mesh &mesh, const DofMap &dofs);

FomSolution solve_fom(const AffineSystem &system, const Eigen::VectorXd &mu);

// --- potential flow --------------------------------------------------------

// Permeability per advdiff9d block; index k holds Omega_{k+1}.
using BlockValues = std::array<double, 9>;

BlockValues default_permeability();  // 1 everywhere, 1e-2 in Omega_5
BlockValues default_source();        // 1 in Omega_5, 0 elsewhere

struct PotentialFlowOptions {
  double inlet_flux = 1.0;  // inward normal flux on the left edge
};

// Piecewise-constant velocity b = -kappa grad(phi).
struct VelocityField {
  std::vector<Eigen::Vector2d> velocity;  // per triangle
  std::vector<double> speed;              // per triangle
  Eigen::VectorXd potential;              // nodal phi

  double max_speed() const;
};

VelocityField solve_potential_flow(const Mesh &mesh, const BlockValues &permeability,
                                   const PotentialFlowOptions &opts = {});

// Nodal weak divergence sum_T int_T b . grad(N_i).
Eigen::VectorXd weak_divergence(const Mesh &mesh, const VelocityField &field);

// Max |weak divergence| over nodes where the discrete flow problem is
// homogeneous (everything except inlet and outlet nodes).
double divergence_residual(const Mesh &mesh, const VelocityField &field);

// --- SUPG advection-diffusion ----------------------------------------------

// beta(Pe) = coth(Pe) - 1/Pe, with a series expansion near zero.
double supg_beta(double peclet);

struct LinearSystem {
  SparseMatrix A;
  Eigen::VectorXd f;
};

// b . grad(u) - K(mu) lap(u) + sigma = 0 with SUPG test functions
// v + tau b . grad(v), tau = beta h / (2 |b|), u = 0 on the inlet and zero
// flux elsewhere. Assembly reuses a fixed sparsity pattern.
class AdvDiffModel {
public:
  AdvDiffModel(Mesh mesh, VelocityField field, BlockValues source = default_source());

  const Mesh &mesh() const { return mesh_; }
  const VelocityField &field() const { return field_; }
  const DofMap &dofs() const { return dofs_; }
  const BlockValues &source() const { return source_; }
  int dim() const { return dofs_.num_dofs(); }

  // Throws DomainError unless mu has 9 strictly positive entries.
  LinearSystem assemble(const Eigen::VectorXd &mu) const;

  // Per-element SUPG weight tau_e at mu.
  std::vector<double> tau(const Eigen::VectorXd &mu) const;

  FomSolution solve(const Eigen::VectorXd &mu) const;

private:
  struct Element {
    double area;
    Eigen::Matrix<double, 3, 2> grad;
    std::array<double, 3> stream;  // b . grad(N_i)
    double speed;
    double h;
    int block;                     // 0..8
    std::array<int, 3> dof;        // -1 for inlet nodes
    std::array<int, 9> slot;       // position of (i, j) in the value array
  };

  void check_mu(const Eigen::VectorXd &mu) const;

  Mesh mesh_;
  VelocityField field_;
  BlockValues source_;
  DofMap dofs_;
  std::vector<Element> elements_;
  SparseMatrix pattern_;
};

AdvDiffModel make_advdiff_model(const Mesh &mesh, const BlockValues &permeability = default_permeability(),
                                const BlockValues &source = default_source());

} // namespace mfrom
