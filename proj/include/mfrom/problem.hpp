#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>

#include "mfrom/fem.hpp"
#include "mfrom/linalg.hpp"
#include "mfrom/mesh.hpp"
#include "mfrom/rom.hpp"

namespace mfrom {

// Reduced model bound to one basis.
class ReducedModel {
public:
  virtual ~ReducedModel() = default;
  virtual Eigen::VectorXd coefficients(const Eigen::VectorXd &mu) const = 0;
};

// A parametrized full-order model. Snapshots live on the free dofs.
class Problem {
public:
  virtual ~Problem() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int param_dim() const = 0;
  virtual const Mesh &mesh() const = 0;
  virtual const DofMap &dofs() const = 0;
  virtual Eigen::VectorXd solve(const Eigen::VectorXd &mu) const = 0;
  virtual std::unique_ptr<ReducedModel> reduce(const ReducedBasis &basis) const = 0;
  // Affine decomposition, or nullptr for non-affine problems.
  virtual const AffineSystem *affine() const { return nullptr; }
};

class HeatProblem final : public Problem {
public:
  explicit HeatProblem(Mesh mesh);

  std::string name() const override { return "heat2d"; }
  int dim() const override { return system_.dim(); }
  int param_dim() const override { return 2; }
  const Mesh &mesh() const override { return mesh_; }
  const DofMap &dofs() const override { return system_.dofs; }
  Eigen::VectorXd solve(const Eigen::VectorXd &mu) const override;
  std::unique_ptr<ReducedModel> reduce(const ReducedBasis &basis) const override;
  const AffineSystem *affine() const override { return &system_; }

private:
  Mesh mesh_;
  AffineSystem system_;
};

class AdvDiffProblem final : public Problem {
public:
  explicit AdvDiffProblem(const Mesh &mesh, const BlockValues &permeability = default_permeability(),
                          const BlockValues &source = default_source());

  std::string name() const override { return "advdiff9d"; }
  int dim() const override { return model_.dim(); }
  int param_dim() const override { return 9; }
  const Mesh &mesh() const override { return model_.mesh(); }
  const DofMap &dofs() const override { return model_.dofs(); }
  Eigen::VectorXd solve(const Eigen::VectorXd &mu) const override;
  std::unique_ptr<ReducedModel> reduce(const ReducedBasis &basis) const override;
  const AdvDiffModel &model() const { return model_; }

private:
  AdvDiffModel model_;
};

std::unique_ptr<Problem> make_problem(Layout layout, const Mesh &mesh);

// Solves at every row of `params`; columns follow row order. Errors carry
// the row index.
Eigen::MatrixXd solve_all(const Problem &problem, const Eigen::MatrixXd &params);

} // namespace mfrom
