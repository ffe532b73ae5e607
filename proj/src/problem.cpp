#include "mfrom/problem.hpp"

#include "mfrom/errors.hpp"

namespace mfrom {

namespace {

class AffineReduced final : public ReducedModel {
public:
  explicit AffineReduced(ReducedAffineSystem rsys) : rsys_(std::move(rsys)) {}
  Eigen::VectorXd coefficients(const Eigen::VectorXd &mu) const override {
    return solve_rom_affine(rsys_, mu).coefficients;
  }

private:
  ReducedAffineSystem rsys_;
};

class NonAffineReduced final : public ReducedModel {
public:
  NonAffineReduced(const AdvDiffModel &model, ReducedBasis basis) : model_(model), basis_(std::move(basis)) {}
  Eigen::VectorXd coefficients(const Eigen::VectorXd &mu) const override {
    return solve_rom_nonaffine(model_, basis_, mu).coefficients;
  }

private:
  const AdvDiffModel &model_;
  ReducedBasis basis_;
};

} // namespace

HeatProblem::HeatProblem(Mesh mesh) : mesh_(std::move(mesh)), system_(assemble_heat_affine(mesh_)) {}

Eigen::VectorXd HeatProblem::solve(const Eigen::VectorXd &mu) const { return solve_fom(system_, mu).free; }

std::unique_ptr<ReducedModel> HeatProblem::reduce(const ReducedBasis &basis) const {
  return std::make_unique<AffineReduced>(project_affine(system_, basis));
}

AdvDiffProblem::AdvDiffProblem(const Mesh &mesh, const BlockValues &permeability, const BlockValues &source)
    : model_(make_advdiff_model(mesh, permeability, source)) {}

Eigen::VectorXd AdvDiffProblem::solve(const Eigen::VectorXd &mu) const { return model_.solve(mu).free; }

std::unique_ptr<ReducedModel> AdvDiffProblem::reduce(const ReducedBasis &basis) const {
  return std::make_unique<NonAffineReduced>(model_, basis);
}

std::unique_ptr<Problem> make_problem(Layout layout, const Mesh &mesh) {
  if (mesh.layout != layout)
    throw ConfigError("mesh layout " + to_string(mesh.layout) + " does not match problem " + to_string(layout));
  if (layout == Layout::heat2d)
    return std::make_unique<HeatProblem>(mesh);
  return std::make_unique<AdvDiffProblem>(mesh);
}

Eigen::MatrixXd solve_all(const Problem &problem, const Eigen::MatrixXd &params) {
  Eigen::MatrixXd out(problem.dim(), params.rows());
  for (Eigen::Index i = 0; i < params.rows(); ++i) {
    try {
      out.col(i) = problem.solve(params.row(i).transpose());
    } catch (const SolverError &e) {
      throw SolverError(std::string(e.what()) + " (parameter row " + std::to_string(i) + ")");
    } catch (const DomainError &e) {
      throw DomainError(std::string(e.what()) + " (parameter row " + std::to_string(i) + ")");
    }
  }
  return out;
}

} // namespace mfrom
