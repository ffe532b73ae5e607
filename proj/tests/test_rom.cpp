#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "mfrom/errors.hpp"
#include "mfrom/fem.hpp"
#include "mfrom/linalg.hpp"
#include "mfrom/problem.hpp"
#include "mfrom/rng.hpp"
#include "mfrom/rom.hpp"

using namespace mfrom;

namespace {

Eigen::VectorXd mu2(double a, double b) {
  Eigen::VectorXd m(2);
  m << a, b;
  return m;
}

SnapshotMatrix snaps(const Eigen::MatrixXd &m) {
  SnapshotMatrix s;
  s.values = m;
  for (int j = 0; j < m.cols(); ++j)
    s.col_params.push_back(j);
  return s;
}

ReducedBasis basis_of(const Eigen::MatrixXd &m) {
  return gram_schmidt_enrich(ReducedBasis::empty_of_dim(static_cast<int>(m.rows())), snaps(m));
}

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      m(i, j) = 2.0 * rng.uniform() - 1.0;
  return m;
}

// Single-term system A, f with theta = 1, on n plain dofs.
AffineSystem dense_system(const Eigen::MatrixXd &A, const Eigen::VectorXd &f) {
  AffineSystem s;
  s.lhs.push_back({"a", A.sparseView()});
  s.rhs.push_back({"f", f});
  s.theta.param_dim = 1;
  s.theta.lhs = [](const Eigen::VectorXd &) { return Eigen::VectorXd::Ones(1); };
  s.theta.rhs = [](const Eigen::VectorXd &) { return Eigen::VectorXd::Ones(1); };
  for (int i = 0; i < A.rows(); ++i) {
    s.dofs.dof_to_node.push_back(i);
    s.dofs.node_to_dof.push_back(i);
  }
  return s;
}

} // namespace

TEST(Projection, IdentityBasisKeepsOperators) {
  const HeatProblem heat(build_unit_square_mesh(4, 4, Layout::heat2d));
  const AffineSystem &sys = *heat.affine();
  ReducedBasis id = basis_of(Eigen::MatrixXd::Identity(sys.dim(), sys.dim()));
  const ReducedAffineSystem r = project_affine(sys, id);
  ASSERT_EQ(r.lhs.size(), sys.lhs.size());
  for (std::size_t q = 0; q < r.lhs.size(); ++q)
    EXPECT_LE((r.lhs[q].value - Eigen::MatrixXd(sys.lhs[q].value)).norm(), 1e-14);
  EXPECT_LE((r.rhs[0].value - sys.rhs[0].value).norm(), 1e-14);
}

TEST(Projection, FirstUnitVector) {
  const HeatProblem heat(build_unit_square_mesh(4, 4, Layout::heat2d));
  const AffineSystem &sys = *heat.affine();
  const ReducedAffineSystem r = project_affine(sys, basis_of(Eigen::MatrixXd::Identity(sys.dim(), 1)));
  for (std::size_t q = 0; q < r.lhs.size(); ++q)
    EXPECT_DOUBLE_EQ(r.lhs[q].value(0, 0), sys.lhs[q].value.coeff(0, 0));
}

TEST(Projection, TripleProductOracle) {
  const Eigen::MatrixXd m = random_matrix(6, 6, 1);
  const Eigen::MatrixXd A = m * m.transpose() + 6.0 * Eigen::MatrixXd::Identity(6, 6);
  const ReducedBasis phi = basis_of(random_matrix(6, 2, 2));
  const ReducedAffineSystem r = project_affine(dense_system(A, Eigen::VectorXd::Ones(6)), phi);
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          ref(a, b) += phi.columns(i, a) * A(i, j) * phi.columns(j, b);
  EXPECT_LE((r.lhs[0].value - ref).cwiseAbs().maxCoeff(), 1e-13 * ref.cwiseAbs().maxCoeff());
}

TEST(Projection, DimensionMismatchThrows) {
  const HeatProblem heat(build_unit_square_mesh(4, 4, Layout::heat2d));
  EXPECT_THROW(project_affine(*heat.affine(), ReducedBasis::empty_of_dim(3)), NumericalError);
}

TEST(RomAffine, GalerkinExactnessAndOrthogonality) {
  const HeatProblem heat(build_unit_square_mesh(16, 16, Layout::heat2d));
  const AffineSystem &sys = *heat.affine();
  Eigen::MatrixXd s(heat.dim(), 3);
  s.col(0) = heat.solve(mu2(0.2, 1));
  s.col(1) = heat.solve(mu2(3.0, 1));
  s.col(2) = heat.solve(mu2(7.5, 0.4));
  const ReducedBasis phi = basis_of(s);
  ReducedAffineSystem r = project_affine(sys, phi);

  const Eigen::VectorXd u = reconstruct(phi, solve_rom_affine(r, mu2(3.0, 1)));
  EXPECT_LE((u - s.col(1)).norm(), 1e-9 * s.col(1).norm());

  for (const auto &mu : {mu2(0.5, 1), mu2(9, -0.3)}) {
    const Eigen::VectorXd b = solve_rom_affine(r, mu).coefficients;
    const Eigen::VectorXd f = sys.rhs_at(mu);
    const Eigen::VectorXd res = phi.columns.transpose() * (sys.operator_at(mu) * (phi.columns * b) - f);
    EXPECT_LE(res.norm(), 1e-9 * (phi.columns.transpose() * f).norm());
  }
}

TEST(RomAffine, ZeroFluxAndLinearity) {
  const HeatProblem heat(build_unit_square_mesh(8, 8, Layout::heat2d));
  const ReducedBasis phi = basis_of(heat.solve(mu2(1, 1)));
  const ReducedAffineSystem r = project_affine(*heat.affine(), phi);
  EXPECT_EQ(solve_rom_affine(r, mu2(2, 0)).coefficients.norm(), 0.0);
  const Eigen::VectorXd a = solve_rom_affine(r, mu2(2, 0.25)).coefficients;
  const Eigen::VectorXd b = solve_rom_affine(r, mu2(2, 0.5)).coefficients;
  EXPECT_LE((b - 2 * a).norm(), 1e-14 * b.norm());
  EXPECT_THROW(solve_rom_affine(r, Eigen::VectorXd::Ones(3)), DomainError);
}

TEST(RomAffine, OnlineSolveNeedsNoFullOrderData) {
  ReducedAffineSystem r;
  Eigen::VectorXd expect;
  {
    const HeatProblem heat(build_unit_square_mesh(8, 8, Layout::heat2d));
    const ReducedBasis phi = basis_of(heat.solve(mu2(1, 1)));
    r = project_affine(*heat.affine(), phi);
    expect = solve_rom_affine(r, mu2(4, 1)).coefficients;
  }
  EXPECT_EQ(solve_rom_affine(r, mu2(4, 1)).coefficients, expect);
  EXPECT_EQ(r.operator_at(mu2(4, 1)).rows(), 1);
}

TEST(RomAffine, SingularReducedOperatorThrows) {
  const ReducedAffineSystem r = project_affine(dense_system(Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Ones(3)),
                                               basis_of(Eigen::MatrixXd::Identity(3, 2)));
  EXPECT_THROW(solve_rom_affine(r, Eigen::VectorXd::Ones(1)), NumericalError);
}

TEST(RomNonaffine, SpanInclusionAndFullBasis) {
  const AdvDiffModel model = make_advdiff_model(build_unit_square_mesh(9, 9, Layout::advdiff9d));
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(9, 0.4);
  mu[4] = 2.0;
  const Eigen::VectorXd u = model.solve(mu).free;
  Eigen::MatrixXd s(model.dim(), 2);
  s.col(0) = u;
  s.col(1) = model.solve(Eigen::VectorXd::Constant(9, 3.0)).free;
  const ReducedBasis phi = basis_of(s);
  EXPECT_LE((reconstruct(phi, solve_rom_nonaffine(model, phi, mu)) - u).norm(), 1e-8 * u.norm());

  const ReducedBasis full = basis_of(Eigen::MatrixXd::Identity(model.dim(), model.dim()));
  const Eigen::VectorXd v = model.solve(Eigen::VectorXd::Constant(9, 0.05)).free;
  EXPECT_LE((reconstruct(full, solve_rom_nonaffine(model, full, Eigen::VectorXd::Constant(9, 0.05))) - v).norm(),
            1e-10 * v.norm());
}

TEST(RomNonaffine, ZeroSourceGivesZeroCoefficients) {
  const Mesh m = build_unit_square_mesh(6, 6, Layout::advdiff9d);
  BlockValues zero;
  zero.fill(0.0);
  const AdvDiffModel model = make_advdiff_model(m, default_permeability(), zero);
  const ReducedBasis phi = basis_of(random_matrix(model.dim(), 3, 4));
  EXPECT_EQ(solve_rom_nonaffine(model, phi, Eigen::VectorXd::Ones(9)).coefficients.norm(), 0.0);
}

TEST(Reconstruct, Examples) {
  const ReducedBasis phi = basis_of(random_matrix(7, 3, 6));
  EXPECT_EQ(reconstruct(phi, Eigen::VectorXd::Zero(3)).norm(), 0.0);
  EXPECT_EQ(reconstruct(phi, Eigen::VectorXd::Unit(3, 0)), phi.columns.col(0));
  const Eigen::VectorXd b = random_matrix(3, 1, 7);
  EXPECT_LE((phi.columns.transpose() * reconstruct(phi, b) - b).norm(), 1e-14);
}

TEST(ProblemFacade, HeatAndAdvDiffAgreeWithDirectSolvers) {
  const Mesh hm = build_unit_square_mesh(8, 8, Layout::heat2d);
  const auto heat = make_problem(Layout::heat2d, hm);
  EXPECT_EQ(heat->param_dim(), 2);
  ASSERT_NE(heat->affine(), nullptr);
  const Eigen::VectorXd u = heat->solve(mu2(1, 1));
  const ReducedBasis phi = basis_of(u);
  EXPECT_LE((reconstruct(phi, heat->reduce(phi)->coefficients(mu2(1, 1))) - u).norm(), 1e-12 * u.norm());

  const auto ad = make_problem(Layout::advdiff9d, build_unit_square_mesh(6, 6, Layout::advdiff9d));
  EXPECT_EQ(ad->affine(), nullptr);
  Eigen::MatrixXd params(2, 9);
  params.row(0).setConstant(1.0);
  params.row(1).setConstant(-1.0);
  try {
    solve_all(*ad, params);
    FAIL() << "expected a domain error";
  } catch (const DomainError &e) {
    EXPECT_NE(std::string(e.what()).find("parameter row 1"), std::string::npos);
  }
}
