#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mfrom/errors.hpp"
#include "mfrom/greedy_rbm.hpp"
#include "mfrom/rom.hpp"

using namespace mfrom;

namespace {

Eigen::VectorXd mu2(double a, double b) {
  Eigen::VectorXd m(2);
  m << a, b;
  return m;
}

ReducedBasis basis_from(const Problem &p, const std::vector<Eigen::VectorXd> &mus) {
  Eigen::MatrixXd s(p.dim(), static_cast<Eigen::Index>(mus.size()));
  std::vector<int> idx;
  for (std::size_t k = 0; k < mus.size(); ++k) {
    s.col(static_cast<Eigen::Index>(k)) = p.solve(mus[k]);
    idx.push_back(static_cast<int>(k));
  }
  return gram_schmidt_enrich(ReducedBasis::empty_of_dim(p.dim()), SnapshotMatrix{s, idx, SpaceTag::fine});
}

// Dual norm through a dense full-order Riesz solve.
double dense_dual_norm(const Eigen::MatrixXd &X, const Eigen::VectorXd &r) {
  return std::sqrt(r.dot(X.ldlt().solve(r)));
}

} // namespace

TEST(Riesz, ZeroBasisZeroRhs) {
  fixtures::SmallHeat h;
  const AffineSystem &sys = *h.fine->affine();
  const SparseMatrix X = sys.operator_at(mu2(1, 1));
  const RieszBlocks rb = riesz_blocks(sys, ReducedBasis::empty_of_dim(sys.dim()), X);
  EXPECT_EQ(rb.dual_norm(sys.theta.lhs(mu2(3, 0)), sys.theta.rhs(mu2(3, 0)), Eigen::VectorXd(0)), 0.0);
}

TEST(Riesz, MatchesFullOrderDualNorm) {
  fixtures::SmallHeat h;
  const AffineSystem &sys = *h.fine->affine();
  const SparseMatrix X = sys.operator_at(mu2(1, 1));
  const Eigen::MatrixXd Xd(X);
  const ReducedBasis phi = basis_from(*h.fine, {mu2(0.3, 1), mu2(4, 1), mu2(9, 1)});
  const RieszBlocks rb = riesz_blocks(sys, phi, X);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd mu = mu2(0.1 + k, -1 + 0.2 * k);
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(3, -1.0 + k, 2.0 - 0.5 * k);
    const Eigen::VectorXd r = sys.rhs_at(mu) - sys.operator_at(mu) * (phi.columns * b);
    const double ref = dense_dual_norm(Xd, r);
    EXPECT_NEAR(rb.dual_norm(sys.theta.lhs(mu), sys.theta.rhs(mu), b), ref, 1e-8 * ref);
  }
}

TEST(Riesz, RhsScalingAtZeroCoefficients) {
  fixtures::SmallHeat h;
  const AffineSystem &sys = *h.fine->affine();
  const ReducedBasis phi = basis_from(*h.fine, {mu2(1, 1)});
  const RieszBlocks rb = riesz_blocks(sys, phi, sys.operator_at(mu2(1, 1)));
  const Eigen::VectorXd th = sys.theta.lhs(mu2(2, 1));
  const double one = rb.dual_norm(th, sys.theta.rhs(mu2(2, 0.4)), Eigen::VectorXd::Zero(1));
  const double two = rb.dual_norm(th, sys.theta.rhs(mu2(2, 0.8)), Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(two, 2 * one, 1e-12 * two);
}

TEST(Riesz, NonSpdInnerProductThrows) {
  fixtures::SmallHeat h;
  const AffineSystem &sys = *h.fine->affine();
  const SparseMatrix X = -sys.operator_at(mu2(1, 1));
  EXPECT_THROW(riesz_blocks(sys, ReducedBasis::empty_of_dim(sys.dim()), X), NumericalError);
}

TEST(Coercivity, LowerBoundExamples) {
  Eigen::VectorXd bar(2), th(2);
  bar << 1, 1;
  EXPECT_DOUBLE_EQ(coercivity_lb(bar, bar, 0.7), 0.7);
  th << 1, 0.1;
  EXPECT_DOUBLE_EQ(coercivity_lb(th, bar, 0.7), 0.07);
  th << 1, 0.0;
  EXPECT_THROW(coercivity_lb(th, bar, 0.7), DomainError);
}

TEST(Coercivity, LowerBoundNeverExceedsTrueConstant) {
  fixtures::SmallHeat h;
  const AffineSystem &sys = *h.fine->affine();
  const SparseMatrix X = sys.operator_at(mu2(1, 1));
  const double alpha_bar = coercivity_constant(X, X);
  EXPECT_NEAR(alpha_bar, 1.0, 1e-10);
  for (double m1 : {0.1, 0.4, 1.0, 3.0, 10.0}) {
    const double truth = coercivity_constant(sys.operator_at(mu2(m1, 1)), X);
    const double lb = coercivity_lb(sys.theta.lhs(mu2(m1, 1)), sys.theta.lhs(mu2(1, 1)), alpha_bar);
    EXPECT_LE(lb, truth * (1 + 1e-10)) << "mu1 = " << m1;
    EXPECT_GT(lb, 0.0);
  }
}

TEST(Indicator, BoundsTheTrueEnergyError) {
  fixtures::SmallHeat h;
  const AffineSystem &sys = *h.fine->affine();
  const SparseMatrix X = sys.operator_at(mu2(1, 1));
  const Eigen::VectorXd bar = Eigen::VectorXd::Ones(2);
  const ReducedBasis phi = basis_from(*h.fine, {mu2(0.2, 1), mu2(5, 1)});
  const ReducedAffineSystem rsys = project_affine(sys, phi);
  const Eigen::VectorXd delta = error_indicator(sys, phi, X, 1.0, bar, h.ctx.train, false);
  for (Eigen::Index i = 0; i < h.ctx.train.rows(); ++i) {
    const Eigen::VectorXd mu = h.ctx.train.row(i).transpose();
    const Eigen::VectorXd e = h.fine->solve(mu) - reconstruct(phi, solve_rom_affine(rsys, mu));
    const double err = std::sqrt(std::max(e.dot(X * e), 0.0));
    EXPECT_GE(delta[i] * (1 + 1e-8) + 1e-13, err) << "training index " << i;
  }
}

TEST(Indicator, StaysAboveRoundOffSizedErrors) {
  // Nearly complete basis: errors are tiny, which is where expanding the
  // squared dual norm would cancel to zero.
  fixtures::SmallHeat h;
  const AffineSystem &sys = *h.fine->affine();
  const SparseMatrix X = sys.operator_at(mu2(1, 1));
  std::vector<Eigen::VectorXd> mus;
  for (double m1 : {0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 7.0, 10.0})
    mus.push_back(mu2(m1, 1));
  const ReducedBasis phi = basis_from(*h.fine, mus);
  const ReducedAffineSystem rsys = project_affine(sys, phi);
  const Eigen::VectorXd delta = error_indicator(sys, phi, X, 1.0, Eigen::VectorXd::Ones(2), h.ctx.train, false);
  for (Eigen::Index i = 0; i < h.ctx.train.rows(); ++i) {
    const Eigen::VectorXd mu = h.ctx.train.row(i).transpose();
    const Eigen::VectorXd e = h.fine->solve(mu) - reconstruct(phi, solve_rom_affine(rsys, mu));
    const double err = std::sqrt(std::max(e.dot(X * e), 0.0));
    EXPECT_GE(delta[i] * (1 + 1e-8) + 1e-14, err) << "training index " << i;
  }
}

TEST(Greedy, InfiniteToleranceTakesOnePoint) {
  fixtures::SmallHeat h;
  GreedyOptions o;
  o.tol = std::numeric_limits<double>::infinity();
  o.timings = false;
  const GreedyState s = greedy_loop(h.ctx, o);
  EXPECT_EQ(s.status, RunStatus::converged);
  EXPECT_EQ(s.selected.size(), 1u);
  EXPECT_EQ(s.history.size(), 1u);
}

TEST(Greedy, ConvergesWithDistinctPoints) {
  fixtures::SmallHeat h;
  GreedyOptions o;
  o.timings = false;
  const GreedyState s = greedy_loop(h.ctx, o);
  EXPECT_EQ(s.status, RunStatus::converged);
  EXPECT_EQ(std::set<int>(s.selected.begin(), s.selected.end()).size(), s.selected.size());
  EXPECT_LE(s.basis.orthonormality_defect(), 1e-10);
  EXPECT_EQ(s.max_indicator.size(), s.selected.size() + 1);
  EXPECT_LT(s.max_indicator.back(), o.tol);
  for (const ErrorRow &row : s.history)
    EXPECT_LE(row.basis_defect, 1e-10);
}

TEST(Greedy, NeedsAffineProblem) {
  fixtures::SmallHeat h;
  const auto ad = make_problem(Layout::advdiff9d, build_unit_square_mesh(6, 6, Layout::advdiff9d));
  MfContext ctx = h.ctx;
  ctx.fine = ad.get();
  EXPECT_THROW(greedy_loop(ctx, {}), ConfigError);
}
