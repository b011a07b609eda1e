#include "support.hpp"

#include <gtest/gtest.h>

using namespace caplab;
using namespace caplab::testing;

TEST(Discops, HemisphereAreaConvergesToTwoPi) {
  double prev = INFINITY;
  for (int res : {16, 32, 64}) {
    const auto fm = generate_mesh(cap(1, pi / 2, res));
    const auto ops = assemble_operators(fm.mesh, fm.walls.size());
    const double err = std::abs(VectorXd::Ones(ops.M.rows()).dot(ops.M * VectorXd::Ones(ops.M.rows())) - 2 * pi);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 0.02 * 2 * pi);
}

TEST(Discops, DirichletEnergyOfXOnTheDiskIsItsArea) {
  const auto fm = generate_mesh(disk(1, 32));
  const auto ops = assemble_operators(fm.mesh, 0);
  VectorXd x(static_cast<Eigen::Index>(fm.mesh.num_vertices()));
  for (std::size_t i = 0; i < fm.mesh.num_vertices(); ++i) x[static_cast<Eigen::Index>(i)] = fm.mesh.positions[i].x();
  EXPECT_NEAR(x.dot(ops.K * x), pi, 0.02 * pi);
}

TEST(Discops, IntegralOfHeightOverHemisphere) {
  // oracle: 2 pi int_0^{pi/2} cos(phi) sin(phi) dphi
  const double oracle = simpson([](double p) { return 2 * pi * std::cos(p) * std::sin(p); }, 0.0, pi / 2);
  const auto fm = generate_mesh(cap(1, pi / 2, 32));
  const auto ops = assemble_operators(fm.mesh, 1);
  VectorXd z(static_cast<Eigen::Index>(fm.mesh.num_vertices()));
  for (std::size_t i = 0; i < fm.mesh.num_vertices(); ++i) z[static_cast<Eigen::Index>(i)] = fm.mesh.positions[i].z();
  EXPECT_NEAR(integrate_scalar(ops.M, z), oracle, 0.02 * oracle);
}

TEST(Discops, StiffnessAnnihilatesConstantsAndIsSymmetric) {
  const auto fm = generate_mesh(cylinder(1, 2, 16));
  const auto ops = assemble_operators(fm.mesh, 2);
  const VectorXd one = VectorXd::Ones(ops.K.rows());
  EXPECT_LT((ops.K * one).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((Eigen::MatrixXd(ops.K) - Eigen::MatrixXd(ops.K).transpose()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(ops.B[0].sum(), ops.B[1].sum(), 1e-12);
  EXPECT_NEAR(ops.B_all.sum(), ops.B[0].sum() + ops.B[1].sum(), 1e-12);
}

TEST(Discops, WeightedMassWithUnitWeightIsTheMassMatrix) {
  const auto fm = generate_mesh(monge(0.2, 1, 12));
  const auto ops = assemble_operators(fm.mesh, 0);
  const SparseMatrix W = weighted_mass(fm.mesh, VectorXd::Ones(ops.M.rows()));
  EXPECT_LT((Eigen::MatrixXd(W) - Eigen::MatrixXd(ops.M)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Discops, WeightedMassIntegratesLinearWeightsExactly) {
  // int_T w dA for linear w equals area * mean of vertex values
  LabeledTriMesh m;
  m.positions = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  const VectorXd w = Eigen::Vector3d(1.0, 4.0, -2.0);
  const SparseMatrix W = weighted_mass(m, w);
  EXPECT_NEAR(VectorXd::Ones(3).dot(W * VectorXd::Ones(3)), 1.0 * (1.0 + 4.0 - 2.0) / 3.0, 1e-14);
}

TEST(Discops, DegenerateTriangleIsRejected) {
  LabeledTriMesh m;
  m.positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(2, 0, 0)};
  m.triangles = {{0, 1, 2}, {0, 3, 1}};
  try {
    assemble_operators(m, 0);
    FAIL() << "expected degenerate-element";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_element);
  }
}

TEST(Discops, EstimatedSphereCurvatureWithinTwoPercent) {
  const auto fm = generate_mesh(sphere(1, 64));
  const auto f = estimate_fields(fm.mesh, fm.walls);
  for (std::size_t v = 0; v < fm.mesh.num_vertices(); ++v) {
    EXPECT_NEAR(f.H[v], fm.fields.H[v], 0.02);
    EXPECT_NEAR(f.sigma_sq[v], 2.0, 0.04);
  }
}

TEST(Discops, HemisphereBoundaryCurvature) {
  const auto fm = generate_mesh(cap(1, pi / 2, 64));
  const auto f = estimate_fields(fm.mesh, fm.walls);
  ASSERT_FALSE(f.boundary.empty());
  for (const auto& b : f.boundary) EXPECT_NEAR(b.H_bdry, -1.0, 0.02);
}

TEST(Discops, EstimatedFramesAreUnitAndConsistent) {
  const auto fm = generate_mesh(cap(1, pi / 3, 32));
  const auto f = estimate_fields(fm.mesh, fm.walls);
  for (const auto& N : f.N) EXPECT_NEAR(N.norm(), 1.0, 1e-10);
  double worst_nu = 0.0;
  for (const auto& b : f.boundary) {
    EXPECT_NEAR(b.nu.norm(), 1.0, 1e-10);
    EXPECT_NEAR(b.nubar.norm(), 1.0, 1e-10);
    EXPECT_NEAR(b.nubar.dot(fm.walls.walls[0].normal), 0.0, 1e-10);
    worst_nu = std::max(worst_nu, std::abs(b.nu.dot(f.N[b.vertex])));
    EXPECT_NEAR(b.angle, pi / 3, 0.01);
  }
  EXPECT_LT(worst_nu, 1e-10);
}

TEST(Discops, FieldErrorsShrinkUnderRefinement) {
  double prevH = INFINITY, prevS = INFINITY;
  for (int res : {16, 32, 64}) {
    const auto fm = generate_mesh(cap(1, pi / 3, res));
    const auto f = estimate_fields(fm.mesh, fm.walls);
    const double eH = (f.H - fm.fields.H).cwiseAbs().maxCoeff();
    const double eS = (f.sigma_sq - fm.fields.sigma_sq).cwiseAbs().maxCoeff();
    EXPECT_LT(eH, prevH);
    EXPECT_LT(eS, prevS);
    prevH = eH;
    prevS = eS;
  }
}

TEST(Discops, FitFailsOnTooFewPoints) {
  LabeledTriMesh m;
  m.positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  try {
    estimate_fields(m, {});
    FAIL() << "expected fit-failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::fit_failure);
  }
}

TEST(Discops, OrientationIsFlippedToNonNegativeMeanCurvature) {
  auto fm = generate_mesh(cap(1, pi / 3, 24));
  for (auto& t : fm.mesh.triangles) std::swap(t[1], t[2]);
  const auto f = estimate_fields(fm.mesh, fm.walls);
  double mean = 0.0;
  for (Eigen::Index i = 0; i < f.H.size(); ++i) mean += f.H[i];
  EXPECT_GT(mean, 0.0);
  EXPECT_NEAR(f.N[0].dot(Vec3::UnitZ()), -1.0, 1e-3);  // pole normal still points into the ball
}

TEST(Discops, FlatPatchWarnsAboutAmbiguousOrientation) {
  const auto fm = generate_mesh(disk(1, 12));
  const auto f = estimate_fields(fm.mesh, fm.walls);
  EXPECT_FALSE(f.warnings.empty());
}
