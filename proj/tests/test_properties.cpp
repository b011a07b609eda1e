// Invariances that cut across modules: rigid motions, uniform scaling, file round trips.

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace caplab;
using namespace caplab::testing;

namespace {

// independent of the library's own WallSet transform
WallSet moved(const WallSet& w, const Mat3& R, const Vec3& t) {
  WallSet out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec3 n = R * w.walls[i].normal;
    out.add({n, w.walls[i].offset + n.dot(t)}, w.angles[i]);
  }
  return out;
}

struct Case {
  const char* name;
  FamilySpec spec;
};

std::vector<Case> cases() {
  return {{"cap", cap(1.0, pi / 3, 24)}, {"cylinder", cylinder(1.0, 2.0, 24)}, {"monge", monge(0.1, 1.0, 24)}};
}

}  // namespace

TEST(Properties, IdentitiesAreRigidMotionInvariant) {
  for (const auto& c : cases()) {
    const auto fm = generate_mesh(c.spec);
    const auto base = run_suite(fm.mesh, fm.walls, estimate_fields(fm.mesh, fm.walls), "24");
    for (unsigned seed : {3u, 17u}) {
      const Mat3 R = random_rotation(seed);
      const Vec3 t(0.3, -1.2, 2.5);
      const auto m = transform(fm.mesh, R, t);
      const auto w = moved(fm.walls, R, t);
      const auto rep = run_suite(m, w, estimate_fields(m, w), "24");
      ASSERT_EQ(rep.size(), base.size()) << c.name;
      for (std::size_t i = 0; i < rep.size(); ++i) {
        EXPECT_EQ(rep[i].name, base[i].name);
        EXPECT_EQ(rep[i].skipped, base[i].skipped);
        EXPECT_NEAR(rep[i].rel_residual, base[i].rel_residual, 1e-10) << c.name << ' ' << rep[i].name;
      }
    }
  }
}

TEST(Properties, VerdictIsRigidMotionInvariant) {
  for (const auto& spec : {cap(1.0, 2 * pi / 3, 24), cylinder(1.0, 4.0, 24)}) {
    const auto fm = generate_mesh(spec);
    const auto base = stability_verdict(assemble_index_form(fm.mesh, fm.walls, estimate_fields(fm.mesh, fm.walls)));
    const Mat3 R = random_rotation(5);
    const Vec3 t(-2.0, 0.5, 1.0);
    const auto m = transform(fm.mesh, R, t);
    const auto w = moved(fm.walls, R, t);
    const auto v = stability_verdict(assemble_index_form(m, w, estimate_fields(m, w)));
    EXPECT_NEAR(v.lambda_min, base.lambda_min, 1e-8 * std::max(1.0, std::abs(base.lambda_min)));
    EXPECT_EQ(v.stable, base.stable);
  }
}

TEST(Properties, EigenvaluesScaleInverseSquare) {
  for (double s : {0.5, 3.0}) {
    const auto fm = generate_mesh(cylinder(1.0, 4.0, 24));
    const auto big = generate_mesh(cylinder(s, 4.0 * s, 24));
    const auto a = min_constrained_eigenpairs(assemble_index_form(fm.mesh, fm.walls, fm.fields), 3);
    const auto b = min_constrained_eigenpairs(assemble_index_form(big.mesh, big.walls, big.fields), 3);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(b.values[k] * s * s, a.values[k], 1e-8 * std::max(1.0, std::abs(a.values[k])));
  }
}

TEST(Properties, ScaledMeshScalesEstimatedSpectrum) {
  const auto fm = generate_mesh(cap(1.0, 2.0, 24));
  const double s = 2.5;
  const auto m = scale(fm.mesh, s);
  const auto w = scale(fm.walls, s);
  const auto a = stability_verdict(assemble_index_form(fm.mesh, fm.walls, estimate_fields(fm.mesh, fm.walls)));
  const auto b = stability_verdict(assemble_index_form(m, w, estimate_fields(m, w)));
  EXPECT_NEAR(b.lambda_min * s * s, a.lambda_min, 1e-8 * std::max(1.0, std::abs(a.lambda_min)));
}

TEST(Properties, RoundTripPreservesEveryDerivedQuantity) {
  const auto dir = scratch_dir("props_roundtrip");
  const auto fm = generate_mesh(cap(1.3, 2.1, 20));
  const auto path = dir / "cap.capmesh";
  save(fm.mesh, fm.walls, path);
  const auto [m, w] = load(path);
  ASSERT_EQ(m.positions.size(), fm.mesh.positions.size());
  for (std::size_t i = 0; i < m.positions.size(); ++i) EXPECT_EQ(m.positions[i], fm.mesh.positions[i]);
  EXPECT_EQ(m.triangles, fm.mesh.triangles);
  EXPECT_EQ(m.boundary_labels, fm.mesh.boundary_labels);
  const auto fa = estimate_fields(fm.mesh, fm.walls), fb = estimate_fields(m, w);
  EXPECT_EQ(fa.H, fb.H);
  EXPECT_EQ(fa.sigma_sq, fb.sigma_sq);
  const auto va = stability_verdict(assemble_index_form(fm.mesh, fm.walls, fa));
  const auto vb = stability_verdict(assemble_index_form(m, w, fb));
  EXPECT_EQ(va.lambda_min, vb.lambda_min);
}

TEST(Properties, TestFunctionIsRigidMotionInvariant) {
  const auto fm = generate_mesh(cap(1.0, 2.0, 24));
  const auto f0 = estimate_fields(fm.mesh, fm.walls);
  const auto base = build_test_function(fm.mesh, fm.walls, f0);
  const Mat3 R = random_rotation(9);
  const Vec3 t(1, 2, 3);
  const auto m = transform(fm.mesh, R, t);
  const auto w = moved(fm.walls, R, t);
  const auto tf = build_test_function(m, w, estimate_fields(m, w));
  EXPECT_LE((tf.phi - base.phi).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(tf.index_quadratic, base.index_quadratic, 1e-9);
  EXPECT_LE((tf.a - R * base.a).norm(), 1e-12);
}
