#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wdn/builtin.hpp"
#include "wdn/uncertainty.hpp"

using namespace wdn;

TEST_CASE("quantification picks the smallest diagonal set covering the samples") {
  std::vector<Vector> samples;
  Rng rng(17);
  Vector peak = Vector::Zero(2);
  for (int i = 0; i < 200; ++i) {
    Vector w(2);
    w << rng.uniform(-0.05, 0.05), rng.uniform(-0.08, 0.08);
    samples.push_back(w);
    peak = peak.cwiseMax(w.cwiseAbs());
  }

  const DisturbanceSet set = quantify_from_residuals(samples);
  REQUIRE(set.n() == 2);
  REQUIRE(set.l() == 2);
  CHECK(set.is_diagonal());
  CHECK(set.E(0, 0) == doctest::Approx(peak(0)).epsilon(1e-14));
  CHECK(set.E(1, 1) == doctest::Approx(peak(1)).epsilon(1e-14));

  // Every sample is contained; inflating any sample past the radius is not.
  for (const auto& w : samples) CHECK(set.contains(w));
  Vector outside = Vector::Zero(2);
  outside(0) = peak(0) * 1.01 + 1e-6;
  CHECK_FALSE(set.contains(outside));

  CHECK_THROWS_AS(quantify_from_residuals({}), ValidationError);
}

TEST_CASE("membership for a general generator matrix") {
  // Rotated square: E = [[1, 1], [1, -1]] maps the unit box to a diamond of
  // radius 2 along the axes and sqrt(2) along the diagonals.
  DisturbanceSet set;
  set.E = (Matrix(2, 2) << 1.0, 1.0, 1.0, -1.0).finished();
  CHECK_FALSE(set.is_diagonal());

  CHECK(set.contains((Vector(2) << 2.0, 0.0).finished()));
  CHECK(set.contains((Vector(2) << 0.0, 2.0).finished()));
  CHECK(set.contains((Vector(2) << 1.0, 1.0).finished()));
  CHECK(set.contains(Vector::Zero(2)));
  CHECK_FALSE(set.contains((Vector(2) << 2.0, 0.1).finished()));
  CHECK_FALSE(set.contains((Vector(2) << 2.1, 0.0).finished()));

  // Wide generator (l > n): membership via the min-norm preimage.
  DisturbanceSet wide;
  wide.E = (Matrix(1, 3) << 1.0, 2.0, 3.0).finished();
  CHECK(wide.contains(Vector::Constant(1, 5.9)));
  CHECK(wide.contains(Vector::Constant(1, -5.9)));
  // The support point needs a tolerance commensurate with the LP accuracy.
  CHECK(wide.contains(Vector::Constant(1, 6.0), 1e-6));
  CHECK_FALSE(wide.contains(Vector::Constant(1, 6.01)));

  // The singleton {0} contains only zero.
  const DisturbanceSet zero = DisturbanceSet::zero(2);
  CHECK(zero.l() == 0);
  CHECK(zero.contains(Vector::Zero(2)));
  CHECK_FALSE(zero.contains((Vector(2) << 1e-3, 0.0).finished()));
}

TEST_CASE("set combination: exact concatenation vs box overapproximation") {
  const LinearTankModel model = builtin::two_tank_model();
  const DisturbanceSet wm = builtin::two_tank_uncertainty();
  ScalarDemandSet wd;
  wd.e_d = 3.0;

  const DisturbanceSet exact =
      combine_sets(wm, wd, model.Bd2, model.Bd3, CombineMode::exact);
  const DisturbanceSet box = combine_sets(wm, wd, model.Bd2, model.Bd3, CombineMode::box);

  // Exact mode concatenates generators: [Bd2 e_d | Bd3 E].
  REQUIRE(exact.l() == 1 + wm.l());
  CHECK((exact.E.col(0) - model.Bd2 * wd.e_d).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((exact.E.rightCols(wm.l()) - model.Bd3 * wm.E).cwiseAbs().maxCoeff() < 1e-14);

  // Box mode is diagonal with the coordinatewise support of the exact set.
  REQUIRE(box.l() == model.n());
  CHECK(box.is_diagonal());
  const Vector exact_support = elementwise_max_disturbance(exact);
  const Vector box_support = elementwise_max_disturbance(box);
  CHECK((box_support - exact_support).cwiseAbs().maxCoeff() < 1e-14);

  // The box contains the exact set: every vertex of the exact generator box
  // maps into the diagonal set.
  const int l = exact.l();
  for (int mask = 0; mask < (1 << l); ++mask) {
    Vector g(l);
    for (int k = 0; k < l; ++k) g(k) = (mask >> k) & 1 ? 1.0 : -1.0;
    CHECK(box.contains(exact.E * g, 1e-12));
  }
}

TEST_CASE("elementwise maximum disturbance is the zonotope coordinate support") {
  DisturbanceSet set;
  set.E = (Matrix(2, 3) << 1.0, -2.0, 0.5, 0.0, 3.0, -1.0).finished();
  const Vector support = elementwise_max_disturbance(set);
  CHECK(support(0) == doctest::Approx(3.5));
  CHECK(support(1) == doctest::Approx(4.0));

  // Oracle: maximize each coordinate over all generator vertices.
  for (int i = 0; i < 2; ++i) {
    double best = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
      Vector g(3);
      for (int k = 0; k < 3; ++k) g(k) = (mask >> k) & 1 ? 1.0 : -1.0;
      best = std::max(best, std::abs((set.E * g)(i)));
    }
    CHECK(support(i) == doctest::Approx(best).epsilon(1e-14));
  }

  CHECK(elementwise_max_disturbance(DisturbanceSet::zero(3)).isZero());
}

TEST_CASE("generator boxes") {
  const GeneratorBox normal = GeneratorBox::normal(2);
  CHECK(normal.lo(0) == -1.0);
  CHECK(normal.hi(1) == 1.0);
  normal.validate();

  const GeneratorBox chall = GeneratorBox::challenging();
  chall.validate();
  CHECK(chall.lo(0) == -1.0);
  CHECK(chall.hi(0) == -0.5);
  CHECK(chall.lo(1) == 0.5);
  CHECK(chall.hi(1) == 1.0);

  const GeneratorBox extreme = GeneratorBox::extreme();
  extreme.validate();
  CHECK(extreme.lo(0) == extreme.hi(0));
  CHECK(extreme.lo(0) == -1.0);
  CHECK(extreme.hi(1) == 1.0);

  GeneratorBox bad = normal;
  bad.lo(0) = 2.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = normal;
  bad.hi(1) = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("generator sampling stays inside the box and is reproducible") {
  const GeneratorBox box = GeneratorBox::challenging();
  Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    const Vector g = sample_generator(box, rng);
    REQUIRE(g.size() == 2);
    for (int k = 0; k < 2; ++k) {
      CHECK(g(k) >= box.lo(k));
      CHECK(g(k) <= box.hi(k));
    }
  }

  // Same seed, same stream.
  Rng a(9), b(9);
  for (int i = 0; i < 20; ++i) {
    CHECK((sample_generator(box, a) - sample_generator(box, b)).cwiseAbs().maxCoeff() == 0.0);
  }

  // The degenerate extreme box always returns its single point.
  const GeneratorBox pin = GeneratorBox::extreme();
  Rng c(1);
  for (int i = 0; i < 10; ++i) {
    const Vector g = sample_generator(pin, c);
    CHECK(g(0) == -1.0);
    CHECK(g(1) == 1.0);
  }
}

TEST_CASE("scalar demand set validation") {
  ScalarDemandSet ok;
  ok.e_d = 0.5;
  ok.validate();
  ScalarDemandSet bad;
  bad.e_d = -0.1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
