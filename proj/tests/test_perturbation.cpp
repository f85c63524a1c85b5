#include <doctest.h>

#include <cmath>
#include <limits>

#include "advreg/errors.hpp"
#include "advreg/grid.hpp"
#include "advreg/perturbation.hpp"
#include "advreg/selftest.hpp"

using namespace advreg;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

bool has_point(const PerturbationSample& samp, const Vec& target, double tol = 1e-12) {
  for (const auto& p : samp.points) {
    double worst = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
      worst = std::max(worst, std::fabs(p[k] - target[k]));
    if (worst <= tol) return true;
  }
  return false;
}
}  // namespace

TEST_CASE("membership follows the defining constraint") {
  const Vec zero2{0.0, 0.0};
  CHECK(contains(PerturbationSet::lp_ball(kInf, 0.1, 2), zero2));

  const Vec corner{0.1, 0.1};
  CHECK_FALSE(contains(PerturbationSet::lp_ball(2.0, 0.1, 2), corner));
  CHECK(contains(PerturbationSet::lp_ball(kInf, 0.1, 2), corner));

  const Vec two_nonzero{0.3, 0.2, 0.0};
  const Vec one_nonzero{0.0, 0.4, 0.0};
  const auto sparse = PerturbationSet::sparse_lp_ball(kInf, 0.5, 1, 3);
  CHECK_FALSE(contains(sparse, two_nonzero));
  CHECK(contains(sparse, one_nonzero));

  // p < 1 uses the quasi-norm sum directly
  const auto quasi = PerturbationSet::lp_ball(0.5, 0.1, 2);
  const Vec inside{0.02, 0.02};
  const Vec outside{0.04, 0.03};
  CHECK(contains(quasi, inside));
  CHECK_FALSE(contains(quasi, outside));

  const Vec wrong_dim{0.1};
  CHECK_THROWS_AS((void)contains(PerturbationSet::lp_ball(2.0, 0.1, 2), wrong_dim),
                  DimensionMismatch);
}

TEST_CASE("box and segment membership") {
  const auto box = PerturbationSet::box({0.2, 0.0});
  const Vec on_axis{0.15, 0.0};
  const Vec off_axis{0.1, 0.05};
  CHECK(contains(box, on_axis));
  CHECK_FALSE(contains(box, off_axis));

  const auto seg = PerturbationSet::segment({-0.1, 0.0}, {0.1, 0.0});
  const Vec mid{0.0, 0.0};
  const Vec near_miss{0.0, 0.01};
  CHECK(contains(seg, mid));
  CHECK_FALSE(contains(seg, near_miss));
  CHECK(seg.contains_zero());
}

TEST_CASE("sample produces the documented lattices") {
  SUBCASE("singleton") {
    const auto samp = sample(PerturbationSet::singleton(2), 1);
    REQUIRE(samp.points.size() == 1);
    CHECK(samp.points[0] == Vec{0.0, 0.0});
  }
  SUBCASE("segment endpoints plus midpoint") {
    const auto samp = sample(PerturbationSet::segment({-0.1, 0.0}, {0.1, 0.0}), 3);
    REQUIRE(samp.points.size() == 3);
    CHECK(has_point(samp, {-0.1, 0.0}));
    CHECK(has_point(samp, {0.0, 0.0}));
    CHECK(has_point(samp, {0.1, 0.0}));
  }
  SUBCASE("interval ball is a uniform lattice") {
    const auto samp = sample(PerturbationSet::lp_ball(kInf, 0.1, 1), 5);
    REQUIRE(samp.points.size() == 5);
    const double expected[] = {-0.1, -0.05, 0.0, 0.05, 0.1};
    for (int i = 0; i < 5; ++i) CHECK(samp.points[i][0] == doctest::Approx(expected[i]).epsilon(1e-14));
  }
  SUBCASE("zero and axis extremes always present") {
    const auto set = PerturbationSet::lp_ball(2.0, 0.3, 2);
    const auto samp = sample(set, 7);
    CHECK(has_point(samp, {0.0, 0.0}));
    CHECK(has_point(samp, {0.3, 0.0}));
    CHECK(has_point(samp, {-0.3, 0.0}));
    CHECK(has_point(samp, {0.0, 0.3}));
    for (const auto& p : samp.points) CHECK(contains(set, p));
  }
}

TEST_CASE("diameter closed forms match brute force") {
  SUBCASE("documented values") {
    const auto seg = PerturbationSet::segment({-0.1, 0.0}, {0.1, 0.0});
    CHECK(diameter(seg, sample(seg, 3)) == doctest::Approx(0.2).epsilon(1e-14));

    const auto ball = PerturbationSet::lp_ball(kInf, 0.1, 4);
    CHECK(diameter(ball, sample(ball, 3)) == doctest::Approx(0.4).epsilon(1e-14));

    const auto single = PerturbationSet::singleton(3);
    CHECK(diameter(single, sample(single, 1)) == 0.0);
  }
  SUBCASE("euclidean ball vs dense sample") {
    const auto ball = PerturbationSet::lp_ball(2.0, 0.3, 2);
    const auto samp = sample(ball, 41);
    double brute = 0.0;
    for (std::size_t i = 0; i < samp.points.size(); ++i)
      for (std::size_t j = i + 1; j < samp.points.size(); ++j) {
        const double dx = samp.points[i][0] - samp.points[j][0];
        const double dy = samp.points[i][1] - samp.points[j][1];
        brute = std::max(brute, std::sqrt(dx * dx + dy * dy));
      }
    const double closed = diameter(ball, samp);
    CHECK(closed == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(brute <= closed + 1e-12);
    CHECK(brute >= closed - 1e-9);  // sample includes the axis extremes
  }
}

TEST_CASE("coordinate ranges") {
  const auto box = PerturbationSet::box({0.2, 0.0});
  const Vec r1 = coord_ranges(box, sample(box, 3));
  CHECK(r1[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(r1[1] == 0.0);

  const auto ball = PerturbationSet::lp_ball(2.0, 0.1, 2);
  const auto samp = sample(ball, 21);
  const Vec r2 = coord_ranges(ball, samp);
  CHECK(r2[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(r2[1] == doctest::Approx(0.2).epsilon(1e-14));
  // brute force over the sample stays within the closed form
  double lo = 0.0, hi = 0.0;
  for (const auto& p : samp.points) {
    lo = std::min(lo, p[0]);
    hi = std::max(hi, p[0]);
  }
  CHECK(hi - lo <= r2[0] + 1e-12);

  const auto single = PerturbationSet::singleton(3);
  const Vec r3 = coord_ranges(single, sample(single, 1));
  CHECK(r3 == Vec{0.0, 0.0, 0.0});
}

TEST_CASE("neighborhood enumerates lattice preimages") {
  const GridDomain X = GridDomain::unit_cube(1, 21);  // spacing 0.05
  const auto ball = PerturbationSet::lp_ball(kInf, 0.1, 1);
  const auto samp = sample(ball, 5);

  SUBCASE("interior point near the left edge") {
    const auto pts = neighborhood({0.05}, ball, X, samp);
    REQUIRE(pts.size() == 4);
    const double expected[] = {0.0, 0.05, 0.1, 0.15};
    for (int i = 0; i < 4; ++i) CHECK(pts[i][0] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
  SUBCASE("singleton maps to the point itself") {
    const auto single = PerturbationSet::singleton(1);
    const auto pts = neighborhood({0.5}, single, X, sample(single, 1));
    REQUIRE(pts.size() == 1);
    CHECK(pts[0][0] == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("point beyond the edge keeps one preimage") {
    const auto pts = neighborhood({-0.1}, ball, X, samp);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0][0] == 0.0);
  }
  SUBCASE("point from a finer sample has no preimage") {
    const auto coarse = sample(ball, 3);  // {-0.1, 0, 0.1}
    CHECK_THROWS_AS((void)neighborhood({0.025}, ball, X, coarse), EmptyNeighborhood);
  }
}

TEST_CASE("perturbed domain covers the Minkowski sum") {
  SUBCASE("singleton keeps the lattice") {
    const GridDomain X = GridDomain::unit_cube(1, 21);
    const auto single = PerturbationSet::singleton(1);
    const GridDomain X2 = perturbed_domain(X, single, sample(single, 1));
    REQUIRE(X2.size() == X.size());
    for (std::size_t i = 0; i < X.size(); ++i) CHECK(X2.point(i) == X.point(i));
  }
  SUBCASE("interval ball inflates the span") {
    const GridDomain X = GridDomain::unit_cube(1, 21);
    const auto ball = PerturbationSet::lp_ball(kInf, 0.1, 1);
    const GridDomain X2 = perturbed_domain(X, ball, sample(ball, 5));
    CHECK(X2.lower()[0] == doctest::Approx(-0.1).epsilon(1e-14));
    CHECK(X2.upper()[0] == doctest::Approx(1.1).epsilon(1e-14));
    CHECK(X2.size() >= 25);
  }
  SUBCASE("dyadic case dedups exactly") {
    const GridDomain X = GridDomain::unit_cube(1, 17);  // spacing 1/16
    const auto ball = PerturbationSet::lp_ball(kInf, 0.125, 1);
    const auto samp = sample(ball, 5);  // steps of 1/16
    const GridDomain X2 = perturbed_domain(X, ball, samp);
    CHECK(X2.size() == 21);
    CHECK(X2.lower()[0] == -0.125);
    CHECK(X2.upper()[0] == 1.125);
  }
  SUBCASE("single-axis box inflates one axis only") {
    const GridDomain X = GridDomain::unit_cube(2, 11);
    const auto box = PerturbationSet::box({0.1, 0.0});
    const GridDomain X2 = perturbed_domain(X, box, sample(box, 3));
    CHECK(X2.lower()[0] == doctest::Approx(-0.1).epsilon(1e-14));
    CHECK(X2.upper()[0] == doctest::Approx(1.1).epsilon(1e-14));
    CHECK(X2.lower()[1] == 0.0);
    CHECK(X2.upper()[1] == 1.0);
  }
}

TEST_CASE("sampled sets satisfy the shared properties") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = trial % 2 + 1;
    const auto set = selftest::random_set(rng, dim, 1.0 / 64.0);
    const int res = set.kind() == PerturbKind::FinitePoints
                        ? static_cast<int>(set.points().size())
                        : 9;
    const auto samp = sample(set, res);
    REQUIRE(!samp.points.empty());
    if (set.contains_zero()) CHECK(has_point(samp, Vec(dim, 0.0), 0.0));
    for (const auto& p : samp.points) CHECK(contains(set, p));

    const double diam = diameter(set, samp);
    const Vec ranges = coord_ranges(set, samp);
    for (double r : ranges) CHECK(diam >= r - 1e-12);
    // every sampled pair stays within the reported diameter
    for (std::size_t i = 0; i < samp.points.size(); ++i)
      for (std::size_t j = i + 1; j < samp.points.size(); ++j) {
        double d2 = 0.0;
        for (int k = 0; k < dim; ++k) {
          const double t = samp.points[i][k] - samp.points[j][k];
          d2 += t * t;
        }
        CHECK(std::sqrt(d2) <= diam + 1e-12);
      }
  }
}
