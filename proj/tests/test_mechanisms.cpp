#include <cmath>

#include "doctest.h"
#include "facloc/mechanisms.hpp"
#include "facloc/properties.hpp"
#include "facloc/random.hpp"

using namespace facloc;

namespace {

const Norm kL2 = Norm::lp(2);

Point random_point(CounterRng& rng, std::size_t d, double r) {
  std::vector<double> c(d);
  for (double& x : c) x = rng.uniform(-r, r);
  return Point(std::move(c));
}

Profile random_profile(CounterRng& rng, std::size_t n, std::size_t d) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(random_point(rng, d, 3));
  return Profile(std::move(pts));
}

std::vector<MechanismSpec> all_specs() {
  return {MechanismSpec::make_dictator(1), MechanismSpec::make_dictator(2), MechanismSpec::make_rand_med(),
          MechanismSpec::make_rand_center(), MechanismSpec::make_separate_2dictator(0.0),
          MechanismSpec::make_separate_2dictator(-0.4), MechanismSpec::make_coordinate_median()};
}

}  // namespace

TEST_CASE("spec strings round-trip") {
  for (const char* s : {"dictator:1", "dictator:3", "rand_med", "rand_center", "sep2d:a=0", "sep2d:a=-1.25",
                        "coord_median"}) {
    const MechanismSpec spec = MechanismSpec::parse(s);
    CHECK(MechanismSpec::parse(spec.to_string()).to_string() == spec.to_string());
  }
  CHECK(MechanismSpec::parse("sep2d:a=0.1").a == 0.1);
  CHECK_THROWS(MechanismSpec::parse("dictator:0"));
  CHECK_THROWS(MechanismSpec::parse("dictator"));
  CHECK_THROWS(MechanismSpec::parse("sep2d"));
  CHECK_THROWS(MechanismSpec::parse("median"));
}

TEST_CASE("dictator picks its agent") {
  const Lottery out = apply(MechanismSpec::make_dictator(1), Profile({{3, 3}, {0, 0}}), kL2);
  CHECK(out == Lottery::degenerate(Point{3, 3}));
  CHECK_THROWS_AS(apply(MechanismSpec::make_dictator(3), Profile({{3, 3}, {0, 0}}), kL2), DomainError);
}

TEST_CASE("rand_med examples") {
  const Lottery two = apply_rand_med(Profile({{0, 0}, {2, 0}}));
  CHECK(two == Lottery({{0.25, Point{0, 0}}, {0.5, Point{1, 0}}, {0.25, Point{2, 0}}}));
  CHECK(apply_rand_med(Profile({{0, 0}, {0, 0}, {5, 5}})) == Lottery::degenerate(Point{0, 0}));
  const Lottery ignored = apply_rand_med(Profile({{1, 1}, {3, 1}, {99, 99}}));
  CHECK(ignored == Lottery({{0.25, Point{1, 1}}, {0.5, Point{2, 1}}, {0.25, Point{3, 1}}}));
}

TEST_CASE("rand_center examples") {
  const Lottery two = apply_rand_center(Profile({{0, 0}, {1, 0}}));
  CHECK(two == Lottery({{0.25, Point{0, 0}}, {0.5, Point{0.5, 0}}, {0.25, Point{1, 0}}}));
  const Lottery three = apply_rand_center(Profile({{0, 0}, {1, 0}, {2, 0}}));
  REQUIRE(three.size() == 3);
  CHECK(three.atoms()[0].weight == doctest::Approx(1.0 / 6.0));
  CHECK(three.atoms()[1].point == Point{1, 0});
  CHECK(three.atoms()[1].weight == doctest::Approx(0.5 + 1.0 / 6.0));
  CHECK(three.atoms()[2].weight == doctest::Approx(1.0 / 6.0));
  CHECK(apply_rand_center(Profile(std::vector<Point>(4, Point{2, -2}))) == Lottery::degenerate(Point{2, -2}));
}

TEST_CASE("separate 2-dictator examples") {
  const Lottery a = apply_separate_2dictator(Profile({{2, 0}, {5, 0}, {0, 4}}), kL2, 0.0);
  CHECK(a == Lottery({{2.0 / 3.0, Point{2, 0}}, {1.0 / 3.0, Point{4, 0}}}));

  const Lottery b = apply_separate_2dictator(Profile({{-1, 0}, {5, 0}, {-3, 4}}), kL2, 0.0);
  const double s = 1.0 / std::sqrt(20.0);
  const Point y{-1.0 - 2.0 * s, 4.0 * s};
  REQUIRE(b.size() == 2);
  const Atom& far = b.atoms()[0].point == Point{-1, 0} ? b.atoms()[1] : b.atoms()[0];
  CHECK(max_abs_diff(far.point, y) < 1e-12);
  CHECK(far.weight == doctest::Approx(1.0 / 3.0));
  CHECK(kL2.distance(far.point, Point{-1, 0}) == doctest::Approx(1.0));

  CHECK(apply_separate_2dictator(Profile(std::vector<Point>(3, Point{1, 1})), kL2, 0.0) ==
        Lottery::degenerate(Point{1, 1}));
  CHECK_THROWS_AS(apply_separate_2dictator(Profile({{0, 0}, {1, 0}}), kL2, 0.0), DomainError);
  CHECK_THROWS_AS(apply(MechanismSpec::make_separate_2dictator(0), Profile({{0, 0}, {1, 0}}), kL2), DomainError);
}

TEST_CASE("separate 2-dictator reads the raw first coordinate") {
  // A transform that swaps axes must not change which branch is taken.
  const Norm swap = Norm::transformed(2, {0, 1, 1, 0}, 2);
  const Profile p({{-1, 5}, {3, 5}, {-1, 9}});
  const Lottery out = apply_separate_2dictator(p, swap, 0.0);
  for (const Atom& at : out.atoms()) CHECK(at.point[0] == -1.0);
}

TEST_CASE("coordinate median examples") {
  CHECK(apply_coordinate_median(Profile({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {1, 1, 1}})) ==
        Lottery::degenerate(Point{1, 1, 1}));
  CHECK(apply_coordinate_median(Profile({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}, {1, 1, 1}})) ==
        Lottery::degenerate(Point{0, 0, 0}));
  const std::vector<Point> single{Point{4, 2}};
  CHECK(apply_coordinate_median(single) == Lottery::degenerate(Point{4, 2}));
  // Lower median for even n.
  CHECK(apply_coordinate_median(Profile({{0, 3}, {2, 1}, {4, 0}, {6, 2}})) == Lottery::degenerate(Point{2, 1}));
}

TEST_CASE("norm dimension must match the profile") {
  const Norm w = Norm::weighted(2, {1, 2, 3});
  CHECK_THROWS_AS(apply(MechanismSpec::make_rand_med(), Profile({{0, 0}, {1, 1}}), w), DimensionError);
}

TEST_CASE("every mechanism is unanimous") {
  CounterRng rng(8);
  for (const MechanismSpec& spec : all_specs()) {
    for (int k = 0; k < 50; ++k) {
      const Point z = random_point(rng, 2, 10);
      for (std::size_t n : {3u, 4u, 6u}) {
        CHECK(apply(spec, Profile(std::vector<Point>(n, z)), kL2) == Lottery::degenerate(z));
      }
    }
  }
}

TEST_CASE("rand_med and rand_center are translation covariant") {
  CounterRng rng(9);
  for (const MechanismSpec& spec : {MechanismSpec::make_rand_med(), MechanismSpec::make_rand_center()}) {
    for (int k = 0; k < 300; ++k) {
      const Profile p = random_profile(rng, 2 + rng.below(5), 2);
      const Point a = random_point(rng, 2, 5);
      CHECK(lottery_discrepancy(apply(spec, p.shifted(a), kL2), apply(spec, p, kL2).shifted(a)) < kGeomTol);
    }
  }
}

TEST_CASE("support structure") {
  CounterRng rng(10);
  for (int k = 0; k < 300; ++k) {
    const Profile p = random_profile(rng, 3 + rng.below(4), 2);
    const Lottery med = apply_rand_med(p);
    for (const Atom& at : med.atoms()) CHECK(segment_excess(p[0], p[1], at.point, kL2) <= kGeomTol);

    // rand_center atoms are reports or their mean: inside the hull.
    const Point m = mean(p.points());
    const Lottery center = apply_rand_center(p);
    for (const Atom& at : center.atoms()) {
      bool known = max_abs_diff(at.point, m) < 1e-12;
      for (const Point& x : p.points()) known = known || max_abs_diff(at.point, x) < 1e-12;
      CHECK(known);
    }

    const Lottery s = apply_separate_2dictator(p, kL2, rng.uniform(-2, 2));
    bool on12 = true, on13 = true;
    for (const Atom& at : s.atoms()) {
      on12 = on12 && segment_excess(p[0], p[1], at.point, kL2) <= kGeomTol;
      on13 = on13 && segment_excess(p[0], p[2], at.point, kL2) <= kGeomTol;
    }
    CHECK((on12 || on13));
    if (s.size() == 2) {
      for (const Atom& at : s.atoms()) {
        if (at.point == p[0]) CHECK(at.weight == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("dictator ignores everyone else") {
  CounterRng rng(12);
  for (int k = 0; k < 100; ++k) {
    const Profile p = random_profile(rng, 4, 3);
    const Profile q = p.with(0, random_point(rng, 3, 9)).with(2, random_point(rng, 3, 9)).with(3, random_point(rng, 3, 9));
    CHECK(apply(MechanismSpec::make_dictator(2), p, kL2) == apply(MechanismSpec::make_dictator(2), q, kL2));
  }
}

TEST_CASE("type-erased mechanism") {
  const Mechanism m(MechanismSpec::make_separate_2dictator(0));
  CHECK(m.min_agents() == 3);
  CHECK(m.name() == "sep2d:a=0");
  CHECK_THROWS_AS(m(Profile({{0, 0}, {1, 0}}), kL2), DomainError);
  const Mechanism custom("first", [](const Profile& p, const Norm&) { return Lottery::degenerate(p[0]); });
  CHECK(custom(Profile({{0, 0}, {1, 0}}), kL2) == Lottery::degenerate(Point{0, 0}));
  CHECK_FALSE(custom.spec());
}
