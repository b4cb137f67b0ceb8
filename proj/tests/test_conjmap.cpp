#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support.hpp"
#include "torusconj/cones.hpp"
#include "torusconj/conjmap.hpp"
#include "torusconj/error.hpp"

using namespace torusconj;
using namespace torusconj::conjmap;

namespace {

constexpr double tol = 1e-10;

SemiConjEngine factor_engine(const specdsl::TorusMapSpec& spec, long m, int n) {
  const auto p = testing::prepare_factor(spec, m);
  return semiconj::build_engine(p.coords, p.block, n);
}

const SemiConjEngine& skew_engine() {
  static const SemiConjEngine e = factor_engine(testing::load_fixture("skew2d.map"), 2, 40);
  return e;
}

// tau for the alpha = 0.5 cone, which the d=2 fixture certifies.
const double skew_tau = cones::tau(cones::ConeParams{1, 0.5, 1.2});

Vector scalar(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST_CASE("H_forward") {
  SUBCASE("G = 0 regroups coordinates") {
    const SemiConjEngine e = factor_engine(testing::load_fixture("skew2d_linear.map"), 2, 10);
    Vector z(2);
    z << 1.3, -0.4;
    const HPoint h = H_forward(e, z);
    CHECK(h.x[0] == doctest::Approx(0.3));
    CHECK(h.y[0] == doctest::Approx(0.6));
  }
  SUBCASE("second component is the wrapped fiber coordinate") {
    std::mt19937_64 rng(51);
    for (int i = 0; i < 100; ++i) {
      const Vector z = testing::random_point(rng, 2, -2.0, 2.0);
      CHECK(H_forward(skew_engine(), z).y[0] == dynamics::wrap(z[1]));
    }
  }
  SUBCASE("a fixed point maps to a fixed point of the base") {
    const SemiConjEngine e = factor_engine(testing::load_fixture("circle_doubling.map"), 2, 40);
    const double x = H_forward(e, scalar(0.0)).x[0];
    CHECK(dynamics::torus_distance(scalar(2.0 * x), scalar(x)) <= e.ceiling());
    const double half = H_forward(e, scalar(0.5)).x[0];
    CHECK(half == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("small perturbations move H continuously") {
    std::mt19937_64 rng(52);
    for (int i = 0; i < 100; ++i) {
      const Vector z = testing::random_point(rng, 2, 0.1, 0.9);
      const Vector dz = Vector::Constant(2, 1e-7);
      const HPoint a = H_forward(skew_engine(), z);
      const HPoint b = H_forward(skew_engine(), Vector(z + dz));
      CHECK(dynamics::torus_distance(a.x, b.x) <= 1e-6);
    }
  }
  SUBCASE("hyperbolic engines are rejected") {
    const auto p = testing::prepare_full(testing::load_fixture("cat.map"));
    const SemiConjEngine e = semiconj::build_engine(p.coords, p.block, 20);
    CHECK_THROWS_AS(H_forward(e, Vector::Zero(2)), PreconditionError);
    CHECK_THROWS_AS(solve_fiber_point(e, Vector::Zero(2), Vector::Zero(0), tol), PreconditionError);
  }
}

TEST_CASE("solve_fiber_point on the d=2 fixture") {
  const SemiConjEngine& e = skew_engine();
  std::mt19937_64 rng(53);
  for (int i = 0; i < 1000; ++i) {
    const Vector x0 = testing::random_point(rng, 1, -1.0, 2.0);
    const Vector y0 = testing::random_point(rng, 1);
    const LiftPoint lp = solve_fiber_point(e, x0, y0, tol);
    CHECK(lp.certified);
    CHECK(lp.residual <= tol);
    CHECK(lp.min_slope > 0.0);
    Vector z(2);
    z << lp.t[0], y0[0];
    CHECK(std::abs(semiconj::phi_hat(e, z).value[0] - x0[0]) <= tol);

    if (i % 50 == 0) {
      // Uniqueness: Phi^ moves away from x0 along the line at the observed rate.
      for (int j = 1; j <= 99; ++j) {
        const double s = 0.01 * j;
        Vector zs = z;
        zs[0] += s;
        const double gap = std::abs(semiconj::phi_hat(e, zs).value[0] - x0[0]);
        CHECK(gap >= lp.min_slope * 0.01 - 2.0 * e.tail());
      }
    }
  }
  CHECK_THROWS_AS(solve_fiber_point(e, scalar(0.1), scalar(0.1), 0.0), PreconditionError);
  CHECK_THROWS_AS(solve_fiber_point(e, Vector::Zero(2), scalar(0.1), tol), PreconditionError);
}

TEST_CASE("G = 0 fibers") {
  const SemiConjEngine e = factor_engine(testing::load_fixture("skew2d_linear.map"), 2, 10);
  const LiftPoint lp = solve_fiber_point(e, scalar(0.7), scalar(0.2), tol);
  CHECK(lp.t[0] == doctest::Approx(0.7).epsilon(1e-12));
  const Vector z = H_inverse(e, scalar(0.7), scalar(0.2), tol);
  CHECK(z[0] == doctest::Approx(0.7));
  CHECK(z[1] == doctest::Approx(0.2));
  const FiberGraph g = trace_fiber(e, scalar(0.3), 16, tol);
  for (const Vector& t : g.t) CHECK(t[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(g.continuity_constant <= 1e-9);
  CHECK(g.pass(tol));
}

TEST_CASE("round trips of H") {
  const SemiConjEngine& e = skew_engine();
  const double rt_tol = round_trip_tolerance(e, tol, skew_tau);
  CHECK(rt_tol == doctest::Approx(tol / skew_tau + 2.0 * e.tail() / skew_tau));
  std::mt19937_64 rng(54);
  for (int i = 0; i < 1000; ++i) {
    const Vector z = testing::random_point(rng, 2);
    const HPoint h = H_forward(e, z);
    CHECK(dynamics::torus_distance(H_inverse(e, h.x, h.y, tol), z) <= rt_tol);

    const Vector x0 = testing::random_point(rng, 1);
    const Vector y0 = testing::random_point(rng, 1);
    const HPoint back = H_forward(e, H_inverse(e, x0, y0, tol));
    CHECK(dynamics::torus_distance(back.x, x0) <= tol);
    CHECK(dynamics::torus_distance(back.y, y0) <= 1e-15);
  }
  CHECK_THROWS_AS(round_trip_tolerance(e, tol, 0.0), PreconditionError);
}

TEST_CASE("skew product form") {
  SUBCASE("linear map: base is A x and fibers follow the conjugated matrix") {
    const auto p = testing::prepare_factor(specdsl::parse_spec("dim=2\nM=[[3,1],[0,1]]\n"), 3);
    const SemiConjEngine e = semiconj::build_engine(p.coords, p.block, 10);
    const SkewReport r = skew_product_residual(e, 8, tol, 1.0);
    CHECK(r.max_base_residual <= 1e-12);
    const intlat::IntMatrix& c = p.block.conjugated;
    CHECK(c(0, 1) == 0);
    REQUIRE(r.samples.size() == 64);
    for (const SkewSample& s : r.samples) {
      const double fiber = c(1, 0).get_d() * s.x[0] + c(1, 1).get_d() * s.y[0];
      CHECK(dynamics::torus_distance(s.fiber, scalar(fiber)) <= 1e-12);
      CHECK(dynamics::torus_distance(s.base, scalar(c(0, 0).get_d() * s.x[0])) <= 1e-12);
    }
  }
  SUBCASE("one-dimensional base is the doubling map") {
    const SemiConjEngine e = factor_engine(testing::load_fixture("circle_doubling.map"), 2, 40);
    const SkewReport r = skew_product_residual(e, 64, tol, 1.0);
    CHECK(r.within_ceiling());
    for (const SkewSample& s : r.samples)
      CHECK(dynamics::torus_distance(s.base, scalar(2.0 * s.x[0])) <= r.ceiling);
  }
  SUBCASE("d=2 fixture on a 64x64 grid") {
    const SemiConjEngine& e = skew_engine();
    const SkewReport r = skew_product_residual(e, 64, tol, skew_tau);
    CHECK(r.samples.size() == 4096);
    CHECK(r.certified);
    CHECK(r.ceiling ==
          doctest::Approx(e.ceiling() + tol * (1.0 + e.A_norm() / skew_tau)).epsilon(1e-12));
    CHECK(r.max_base_residual <= (e.A_norm() + 1.0) * e.tail() + e.rounding_allowance() +
                                     tol * (1.0 + e.A_norm() / skew_tau));
    CHECK(r.within_ceiling());
  }
}

TEST_CASE("trace_fiber on the d=2 fixture") {
  const SemiConjEngine& e = skew_engine();
  const FiberGraph g = trace_fiber(e, scalar(0.25), 256, tol);
  CHECK(g.t.size() == 256);
  CHECK(g.certified);
  CHECK(g.max_residual <= tol);
  CHECK(g.periodicity_bound == doctest::Approx(2.0 * e.tail() + tol));
  CHECK(g.periodicity_error <= g.periodicity_bound);
  CHECK(g.fiber_image_error <= g.fiber_image_bound);
  CHECK(g.monotone_slope > 0.0);
  CHECK(g.continuity_constant < 1.0);
  CHECK(g.pass(tol));
  CHECK_THROWS_AS(trace_fiber(e, scalar(0.25), 1, tol), PreconditionError);
}

TEST_CASE("fiber smoothness probe") {
  const SemiConjEngine& e = skew_engine();
  std::vector<FiberGraph> fibers;
  for (int r : {16, 32, 64}) fibers.push_back(trace_fiber(e, scalar(0.25), r, tol));
  const SmoothnessReport dominated = fiber_smoothness_probe(fibers, true);
  CHECK(dominated.resolutions == std::vector<int>{16, 32, 64});
  CHECK(dominated.slope_differences.size() == 2);
  CHECK(dominated.decreasing);
  CHECK_FALSE(dominated.no_certificate);
  CHECK(fiber_smoothness_probe(fibers, false).no_certificate);

  const SemiConjEngine flat = factor_engine(testing::load_fixture("skew2d_linear.map"), 2, 10);
  const SmoothnessReport zero =
      fiber_smoothness_probe({trace_fiber(flat, scalar(0.1), 8, tol), trace_fiber(flat, scalar(0.1), 16, tol)}, true);
  for (double d : zero.slope_differences) CHECK(d <= 1e-9);

  CHECK_THROWS_AS(fiber_smoothness_probe({fibers[0], fibers[2]}, true), PreconditionError);
}

TEST_CASE("k > 1 uses the uncertified iteration") {
  const specdsl::TorusMapSpec spec = specdsl::parse_spec(
      "dim=3\nM=[[2,0,0],[0,3,0],[0,0,1]]\nG[1]=0.01*sin(2*pi*(z3))\nG[2]=0.01*cos(2*pi*(z1+z3))\n");
  const intlat::BlockForm block = intlat::factor_form(spec.M, {intlat::IntVector{1, 0, 0}, intlat::IntVector{0, 1, 0}});
  REQUIRE(block.k == 2);
  const SemiConjEngine e = semiconj::build_engine(dynamics::change_coordinates(spec, block.S), block, 40);
  Vector x0(2);
  x0 << 0.3, 0.8;
  const LiftPoint lp = solve_fiber_point(e, x0, scalar(0.4), tol);
  CHECK_FALSE(lp.certified);
  CHECK(lp.residual <= tol);
  const FiberGraph g = trace_fiber(e, x0, 8, tol);
  CHECK_FALSE(g.certified);
  CHECK(g.max_residual <= tol);
}

TEST_CASE("CSV exports") {
  const SemiConjEngine& e = skew_engine();
  std::ostringstream fiber, skew;
  write_fiber_csv(trace_fiber(e, scalar(0.25), 4, tol), fiber);
  write_skew_csv(skew_product_residual(e, 2, tol, skew_tau), skew);
  CHECK(fiber.str().rfind("y_1,t_1,residual\n", 0) == 0);
  CHECK(skew.str().rfind("x_1,y_1,base_1,fiber_1,base_residual\n", 0) == 0);
  const std::string text = skew.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}
