#include "convroof/analysis.hpp"
#include "convroof/errors.hpp"
#include "convroof/examples.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace convroof;
using Eigen::VectorXd;

namespace {

SampledConvexProblem affine_square(const Eigen::Vector2d& g, double c) {
  std::vector<Point> pts;
  std::vector<double> f;
  for (int i = 0; i <= 4; ++i) {
    for (int j = 0; j <= 4; ++j) {
      const Eigen::Vector2d p(i / 4.0, j / 4.0);
      pts.emplace_back(VectorXd(p));
      f.push_back(g.dot(p) + c);
    }
  }
  return SampledConvexProblem(PointCloud(pts), f);
}

}  // namespace

TEST_CASE("oscillation of affine data is bounded by radius times slope") {
  const Eigen::Vector2d g(0.6, -0.8);
  const auto pb = affine_square(g, 0.25);
  const std::vector<double> radii{0.2, 0.1, 0.05};
  const auto rep = analysis::oscillation(pb, Point{0.5, 0.5}, radii, 50, {.seed = 3});
  REQUIRE(rep.levels.size() == 3);
  CHECK(rep.center_value == doctest::Approx(0.25 + 0.5 * (0.6 - 0.8)));
  for (const auto& level : rep.levels) {
    REQUIRE(level.osc.has_value());
    CHECK(*level.osc <= level.radius * g.norm() + 1e-9);
    CHECK(*level.osc > 0.2 * level.radius * g.norm());
    CHECK(level.interior_samples == 50);
  }
  const auto again = analysis::oscillation(pb, Point{0.5, 0.5}, radii, 50, {.seed = 3});
  CHECK(*again.levels[1].osc == *rep.levels[1].osc);
}

TEST_CASE("oscillation argument checks") {
  const auto pb = affine_square({1.0, 0.0}, 0.0);
  const std::vector<double> increasing{0.1, 0.2};
  const std::vector<double> ok{0.1};
  CHECK_THROWS_AS(analysis::oscillation(pb, Point{0.5, 0.5}, increasing, 10), std::invalid_argument);
  CHECK_THROWS_AS(analysis::oscillation(pb, Point{0.5, 0.5}, ok, 0), std::invalid_argument);
  CHECK_THROWS_AS(analysis::oscillation(pb, Point{2.0, 0.5}, ok, 10), MembershipError);
}

TEST_CASE("tomato can oscillates at the puncture at every radius") {
  const auto ex = examples::make_example("tomato_can", 200);
  const std::vector<double> radii{0.2, 0.1, 0.05};
  const auto rep = analysis::oscillation(ex.problem, Point{0.0, 0.0, 1.0}, radii, 40, {.seed = 0});
  for (const auto& level : rep.levels) {
    REQUIRE(level.osc.has_value());
    CHECK(*level.osc >= 0.9);
  }
}

TEST_CASE("gradient probe recovers affine slopes") {
  const Eigen::Vector2d g(0.6, -0.8);
  const auto pb = affine_square(g, 0.25);
  const auto probe = analysis::gradient_probe(pb, Point{0.5, 0.5});
  CHECK(probe.step == doctest::Approx(1e-3 * std::sqrt(2.0)));
  for (Index i = 0; i < 2; ++i) {
    CHECK(probe.stencils[static_cast<std::size_t>(i)] == analysis::Stencil::Central);
    CHECK(probe.grad(i) == doctest::Approx(g(i)).epsilon(1e-8));
    CHECK(std::abs(probe.hessian_diag(i)) < 1e-4);
  }
  const auto corner = analysis::gradient_probe(pb, Point{0.0, 1.0}, 0.1);
  CHECK(corner.stencils[0] == analysis::Stencil::Forward);
  CHECK(corner.stencils[1] == analysis::Stencil::Backward);
  CHECK(corner.grad(0) == doctest::Approx(g(0)));
  CHECK(corner.grad(1) == doctest::Approx(g(1)));
  CHECK_THROWS_AS(analysis::gradient_probe(pb, Point{0.5, 0.5}, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(analysis::gradient_probe(pb, Point{1.5, 0.5}), MembershipError);
  CHECK(analysis::to_string(analysis::Stencil::Central) == "central");
}

TEST_CASE("finite differences of a sampled parabola at grid nodes") {
  // The roof is the piecewise-linear interpolant of x^2 on a grid of spacing
  // 0.01; with a step of five cells the central differences are exact.
  std::vector<Point> pts;
  std::vector<double> f;
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    pts.push_back(Point{x});
    f.push_back(x * x);
  }
  const SampledConvexProblem pb(PointCloud(pts), f);
  for (double x : {0.2, 0.5, 0.7}) {
    const auto probe = analysis::gradient_probe(pb, Point{x}, 0.05);
    CHECK(probe.grad(0) == doctest::Approx(2 * x).epsilon(1e-9));
    CHECK(probe.hessian_diag(0) == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("refinement convergence of the potato chip") {
  const std::vector<Index> res{64, 256};
  const std::vector<Point> probes{Point{0.5, 0.5}, Point{0.0, 0.9}};
  const auto rows = analysis::refinement_convergence("potato_chip", res, probes);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    REQUIRE(r.error.has_value());
    CHECK(*r.oracle == doctest::Approx(1.0 - std::sqrt(1.0 - std::pow(r.probe[1], 4))));
  }
  CHECK(rows[0].resolution == 64);
  CHECK(*rows[2].error < *rows[0].error);
  CHECK(*rows[3].error < *rows[1].error);
  CHECK_THROWS_AS(analysis::refinement_convergence("nope", res, probes), UnknownExampleError);
}
