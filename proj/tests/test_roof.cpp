#include "convroof/errors.hpp"
#include "convroof/examples.hpp"
#include "convroof/roof.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace convroof;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

MatrixXd random_points(Index d, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  MatrixXd pts(d, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < d; ++i) pts(i, j) = unit(rng);
  return pts;
}

// Minimum over every triangle, segment and vertex containing x (Caratheodory
// in the plane).
double brute_roof_2d(const MatrixXd& pts, const std::vector<double>& f, const Vector2d& x) {
  double best = std::numeric_limits<double>::infinity();
  const Index n = pts.cols();
  for (Index a = 0; a < n; ++a) {
    for (Index b = a; b < n; ++b) {
      for (Index c = b; c < n; ++c) {
        Eigen::Matrix3d M;
        M << pts(0, a), pts(0, b), pts(0, c), pts(1, a), pts(1, b), pts(1, c), 1, 1, 1;
        if (std::abs(M.determinant()) < 1e-12) continue;
        const Eigen::Vector3d w = M.partialPivLu().solve(Eigen::Vector3d(x.x(), x.y(), 1.0));
        if (w.minCoeff() < -1e-12) continue;
        best = std::min(best, w(0) * f[static_cast<std::size_t>(a)] +
                                  w(1) * f[static_cast<std::size_t>(b)] +
                                  w(2) * f[static_cast<std::size_t>(c)]);
      }
    }
  }
  return best;
}

// Lower convex hull of (x_i, f_i) evaluated at t.
double lower_hull_1d(std::vector<std::pair<double, double>> pts, double t) {
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& a = hull.back();
      if ((a.first - o.first) * (p.second - o.second) - (a.second - o.second) * (p.first - o.first) <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  t = std::clamp(t, hull.front().first, hull.back().first);
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    if (t <= hull[k + 1].first) {
      const double s = (t - hull[k].first) / (hull[k + 1].first - hull[k].first);
      return (1 - s) * hull[k].second + s * hull[k + 1].second;
    }
  }
  return hull.back().second;
}

SampledConvexProblem unit_square(const std::vector<double>& corner_values) {
  return SampledConvexProblem(
      PointCloud(std::vector<Point>{Point{0.0, 0.0}, Point{1.0, 0.0}, Point{1.0, 1.0}, Point{0.0, 1.0}}),
      corner_values);
}

}  // namespace

TEST_CASE("problem construction validates values") {
  const PointCloud cloud(std::vector<Point>{Point{0.0}, Point{1.0}});
  CHECK_THROWS_AS(SampledConvexProblem(cloud, {1.0}), DimensionError);
  CHECK_THROWS_AS(SampledConvexProblem(cloud, {1.0, std::nan("")}), DimensionError);
  const SampledConvexProblem pb(cloud, {3.0, -2.0});
  CHECK(pb.lower_bound() == -2.0);
  CHECK(pb.upper_bound() == 3.0);
}

TEST_CASE("roof matches brute-force simplex enumeration in the plane") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MatrixXd pts = random_points(2, 12, seed);
    std::mt19937_64 rng(seed * 7);
    std::normal_distribution<double> gauss;
    std::vector<double> f;
    for (Index j = 0; j < pts.cols(); ++j) f.push_back(gauss(rng));
    const SampledConvexProblem pb(PointCloud(pts), f);
    std::exponential_distribution<double> expo(1.0);
    for (int t = 0; t < 20; ++t) {
      Vector2d x = Vector2d::Zero();
      double total = 0.0;
      for (Index j = 0; j < pts.cols(); ++j) {
        const double w = expo(rng);
        x += w * pts.col(j);
        total += w;
      }
      x /= total;
      const auto rv = roof_eval(pb, Point(VectorXd(x)));
      CHECK(rv.value == doctest::Approx(brute_roof_2d(pts, f, x)).epsilon(1e-9));
      CHECK(rv.decomposition.support_size() <= 3);
      CHECK((rv.decomposition.point(pb.cloud()) - x).norm() < 1e-9);
      CHECK(rv.decomposition.combine(pb.values()) == doctest::Approx(rv.value));
    }
  }
}

TEST_CASE("collinear samples in R^2 reduce to the 1D lower hull") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> pts;
  std::vector<double> f;
  std::vector<std::pair<double, double>> graph;
  for (int i = 0; i < 15; ++i) {
    const double t = unit(rng);
    pts.push_back(Point{t, 2.0 * t - 1.0});
    f.push_back(std::sin(7.0 * t));
    graph.emplace_back(t, f.back());
  }
  const SampledConvexProblem pb(PointCloud(pts), f);
  CHECK(pb.frame().dim() == 1);
  const auto [lo, hi] = std::minmax_element(graph.begin(), graph.end());
  for (int k = 0; k <= 20; ++k) {
    const double t = lo->first + (hi->first - lo->first) * k / 20.0;
    const auto rv = roof_eval(pb, Point{t, 2.0 * t - 1.0});
    CHECK(rv.value == doctest::Approx(lower_hull_1d(graph, t)).epsilon(1e-9));
    CHECK(rv.decomposition.support_size() <= 2);
  }
}

TEST_CASE("convex data is reproduced at the samples and affine data everywhere") {
  const MatrixXd pts = random_points(3, 30, 11);
  std::vector<double> quad;
  std::vector<double> affine;
  const Eigen::Vector3d g(0.3, -1.2, 2.0);
  for (Index j = 0; j < pts.cols(); ++j) {
    quad.push_back(pts.col(j).squaredNorm());
    affine.push_back(g.dot(pts.col(j)) + 0.5);
  }
  const SampledConvexProblem pq(PointCloud(pts), quad);
  const SampledConvexProblem pa(PointCloud(pts), affine);
  for (Index j = 0; j < pts.cols(); ++j) {
    CHECK(roof_eval(pq, pq.cloud().point(j)).value == doctest::Approx(quad[static_cast<std::size_t>(j)]).epsilon(1e-10));
  }
  const VectorXd centroid = pts.rowwise().mean();
  CHECK(roof_eval(pa, Point(centroid)).value == doctest::Approx(g.dot(centroid) + 0.5).epsilon(1e-10));
  CHECK(roof_eval(pq, Point(centroid)).value >= centroid.squaredNorm() - 1e-12);
}

TEST_CASE("queries outside the hull") {
  const auto pb = unit_square({0.0, 1.0, 2.0, 1.0});
  CHECK_THROWS_AS(roof_eval(pb, Point{1.5, 0.5}), MembershipError);
  CHECK_FALSE(try_roof_eval(pb, Eigen::Vector2d(1.5, 0.5)).has_value());
  CHECK_THROWS_AS(roof_eval(pb, Point{0.5}), DimensionError);
  CHECK(hull_contains(pb, Eigen::Vector2d(1.0, 1.0)));
  CHECK(hull_contains(pb, Eigen::Vector2d(1.0 + 1e-9, 0.5)));
  CHECK_FALSE(hull_contains(pb, Eigen::Vector2d(1.0 + 1e-5, 0.5)));
}

TEST_CASE("roof lies between the extreme sample values and is midpoint convex") {
  const auto ex = examples::make_example("strictly_convex_random", 40, {.seed = 4, .constant_value = {}});
  const auto& pb = ex.problem;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(-1.2, 1.2);
  int evaluated = 0;
  for (int t = 0; t < 200; ++t) {
    const Vector2d a(unit(rng), unit(rng));
    const Vector2d b(unit(rng), unit(rng));
    const auto ra = try_roof_eval(pb, a);
    const auto rb = try_roof_eval(pb, b);
    if (!ra || !rb) continue;
    const auto rm = roof_eval(pb, Point(VectorXd(0.5 * (a + b))));
    CHECK(rm.value <= 0.5 * (ra->value + rb->value) + 1e-9);
    CHECK(ra->value >= pb.lower_bound() - 1e-12);
    CHECK(ra->value <= pb.upper_bound() + 1e-12);
    ++evaluated;
  }
  CHECK(evaluated > 20);
}

TEST_CASE("grid cells match pointwise evaluation and ignore the job count") {
  const auto ex = examples::make_example("no_c2", 32);
  const auto g1 = roof_grid(ex.problem, 9, 1);
  const auto g3 = roof_grid(ex.problem, 9, 3);
  REQUIRE(g1.nodes.size() == 81);
  REQUIRE(g1.cells.size() == 81);
  int inside = 0;
  for (std::size_t i = 0; i < g1.cells.size(); ++i) {
    const auto direct = try_roof_eval(ex.problem, g1.nodes[i]);
    REQUIRE(g1.cells[i].has_value() == direct.has_value());
    REQUIRE(g3.cells[i].has_value() == direct.has_value());
    if (!direct) continue;
    ++inside;
    CHECK(g1.cells[i]->value == direct->value);
    CHECK(g3.cells[i]->value == direct->value);
  }
  CHECK(inside > 30);
  CHECK(g1.nodes.front().isApprox(g1.lower));
  CHECK(g1.nodes.back().isApprox(g1.upper));
  CHECK(g1.nodes[1](0) == g1.lower(0));  // first axis slowest
}

TEST_CASE("flat set interpolates the roof on its simplex") {
  const auto ex = examples::make_example("no_c2", 64);
  const auto& pb = ex.problem;
  for (const Point& q : {Point{-0.3, 0.1}, Point{0.4, 0.2}, Point{0.1, -0.6}}) {
    const auto fs = flat_set(pb, q);
    CHECK(fs.verified);
    CHECK(fs.barycenter_residual < 1e-8);
    REQUIRE(fs.support.size() == fs.points.size());
    double wsum = 0.0;
    VectorXd rebuilt = VectorXd::Zero(2);
    for (std::size_t i = 0; i < fs.support.size(); ++i) {
      wsum += fs.weights[i];
      rebuilt += fs.weights[i] * fs.points[i].coords();
      CHECK(fs.functional(fs.points[i].coords()) == doctest::Approx(pb.value(fs.support[i])).epsilon(1e-9));
    }
    CHECK(wsum == doctest::Approx(1.0));
    CHECK((rebuilt - q.coords()).norm() < 1e-9);
    std::mt19937_64 rng(1);
    std::exponential_distribution<double> expo(1.0);
    for (int t = 0; t < 10; ++t) {
      VectorXd x = VectorXd::Zero(2);
      double total = 0.0;
      for (const auto& p : fs.points) {
        const double w = expo(rng);
        x += w * p.coords();
        total += w;
      }
      x /= total;
      CHECK(roof_eval(pb, Point(x)).value == doctest::Approx(fs.functional(x)).epsilon(1e-8));
    }
  }
  // The flat triangle of the no_c2 example carries the zero function.
  const auto zero = flat_set(pb, Point{-0.3, 0.1});
  CHECK(zero.functional.gradient.norm() < 1e-9);
  CHECK(std::abs(zero.functional.offset) < 1e-9);
}

TEST_CASE("boundary normals") {
  const auto pb = unit_square({0.0, 0.0, 0.0, 0.0});
  CHECK(boundary_normal(pb, Eigen::Vector2d(1.0, 0.5)).isApprox(Eigen::Vector2d(1.0, 0.0)));
  CHECK(boundary_normal(pb, Eigen::Vector2d(0.5, 0.0)).isApprox(Eigen::Vector2d(0.0, -1.0)));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(boundary_normal(pb, Eigen::Vector2d(1.0, 1.0)).isApprox(Eigen::Vector2d(s, s)));
  CHECK_THROWS_AS(boundary_normal(pb, Eigen::Vector2d(0.5, 0.5)), NotOnBoundaryError);
  CHECK_THROWS_AS(boundary_normal(pb, Eigen::Vector2d(2.0, 0.5)), NotOnBoundaryError);
}

TEST_CASE("supporting hyperplanes satisfy their defining constraints") {
  const auto ex = examples::make_example("strictly_convex_random", 48, {.seed = 2, .constant_value = {}});
  const auto& pb = ex.problem;
  const double M = 50.0;
  for (Index i : {Index{0}, Index{7}, Index{23}}) {
    const Point p = pb.cloud().point(i);
    const auto A = supporting_hyperplane(pb, p, M);
    REQUIRE(A.has_value());
    CHECK((*A)(p.coords()) == doctest::Approx(roof_eval(pb, p).value).epsilon(1e-8));
    CHECK(A->gradient.lpNorm<Eigen::Infinity>() <= M + 1e-9);
    for (Index j = 0; j < pb.size(); ++j) {
      CHECK((*A)(pb.cloud().matrix().col(j)) <= pb.value(j) + 1e-8);
    }
  }
  CHECK_THROWS_AS(supporting_hyperplane(pb, pb.cloud().point(0), 0.0), std::invalid_argument);
}

TEST_CASE("potato chip has no bounded supporting hyperplane at its singular point") {
  const auto ex = examples::make_example("potato_chip", 512);
  CHECK_FALSE(supporting_hyperplane(ex.problem, Point{0.0, 1.0}, 100.0).has_value());
  CHECK(supporting_hyperplane(ex.problem, Point{1.0, 0.0}, 100.0).has_value());
}

TEST_CASE("outer extension") {
  const auto ex = examples::make_example("no_c2", 32);
  const auto& pb = ex.problem;
  std::vector<Point> boundary;
  for (Index i : pb.hull().vertex_indices) boundary.push_back(pb.cloud().point(i));
  const Point inside{0.2, 0.1};
  CHECK(outer_extension(pb, inside, boundary) == doctest::Approx(roof_eval(pb, inside).value));
  // A maximum of affine functions is convex along any line.
  const Eigen::Vector2d a(1.3, 0.4);
  const Eigen::Vector2d b(1.1, -0.8);
  const double fa = outer_extension(pb, Point(VectorXd(a)), boundary);
  const double fb = outer_extension(pb, Point(VectorXd(b)), boundary);
  const double fm = outer_extension(pb, Point(VectorXd(0.5 * (a + b))), boundary);
  CHECK(fm <= 0.5 * (fa + fb) + 1e-9);
  CHECK(std::isfinite(fa));

  const auto chip = examples::make_example("potato_chip", 64);
  std::vector<Point> chip_boundary;
  for (Index i : chip.problem.hull().vertex_indices) chip_boundary.push_back(chip.problem.cloud().point(i));
  try {
    outer_extension(chip.problem, Point{1.5, 0.0}, chip_boundary, 100.0);
    FAIL("expected VerticalHyperplaneError");
  } catch (const VerticalHyperplaneError& e) {
    REQUIRE(e.point().size() == 2);
    CHECK(std::abs(e.point()[0]) < 0.5);
  }
  CHECK_THROWS_AS(outer_extension(pb, Point{2.0, 0.0}, {}), std::invalid_argument);
}
