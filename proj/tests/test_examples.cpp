#include "convroof/errors.hpp"
#include "convroof/examples.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace convroof;
using examples::make_example;
using Eigen::VectorXd;

namespace {

bool has_point(const SampledConvexProblem& pb, const VectorXd& p) {
  for (Index i = 0; i < pb.size(); ++i) {
    if ((pb.cloud().matrix().col(i) - p).norm() < 1e-12) return true;
  }
  return false;
}

VectorXd random_inner(const SampledConvexProblem& pb, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> pick(0, pb.size() - 1);
  std::exponential_distribution<double> expo(1.0);
  VectorXd x = VectorXd::Zero(pb.dim());
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double w = expo(rng);
    x += w * pb.cloud().matrix().col(pick(rng));
    total += w;
  }
  return x / total;
}

}  // namespace

TEST_CASE("registry") {
  const auto& names = examples::example_names();
  CHECK(names.size() == 7);
  CHECK(std::find(names.begin(), names.end(), "potato_chip") != names.end());
  CHECK_THROWS_AS(make_example("cylinder", 64), UnknownExampleError);
  CHECK_THROWS_AS(make_example("tomato_can", 8), std::invalid_argument);
  CHECK_NOTHROW(make_example("strictly_convex_random", 8));
  for (const auto& name : names) {
    const auto ex = make_example(name, 32);
    CHECK(ex.spec.name == name);
    CHECK(ex.spec.dim == ex.problem.dim());
    CHECK_FALSE(ex.spec.notes.empty());
  }
}

TEST_CASE("circle angles merge forced angles") {
  const std::array<double, 2> forced{std::numbers::pi / 2, 0.3};
  const auto angles = examples::circle_angles(8, forced);
  CHECK(angles.size() == 9);  // pi/2 is already on the 8-grid
  CHECK(std::is_sorted(angles.begin(), angles.end()));
  CHECK(angles.front() == 0.0);
  CHECK(angles.back() < 2 * std::numbers::pi);
  CHECK(std::count_if(angles.begin(), angles.end(), [](double a) { return std::abs(a - 0.3) < 1e-15; }) == 1);
}

TEST_CASE("every example except the non-closed one is convex on its samples") {
  for (const auto& name : examples::example_names()) {
    const auto ex = make_example(name, 32);
    const auto report = is_convex_on_samples(ex.problem.cloud(), ex.problem.values());
    CHECK_MESSAGE(report.convex == ex.spec.convex_on_samples, name);
  }
  const auto ex = make_example("nonclosed_extreme", 64);
  const auto report = is_convex_on_samples(ex.problem.cloud(), ex.problem.values());
  REQUIRE(report.witness.has_value());
  CHECK(report.witness_value < ex.problem.value(*report.violating_index) - 0.5);
}

TEST_CASE("tomato can: identically 1 on the circle points, 0 at the puncture") {
  for (Index n : {Index{32}, Index{64}, Index{200}}) {
    const auto ex = make_example("tomato_can", n);
    CHECK(has_point(ex.problem, Eigen::Vector3d(0.0, 0.0, 1.0)));
    CHECK(has_point(ex.problem, Eigen::Vector3d(1.0, 0.6, 0.8)));
    CHECK(has_point(ex.problem, Eigen::Vector3d(-1.0, 0.6, 0.8)));
    CHECK(roof_eval(ex.problem, Point{0.0, 0.6, 0.8}).value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(roof_eval(ex.problem, Point{0.0, 0.0, 1.0}).value) <= 1e-9);
  }
}

TEST_CASE("punctured example without continuous extension") {
  const auto ex = make_example("punctured_no_extension", 200);
  const auto& pb = ex.problem;
  CHECK(std::abs(roof_eval(pb, Point{0.0, 0.0, 1.0}).value) <= 1e-9);
  CHECK(roof_eval(pb, Point{0.0, 0.6, 0.8}).value == doctest::Approx(1.0).epsilon(1e-9));
  // The arc samples satisfy -1 <= x <= -z.
  for (Index i = 0; i < pb.size(); ++i) {
    const auto p = pb.cloud().matrix().col(i);
    if (std::abs(p(0) - 1.0) < 1e-12 || p(0) > -1e-12) continue;
    CHECK(p(0) <= -p(2) + 1e-9);
    CHECK(p(1) * p(1) + p(2) * p(2) == doctest::Approx(1.0));
  }
}

TEST_CASE("combined example reproduces the tomato can on the slice w = 0") {
  const auto ex = make_example("combined_4d", 48);
  CHECK(roof_eval(ex.problem, Point{0.0, 0.6, 0.2, 0.0}).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(roof_eval(ex.problem, Point{0.0, 0.0, 0.0, 0.0}).value) <= 1e-9);
  // Every sample has w >= 0, so w = 0 is a supporting hyperplane.
  CHECK(ex.problem.cloud().matrix().row(3).minCoeff() >= -1e-12);
}

TEST_CASE("potato chip against 1 - sqrt(1 - y^4)") {
  const auto ex = make_example("potato_chip", 512);
  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (int t = 0; t < 40; ++t) {
    const VectorXd x = random_inner(ex.problem, rng);
    const double y = x(1);
    worst = std::max(worst, std::abs(roof_eval(ex.problem, Point(x)).value - (1.0 - std::sqrt(1.0 - y * y * y * y))));
  }
  CHECK(worst <= 1e-2);
  for (Index i = 0; i < ex.problem.size(); ++i) {
    const auto p = ex.problem.cloud().matrix().col(i);
    CHECK(std::pow(p(0), 4) + std::pow(p(1), 4) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("no_c2 roof on the x axis") {
  const auto ex = make_example("no_c2", 512);
  for (double x : {-0.75, -0.5, -0.25}) {
    CHECK(std::abs(roof_eval(ex.problem, Point{x, 0.0}).value) <= 1e-6);
  }
  for (double x : {0.25, 0.5, 0.75}) {
    CHECK(roof_eval(ex.problem, Point{x, 0.0}).value == doctest::Approx((x + 1) * x * x).epsilon(5e-3));
  }
}

TEST_CASE("strictly convex random boundary") {
  const auto a = make_example("strictly_convex_random", 64, {.seed = 9, .constant_value = {}});
  const auto b = make_example("strictly_convex_random", 64, {.seed = 9, .constant_value = {}});
  const auto c = make_example("strictly_convex_random", 64, {.seed = 10, .constant_value = {}});
  CHECK(a.problem.cloud().matrix() == b.problem.cloud().matrix());
  CHECK(std::equal(a.problem.values().begin(), a.problem.values().end(), b.problem.values().begin()));
  CHECK(a.problem.cloud().matrix() != c.problem.cloud().matrix());
  for (Index i = 0; i < a.problem.size(); ++i) {
    const double r = a.problem.cloud().matrix().col(i).norm();
    CHECK(r >= 0.8);
    CHECK(r <= 1.2);
  }
  // Every sample is an extreme point.
  CHECK(a.problem.hull().vertex_indices.size() == static_cast<std::size_t>(a.problem.size()));

  const auto flat = make_example("strictly_convex_random", 32, {.seed = 1, .constant_value = 2.5});
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    CHECK(roof_eval(flat.problem, Point(random_inner(flat.problem, rng))).value == doctest::Approx(2.5));
  }
}
