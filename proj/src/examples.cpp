#include "convroof/examples.hpp"

#include "convroof/errors.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <numbers>
#include <random>
#include <stdexcept>

namespace convroof::examples {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOnCurve = 1e-9;

double snap(double v) { return std::abs(v) < 1e-15 ? 0.0 : v; }

struct Builder {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> values;

  void add(std::initializer_list<double> coords, double value) {
    Eigen::VectorXd p(static_cast<Index>(coords.size()));
    Index i = 0;
    for (double c : coords) p(i++) = snap(c);
    points.push_back(std::move(p));
    values.push_back(value);
  }

  SampledConvexProblem build() && {
    Eigen::MatrixXd columns(points.front().size(), static_cast<Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
      columns.col(static_cast<Index>(i)) = points[i];
    }
    return SampledConvexProblem(PointCloud(std::move(columns)), std::move(values));
  }
};

// Roof of the two-circle can around the x axis, punctured at (y,z) = (0,1):
// 1 on the lateral lines away from the puncture and on the end caps, |x| on
// the puncture line.
std::optional<double> can_roof(double x, double y, double z) {
  if (std::abs(x) > 1.0 + kOnCurve) return std::nullopt;
  const double r2 = y * y + z * z;
  if (std::abs(r2 - 1.0) <= kOnCurve) {
    if (std::abs(y) <= kOnCurve && z > 0.0) return std::abs(x);
    return 1.0;
  }
  if (std::abs(std::abs(x) - 1.0) <= kOnCurve && r2 <= 1.0 + kOnCurve) return 1.0;
  return std::nullopt;
}

void require_resolution(std::string_view name, Index n, Index minimum) {
  if (n < minimum) {
    throw std::invalid_argument(std::string(name) + ": resolution must be >= " +
                                std::to_string(minimum));
  }
}

const std::array<double, 1> kProbeAngle{std::atan2(0.8, 0.6)};

Example tomato_can(Index n) {
  const std::array<double, 2> forced{std::numbers::pi / 2, kProbeAngle[0]};
  const auto angles = circle_angles(n, forced);
  Builder b;
  for (double x : {-1.0, 1.0}) {
    for (double t : angles) b.add({x, std::cos(t), std::sin(t)}, 1.0);
  }
  b.add({0.0, 0.0, 1.0}, 0.0);
  ExampleSpec spec;
  spec.name = "tomato_can";
  spec.dim = 3;
  spec.oracle = [](const Eigen::VectorXd& p) { return can_roof(p(0), p(1), p(2)); };
  spec.singular_points = {Point{0.0, 0.0, 1.0}};
  spec.notes =
      "unit circles at x=-1 and x=1 valued 1, point (0,0,1) valued 0; the roof "
      "is 1 on every lateral line except the one through the puncture";
  return {std::move(b).build(), std::move(spec)};
}

Example nonclosed_extreme(Index n) {
  const std::array<double, 1> forced{std::numbers::pi};
  Builder b;
  b.add({-1.0, 0.0, 0.0}, 0.0);
  b.add({1.0, 0.0, 0.0}, 0.0);
  for (double t : circle_angles(n, forced)) {
    b.add({0.0, 1.0 + std::cos(t), std::sin(t)}, 1.0);
  }
  ExampleSpec spec;
  spec.name = "nonclosed_extreme";
  spec.dim = 3;
  spec.singular_points = {Point{0.0, 0.0, 0.0}};
  spec.convex_on_samples = false;
  spec.notes =
      "closure data: (+-1,0,0) valued 0 and the circle x=0, (y-1)^2+z^2=1 valued 1 "
      "including its point (0,0,0); that point is the midpoint of the two zeros, "
      "so the data is not convex";
  return {std::move(b).build(), std::move(spec)};
}

Example combined_4d(Index n) {
  // Angle 3*pi/2 puts the three circles through the w=0 puncture line.
  const std::array<double, 2> forced{3.0 * std::numbers::pi / 2,
                                     std::atan2(-0.8, 0.6)};
  const auto angles = circle_angles(n, forced);
  Builder b;
  for (double x : {-1.0, 1.0}) {
    for (double t : angles) b.add({x, std::cos(t), 1.0 + std::sin(t), 0.0}, 1.0);
  }
  for (double t : angles) b.add({0.0, std::cos(t), 0.0, 1.0 + std::sin(t)}, 0.0);
  ExampleSpec spec;
  spec.name = "combined_4d";
  spec.dim = 4;
  spec.oracle = [](const Eigen::VectorXd& p) -> std::optional<double> {
    if (std::abs(p(3)) > kOnCurve) return std::nullopt;
    return can_roof(p(0), p(1), 1.0 - p(2));
  };
  spec.singular_points = {Point{0.0, 0.0, 0.0, 0.0}};
  spec.notes =
      "circles y^2+(z-1)^2=1 at x=-1,1 (w=0) valued 1 and y^2+(w-1)^2=1 at x=0 "
      "(z=0) valued 0; the slice w=0 is a face carrying the punctured can";
  return {std::move(b).build(), std::move(spec)};
}

Example punctured_no_extension(Index n) {
  const std::array<double, 2> forced{std::numbers::pi / 2, kProbeAngle[0]};
  const auto angles = circle_angles(n, forced);
  // Sample density along x on the arc set, in points per unit length.
  const double per_unit = std::max(1.0, static_cast<double>(n) / 32.0);
  Builder b;
  for (double t : angles) {
    const double y = std::cos(t);
    const double z = snap(std::sin(t));
    const double span = 1.0 - z;  // admissible x in [-1, -z]
    const auto steps = static_cast<Index>(std::ceil(span * per_unit));
    if (span <= 1e-12 || steps == 0) {
      b.add({-1.0, y, z}, 1.0);
      continue;
    }
    for (Index l = 0; l <= steps; ++l) {
      const double x = -1.0 + span * static_cast<double>(l) / static_cast<double>(steps);
      if (x >= 1.0 - 1e-12) continue;  // covered by the x=1 circle
      b.add({x, y, z}, 1.0);
    }
  }
  for (double t : angles) b.add({1.0, std::cos(t), std::sin(t)}, 1.0);
  b.add({0.0, 0.0, 1.0}, 0.0);
  ExampleSpec spec;
  spec.name = "punctured_no_extension";
  spec.dim = 3;
  spec.oracle = [](const Eigen::VectorXd& p) { return can_roof(p(0), p(1), p(2)); };
  spec.singular_points = {Point{0.0, 0.0, 1.0}};
  spec.notes =
      "cylinder surface points with -1 <= x <= -z plus the circle x=1, valued 1, "
      "and (0,0,1) valued 0; no convex extension is continuous at (0,0,1)";
  return {std::move(b).build(), std::move(spec)};
}

Example potato_chip(Index n) {
  const std::array<double, 4> forced{0.0, std::numbers::pi / 2, std::numbers::pi,
                                     3.0 * std::numbers::pi / 2};
  Builder b;
  for (double t : circle_angles(n, forced)) {
    const double c = std::cos(t);
    const double s = std::sin(t);
    const double r = std::pow(std::pow(c, 4) + std::pow(s, 4), -0.25);
    const double x = snap(r * c);
    const double y = snap(r * s);
    // On the curve 1 - y^4 = x^4, so 1 - sqrt(1 - y^4) = 1 - x^2 without the
    // cancellation near y = +-1.
    b.add({x, y}, 1.0 - x * x);
  }
  ExampleSpec spec;
  spec.name = "potato_chip";
  spec.dim = 2;
  spec.oracle = [](const Eigen::VectorXd& p) -> std::optional<double> {
    const double y4 = std::pow(p(1), 4);
    if (std::pow(p(0), 4) + y4 > 1.0 + kOnCurve) return std::nullopt;
    return 1.0 - std::sqrt(std::max(0.0, 1.0 - y4));
  };
  spec.singular_points = {Point{0.0, 1.0}, Point{0.0, -1.0}};
  spec.notes =
      "boundary x^4+y^4=1 with f = 1-sqrt(1-y^4); the roof 1-sqrt(1-y^4) has "
      "unbounded slope at (0,+-1)";
  return {std::move(b).build(), std::move(spec)};
}

Example no_c2(Index n) {
  const std::array<double, 4> forced{0.0, std::numbers::pi / 2, std::numbers::pi,
                                     3.0 * std::numbers::pi / 2};
  Builder b;
  for (double t : circle_angles(n, forced)) {
    const double x = snap(std::cos(t));
    const double y = snap(std::sin(t));
    b.add({x, y}, (x + 1.0) * x * x);
  }
  ExampleSpec spec;
  spec.name = "no_c2";
  spec.dim = 2;
  spec.oracle = [](const Eigen::VectorXd& p) -> std::optional<double> {
    const double x = p(0);
    const double y = p(1);
    if (x * x + y * y > 1.0 + kOnCurve) return std::nullopt;
    if (x >= 0.0) return (x + 1.0) * x * x;
    if (std::abs(y) <= 1.0 + x + kOnCurve) return 0.0;
    return std::nullopt;
  };
  spec.singular_points = {Point{0.0, 0.0}};
  spec.notes =
      "unit circle with f = (x+1)x^2; the roof is 0 on co{(0,1),(0,-1),(-1,0)} "
      "and (x+1)x^2 for x >= 0, so its second x-derivative jumps across x = 0";
  return {std::move(b).build(), std::move(spec)};
}

Example strictly_convex_random(Index n, const ExampleOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  // Radial function 1 + sum_k (a_k cos k t + b_k sin k t), k = 2, 3, scaled so
  // that |r''| <= 0.2 and hence r^2 + 2 r'^2 - r r'' > 0.
  std::array<double, 2> a{};
  std::array<double, 2> c{};
  double weight = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    a[k] = unit(rng);
    c[k] = unit(rng);
    const double m = static_cast<double>(k + 2);
    weight += m * m * (std::abs(a[k]) + std::abs(c[k]));
  }
  const double eps = weight > 0.0 ? 0.2 / weight : 0.0;
  std::array<double, 7> f{};
  for (double& v : f) v = unit(rng);

  Builder b;
  for (double t : circle_angles(n)) {
    double r = 1.0;
    for (std::size_t k = 0; k < 2; ++k) {
      const double m = static_cast<double>(k + 2);
      r += eps * (a[k] * std::cos(m * t) + c[k] * std::sin(m * t));
    }
    double value = f[0];
    for (std::size_t k = 1; k <= 3; ++k) {
      const double m = static_cast<double>(k);
      value += f[2 * k - 1] * std::cos(m * t) + f[2 * k] * std::sin(m * t);
    }
    if (options.constant_value) value = *options.constant_value;
    b.add({r * std::cos(t), r * std::sin(t)}, value);
  }
  ExampleSpec spec;
  spec.name = "strictly_convex_random";
  spec.dim = 2;
  if (options.constant_value) {
    const double value = *options.constant_value;
    spec.oracle = [value](const Eigen::VectorXd&) -> std::optional<double> {
      return value;
    };
  }
  spec.notes =
      "random smooth strictly convex curve with a random trigonometric boundary "
      "function; every boundary function of a strictly convex set is convex";
  return {std::move(b).build(), std::move(spec)};
}

}  // namespace

std::vector<double> circle_angles(Index count, std::span<const double> forced) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count) + forced.size());
  for (Index k = 0; k < count; ++k) {
    out.push_back(kTwoPi * static_cast<double>(k) / static_cast<double>(count));
  }
  for (double t : forced) {
    double u = std::fmod(t, kTwoPi);
    if (u < 0.0) u += kTwoPi;
    out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  std::vector<double> unique;
  for (double t : out) {
    if (unique.empty() || t - unique.back() > 1e-9) unique.push_back(t);
  }
  if (unique.size() > 1 && kTwoPi - unique.back() + unique.front() <= 1e-9) {
    unique.pop_back();
  }
  return unique;
}

const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names{
      "tomato_can", "nonclosed_extreme", "combined_4d", "punctured_no_extension",
      "potato_chip", "no_c2", "strictly_convex_random"};
  return names;
}

Example make_example(std::string_view name, Index resolution,
                     const ExampleOptions& options) {
  Index minimum = 16;
  auto finish = [&](Example ex) {
    ex.spec.minimum_resolution = minimum;
    return ex;
  };
  if (name == "tomato_can") {
    require_resolution(name, resolution, minimum);
    return finish(tomato_can(resolution));
  }
  if (name == "nonclosed_extreme") {
    require_resolution(name, resolution, minimum);
    return finish(nonclosed_extreme(resolution));
  }
  if (name == "combined_4d") {
    require_resolution(name, resolution, minimum);
    return finish(combined_4d(resolution));
  }
  if (name == "punctured_no_extension") {
    require_resolution(name, resolution, minimum);
    return finish(punctured_no_extension(resolution));
  }
  if (name == "potato_chip") {
    require_resolution(name, resolution, minimum);
    return finish(potato_chip(resolution));
  }
  if (name == "no_c2") {
    require_resolution(name, resolution, minimum);
    return finish(no_c2(resolution));
  }
  if (name == "strictly_convex_random") {
    minimum = 8;
    require_resolution(name, resolution, minimum);
    return finish(strictly_convex_random(resolution, options));
  }
  throw UnknownExampleError("unknown example '" + std::string(name) + "'");
}

}  // namespace convroof::examples
