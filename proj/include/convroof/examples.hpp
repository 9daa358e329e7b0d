#pragma once

#include "convroof/roof.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace convroof::examples {

/// Analytic roof value where one is known; nullopt elsewhere.
using Oracle = std::function<std::optional<double>(const Eigen::VectorXd&)>;

struct ExampleOptions {
  std::uint64_t seed = 0;
  /// strictly_convex_random only: replace the random boundary function by a
  /// constant.
  std::optional<double> constant_value;
};

struct ExampleSpec {
  std::string name;
  Index dim = 0;
  Index minimum_resolution = 16;
  Oracle oracle;
  std::vector<Point> singular_points;
  std::string notes;
  /// false only for data whose non-convexity is the point of the example.
  bool convex_on_samples = true;
};

struct Example {
  SampledConvexProblem problem;
  ExampleSpec spec;
};

/// Stable identifiers: tomato_can, nonclosed_extreme, combined_4d,
/// punctured_no_extension, potato_chip, no_c2, strictly_convex_random.
const std::vector<std::string>& example_names();

/// Samples the named example at resolution N (points per circle or boundary
/// curve). Throws UnknownExampleError, or std::invalid_argument when N is
/// below the example's minimum.
Example make_example(std::string_view name, Index resolution,
                     const ExampleOptions& options = {});

/// Equally spaced angles 2*pi*k/N merged with `forced` angles (deduplicated,
/// sorted in [0, 2*pi)).
std::vector<double> circle_angles(Index count, std::span<const double> forced = {});

}  // namespace convroof::examples
