#pragma once

#include "convroof/examples.hpp"
#include "convroof/roof.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace convroof::analysis {

struct OscillationLevel {
  double radius = 0.0;
  /// max |roof(q) - roof(p)| over the evaluated q; absent when none landed in
  /// the hull.
  std::optional<double> osc;
  Index interior_samples = 0;
  Index boundary_samples = 0;
  Index attempts = 0;
  std::string note;
};

struct OscillationReport {
  Point center;
  double center_value = 0.0;
  std::vector<OscillationLevel> levels;
  Index samples_per_radius = 0;
  Index cloud_size = 0;
  std::uint64_t seed = 0;
};

struct OscillationOptions {
  std::uint64_t seed = 0;
  /// Also follow each sample radially out of the hull centroid to the hull
  /// boundary (within the ball). Boundary jumps are invisible to interior
  /// samples alone.
  bool boundary_projections = true;
  /// Draws per accepted sample before a level gives up.
  Index max_attempt_factor = 20;
};

/// Samples the r-ball around p (inside the affine hull of the cloud) at each
/// radius and records the largest deviation of the roof from roof(p). Radii
/// must be positive and decreasing; p must lie in the hull.
OscillationReport oscillation(const SampledConvexProblem& problem, const Point& p,
                              std::span<const double> radii, Index samples_per_radius,
                              const OscillationOptions& options = {});

enum class Stencil { Central, Forward, Backward, Unavailable };

std::string to_string(Stencil s);

struct GradientProbe {
  Point point;
  double step = 0.0;
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd hessian_diag;
  std::vector<Stencil> stencils;
  /// false when the entry could not be formed or overflowed.
  std::vector<bool> finite;
};

/// Finite differences of the roof along the coordinate axes. Axes whose
/// central stencil leaves the hull fall back to a one-sided stencil, which is
/// flagged. The default step is 1e-3 times the cloud diameter.
GradientProbe gradient_probe(const SampledConvexProblem& problem, const Point& x,
                             std::optional<double> step = std::nullopt);

struct ConvergenceRow {
  Index resolution = 0;
  Index cloud_size = 0;
  Point probe;
  std::optional<double> roof;
  std::optional<double> oracle;
  std::optional<double> error;
};

/// Rebuilds the named example at each resolution and compares the roof with
/// the example's oracle at every probe. Throws UnknownExampleError.
std::vector<ConvergenceRow> refinement_convergence(
    std::string_view example_name, std::span<const Index> resolutions,
    std::span<const Point> probes, const examples::ExampleOptions& options = {});

}  // namespace convroof::analysis
