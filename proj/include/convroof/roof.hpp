#pragma once

#include "convroof/geometry.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace convroof {

/// x -> gradient . x + offset
struct AffineFunctional {
  Eigen::VectorXd gradient;
  double offset = 0.0;

  double operator()(const Eigen::VectorXd& x) const { return gradient.dot(x) + offset; }
};

/// A finite sample C with values f: C -> R. Immutable; the hull and facets
/// are computed on first use and shared between copies.
class SampledConvexProblem {
 public:
  SampledConvexProblem(PointCloud cloud, std::vector<double> values);

  const PointCloud& cloud() const noexcept { return cloud_; }
  std::span<const double> values() const noexcept { return values_; }
  double value(Index i) const { return values_[static_cast<std::size_t>(i)]; }
  Index dim() const noexcept { return cloud_.dim(); }
  Index size() const noexcept { return cloud_.size(); }
  double lower_bound() const noexcept { return lower_; }
  double upper_bound() const noexcept { return upper_; }

  const AffineFrame& frame() const noexcept { return frame_; }
  /// Local hull coordinates of the cloud, lifted by a row of ones.
  const Eigen::MatrixXd& lifted_local() const noexcept { return lifted_local_; }

  const Hull& hull() const;
  /// Facets only (cheap), available when the affine hull has dimension <= 3.
  const std::vector<Facet>& facets() const;

 private:
  struct Cache;

  PointCloud cloud_;
  std::vector<double> values_;
  double lower_ = 0.0;
  double upper_ = 0.0;
  AffineFrame frame_;
  Eigen::MatrixXd lifted_local_;
  std::shared_ptr<Cache> cache_;
};

/// Roof value with the optimal decomposition behind it.
struct RoofValue {
  double value = 0.0;
  ConvexCombination decomposition;  // support <= d + 1
  Point query;
};

/// Relaxed phase-1 tolerance used for query membership.
inline constexpr double kMembershipTol = 1e-7;

/// Lower convex envelope at x: minimum of sum t_i f_i over all convex
/// decompositions of x by the samples. Throws MembershipError outside the hull.
RoofValue roof_eval(const SampledConvexProblem& problem, const Point& x);

/// Like roof_eval but returns nullopt outside the hull.
std::optional<RoofValue> try_roof_eval(const SampledConvexProblem& problem,
                                       const Eigen::VectorXd& x);

/// Membership in co(cloud) through LP phase 1.
bool hull_contains(const SampledConvexProblem& problem, const Eigen::VectorXd& x,
                   double tol = kMembershipTol);

/// Axis-aligned lattice over the cloud's bounding box, `resolution` nodes per
/// axis, first axis slowest. Cells outside the hull are empty.
struct RoofGrid {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Index resolution = 0;
  std::vector<Eigen::VectorXd> nodes;
  std::vector<std::optional<RoofValue>> cells;
};

RoofGrid roof_grid(const SampledConvexProblem& problem, Index resolution,
                   int jobs = 1);

/// One optimal simplex through x on which the roof is affine.
struct FlatSet {
  std::vector<Index> support;
  std::vector<Point> points;
  std::vector<double> weights;
  /// Interpolates the sample values over the support's affine span, with the
  /// gradient taken inside that span.
  AffineFunctional functional;
  /// |roof - functional| at the support barycenter.
  double barycenter_residual = 0.0;
  bool verified = false;
};

FlatSet flat_set(const SampledConvexProblem& problem, const Point& x);

/// Outward unit normal of the hull at a boundary point (averaged over the
/// facets through p). Throws NotOnBoundaryError.
Eigen::VectorXd boundary_normal(const SampledConvexProblem& problem,
                                const Eigen::VectorXd& p);

/// Affine A with |grad A|_inf <= M, A <= f on every sample and A(p) = roof(p),
/// choosing among those the one with the smallest derivative along the outward
/// normal. Returns nullopt when no such A exists at this bound.
std::optional<AffineFunctional> supporting_hyperplane(
    const SampledConvexProblem& problem, const Point& p, double gradient_bound);

/// Inside the hull: the roof. Outside: max over boundary samples q of the
/// supporting functional L_q. Throws VerticalHyperplaneError naming the first
/// q without a supporting functional.
double outer_extension(const SampledConvexProblem& problem, const Point& x,
                       std::span<const Point> boundary_samples,
                       double gradient_bound = 1e3);

}  // namespace convroof
