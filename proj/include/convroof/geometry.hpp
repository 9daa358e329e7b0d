#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace convroof {

using Eigen::Index;

/// A point of R^d with finite coordinates, d >= 1.
class Point {
 public:
  explicit Point(Eigen::VectorXd coords);
  Point(std::initializer_list<double> coords);

  const Eigen::VectorXd& coords() const noexcept { return coords_; }
  Index dim() const noexcept { return coords_.size(); }
  double operator[](Index i) const { return coords_(i); }

 private:
  Eigen::VectorXd coords_;
};

/// Nonempty, index-stable sample of points sharing one dimension.
/// Points are stored column-wise.
class PointCloud {
 public:
  explicit PointCloud(const std::vector<Point>& points);
  /// `columns` is d x n, one point per column.
  explicit PointCloud(Eigen::MatrixXd columns);

  Index size() const noexcept { return points_.cols(); }
  Index dim() const noexcept { return points_.rows(); }
  Point point(Index i) const { return Point(Eigen::VectorXd(points_.col(i))); }
  auto column(Index i) const { return points_.col(i); }
  const Eigen::MatrixXd& matrix() const noexcept { return points_; }

  /// Largest pairwise distance.
  double diameter() const noexcept { return diameter_; }
  Eigen::VectorXd lower_corner() const { return points_.rowwise().minCoeff(); }
  Eigen::VectorXd upper_corner() const { return points_.rowwise().maxCoeff(); }

 private:
  Eigen::MatrixXd points_;
  double diameter_ = 0.0;
};

/// x = sum_i w_i * cloud[index_i].
struct ConvexCombination {
  struct Entry {
    Index index;
    double weight;
  };
  static constexpr double kWeightTol = 1e-9;

  std::vector<Entry> entries;

  Index support_size() const noexcept {
    return static_cast<Index>(entries.size());
  }
  double weight_sum() const noexcept;
  Eigen::VectorXd point(const PointCloud& cloud) const;
  /// Sum of w_i * values[index_i].
  double combine(std::span<const double> values) const;
  /// Throws InvalidCombinationError on negative weights, bad sum,
  /// duplicate or out-of-range indices.
  void validate(const PointCloud& cloud) const;
};

/// Orthonormal coordinates for the affine hull of a cloud. When the cloud is
/// full-dimensional the frame is the identity and coordinates are untouched.
struct AffineFrame {
  Eigen::VectorXd origin;
  Eigen::MatrixXd basis;  // d x k, orthonormal columns
  bool identity = true;

  Index dim() const noexcept { return basis.cols(); }
  Eigen::VectorXd to_local(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd columns_to_local(const Eigen::MatrixXd& columns) const;
  Eigen::VectorXd to_ambient(const Eigen::VectorXd& local) const;
  /// Distance from x to the affine hull.
  double offset_from(const Eigen::VectorXd& x) const;
};

/// Halfspace normal . x <= offset supporting the hull; `vertices` index the
/// cloud. Normals are unit length and lie in the affine hull.
struct Facet {
  std::vector<Index> vertices;
  Eigen::VectorXd normal;
  double offset = 0.0;
};

struct Hull {
  std::vector<Index> vertex_indices;
  Index affine_dim = 0;
  /// Populated iff the ambient dimension is at most 3.
  std::vector<Facet> facets;
  AffineFrame frame;

  /// Facet-based membership test; requires facets.
  bool contains(const Eigen::VectorXd& x, double tol) const;
};

AffineFrame affine_frame(const PointCloud& cloud, double rel_tol = 1e-10);

Index affine_hull_dim(const PointCloud& cloud);

/// Facets of co(cloud) for clouds whose affine hull has dimension <= 3.
/// Triangulated in 3D; coplanar points within tolerance are left out.
std::vector<Facet> hull_facets(const PointCloud& cloud, const AffineFrame& frame);

/// Extreme points via one LP membership test per point, plus facets when
/// d <= 3. Coincident points are reported once, by their first index.
Hull convex_hull(const PointCloud& cloud);

/// LP feasibility test: is `x` (given in the same coordinates as the columns)
/// a convex combination of `columns`?
bool in_convex_hull(const Eigen::MatrixXd& columns, const Eigen::VectorXd& x,
                    double tol = 1e-9);

/// Shrinks the support to an affinely independent set (at most d+1 points)
/// while representing the same x. Repeatedly moves along a null vector of the
/// lifted support matrix until a weight hits zero.
ConvexCombination caratheodory_reduce(const PointCloud& cloud,
                                      const ConvexCombination& comb);

struct ConvexityReport {
  bool convex = true;
  std::optional<Index> violating_index;
  /// A decomposition of the violating sample that is cheaper than its value.
  std::optional<ConvexCombination> witness;
  double witness_value = 0.0;
};

/// True iff the lower envelope reproduces every sample value (within 1e-8).
ConvexityReport is_convex_on_samples(const PointCloud& cloud,
                                     std::span<const double> values);

}  // namespace convroof
