#include "convroof/geometry.hpp"

#include "convroof/errors.hpp"
#include "convroof/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

namespace convroof {

namespace {

Eigen::MatrixXd stack_points(const std::vector<Point>& points) {
  if (points.empty()) throw DimensionError("point cloud is empty");
  const Index d = points.front().dim();
  Eigen::MatrixXd out(d, static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != d) {
      throw DimensionError("point " + std::to_string(i) + " has dimension " +
                           std::to_string(points[i].dim()) + ", expected " +
                           std::to_string(d));
    }
    out.col(static_cast<Index>(i)) = points[i].coords();
  }
  return out;
}

Eigen::MatrixXd lifted(const Eigen::MatrixXd& columns) {
  Eigen::MatrixXd out(columns.rows() + 1, columns.cols());
  out.topRows(columns.rows()) = columns;
  out.bottomRows(1).setOnes();
  return out;
}

Eigen::VectorXd lifted(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size() + 1);
  out.head(x.size()) = x;
  out(x.size()) = 1.0;
  return out;
}

// Segment endpoints of a 1-dimensional cloud.
std::vector<Facet> facets_1d(const Eigen::MatrixXd& local) {
  Index lo = 0;
  Index hi = 0;
  for (Index i = 1; i < local.cols(); ++i) {
    if (local(0, i) < local(0, lo)) lo = i;
    if (local(0, i) > local(0, hi)) hi = i;
  }
  std::vector<Facet> out(2);
  out[0] = {{lo}, Eigen::VectorXd::Constant(1, -1.0), -local(0, lo)};
  out[1] = {{hi}, Eigen::VectorXd::Constant(1, 1.0), local(0, hi)};
  return out;
}

// Andrew's monotone chain; counter-clockwise edges with outward normals.
std::vector<Facet> facets_2d(const Eigen::MatrixXd& local) {
  std::vector<Index> order(static_cast<std::size_t>(local.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (local(0, a) != local(0, b)) return local(0, a) < local(0, b);
    return local(1, a) < local(1, b);
  });
  auto cross = [&](Index o, Index a, Index b) {
    return (local(0, a) - local(0, o)) * (local(1, b) - local(1, o)) -
           (local(1, a) - local(1, o)) * (local(0, b) - local(0, o));
  };
  std::vector<Index> chain(2 * order.size());
  std::size_t k = 0;
  for (Index i : order) {
    while (k >= 2 && cross(chain[k - 2], chain[k - 1], i) <= 0) --k;
    chain[k++] = i;
  }
  for (std::size_t j = order.size() - 1, lower = k + 1; j-- > 0;) {
    const Index i = order[j];
    while (k >= lower && cross(chain[k - 2], chain[k - 1], i) <= 0) --k;
    chain[k++] = i;
  }
  chain.resize(k > 0 ? k - 1 : 0);

  std::vector<Facet> out;
  for (std::size_t e = 0; e < chain.size(); ++e) {
    const Index a = chain[e];
    const Index b = chain[(e + 1) % chain.size()];
    const Eigen::Vector2d dir = local.col(b) - local.col(a);
    const double len = dir.norm();
    if (len == 0.0) continue;
    Eigen::VectorXd normal(2);
    normal << dir.y() / len, -dir.x() / len;
    out.push_back({{a, b}, normal, normal.dot(local.col(a))});
  }
  return out;
}

// Incremental hull over triangles. Points within `eps` of the current hull
// are skipped, so coplanar samples do not become facet vertices.
std::vector<Facet> facets_3d(const Eigen::MatrixXd& local, double scale) {
  const Index n = local.cols();
  const double eps = 1e-9 * std::max(scale, 1e-300);
  auto pt = [&](Index i) -> Eigen::Vector3d { return local.col(i); };

  Index i0 = 0;
  for (Index i = 1; i < n; ++i) {
    if (local(0, i) < local(0, i0)) i0 = i;
  }
  Index i1 = i0;
  double best = -1.0;
  for (Index i = 0; i < n; ++i) {
    const double dist = (pt(i) - pt(i0)).squaredNorm();
    if (dist > best) best = dist, i1 = i;
  }
  const Eigen::Vector3d axis = (pt(i1) - pt(i0)).normalized();
  Index i2 = i0;
  best = -1.0;
  for (Index i = 0; i < n; ++i) {
    const double dist = (pt(i) - pt(i0)).cross(axis).squaredNorm();
    if (dist > best) best = dist, i2 = i;
  }
  const Eigen::Vector3d plane =
      (pt(i1) - pt(i0)).cross(pt(i2) - pt(i0)).normalized();
  Index i3 = i0;
  best = -1.0;
  for (Index i = 0; i < n; ++i) {
    const double dist = std::abs((pt(i) - pt(i0)).dot(plane));
    if (dist > best) best = dist, i3 = i;
  }
  if (best <= eps) {
    throw DegenerateGeometryError("3D hull: points are coplanar");
  }

  struct Tri {
    Index a, b, c;
    Eigen::Vector3d normal;
    double offset;
    bool alive;
  };
  std::vector<Tri> tris;
  std::map<std::pair<Index, Index>, std::size_t> edges;
  const Eigen::Vector3d inner = (pt(i0) + pt(i1) + pt(i2) + pt(i3)) / 4.0;

  auto add = [&](Index a, Index b, Index c) {
    Eigen::Vector3d normal = (pt(b) - pt(a)).cross(pt(c) - pt(a));
    const double len = normal.norm();
    if (len > 0.0) normal /= len;
    const std::size_t id = tris.size();
    tris.push_back({a, b, c, normal, normal.dot(pt(a)), true});
    edges[{a, b}] = id;
    edges[{b, c}] = id;
    edges[{c, a}] = id;
  };
  auto add_oriented = [&](Index a, Index b, Index c) {
    const Eigen::Vector3d normal = (pt(b) - pt(a)).cross(pt(c) - pt(a));
    if (normal.dot(inner - pt(a)) > 0.0) std::swap(b, c);
    add(a, b, c);
  };
  add_oriented(i0, i1, i2);
  add_oriented(i0, i1, i3);
  add_oriented(i0, i2, i3);
  add_oriented(i1, i2, i3);

  std::vector<char> visible;
  std::vector<std::pair<Index, Index>> horizon;
  for (Index p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    const Eigen::Vector3d x = pt(p);
    visible.assign(tris.size(), 0);
    bool any = false;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (tris[t].alive && tris[t].normal.dot(x) - tris[t].offset > eps) {
        visible[t] = 1;
        any = true;
      }
    }
    if (!any) continue;
    horizon.clear();
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!visible[t]) continue;
      const Index v[3] = {tris[t].a, tris[t].b, tris[t].c};
      for (int e = 0; e < 3; ++e) {
        const Index u = v[e];
        const Index w = v[(e + 1) % 3];
        const auto twin = edges.find({w, u});
        if (twin == edges.end() || !visible[twin->second]) {
          horizon.emplace_back(u, w);
        }
      }
    }
    for (std::size_t t = 0; t < visible.size(); ++t) {
      if (!visible[t]) continue;
      tris[t].alive = false;
      edges.erase({tris[t].a, tris[t].b});
      edges.erase({tris[t].b, tris[t].c});
      edges.erase({tris[t].c, tris[t].a});
    }
    for (const auto& [u, w] : horizon) add(u, w, p);
  }

  std::vector<Facet> out;
  for (const Tri& t : tris) {
    if (!t.alive) continue;
    out.push_back({{t.a, t.b, t.c}, Eigen::VectorXd(t.normal), t.offset});
  }
  return out;
}

}  // namespace

Point::Point(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1) throw DimensionError("point must have dimension >= 1");
  if (!coords_.allFinite()) throw DimensionError("point has non-finite coordinates");
}

Point::Point(std::initializer_list<double> coords)
    : Point(Eigen::Map<const Eigen::VectorXd>(coords.begin(),
                                              static_cast<Index>(coords.size()))) {}

PointCloud::PointCloud(const std::vector<Point>& points)
    : PointCloud(stack_points(points)) {}

PointCloud::PointCloud(Eigen::MatrixXd columns) : points_(std::move(columns)) {
  if (points_.cols() == 0) throw DimensionError("point cloud is empty");
  if (points_.rows() < 1) throw DimensionError("point cloud has dimension 0");
  if (!points_.allFinite()) {
    throw DimensionError("point cloud has non-finite coordinates");
  }
  double best = 0.0;
  const Index n = points_.cols();
  for (Index i = 0; i + 1 < n; ++i) {
    const double d2 = (points_.rightCols(n - i - 1).colwise() - points_.col(i))
                          .colwise()
                          .squaredNorm()
                          .maxCoeff();
    best = std::max(best, d2);
  }
  diameter_ = std::sqrt(best);
}

double ConvexCombination::weight_sum() const noexcept {
  double s = 0.0;
  for (const auto& e : entries) s += e.weight;
  return s;
}

Eigen::VectorXd ConvexCombination::point(const PointCloud& cloud) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(cloud.dim());
  for (const auto& e : entries) x += e.weight * cloud.column(e.index);
  return x;
}

double ConvexCombination::combine(std::span<const double> values) const {
  double s = 0.0;
  for (const auto& e : entries) s += e.weight * values[static_cast<std::size_t>(e.index)];
  return s;
}

void ConvexCombination::validate(const PointCloud& cloud) const {
  if (entries.empty()) throw InvalidCombinationError("empty convex combination");
  std::set<Index> seen;
  for (const auto& e : entries) {
    if (e.index < 0 || e.index >= cloud.size()) {
      throw InvalidCombinationError("index " + std::to_string(e.index) +
                                    " out of range");
    }
    if (!seen.insert(e.index).second) {
      throw InvalidCombinationError("duplicate index " + std::to_string(e.index));
    }
    if (!std::isfinite(e.weight) || e.weight < -kWeightTol) {
      throw InvalidCombinationError("negative weight at index " +
                                    std::to_string(e.index));
    }
  }
  if (std::abs(weight_sum() - 1.0) > kWeightTol) {
    throw InvalidCombinationError("weights do not sum to 1");
  }
}

Eigen::VectorXd AffineFrame::to_local(const Eigen::VectorXd& x) const {
  if (identity) return x;
  return basis.transpose() * (x - origin);
}

Eigen::MatrixXd AffineFrame::columns_to_local(const Eigen::MatrixXd& columns) const {
  if (identity) return columns;
  return basis.transpose() * (columns.colwise() - origin);
}

Eigen::VectorXd AffineFrame::to_ambient(const Eigen::VectorXd& local) const {
  if (identity) return local;
  return origin + basis * local;
}

double AffineFrame::offset_from(const Eigen::VectorXd& x) const {
  if (identity) return 0.0;
  const Eigen::VectorXd diff = x - origin;
  return (diff - basis * (basis.transpose() * diff)).norm();
}

bool Hull::contains(const Eigen::VectorXd& x, double tol) const {
  if (frame.offset_from(x) > tol) return false;
  if (affine_dim == 0) return true;
  for (const Facet& f : facets) {
    if (f.normal.dot(x) > f.offset + tol) return false;
  }
  return true;
}

AffineFrame affine_frame(const PointCloud& cloud, double rel_tol) {
  const Index d = cloud.dim();
  const Eigen::VectorXd centroid = cloud.matrix().rowwise().mean();
  const Eigen::MatrixXd diffs = cloud.matrix().colwise() - centroid;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(diffs, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  Index rank = 0;
  if (sigma.size() > 0 && sigma(0) > 0.0) {
    for (Index i = 0; i < sigma.size(); ++i) {
      if (sigma(i) > rel_tol * sigma(0)) ++rank;
    }
  }
  AffineFrame frame;
  if (rank == d) {
    frame.origin = Eigen::VectorXd::Zero(d);
    frame.basis = Eigen::MatrixXd::Identity(d, d);
    frame.identity = true;
  } else {
    frame.origin = centroid;
    frame.basis = svd.matrixU().leftCols(rank);
    frame.identity = false;
  }
  return frame;
}

Index affine_hull_dim(const PointCloud& cloud) {
  return affine_frame(cloud).dim();
}

std::vector<Facet> hull_facets(const PointCloud& cloud, const AffineFrame& frame) {
  const Index k = frame.dim();
  if (k == 0 || k > 3) return {};
  const Eigen::MatrixXd local = frame.columns_to_local(cloud.matrix());
  std::vector<Facet> facets;
  switch (k) {
    case 1:
      facets = facets_1d(local);
      break;
    case 2:
      facets = facets_2d(local);
      break;
    default:
      facets = facets_3d(local, cloud.diameter());
      break;
  }
  if (!frame.identity) {
    for (Facet& f : facets) {
      const Eigen::VectorXd normal = frame.basis * f.normal;
      f.offset += normal.dot(frame.origin);
      f.normal = normal;
    }
  }
  return facets;
}

bool in_convex_hull(const Eigen::MatrixXd& columns, const Eigen::VectorXd& x,
                    double tol) {
  if (columns.cols() == 0) return false;
  lp::Options options;
  options.feasibility_tol = tol;
  lp::SimplexSolver solver(options);
  const Eigen::MatrixXd A = lifted(columns);
  const auto sol = solver.solve(A, lifted(x), Eigen::VectorXd::Zero(A.cols()));
  return sol.status == lp::Status::Optimal;
}

Hull convex_hull(const PointCloud& cloud) {
  Hull hull;
  hull.frame = affine_frame(cloud);
  hull.affine_dim = hull.frame.dim();
  const Index n = cloud.size();
  const Eigen::MatrixXd local = hull.frame.columns_to_local(cloud.matrix());
  const double same = 1e-12 * std::max(cloud.diameter(), 1.0);

  std::vector<char> duplicate(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    if (duplicate[static_cast<std::size_t>(i)]) continue;
    for (Index j = i + 1; j < n; ++j) {
      if ((local.col(i) - local.col(j)).norm() <= same) {
        duplicate[static_cast<std::size_t>(j)] = 1;
      }
    }
  }

  if (hull.affine_dim == 0) {
    hull.vertex_indices.push_back(0);
  } else {
    Eigen::MatrixXd others(local.rows(), n);
    for (Index i = 0; i < n; ++i) {
      if (duplicate[static_cast<std::size_t>(i)]) continue;
      Index cols = 0;
      for (Index j = 0; j < n; ++j) {
        if ((local.col(i) - local.col(j)).norm() <= same) continue;
        others.col(cols++) = local.col(j);
      }
      if (!in_convex_hull(others.leftCols(cols), local.col(i))) {
        hull.vertex_indices.push_back(i);
      }
    }
  }
  if (cloud.dim() <= 3) hull.facets = hull_facets(cloud, hull.frame);
  return hull;
}

ConvexCombination caratheodory_reduce(const PointCloud& cloud,
                                      const ConvexCombination& comb) {
  comb.validate(cloud);
  const Index d = cloud.dim();
  std::vector<Index> idx;
  std::vector<double> w;
  for (const auto& e : comb.entries) {
    if (e.weight <= 0.0) continue;
    idx.push_back(e.index);
    w.push_back(e.weight);
  }
  if (idx.empty()) {
    throw InvalidCombinationError("convex combination has no positive weight");
  }

  // Continues below d + 1 while the support is affinely dependent, so the
  // result is bounded by the affine dimension of the support plus one.
  while (idx.size() > 1) {
    const auto s = static_cast<Index>(idx.size());
    Eigen::MatrixXd M(d + 1, s);
    for (Index j = 0; j < s; ++j) {
      M.col(j).head(d) = cloud.column(idx[static_cast<std::size_t>(j)]);
      M(d, j) = 1.0;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    const double norm_m = svd.singularValues()(0);
    if (s <= d + 1 && svd.singularValues()(s - 1) > 1e-10 * std::max(1.0, norm_m)) break;
    Eigen::VectorXd mu = svd.matrixV().col(s - 1);
    if ((M * mu).norm() > 1e-9 * std::max(1.0, norm_m)) {
      throw DegenerateGeometryError("caratheodory: null-space solve failed");
    }
    if (mu.maxCoeff() <= 0.0) mu = -mu;
    const double floor = 1e-14 * mu.cwiseAbs().maxCoeff();
    Index hit = -1;
    double alpha = 0.0;
    for (Index j = 0; j < s; ++j) {
      if (mu(j) <= floor) continue;
      const double ratio = w[static_cast<std::size_t>(j)] / mu(j);
      if (hit < 0 || ratio < alpha) {
        hit = j;
        alpha = ratio;
      }
    }
    if (hit < 0) {
      throw DegenerateGeometryError("caratheodory: null vector has no positive part");
    }
    std::vector<Index> next_idx;
    std::vector<double> next_w;
    for (Index j = 0; j < s; ++j) {
      if (j == hit) continue;
      const double v = w[static_cast<std::size_t>(j)] - alpha * mu(j);
      if (v <= 0.0) continue;
      next_idx.push_back(idx[static_cast<std::size_t>(j)]);
      next_w.push_back(v);
    }
    idx = std::move(next_idx);
    w = std::move(next_w);
  }

  ConvexCombination out;
  for (std::size_t j = 0; j < idx.size(); ++j) out.entries.push_back({idx[j], w[j]});
  std::sort(out.entries.begin(), out.entries.end(),
            [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

}  // namespace convroof
