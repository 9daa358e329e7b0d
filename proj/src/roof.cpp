#include "convroof/roof.hpp"

#include "convroof/errors.hpp"
#include "convroof/lp.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

namespace convroof {

struct SampledConvexProblem::Cache {
  std::once_flag hull_once;
  std::optional<Hull> hull;
  std::once_flag facets_once;
  std::vector<Facet> facets;
};

SampledConvexProblem::SampledConvexProblem(PointCloud cloud, std::vector<double> values)
    : cloud_(std::move(cloud)), values_(std::move(values)),
      cache_(std::make_shared<Cache>()) {
  if (static_cast<Index>(values_.size()) != cloud_.size()) {
    throw DimensionError("values: expected " + std::to_string(cloud_.size()) +
                         " entries, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DimensionError("values must be finite");
  }
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  lower_ = *lo;
  upper_ = *hi;
  frame_ = affine_frame(cloud_);
  const Eigen::MatrixXd local = frame_.columns_to_local(cloud_.matrix());
  lifted_local_.resize(local.rows() + 1, local.cols());
  lifted_local_.topRows(local.rows()) = local;
  lifted_local_.bottomRows(1).setOnes();
}

const Hull& SampledConvexProblem::hull() const {
  std::call_once(cache_->hull_once, [&] { cache_->hull = convex_hull(cloud_); });
  return *cache_->hull;
}

const std::vector<Facet>& SampledConvexProblem::facets() const {
  std::call_once(cache_->facets_once,
                 [&] { cache_->facets = hull_facets(cloud_, frame_); });
  return cache_->facets;
}

namespace {

// Local lifted rhs, or nullopt when x is off the affine hull.
std::optional<Eigen::VectorXd> lifted_query(const SampledConvexProblem& problem,
                                            const Eigen::VectorXd& x) {
  if (x.size() != problem.dim()) {
    throw DimensionError("query has dimension " + std::to_string(x.size()) +
                         ", cloud has " + std::to_string(problem.dim()));
  }
  const auto& frame = problem.frame();
  if (frame.offset_from(x) > kMembershipTol * std::max(1.0, problem.cloud().diameter())) {
    return std::nullopt;
  }
  const Eigen::VectorXd local = frame.to_local(x);
  Eigen::VectorXd b(local.size() + 1);
  b.head(local.size()) = local;
  b(local.size()) = 1.0;
  return b;
}

std::optional<RoofValue> evaluate(const SampledConvexProblem& problem,
                                  const Eigen::VectorXd& x) {
  const auto b = lifted_query(problem, x);
  if (!b) return std::nullopt;
  lp::Options options;
  options.feasibility_tol = kMembershipTol;
  lp::SimplexSolver solver(options);
  const Eigen::Map<const Eigen::VectorXd> costs(problem.values().data(),
                                                problem.size());
  const auto sol = solver.solve(problem.lifted_local(), *b, costs);
  if (sol.status == lp::Status::Infeasible) return std::nullopt;
  if (sol.status == lp::Status::Unbounded) {
    throw Error("roof LP reported unbounded; sample values must be finite");
  }
  RoofValue out{0.0, {}, Point(x)};
  std::vector<Index> basis = sol.basis;
  std::sort(basis.begin(), basis.end());
  for (Index j : basis) {
    if (sol.primal(j) > 0.0) out.decomposition.entries.push_back({j, sol.primal(j)});
  }
  out.value = out.decomposition.combine(problem.values());
  return out;
}

}  // namespace

bool hull_contains(const SampledConvexProblem& problem, const Eigen::VectorXd& x,
                   double tol) {
  const auto b = lifted_query(problem, x);
  if (!b) return false;
  lp::Options options;
  options.feasibility_tol = tol;
  lp::SimplexSolver solver(options);
  const auto sol = solver.solve(problem.lifted_local(), *b,
                                Eigen::VectorXd::Zero(problem.size()));
  return sol.status == lp::Status::Optimal;
}

std::optional<RoofValue> try_roof_eval(const SampledConvexProblem& problem,
                                       const Eigen::VectorXd& x) {
  return evaluate(problem, x);
}

RoofValue roof_eval(const SampledConvexProblem& problem, const Point& x) {
  auto rv = evaluate(problem, x.coords());
  if (!rv) throw MembershipError("query point lies outside the convex hull");
  return std::move(*rv);
}

RoofGrid roof_grid(const SampledConvexProblem& problem, Index resolution, int jobs) {
  if (problem.dim() > 3) throw DimensionError("roof_grid supports d <= 3");
  if (resolution < 1) throw std::invalid_argument("grid resolution must be >= 1");
  RoofGrid grid;
  grid.lower = problem.cloud().lower_corner();
  grid.upper = problem.cloud().upper_corner();
  grid.resolution = resolution;
  const Index d = problem.dim();
  Index total = 1;
  for (Index a = 0; a < d; ++a) total *= resolution;

  grid.nodes.reserve(static_cast<std::size_t>(total));
  for (Index cell = 0; cell < total; ++cell) {
    Eigen::VectorXd node(d);
    Index rest = cell;
    for (Index a = d - 1; a >= 0; --a) {
      const Index i = rest % resolution;
      rest /= resolution;
      const double t = resolution == 1 ? 0.5 : static_cast<double>(i) / (resolution - 1);
      node(a) = grid.lower(a) + t * (grid.upper(a) - grid.lower(a));
    }
    grid.nodes.push_back(std::move(node));
  }

  grid.cells.resize(static_cast<std::size_t>(total));
  auto work = [&](Index start, Index stride) {
    for (Index cell = start; cell < total; cell += stride) {
      const auto u = static_cast<std::size_t>(cell);
      grid.cells[u] = try_roof_eval(problem, grid.nodes[u]);
    }
  };
  const int threads = std::max(1, jobs);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  return grid;
}

FlatSet flat_set(const SampledConvexProblem& problem, const Point& x) {
  const RoofValue rv = roof_eval(problem, x);
  FlatSet out;
  const Index d = problem.dim();
  for (const auto& e : rv.decomposition.entries) {
    out.support.push_back(e.index);
    out.points.push_back(problem.cloud().point(e.index));
    out.weights.push_back(e.weight);
  }
  const auto s = static_cast<Index>(out.support.size());
  const Eigen::VectorXd base = out.points.front().coords();
  const double base_value = problem.value(out.support.front());
  out.functional.gradient = Eigen::VectorXd::Zero(d);
  if (s > 1) {
    Eigen::MatrixXd diffs(s - 1, d);
    Eigen::VectorXd rise(s - 1);
    for (Index j = 1; j < s; ++j) {
      const auto u = static_cast<std::size_t>(j);
      diffs.row(j - 1) = (out.points[u].coords() - base).transpose();
      rise(j - 1) = problem.value(out.support[u]) - base_value;
    }
    out.functional.gradient = diffs.completeOrthogonalDecomposition().solve(rise);
  }
  out.functional.offset = base_value - out.functional.gradient.dot(base);

  Eigen::VectorXd barycenter = Eigen::VectorXd::Zero(d);
  for (const auto& p : out.points) barycenter += p.coords();
  barycenter /= static_cast<double>(s);
  const auto at_center = try_roof_eval(problem, barycenter);
  if (at_center) {
    out.barycenter_residual =
        std::abs(at_center->value - out.functional(barycenter));
    const double scale = 1.0 + std::abs(problem.upper_bound()) + std::abs(problem.lower_bound());
    out.verified = out.barycenter_residual <= 1e-8 * scale;
  } else {
    out.barycenter_residual = std::numeric_limits<double>::infinity();
  }
  return out;
}

Eigen::VectorXd boundary_normal(const SampledConvexProblem& problem,
                                const Eigen::VectorXd& p) {
  const double tol = kMembershipTol * std::max(1.0, problem.cloud().diameter());
  const auto& frame = problem.frame();
  if (p.size() != problem.dim()) throw DimensionError("point dimension mismatch");
  if (frame.offset_from(p) > tol) {
    throw NotOnBoundaryError("point is off the affine hull of the cloud");
  }
  if (frame.dim() == 0) {
    throw NotOnBoundaryError("a single-point hull has no outward normal");
  }
  const auto& facets = problem.facets();
  if (!facets.empty()) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(p.size());
    for (const Facet& f : facets) {
      const double gap = f.normal.dot(p) - f.offset;
      if (gap > tol) throw NotOnBoundaryError("point lies outside the hull");
      if (gap >= -tol) sum += f.normal;
    }
    const double len = sum.norm();
    if (len == 0.0) throw NotOnBoundaryError("point is interior to the hull");
    return sum / len;
  }
  // Higher dimensions: radial test from the centroid.
  const Eigen::VectorXd centroid = problem.cloud().matrix().rowwise().mean();
  Eigen::VectorXd dir = p - centroid;
  if (!frame.identity) dir = frame.basis * (frame.basis.transpose() * dir);
  const double len = dir.norm();
  if (len == 0.0 || !hull_contains(problem, p)) {
    throw NotOnBoundaryError("point is not on the hull boundary");
  }
  dir /= len;
  const Eigen::VectorXd pushed = p + 1e-6 * problem.cloud().diameter() * dir;
  if (hull_contains(problem, pushed, 1e-9)) {
    throw NotOnBoundaryError("point is interior to the hull");
  }
  return dir;
}

std::optional<AffineFunctional> supporting_hyperplane(
    const SampledConvexProblem& problem, const Point& p, double gradient_bound) {
  if (!(gradient_bound > 0.0)) {
    throw std::invalid_argument("gradient bound must be positive");
  }
  const Eigen::VectorXd normal = boundary_normal(problem, p.coords());
  const double anchor = roof_eval(problem, p).value;
  const auto& frame = problem.frame();
  const Index k = frame.dim();
  const Index n = problem.size();
  const Eigen::VectorXd q = frame.to_local(p.coords());
  const Eigen::VectorXd nu =
      frame.identity ? normal : Eigen::VectorXd(frame.basis.transpose() * normal);

  // Primal: min nu.g  s.t.  g.(x_i - q) <= f_i - anchor,  |g_j| <= M.
  // Solved through its dual  min h'lambda  s.t.  [D' I -I] lambda = -nu,
  // lambda >= 0; the primal g is the dual vector of that LP.
  Eigen::MatrixXd A(k, n + 2 * k);
  Eigen::VectorXd cost(n + 2 * k);
  A.leftCols(n) = problem.lifted_local().topRows(k).colwise() - q;
  for (Index i = 0; i < n; ++i) cost(i) = problem.value(i) - anchor;
  A.middleCols(n, k).setIdentity();
  A.rightCols(k) = -Eigen::MatrixXd::Identity(k, k);
  cost.tail(2 * k).setConstant(gradient_bound);

  lp::SimplexSolver solver;
  const auto sol = solver.solve(A, -nu, cost);
  if (sol.status == lp::Status::Unbounded) return std::nullopt;
  if (sol.status != lp::Status::Optimal) {
    throw Error("supporting hyperplane LP failed: " +
                std::string(lp::to_string(sol.status)));
  }
  const Eigen::VectorXd g = sol.dual;
  const double slack = 1e-7 * (1.0 + gradient_bound) * std::max(1.0, problem.cloud().diameter());
  const Eigen::VectorXd lhs = A.leftCols(n).transpose() * g;
  for (Index i = 0; i < n; ++i) {
    if (lhs(i) > cost(i) + slack) return std::nullopt;
  }
  if (g.cwiseAbs().maxCoeff() > gradient_bound * (1.0 + 1e-9)) return std::nullopt;

  AffineFunctional out;
  out.gradient = frame.identity ? g : Eigen::VectorXd(frame.basis * g);
  out.offset = anchor - out.gradient.dot(frame.to_ambient(q));
  return out;
}

double outer_extension(const SampledConvexProblem& problem, const Point& x,
                       std::span<const Point> boundary_samples,
                       double gradient_bound) {
  if (auto inside = try_roof_eval(problem, x.coords())) return inside->value;
  if (boundary_samples.empty()) {
    throw std::invalid_argument("outer_extension needs boundary samples");
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const Point& q : boundary_samples) {
    const auto support = supporting_hyperplane(problem, q, gradient_bound);
    if (!support) {
      throw VerticalHyperplaneError(
          "no nonvertical supporting hyperplane within the gradient bound",
          std::vector<double>(q.coords().data(), q.coords().data() + q.dim()));
    }
    best = std::max(best, (*support)(x.coords()));
  }
  return best;
}

ConvexityReport is_convex_on_samples(const PointCloud& cloud,
                                     std::span<const double> values) {
  const SampledConvexProblem problem(cloud, std::vector<double>(values.begin(), values.end()));
  ConvexityReport report;
  for (Index i = 0; i < cloud.size(); ++i) {
    const RoofValue rv = roof_eval(problem, cloud.point(i));
    if (rv.value < problem.value(i) - 1e-8) {
      report.convex = false;
      report.violating_index = i;
      report.witness = rv.decomposition;
      report.witness_value = rv.value;
      return report;
    }
  }
  return report;
}

}  // namespace convroof
