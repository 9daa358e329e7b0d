#include "convroof/analysis.hpp"

#include "convroof/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace convroof::analysis {

namespace {

constexpr int kBisections = 30;

std::mt19937_64 level_stream(std::uint64_t seed, std::size_t level) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(level)};
  return std::mt19937_64(seq);
}

// Largest t with |c + t*dir - p| <= r.
double ball_exit(const Eigen::VectorXd& c, const Eigen::VectorXd& dir,
                 const Eigen::VectorXd& p, double r) {
  const Eigen::VectorXd cp = c - p;
  const double a = dir.squaredNorm();
  const double b = 2.0 * dir.dot(cp);
  const double cc = cp.squaredNorm() - r * r;
  const double disc = std::max(0.0, b * b - 4.0 * a * cc);
  return (-b + std::sqrt(disc)) / (2.0 * a);
}

// Last in-hull point on the ray from c through q, if the hull boundary is met
// before the ray leaves the ball.
std::optional<Eigen::VectorXd> boundary_on_ray(const SampledConvexProblem& problem,
                                               const Eigen::VectorXd& c,
                                               const Eigen::VectorXd& q,
                                               const Eigen::VectorXd& p, double r) {
  const Eigen::VectorXd dir = q - c;
  if (dir.norm() <= 1e-14 * (1.0 + c.norm())) return std::nullopt;
  const double t_max = ball_exit(c, dir, p, r);
  if (!(t_max > 1.0)) return std::nullopt;
  if (hull_contains(problem, c + t_max * dir)) return std::nullopt;
  double lo = 1.0;
  double hi = t_max;
  for (int it = 0; it < kBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hull_contains(problem, c + mid * dir)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return Eigen::VectorXd(c + lo * dir);
}

std::optional<double> roof_at(const SampledConvexProblem& problem, const Eigen::VectorXd& x) {
  auto rv = try_roof_eval(problem, x);
  if (!rv) return std::nullopt;
  return rv->value;
}

}  // namespace

OscillationReport oscillation(const SampledConvexProblem& problem, const Point& p,
                              std::span<const double> radii, Index samples_per_radius,
                              const OscillationOptions& options) {
  if (samples_per_radius < 1) {
    throw std::invalid_argument("samples_per_radius must be positive");
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] < radii[i - 1]))) {
      throw std::invalid_argument("radii must be positive and strictly decreasing");
    }
  }
  const auto center = try_roof_eval(problem, p.coords());
  if (!center) throw MembershipError("oscillation center lies outside the hull");

  OscillationReport report{.center = p,
                           .center_value = center->value,
                           .levels = {},
                           .samples_per_radius = samples_per_radius,
                           .cloud_size = problem.size(),
                           .seed = options.seed};

  const AffineFrame& frame = problem.frame();
  const Index k = frame.dim();
  const Eigen::VectorXd& c = frame.origin;
  const Eigen::VectorXd& x0 = p.coords();

  for (std::size_t level = 0; level < radii.size(); ++level) {
    OscillationLevel out;
    out.radius = radii[level];
    if (k == 0) {
      out.osc = 0.0;
      out.note = "hull is a single point";
      report.levels.push_back(std::move(out));
      continue;
    }
    auto rng = level_stream(options.seed, level);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    double worst = -1.0;
    auto record = [&](double v) { worst = std::max(worst, std::abs(v - center->value)); };

    const Index cap = options.max_attempt_factor * samples_per_radius;
    while (out.interior_samples < samples_per_radius && out.attempts < cap) {
      ++out.attempts;
      Eigen::VectorXd g(k);
      for (Index j = 0; j < k; ++j) g(j) = normal(rng);
      const double len = g.norm();
      if (len == 0.0) continue;
      const double rad = out.radius * std::pow(unit(rng), 1.0 / static_cast<double>(k));
      const Eigen::VectorXd q = x0 + frame.basis * (g * (rad / len));
      const auto v = roof_at(problem, q);
      if (!v) continue;
      ++out.interior_samples;
      record(*v);
      if (options.boundary_projections) {
        if (auto b = boundary_on_ray(problem, c, q, x0, out.radius)) {
          if (const auto vb = roof_at(problem, *b)) {
            ++out.boundary_samples;
            record(*vb);
          }
        }
      }
    }
    if (worst >= 0.0) {
      out.osc = worst;
      if (out.interior_samples < samples_per_radius) {
        out.note = "attempt cap reached after " + std::to_string(out.interior_samples) +
                   " in-hull samples";
      }
    } else {
      out.note = "no sample of the ball landed in the hull; radius skipped";
    }
    report.levels.push_back(std::move(out));
  }
  return report;
}

std::string to_string(Stencil s) {
  switch (s) {
    case Stencil::Central: return "central";
    case Stencil::Forward: return "forward";
    case Stencil::Backward: return "backward";
    case Stencil::Unavailable: return "unavailable";
  }
  return "unknown";
}

GradientProbe gradient_probe(const SampledConvexProblem& problem, const Point& x,
                             std::optional<double> step) {
  const double h = step.value_or(1e-3 * (problem.cloud().diameter() > 0.0
                                             ? problem.cloud().diameter()
                                             : 1.0));
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("step must be positive");
  const auto f0 = roof_at(problem, x.coords());
  if (!f0) throw MembershipError("probe point lies outside the hull");

  const Index d = x.dim();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  GradientProbe out{.point = x,
                    .step = h,
                    .value = *f0,
                    .grad = Eigen::VectorXd::Constant(d, nan),
                    .hessian_diag = Eigen::VectorXd::Constant(d, nan),
                    .stencils = {},
                    .finite = {}};
  out.stencils.assign(static_cast<std::size_t>(d), Stencil::Unavailable);
  out.finite.assign(static_cast<std::size_t>(d), false);

  for (Index j = 0; j < d; ++j) {
    auto at = [&](double s) {
      Eigen::VectorXd y = x.coords();
      y(j) += s * h;
      return roof_at(problem, y);
    };
    const auto fp = at(1.0);
    const auto fm = at(-1.0);
    const auto idx = static_cast<std::size_t>(j);
    if (fp && fm) {
      out.stencils[idx] = Stencil::Central;
      out.grad(j) = (*fp - *fm) / (2.0 * h);
      out.hessian_diag(j) = (*fp - 2.0 * *f0 + *fm) / (h * h);
    } else if (fp) {
      out.stencils[idx] = Stencil::Forward;
      out.grad(j) = (*fp - *f0) / h;
      if (const auto fpp = at(2.0)) out.hessian_diag(j) = (*fpp - 2.0 * *fp + *f0) / (h * h);
    } else if (fm) {
      out.stencils[idx] = Stencil::Backward;
      out.grad(j) = (*f0 - *fm) / h;
      if (const auto fmm = at(-2.0)) out.hessian_diag(j) = (*f0 - 2.0 * *fm + *fmm) / (h * h);
    }
    out.finite[idx] = std::isfinite(out.grad(j)) && std::isfinite(out.hessian_diag(j));
  }
  return out;
}

std::vector<ConvergenceRow> refinement_convergence(
    std::string_view example_name, std::span<const Index> resolutions,
    std::span<const Point> probes, const examples::ExampleOptions& options) {
  std::vector<ConvergenceRow> rows;
  for (Index n : resolutions) {
    const auto ex = examples::make_example(example_name, n, options);
    for (const Point& probe : probes) {
      ConvergenceRow row{.resolution = n,
                         .cloud_size = ex.problem.size(),
                         .probe = probe,
                         .roof = {},
                         .oracle = {},
                         .error = {}};
      row.roof = roof_at(ex.problem, probe.coords());
      if (ex.spec.oracle) row.oracle = ex.spec.oracle(probe.coords());
      if (row.roof && row.oracle) row.error = std::abs(*row.roof - *row.oracle);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace convroof::analysis
