// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any
// failure.

#include "convroof/analysis.hpp"
#include "convroof/examples.hpp"
#include "convroof/geometry.hpp"
#include "convroof/lp.hpp"
#include "convroof/quantum.hpp"
#include "convroof/roof.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

using namespace convroof;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string printf_string(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

VectorXd random_inner(const SampledConvexProblem& pb, std::mt19937_64& rng, int members = 3) {
  std::uniform_int_distribution<Index> pick(0, pb.size() - 1);
  std::exponential_distribution<double> expo(1.0);
  VectorXd x = VectorXd::Zero(pb.dim());
  double total = 0.0;
  for (int k = 0; k < members; ++k) {
    const double w = expo(rng);
    x += w * pb.cloud().matrix().col(pick(rng));
    total += w;
  }
  return x / total;
}

std::vector<examples::Example> convex_examples(Index n) {
  std::vector<examples::Example> out;
  for (const auto& name : examples::example_names()) {
    auto ex = examples::make_example(name, n);
    if (ex.spec.convex_on_samples) out.push_back(std::move(ex));
  }
  return out;
}

Verdict restriction() {
  const auto all = convex_examples(64);
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (const auto& ex : all) {
    std::uniform_int_distribution<Index> pick(0, ex.problem.size() - 1);
    for (int t = 0; t < 100; ++t) {
      const Index i = pick(rng);
      worst = std::max(worst, std::abs(roof_eval(ex.problem, ex.problem.cloud().point(i)).value -
                                       ex.problem.value(i)));
    }
  }
  return {worst <= 1e-8, printf_string("%zu examples x 100 samples, max |roof - f| = %.2e",
                                       all.size(), worst)};
}

Verdict caratheodory() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss;
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<int> dim(2, 6);
  double worst = 0.0;
  int oversize = 0;
  for (int t = 0; t < 1000; ++t) {
    const int d = dim(rng);
    MatrixXd pts(d, 50);
    for (Index j = 0; j < 50; ++j)
      for (Index i = 0; i < d; ++i) pts(i, j) = gauss(rng);
    const PointCloud cloud(pts);
    ConvexCombination comb;
    double total = 0.0;
    for (Index j = 0; j < 50; ++j) {
      comb.entries.push_back({j, expo(rng)});
      total += comb.entries.back().weight;
    }
    for (auto& e : comb.entries) e.weight /= total;
    const auto reduced = caratheodory_reduce(cloud, comb);
    if (reduced.support_size() > d + 1) ++oversize;
    worst = std::max(worst, (reduced.point(cloud) - comb.point(cloud)).lpNorm<Eigen::Infinity>());
  }
  int roof_oversize = 0;
  int roof_evals = 0;
  for (const auto& ex : convex_examples(64)) {
    for (int t = 0; t < 50; ++t) {
      const auto rv = roof_eval(ex.problem, Point(random_inner(ex.problem, rng)));
      ++roof_evals;
      if (rv.decomposition.support_size() > ex.problem.dim() + 1) ++roof_oversize;
    }
  }
  return {oversize == 0 && roof_oversize == 0 && worst <= 1e-9,
          printf_string("1000 reductions: oversize %d, max error %.2e; %d roof decompositions: "
                        "oversize %d",
                        oversize, worst, roof_evals, roof_oversize)};
}

std::optional<double> enumerate_bfs(const MatrixXd& A, const VectorXd& b, const VectorXd& c) {
  const Index m = A.rows();
  const Index n = A.cols();
  std::vector<int> mask(static_cast<std::size_t>(n), 0);
  std::fill(mask.end() - m, mask.end(), 1);
  std::optional<double> best;
  do {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j)
      if (mask[static_cast<std::size_t>(j)]) cols.push_back(j);
    MatrixXd B(m, m);
    for (Index k = 0; k < m; ++k) B.col(k) = A.col(cols[static_cast<std::size_t>(k)]);
    Eigen::FullPivLU<MatrixXd> lu(B);
    if (!lu.isInvertible()) continue;
    const VectorXd xb = lu.solve(b);
    if (xb.minCoeff() < -1e-10) continue;
    double obj = 0.0;
    for (Index k = 0; k < m; ++k) obj += c(cols[static_cast<std::size_t>(k)]) * xb(k);
    if (!best || obj < *best) best = obj;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return best;
}

Verdict lp_correctness() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  lp::SimplexSolver solver;
  double worst = 0.0;
  int mismatched = 0;
  for (int t = 0; t < 200; ++t) {
    MatrixXd A(4, 10);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 10; ++j) A(i, j) = gauss(rng);
    VectorXd x0(10), c(10);
    for (Index j = 0; j < 10; ++j) {
      x0(j) = unit(rng);
      c(j) = 0.1 + unit(rng);
    }
    const VectorXd b = A * x0;
    const auto sol = solver.solve(A, b, c);
    const auto brute = enumerate_bfs(A, b, c);
    if (sol.status != lp::Status::Optimal || !brute) {
      ++mismatched;
      continue;
    }
    const double err = std::abs(sol.objective - *brute);
    worst = std::max(worst, err);
    if (err > 1e-9) ++mismatched;
  }
  return {mismatched == 0,
          printf_string("200 programs 4x10, mismatches %d, max |simplex - enumeration| = %.2e",
                        mismatched, worst)};
}

Verdict punctured(const char* name) {
  const auto ex = examples::make_example(name, 200);
  const double ring = roof_eval(ex.problem, Point{0.0, 0.6, 0.8}).value;
  const double hole = roof_eval(ex.problem, Point{0.0, 0.0, 1.0}).value;
  const std::vector<double> radii{0.2, 0.1, 0.05};
  const auto rep = analysis::oscillation(ex.problem, Point{0.0, 0.0, 1.0}, radii, 100, {.seed = 4});
  bool osc_ok = true;
  std::string oscs;
  for (const auto& level : rep.levels) {
    osc_ok = osc_ok && level.osc && *level.osc >= 0.9;
    oscs += printf_string(" %.3g", level.osc.value_or(std::nan("")));
  }
  return {std::abs(ring - 1.0) <= 1e-9 && std::abs(hole) <= 1e-9 && osc_ok,
          printf_string("N=200: roof(0,0.6,0.8) = %.12g, roof(0,0,1) = %.2e, osc at r=0.2,0.1,0.05:%s",
                        ring, hole, oscs.c_str())};
}

Verdict potato() {
  const auto ex = examples::make_example("potato_chip", 1024);
  const auto grid = roof_grid(ex.problem, 64);
  double worst = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    if (!grid.cells[i]) continue;
    const double y = grid.nodes[i](1);
    worst = std::max(worst, std::abs(grid.cells[i]->value - (1.0 - std::sqrt(1.0 - std::pow(y, 4)))));
    ++cells;
  }
  std::vector<double> slopes;
  for (double delta : {0.1, 0.05, 0.025}) {
    const auto probe = analysis::gradient_probe(ex.problem, Point{0.0, 1.0 - delta});
    slopes.push_back(std::abs(probe.grad(1)));
  }
  const double r1 = slopes[1] / slopes[0];
  const double r2 = slopes[2] / slopes[1];
  const auto chip512 = examples::make_example("potato_chip", 512);
  const bool none512 = !supporting_hyperplane(chip512.problem, Point{0.0, 1.0}, 100.0).has_value();
  const bool none1024 = !supporting_hyperplane(ex.problem, Point{0.0, 1.0}, 100.0).has_value();
  return {worst <= 1e-2 && r1 >= 1.2 && r2 >= 1.2 && none512 && none1024,
          printf_string("N=1024: %d in-hull cells, max grid error %.2e; |df/dy| %.4g, %.4g, %.4g "
                        "(ratios %.3g, %.3g); no hyperplane with M=100 at N=512: %s, N=1024: %s",
                        cells, worst, slopes[0], slopes[1], slopes[2], r1, r2,
                        none512 ? "yes" : "no", none1024 ? "yes" : "no")};
}

Verdict no_c2() {
  const auto ex = examples::make_example("no_c2", 512);
  double left = 0.0;
  for (double x : {-0.75, -0.5, -0.25}) left = std::max(left, std::abs(roof_eval(ex.problem, Point{x, 0.0}).value));
  double right = 0.0;
  for (double x : {0.25, 0.5, 0.75}) {
    right = std::max(right, std::abs(roof_eval(ex.problem, Point{x, 0.0}).value - (x + 1) * x * x));
  }
  const double h = 0.03;
  const auto minus = analysis::gradient_probe(ex.problem, Point{-0.06, 0.0}, h);
  const auto plus = analysis::gradient_probe(ex.problem, Point{0.06, 0.0}, h);
  const double jump = std::abs(plus.hessian_diag(0) - minus.hessian_diag(0));
  return {left <= 1e-6 && right <= 5e-3 && jump >= 1.5,
          printf_string("N=512: max |roof| for x<0 %.2e, max error for x>0 %.2e, second "
                        "difference %.4g at x=-0.06 vs %.4g at x=+0.06 (h=%.2g), jump %.4g",
                        left, right, minus.hessian_diag(0), plus.hessian_diag(0), h, jump)};
}

Verdict flat_sets() {
  std::vector<examples::Example> pool;
  for (const char* name : {"no_c2", "potato_chip", "strictly_convex_random", "tomato_can", "combined_4d"}) {
    pool.push_back(examples::make_example(name, 64));
  }
  std::mt19937_64 rng(8);
  std::exponential_distribution<double> expo(1.0);
  double worst = 0.0;
  int unverified = 0;
  for (int q = 0; q < 50; ++q) {
    const auto& pb = pool[static_cast<std::size_t>(q) % pool.size()].problem;
    const auto fs = flat_set(pb, Point(random_inner(pb, rng, 4)));
    if (!fs.verified) ++unverified;
    for (int t = 0; t < 10; ++t) {
      VectorXd x = VectorXd::Zero(pb.dim());
      double total = 0.0;
      for (const auto& p : fs.points) {
        const double w = expo(rng);
        x += w * p.coords();
        total += w;
      }
      x /= total;
      worst = std::max(worst, std::abs(roof_eval(pb, Point(x)).value - fs.functional(x)));
    }
  }
  return {worst <= 1e-8 && unverified == 0,
          printf_string("50 queries x 10 probes over 5 examples, max |roof - affine| = %.2e, "
                        "unverified %d",
                        worst, unverified)};
}

double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

Verdict quantum_oracle() {
  using namespace quantum;
  const double s = 1.0 / std::sqrt(2.0);
  int rank2_ok = 0;
  double below = 0.0;
  double worst_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto rho = random_state(1000 + seed, 2);
    RoofOptions opts;
    opts.ensemble_size = 4;
    opts.restarts = 20;
    opts.seed = seed;
    const auto res = roof_entanglement(rho, linear_entropy_measure(), opts);
    const double oracle = concurrence_wootters(rho) * s;
    const double gap = res.value - oracle;
    if (std::abs(gap) <= 5e-3) ++rank2_ok;
    below = std::min(below, gap);
    worst_gap = std::max(worst_gap, gap);
  }
  int full_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rho = random_state(2000 + seed, 4);
    RoofOptions opts;
    opts.restarts = 20;
    opts.seed = seed;
    const auto res = roof_entanglement(rho, linear_entropy_measure(), opts);
    const double oracle = concurrence_wootters(rho) * s;
    if (std::abs(res.value - oracle) <= 1e-2) ++full_ok;
    below = std::min(below, res.value - oracle);
  }
  double path_err = 0.0;
  double numeric_jump = 0.0;
  double oracle_jump = 0.0;
  std::optional<double> prev_numeric, prev_oracle;
  for (int k = 0; k <= 10; ++k) {
    const double p = k / 10.0;
    const double c = std::max(0.0, (3 * p - 1) / 2);
    const double eof = h2((1 + std::sqrt(1 - c * c)) / 2);
    RoofOptions opts;
    opts.restarts = 20;
    opts.seed = static_cast<std::uint64_t>(k);
    const double numeric = roof_entanglement(werner_state(p), von_neumann_measure(), opts).value;
    path_err = std::max(path_err, std::abs(numeric - eof));
    if (prev_numeric) {
      numeric_jump = std::max(numeric_jump, std::abs(numeric - *prev_numeric));
      oracle_jump = std::max(oracle_jump, std::abs(eof - *prev_oracle));
    }
    prev_numeric = numeric;
    prev_oracle = eof;
  }
  const bool ok = rank2_ok >= 95 && below >= -1e-9 && full_ok >= 18 && path_err <= 1e-2 &&
                  numeric_jump <= 3 * oracle_jump;
  return {ok, printf_string("rank 2: %d/100 within 5e-3 (largest gap %.2e); full rank: %d/20 "
                            "within 1e-2; min (value - oracle) %.2e; Werner path max error %.2e, "
                            "largest step %.4g vs oracle step %.4g",
                            rank2_ok, worst_gap, full_ok, below, path_err, numeric_jump,
                            oracle_jump)};
}

Verdict separable() {
  using namespace quantum;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int members = 1 + static_cast<int>(seed % 4);
    RoofOptions opts;
    opts.seed = seed;
    const auto res = roof_entanglement(random_separable_state(3000 + seed, members),
                                       linear_entropy_measure(), opts);
    worst = std::max(worst, res.value);
  }
  return {worst <= 1e-6, printf_string("50 mixtures of 1-4 product states, max roof %.2e", worst)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "restriction identity", 10, restriction},
      {2, "caratheodory bound", 20, caratheodory},
      {3, "lp correctness", 10, lp_correctness},
      {4, "punctured tomato can", 30, [] { return punctured("tomato_can"); }},
      {5, "no continuous extension", 60, [] { return punctured("punctured_no_extension"); }},
      {6, "potato chip", 120, potato},
      {7, "non-C2 roof", 60, no_c2},
      {8, "flat sets", 60, flat_sets},
      {9, "quantum oracle match", 600, quantum_oracle},
      {10, "zero on separable states", 120, separable},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit;
    const bool pass = v.passed && in_time;
    if (!pass) ++failures;
    std::printf("%s %2d %s: %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs, c.limit, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
