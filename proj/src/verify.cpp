#include "convroof/verify.hpp"

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
#include <limits>
#include <random>
#include <sstream>

namespace convroof::verify {

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

// Convex combination of three random samples; always inside the hull.
Eigen::VectorXd random_inner_point(const SampledConvexProblem& problem, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> pick(0, problem.size() - 1);
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(problem.dim());
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double w = expo(rng);
    x += w * problem.cloud().matrix().col(pick(rng));
    total += w;
  }
  return x / total;
}

std::vector<examples::Example> convex_examples(Index resolution, std::uint64_t seed) {
  std::vector<examples::Example> out;
  for (const auto& name : examples::example_names()) {
    auto ex = examples::make_example(name, resolution, {.seed = seed, .constant_value = {}});
    if (ex.spec.convex_on_samples) out.push_back(std::move(ex));
  }
  return out;
}

Outcome restriction(const std::vector<examples::Example>& all, int per_example,
                    std::mt19937_64& rng) {
  double worst = 0.0;
  for (const auto& ex : all) {
    const auto& pb = ex.problem;
    std::uniform_int_distribution<Index> pick(0, pb.size() - 1);
    for (int t = 0; t < per_example; ++t) {
      const Index i = pick(rng);
      const auto rv = roof_eval(pb, pb.cloud().point(i));
      worst = std::max(worst, std::abs(rv.value - pb.value(i)));
    }
  }
  return {worst <= 1e-8, fmt("max |roof(x_i) - f(x_i)| = %.3g", worst)};
}

Outcome bounds_and_support(const std::vector<examples::Example>& all, int per_example,
                           std::mt19937_64& rng) {
  double excess = 0.0;
  Index worst_support = 0;
  bool support_ok = true;
  for (const auto& ex : all) {
    const auto& pb = ex.problem;
    for (int t = 0; t < per_example; ++t) {
      const auto rv = roof_eval(pb, Point(random_inner_point(pb, rng)));
      rv.decomposition.validate(pb.cloud());
      excess = std::max({excess, pb.lower_bound() - rv.value, rv.value - pb.upper_bound()});
      worst_support = std::max(worst_support, rv.decomposition.support_size());
      support_ok = support_ok && rv.decomposition.support_size() <= pb.dim() + 1;
    }
  }
  return {excess <= 1e-9 && support_ok,
          fmt("bound excess %.3g, largest support %.0f", excess, static_cast<double>(worst_support))};
}

Outcome midpoint_convexity(const std::vector<examples::Example>& all, int per_example,
                           std::mt19937_64& rng) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& ex : all) {
    const auto& pb = ex.problem;
    for (int t = 0; t < per_example; ++t) {
      const Eigen::VectorXd a = random_inner_point(pb, rng);
      const Eigen::VectorXd b = random_inner_point(pb, rng);
      const double fa = roof_eval(pb, Point(a)).value;
      const double fb = roof_eval(pb, Point(b)).value;
      const double fm = roof_eval(pb, Point(Eigen::VectorXd(0.5 * (a + b)))).value;
      worst = std::max(worst, fm - 0.5 * (fa + fb));
    }
  }
  return {worst <= 1e-9, fmt("max roof(mid) - mean = %.3g", worst)};
}

Outcome caratheodory(int trials, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<int> dim(2, 6);
  double worst_err = 0.0;
  bool support_ok = true;
  for (int t = 0; t < trials; ++t) {
    const int d = dim(rng);
    Eigen::MatrixXd pts(d, 50);
    for (Index j = 0; j < pts.cols(); ++j)
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
    reduced.validate(cloud);
    support_ok = support_ok && reduced.support_size() <= d + 1;
    worst_err = std::max(worst_err,
                         (reduced.point(cloud) - comb.point(cloud)).lpNorm<Eigen::Infinity>());
  }
  return {support_ok && worst_err <= 1e-9, fmt("max reconstruction error %.3g", worst_err)};
}

// Minimum of c'x over all basic feasible solutions.
std::optional<double> enumerate_bases(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                      const Eigen::VectorXd& c) {
  const Index m = A.rows();
  const Index n = A.cols();
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  std::fill(mask.begin(), mask.begin() + m, true);
  std::optional<double> best;
  do {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j)
      if (mask[static_cast<std::size_t>(j)]) cols.push_back(j);
    Eigen::MatrixXd B(m, m);
    for (Index k = 0; k < m; ++k) B.col(k) = A.col(cols[static_cast<std::size_t>(k)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd xb = lu.solve(b);
    if (xb.minCoeff() < -1e-10) continue;
    double obj = 0.0;
    for (Index k = 0; k < m; ++k) obj += c(cols[static_cast<std::size_t>(k)]) * xb(k);
    if (!best || obj < *best) best = obj;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

Outcome lp_against_enumeration(int trials, Index m, Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  int failures = 0;
  lp::SimplexSolver solver;
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd A(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) A(i, j) = gauss(rng);
    Eigen::VectorXd x0(n);
    Eigen::VectorXd c(n);
    for (Index j = 0; j < n; ++j) {
      x0(j) = unit(rng);
      c(j) = 0.1 + unit(rng);
    }
    const Eigen::VectorXd b = A * x0;
    const auto sol = solver.solve(A, b, c);
    const auto brute = enumerate_bases(A, b, c);
    if (sol.status != lp::Status::Optimal || !brute) {
      ++failures;
      continue;
    }
    worst = std::max(worst, std::abs(sol.objective - *brute));
  }
  return {failures == 0 && worst <= 1e-9,
          fmt("max |simplex - enumeration| = %.3g, non-optimal %.0f", worst, failures)};
}

Outcome punctured(std::string_view name, Index resolution) {
  const auto ex = examples::make_example(name, resolution);
  const double on_circle = roof_eval(ex.problem, Point{0.0, 0.6, 0.8}).value;
  const double puncture = roof_eval(ex.problem, Point{0.0, 0.0, 1.0}).value;
  return {std::abs(on_circle - 1.0) <= 1e-9 && std::abs(puncture) <= 1e-9,
          fmt("roof(0,0.6,0.8) = %.10g, roof(0,0,1) = %.3g", on_circle, puncture)};
}

Outcome combined_slice(Index resolution) {
  const auto ex = examples::make_example("combined_4d", resolution);
  const double on_circle = roof_eval(ex.problem, Point{0.0, 0.6, 0.2, 0.0}).value;
  const double puncture = roof_eval(ex.problem, Point{0.0, 0.0, 0.0, 0.0}).value;
  return {std::abs(on_circle - 1.0) <= 1e-9 && std::abs(puncture) <= 1e-9,
          fmt("roof(0,0.6,0.2,0) = %.10g, roof(0,0,0,0) = %.3g", on_circle, puncture)};
}

Outcome oracle_points(std::string_view name, Index resolution, const std::vector<Point>& probes,
                      double tol) {
  const auto ex = examples::make_example(name, resolution);
  double worst = 0.0;
  for (const auto& p : probes) {
    const auto oracle = ex.spec.oracle(p.coords());
    if (!oracle) return {false, "oracle undefined at a probe"};
    worst = std::max(worst, std::abs(roof_eval(ex.problem, p).value - *oracle));
  }
  return {worst <= tol, fmt("max |roof - oracle| = %.3g (tol %.0e)", worst, tol)};
}

Outcome nonclosed_witness(Index resolution) {
  const auto ex = examples::make_example("nonclosed_extreme", resolution);
  const auto report = is_convex_on_samples(ex.problem.cloud(), ex.problem.values());
  const bool ok = !report.convex && report.witness.has_value() &&
                  report.witness_value < ex.problem.value(*report.violating_index);
  return {ok, ok ? fmt("witness value %.6g below f = %.6g", report.witness_value,
                       ex.problem.value(*report.violating_index))
                 : std::string("no witness reported")};
}

Outcome quantum_identities(std::uint64_t seed) {
  using namespace quantum;
  const double s = 1.0 / std::sqrt(2.0);
  const auto bell = bell_state();
  const auto bell_rho = DensityMatrix::from_pure(bell);
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failed.emplace_back(what);
  };
  expect(std::abs(linear_entropy(bell) - s) <= 1e-12, "linear entropy of Bell");
  expect(std::abs(von_neumann_entanglement(bell) - 1.0) <= 1e-12, "von Neumann of Bell");
  expect(std::abs(concurrence_wootters(bell_rho) - 1.0) <= 1e-9, "concurrence of Bell");
  expect(std::abs(entanglement_of_formation(bell_rho) - 1.0) <= 1e-9, "EoF of Bell");
  expect(concurrence_wootters(DensityMatrix(Matrix4c::Identity() / 4.0)) <= 1e-12,
         "concurrence of I/4");

  const auto mixed = random_state(seed, 3);
  const Matrix4c U = random_local_unitary(seed + 1);
  const DensityMatrix rotated(U * mixed.matrix() * U.adjoint());
  expect(std::abs(concurrence_wootters(mixed) - concurrence_wootters(rotated)) <= 1e-8,
         "local unitary invariance");

  const auto psi_rho = random_state(seed + 2, 1);
  const PureState psi(psi_rho.spectrum().vectors.col(0));
  const auto lam = schmidt_coefficients(psi);
  expect(std::abs(concurrence_wootters(psi_rho) - 2.0 * std::sqrt(lam[0] * lam[1])) <= 1e-8,
         "pure concurrence");
  expect(std::abs(linear_entropy(psi) - std::sqrt(2.0 * lam[0] * lam[1])) <= 1e-12,
         "linear entropy identity");
  expect((schmidt(psi).reconstruct() - psi.amplitudes()).norm() <= 1e-8, "Schmidt reconstruction");

  const auto V = haar_isometry(5, 3, seed + 3);
  const auto dec = decomposition_from_isometry(mixed, V);
  expect((dec.reconstruct() - mixed.matrix()).cwiseAbs().maxCoeff() <= 1e-7,
         "ensemble reconstruction");

  RoofOptions opts;
  opts.restarts = 2;
  opts.iterations = 50;
  opts.seed = seed;
  const auto pure = roof_entanglement(psi_rho, linear_entropy_measure(), opts);
  expect(std::abs(pure.value - linear_entropy(psi)) <= 1e-8, "roof of a pure state");

  if (failed.empty()) return {true, "all identities hold"};
  std::string detail = "failed:";
  for (const auto& f : failed) detail += " " + f + ";";
  return {false, detail};
}

}  // namespace

std::vector<CheckResult> run_suite(const SuiteOptions& options,
                                   const std::function<void(const CheckResult&)>& on_result) {
  const bool quick = options.quick;
  const Index res = quick ? 32 : 64;
  const int per_example = quick ? 10 : 100;
  std::vector<CheckResult> results;
  std::vector<examples::Example> convex;

  auto run = [&](std::string name, const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    CheckResult r{.name = std::move(name), .passed = false, .detail = {}, .seconds = 0.0};
    try {
      const auto out = body();
      r.passed = out.passed;
      r.detail = out.detail;
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  };

  run("examples build", [&] {
    convex = convex_examples(res, options.seed);
    return Outcome{!convex.empty(), fmt("%.0f convex examples at N = %.0f",
                                        static_cast<double>(convex.size()),
                                        static_cast<double>(res))};
  });
  auto rng = rng_for(options.seed, 1);
  run("restriction identity", [&] { return restriction(convex, per_example, rng); });
  run("bounds and support", [&] { return bounds_and_support(convex, per_example, rng); });
  run("midpoint convexity", [&] { return midpoint_convexity(convex, per_example / 2, rng); });
  run("caratheodory bound", [&] { return caratheodory(quick ? 50 : 1000, rng); });
  run("lp vs enumeration", [&] {
    return quick ? lp_against_enumeration(50, 3, 7, rng) : lp_against_enumeration(200, 4, 10, rng);
  });
  run("tomato_can values", [&] { return punctured("tomato_can", quick ? 64 : 200); });
  run("punctured_no_extension values",
      [&] { return punctured("punctured_no_extension", quick ? 64 : 200); });
  run("combined_4d slice", [&] { return combined_slice(quick ? 32 : 96); });
  run("nonclosed_extreme witness", [&] { return nonclosed_witness(res); });
  run("potato_chip oracle", [&] {
    return oracle_points("potato_chip", quick ? 256 : 1024,
                         {Point{0.5, 0.5}, Point{0.0, 0.5}, Point{-0.3, 0.8}}, 1e-2);
  });
  run("no_c2 oracle", [&] {
    return oracle_points("no_c2", quick ? 256 : 512,
                         {Point{-0.75, 0.0}, Point{-0.5, 0.0}, Point{-0.25, 0.0},
                          Point{0.25, 0.0}, Point{0.5, 0.0}, Point{0.75, 0.0}},
                         5e-3);
  });
  run("quantum identities", [&] { return quantum_identities(options.seed); });
  return results;
}

}  // namespace convroof::verify
