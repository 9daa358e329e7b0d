#include "convroof/errors.hpp"
#include "convroof/jacobi.hpp"
#include "convroof/quantum.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

using namespace convroof;
using namespace convroof::quantum;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

Vector4c random_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector4c v;
  for (int i = 0; i < 4; ++i) v(i) = Complex(g(rng), g(rng));
  return v.normalized();
}

Matrix4c random_hermitian(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix4c a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = Complex(g(rng), g(rng));
  return a + a.adjoint();
}

// rho_A(i, k) = sum_j psi(ij) conj(psi(kj)), written out index by index.
Matrix2c partial_trace_b(const Vector4c& psi) {
  Matrix2c r = Matrix2c::Zero();
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j) r(i, k) += psi(2 * i + j) * std::conj(psi(2 * k + j));
  return r;
}

double werner_concurrence(double p) { return std::max(0.0, (3 * p - 1) / 2); }

}  // namespace

TEST_CASE("Jacobi eigensolver agrees with Eigen") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Matrix4c a = random_hermitian(rng);
    const auto eig = jacobi_eigen<4>(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(a);
    Eigen::Vector4d expected = ref.eigenvalues().reverse();
    CHECK((eig.values - expected).cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 0; k < 4; ++k) {
      CHECK((a * eig.vectors.col(k) - eig.values(k) * eig.vectors.col(k)).norm() < 1e-10);
    }
    CHECK((eig.vectors.adjoint() * eig.vectors - Matrix4c::Identity()).norm() < 1e-12);
    CHECK(std::is_sorted(eig.values.data(), eig.values.data() + 4, std::greater<>()));
  }
  const auto degenerate = jacobi_eigen<4>(Matrix4c::Identity());
  CHECK(degenerate.values.isApprox(Eigen::Vector4d::Ones()));
  Matrix2c pauli_y;
  pauli_y << 0, Complex(0, -1), Complex(0, 1), 0;
  const auto y = jacobi_eigen<2>(pauli_y);
  CHECK(y.values(0) == doctest::Approx(1.0));
  CHECK(y.values(1) == doctest::Approx(-1.0));
}

TEST_CASE("pure state validation") {
  CHECK_THROWS_AS(PureState(Vector4c(1, 1, 0, 0)), InvalidStateError);
  const auto psi = PureState::normalized(Vector4c(1, 1, 0, 0));
  CHECK(psi.amplitudes().norm() == doctest::Approx(1.0));
  CHECK_THROWS(PureState::normalized(Vector4c::Zero()));
}

TEST_CASE("Schmidt decomposition") {
  const PureState product(Vector4c(1, 0, 0, 0));
  const auto sp = schmidt(product);
  CHECK(sp.rank() == 1);
  CHECK(sp.lambdas[0] == doctest::Approx(1.0));

  const auto sb = schmidt(bell_state());
  REQUIRE(sb.rank() == 2);
  CHECK(sb.lambdas[0] == doctest::Approx(0.5));
  CHECK(sb.lambdas[1] == doctest::Approx(0.5));

  std::mt19937_64 rng(2);
  for (int t = 0; t < 30; ++t) {
    const PureState psi(random_vector(rng));
    const auto s = schmidt(psi);
    CHECK((s.reconstruct() - psi.amplitudes()).norm() <= 1e-8);
    double total = 0.0;
    for (double l : s.lambdas) total += l;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> red(partial_trace_b(psi.amplitudes()));
    const auto lam = schmidt_coefficients(psi);
    CHECK(lam[0] == doctest::Approx(red.eigenvalues()(1)).epsilon(1e-10));
    CHECK(lam[1] == doctest::Approx(red.eigenvalues()(0)).epsilon(1e-10));
    for (std::size_t k = 0; k < s.left.size(); ++k) {
      CHECK(s.left[k].norm() == doctest::Approx(1.0));
      CHECK(s.right[k].norm() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("pure-state measures") {
  const PureState product(Vector4c(0, 1, 0, 0));
  CHECK(linear_entropy(product) == doctest::Approx(0.0));
  CHECK(von_neumann_entanglement(product) == doctest::Approx(0.0));
  CHECK(pure_concurrence(product) == doctest::Approx(0.0));

  CHECK(linear_entropy(bell_state()) == doctest::Approx(kInvSqrt2).epsilon(1e-12));
  CHECK(von_neumann_entanglement(bell_state()) == doctest::Approx(1.0).epsilon(1e-12));

  const PureState skewed(Vector4c(std::sqrt(0.9), 0, 0, std::sqrt(0.1)));
  CHECK(von_neumann_entanglement(skewed) == doctest::Approx(h2(0.9)).epsilon(1e-12));
  CHECK(von_neumann_entanglement(skewed) == doctest::Approx(0.468996).epsilon(1e-6));
  CHECK(binary_entropy(0.9) == doctest::Approx(h2(0.9)));
  CHECK(binary_entropy(0.0) == 0.0);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    const Vector4c v = random_vector(rng);
    const PureState psi(v);
    const Matrix2c ra = partial_trace_b(v);
    const double purity = (ra * ra).trace().real();
    CHECK(linear_entropy(psi) == doctest::Approx(std::sqrt(1.0 - purity)).epsilon(1e-9));
    const auto lam = schmidt_coefficients(psi);
    CHECK(linear_entropy(psi) == doctest::Approx(std::sqrt(2 * lam[0] * lam[1])).epsilon(1e-12));
    CHECK(pure_concurrence(psi) == doctest::Approx(2 * std::abs(v(0) * v(3) - v(1) * v(2))));
    CHECK(pure_concurrence(psi) == doctest::Approx(std::sqrt(2.0) * linear_entropy(psi)).epsilon(1e-9));
  }
}

TEST_CASE("density matrix validation") {
  Matrix4c bad = Matrix4c::Identity() / 4.0;
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix{bad}, InvalidStateError);
  CHECK_THROWS_AS(DensityMatrix{Matrix4c::Identity()}, InvalidStateError);
  Matrix4c negative = Matrix4c::Zero();
  negative.diagonal() << 1.2, -0.2, 0, 0;
  CHECK_THROWS_AS(DensityMatrix{negative}, InvalidStateError);
  const DensityMatrix mixed(Matrix4c::Identity() / 4.0);
  CHECK(mixed.rank() == 4);
  CHECK(DensityMatrix::from_pure(bell_state()).rank() == 1);
}

TEST_CASE("Wootters concurrence") {
  const auto bell = DensityMatrix::from_pure(bell_state());
  CHECK(concurrence_wootters(bell) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(concurrence_wootters(DensityMatrix(Matrix4c::Identity() / 4.0)) <= 1e-12);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const PureState psi(random_vector(rng));
    const auto rho = DensityMatrix::from_pure(psi);
    const auto lam = schmidt_coefficients(psi);
    CHECK(concurrence_wootters(rho) == doctest::Approx(2 * std::sqrt(lam[0] * lam[1])).epsilon(1e-8));
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rho = random_state(seed, 4);
    const Matrix4c U = random_local_unitary(seed + 100);
    CHECK((U.adjoint() * U - Matrix4c::Identity()).norm() < 1e-12);
    const DensityMatrix rotated(U * rho.matrix() * U.adjoint());
    CHECK(std::abs(concurrence_wootters(rho) - concurrence_wootters(rotated)) <= 1e-8);
  }
  for (double p : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0}) {
    CHECK(concurrence_wootters(werner_state(p)) == doctest::Approx(werner_concurrence(p)).epsilon(1e-9));
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CHECK(concurrence_wootters(random_separable_state(seed, 4)) <= 1e-9);
  }
}

TEST_CASE("entanglement of formation") {
  CHECK(entanglement_of_formation(DensityMatrix::from_pure(bell_state())) == doctest::Approx(1.0));
  CHECK(entanglement_of_formation(DensityMatrix(Matrix4c::Identity() / 4.0)) == doctest::Approx(0.0));
  const double c = 0.7;
  const double expected = h2((1 + std::sqrt(1 - c * c)) / 2);
  CHECK(expected == doctest::Approx(0.591857).epsilon(1e-6));
  CHECK(entanglement_of_formation(werner_state(0.8)) == doctest::Approx(expected).epsilon(1e-9));
  std::mt19937_64 rng(5);
  const PureState psi(random_vector(rng));
  CHECK(entanglement_of_formation(DensityMatrix::from_pure(psi)) ==
        doctest::Approx(von_neumann_entanglement(psi)).epsilon(1e-8));
}

TEST_CASE("decompositions from isometries") {
  const auto rho = random_state(7, 3);
  SUBCASE("identity gives the eigen-ensemble") {
    const auto dec = decomposition_from_isometry(rho, Eigen::MatrixXcd::Identity(3, 3));
    REQUIRE(dec.size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(dec.probabilities[static_cast<std::size_t>(k)] == doctest::Approx(rho.spectrum().values(k)));
    CHECK((dec.reconstruct() - rho.matrix()).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("Haar isometries reconstruct the state") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto V = haar_isometry(6, 3, seed);
      CHECK((V.adjoint() * V - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-12);
      const auto dec = decomposition_from_isometry(rho, V);
      double total = 0.0;
      for (double p : dec.probabilities) total += p;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      CHECK((dec.reconstruct() - rho.matrix()).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }
  SUBCASE("rank one: every member is the pure state") {
    const PureState psi = bell_state();
    const auto pure = DensityMatrix::from_pure(psi);
    const auto dec = decomposition_from_isometry(pure, haar_isometry(4, 1, 3));
    for (const auto& s : dec.states) {
      CHECK(std::abs(s.amplitudes().dot(psi.amplitudes())) == doctest::Approx(1.0));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(decomposition_from_isometry(rho, Eigen::MatrixXcd::Identity(4, 2)), DimensionError);
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Identity(4, 3);
    V(0, 1) = 0.5;
    CHECK_THROWS_AS(decomposition_from_isometry(rho, V), InvalidStateError);
  }
}

TEST_CASE("measure registry") {
  CHECK(measure_by_name("linear_entropy").name == "linear_entropy");
  CHECK(measure_by_name("von_neumann").evaluate(bell_state()) == doctest::Approx(1.0));
  CHECK_THROWS_AS(measure_by_name("negativity"), std::invalid_argument);
}

TEST_CASE("convex roof of pure and separable states") {
  RoofOptions opts;
  opts.restarts = 4;
  std::mt19937_64 rng(6);
  const PureState psi(random_vector(rng));
  const auto pure = roof_entanglement(DensityMatrix::from_pure(psi), linear_entropy_measure(), opts);
  CHECK(pure.value == doctest::Approx(linear_entropy(psi)).epsilon(1e-9));

  Matrix4c diag = Matrix4c::Zero();
  diag(0, 0) = 0.5;
  diag(3, 3) = 0.5;
  const auto sep = roof_entanglement(DensityMatrix(diag), linear_entropy_measure(), opts);
  CHECK(sep.value <= 1e-6);

  const auto mix = roof_entanglement(random_separable_state(11, 3), linear_entropy_measure(), opts);
  CHECK(mix.value <= 1e-6);
  CHECK((mix.decomposition.reconstruct() - random_separable_state(11, 3).matrix()).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("convex roof of the linear entropy meets the Wootters oracle") {
  RoofOptions opts;
  opts.ensemble_size = 4;
  opts.restarts = 20;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto rho = random_state(seed, 2);
    opts.seed = seed;
    const auto res = roof_entanglement(rho, linear_entropy_measure(), opts);
    const double oracle = concurrence_wootters(rho) * kInvSqrt2;
    CHECK(res.value >= oracle - 1e-9);
    CHECK(res.value <= res.eigen_ensemble_value + 1e-15);
    CHECK(res.value - oracle <= 5e-3);
    CHECK(res.ensemble_size == 4);
    CHECK((res.decomposition.reconstruct() - rho.matrix()).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("roof results do not depend on the job count") {
  RoofOptions opts;
  opts.restarts = 6;
  opts.seed = 42;
  const auto rho = random_state(3, 3);
  opts.jobs = 1;
  const auto a = roof_entanglement(rho, linear_entropy_measure(), opts);
  opts.jobs = 3;
  const auto b = roof_entanglement(rho, linear_entropy_measure(), opts);
  CHECK(a.value == b.value);
  CHECK(a.best_restart == b.best_restart);
}

TEST_CASE("roof argument checks") {
  RoofOptions opts;
  opts.ensemble_size = 2;
  CHECK_THROWS_AS(roof_entanglement(random_state(1, 3), linear_entropy_measure(), opts), DimensionError);
}
