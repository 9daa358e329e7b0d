#include "convroof/quantum.hpp"

#include "convroof/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace convroof::quantum {

namespace {

constexpr double kRankTol = 1e-12;
constexpr double kPolishBelow = 1e-2;
constexpr int kStallWindow = 50;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Eigen::MatrixXcd gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::MatrixXcd g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = Complex(n(rng), n(rng)) / std::sqrt(2.0);
  return g;
}

// Thin Q of a Householder QR with diag(R) made real positive.
Eigen::MatrixXcd orthonormal_factor(const Eigen::MatrixXcd& x) {
  const auto rows = x.rows();
  const auto cols = x.cols();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(x);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, cols);
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

Vector2c random_qubit(std::mt19937_64& rng) {
  const Eigen::MatrixXcd g = gaussian(2, 1, rng);
  return Vector2c(g.col(0)).normalized();
}

Vector4c kron(const Vector2c& a, const Vector2c& b) {
  Vector4c out;
  out << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
  return out;
}

Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Objective over isometries: the weighted measure of each ensemble member.
class EnsembleObjective {
 public:
  EnsembleObjective(const DensityMatrix& rho, const EntanglementMeasure& measure,
                    bool squared = false)
      : measure_(measure), squared_(squared) {
    const auto& eig = rho.spectrum();
    const int r = rho.rank();
    w_.resize(4, r);
    for (int j = 0; j < r; ++j) w_.col(j) = std::sqrt(eig.values(j)) * eig.vectors.col(j);
  }

  double term(const Eigen::RowVectorXcd& row) const {
    const Vector4c psi = w_ * row.transpose();
    const double weight = psi.squaredNorm();
    if (weight <= std::numeric_limits<double>::min()) return 0.0;
    const double t = weight * measure_.evaluate(PureState::normalized(psi));
    return squared_ ? t * t : t;
  }

  double value(const Eigen::MatrixXcd& v) const {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < v.rows(); ++k) sum += term(v.row(k));
    return sum;
  }

  // Hessian of one member's term in the real coordinates (re, im) of its row.
  Eigen::MatrixXd row_hessian(const Eigen::RowVectorXcd& row, double h) const {
    const Eigen::Index n = 2 * row.size();
    auto at = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
      Eigen::RowVectorXcd x = row;
      x(i / 2) += (i % 2 == 0 ? Complex(si * h) : Complex(0.0, si * h));
      x(j / 2) += (j % 2 == 0 ? Complex(sj * h) : Complex(0.0, sj * h));
      return term(x);
    };
    const double f0 = term(row);
    Eigen::MatrixXd hess(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      hess(i, i) = (at(i, 2.0, i, 0.0) - 2.0 * f0 + at(i, -2.0, i, 0.0)) / (4.0 * h * h);
      for (Eigen::Index j = i + 1; j < n; ++j) {
        hess(i, j) = hess(j, i) =
            (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) / (4.0 * h * h);
      }
    }
    return hess;
  }

  // Central differences; each entry only moves its own member.
  Eigen::MatrixXcd gradient(const Eigen::MatrixXcd& v, double h) const {
    Eigen::MatrixXcd g(v.rows(), v.cols());
    for (Eigen::Index k = 0; k < v.rows(); ++k) {
      Eigen::RowVectorXcd row = v.row(k);
      for (Eigen::Index j = 0; j < v.cols(); ++j) {
        const Complex orig = row(j);
        row(j) = orig + h;
        const double pr = term(row);
        row(j) = orig - h;
        const double mr = term(row);
        row(j) = orig + Complex(0.0, h);
        const double pi = term(row);
        row(j) = orig - Complex(0.0, h);
        const double mi = term(row);
        row(j) = orig;
        g(k, j) = Complex((pr - mr) / (2.0 * h), (pi - mi) / (2.0 * h));
      }
    }
    return g;
  }

 private:
  const EntanglementMeasure& measure_;
  bool squared_;
  Eigen::MatrixXcd w_;
};

struct Descent {
  double value = 0.0;
  Eigen::MatrixXcd v;
  bool converged = false;
};

Eigen::MatrixXcd tangent(const Eigen::MatrixXcd& v, const Eigen::MatrixXcd& x) {
  const Eigen::MatrixXcd vx = v.adjoint() * x;
  return x - v * (0.5 * (vx + vx.adjoint()));
}

double inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a.adjoint() * b).trace().real();
}

// Riemannian Polak-Ribiere+ conjugate gradient with Armijo backtracking and
// QR retraction.
Descent descend(const EnsembleObjective& f, Eigen::MatrixXcd v, const RoofOptions& options) {
  Descent out;
  double fv = f.value(v);
  double alpha = 1.0;
  Eigen::MatrixXcd grad = tangent(v, f.gradient(v, options.fd_step));
  Eigen::MatrixXcd dir = -grad;
  double mark = fv;
  for (int it = 0; it < options.iterations; ++it) {
    if (it > 0 && it % kStallWindow == 0) {
      if (fv > (1.0 - 1e-9) * mark) {
        out.converged = true;
        break;
      }
      mark = fv;
    }
    const double gnorm2 = grad.squaredNorm();
    if (fv <= 1e-15 || std::sqrt(gnorm2) < options.gradient_tol) {
      out.converged = true;
      break;
    }
    double slope = inner(grad, dir);
    bool steepest = false;
    if (!(slope < 0.0)) {
      dir = -grad;
      slope = -gnorm2;
      steepest = true;
    }
    // Start from twice the last accepted step, capped by the Polyak step
    // toward the lower bound 0 and by a unit move.
    const double cap = std::min(fv / -slope, 1.0 / dir.norm());
    alpha = std::min(2.0 * alpha, cap);
    bool accepted = false;
    while (alpha > 1e-20) {
      Eigen::MatrixXcd trial = orthonormal_factor(v + alpha * dir);
      const double ft = f.value(trial);
      if (ft <= fv + 1e-4 * alpha * slope) {
        v = std::move(trial);
        fv = ft;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (steepest) {
        out.converged = true;
        break;
      }
      dir = -grad;
      alpha = cap;
      continue;
    }
    Eigen::MatrixXcd next = tangent(v, f.gradient(v, options.fd_step));
    const Eigen::MatrixXcd moved = tangent(v, grad);
    const double beta = std::max(0.0, inner(next, next - moved) / gnorm2);
    dir = -next + beta * tangent(v, dir);
    grad = std::move(next);
  }
  out.value = fv;
  out.v = std::move(v);
  return out;
}


// Levenberg-Marquardt on a nonnegative objective whose terms each depend on
// one row of V. The Riemannian Hessian on the Stiefel manifold is assembled
// from the per-row Euclidean blocks; the normal space gets the identity.
Descent polish(const EnsembleObjective& f, Eigen::MatrixXcd v, const RoofOptions& options) {
  const Eigen::Index m = v.rows();
  const Eigen::Index r = v.cols();
  const Eigen::Index n = 2 * m * r;
  auto vec = [&](const Eigen::MatrixXcd& x) {
    Eigen::VectorXd z(n);
    for (Eigen::Index k = 0; k < m; ++k)
      for (Eigen::Index j = 0; j < r; ++j) {
        z(2 * (k * r + j)) = x(k, j).real();
        z(2 * (k * r + j) + 1) = x(k, j).imag();
      }
    return z;
  };
  auto unvec = [&](const Eigen::VectorXd& z) {
    Eigen::MatrixXcd x(m, r);
    for (Eigen::Index k = 0; k < m; ++k)
      for (Eigen::Index j = 0; j < r; ++j)
        x(k, j) = Complex(z(2 * (k * r + j)), z(2 * (k * r + j) + 1));
    return x;
  };

  Descent out;
  double fv = f.value(v);
  double mu = -1.0;
  for (int it = 0; it < options.polish_iterations && fv > 1e-30; ++it) {
    const Eigen::MatrixXcd g = f.gradient(v, options.fd_step);
    const Eigen::VectorXd grad = vec(tangent(v, g));
    const Eigen::MatrixXcd vg = v.adjoint() * g;
    const Eigen::MatrixXcd sym = 0.5 * (vg + vg.adjoint());
    std::vector<Eigen::MatrixXd> blocks;
    for (Eigen::Index k = 0; k < m; ++k) blocks.push_back(f.row_hessian(v.row(k), 1e-4));

    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(i) = 1.0;
      const Eigen::MatrixXcd unit = unvec(e);
      const Eigen::MatrixXcd xi = tangent(v, unit);
      const Eigen::VectorXd xz = vec(xi);
      Eigen::VectorXd hz(n);
      for (Eigen::Index k = 0; k < m; ++k) {
        hz.segment(2 * k * r, 2 * r) = blocks[static_cast<std::size_t>(k)] * xz.segment(2 * k * r, 2 * r);
      }
      const Eigen::MatrixXcd eta = tangent(v, unvec(hz) - xi * sym) + (unit - xi);
      a.col(i) = vec(eta);
    }
    a = 0.5 * (a + a.transpose());
    if (mu < 0.0) mu = 1e-3 * std::max(1e-12, a.diagonal().cwiseAbs().maxCoeff());

    bool accepted = false;
    while (mu < 1e12) {
      Eigen::MatrixXd shifted = a;
      shifted.diagonal().array() += mu;
      Eigen::LLT<Eigen::MatrixXd> llt(shifted);
      if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd z = llt.solve(-grad);
        Eigen::MatrixXcd trial = orthonormal_factor(v + tangent(v, unvec(z)));
        const double ft = f.value(trial);
        if (ft < fv) {
          v = std::move(trial);
          fv = ft;
          mu = std::max(mu / 3.0, 1e-15);
          accepted = true;
          break;
        }
      }
      mu *= 10.0;
    }
    if (!accepted) break;
  }
  out.value = fv;
  out.v = std::move(v);
  out.converged = true;
  return out;
}

}  // namespace

PureState::PureState(const Vector4c& amplitudes) : amps_(amplitudes) {
  if (!amps_.allFinite()) throw InvalidStateError("state amplitudes must be finite");
  if (std::abs(amps_.norm() - 1.0) > 1e-10) {
    throw InvalidStateError("state is not normalized");
  }
}

PureState PureState::normalized(const Vector4c& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw InvalidStateError("cannot normalize the zero vector");
  return PureState(v / n);
}

Matrix2c PureState::coefficient_matrix() const {
  Matrix2c m;
  m << amps_(0), amps_(1), amps_(2), amps_(3);
  return m;
}

Vector4c SchmidtData::reconstruct() const {
  Vector4c out = Vector4c::Zero();
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    out += std::sqrt(lambdas[k]) * kron(left[k], right[k]);
  }
  return out;
}

std::array<double, 2> schmidt_coefficients(const PureState& psi) {
  const Matrix2c m = psi.coefficient_matrix();
  const double tr = m.squaredNorm();
  const double det = std::norm(m.determinant());
  const double l1 = 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  const double l2 = l1 > 0.0 ? det / l1 : 0.0;
  return {l1, l2};
}

SchmidtData schmidt(const PureState& psi) {
  const Matrix2c m = psi.coefficient_matrix();
  const auto eig = jacobi_eigen<2>(Matrix2c(m.adjoint() * m));
  const auto coeffs = schmidt_coefficients(psi);
  SchmidtData out;
  for (int k = 0; k < 2; ++k) {
    const double lambda = coeffs[static_cast<std::size_t>(k)];
    if (lambda <= kRankTol) continue;
    const Vector2c w = eig.vectors.col(k);
    out.lambdas.push_back(lambda);
    out.left.push_back(m * w / std::sqrt(lambda));
    out.right.push_back(w.conjugate());
  }
  return out;
}

double linear_entropy(const PureState& psi) {
  // (sum l)^2 - sum l^2 = 2 l1 l2, without the cancellation.
  const auto l = schmidt_coefficients(psi);
  return std::sqrt(std::max(0.0, 2.0 * l[0] * l[1]));
}

double von_neumann_entanglement(const PureState& psi) {
  double s = 0.0;
  for (double l : schmidt_coefficients(psi)) {
    if (l > 0.0) s -= l * std::log2(l);
  }
  return std::max(0.0, s);
}

double pure_concurrence(const PureState& psi) {
  const auto& a = psi.amplitudes();
  return 2.0 * std::abs(a(0) * a(3) - a(1) * a(2));
}

double binary_entropy(double p) {
  p = std::clamp(p, 0.0, 1.0);
  double s = 0.0;
  if (p > 0.0) s -= p * std::log2(p);
  if (p < 1.0) s -= (1.0 - p) * std::log2(1.0 - p);
  return s;
}

DensityMatrix::DensityMatrix(const Matrix4c& rho) {
  if (!rho.allFinite()) throw InvalidStateError("density matrix entries must be finite");
  if (max_abs(rho - rho.adjoint()) > 1e-10) {
    throw InvalidStateError("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - Complex(1.0)) > 1e-10) {
    throw InvalidStateError("density matrix trace is not 1");
  }
  rho_ = 0.5 * (rho + rho.adjoint());
  eig_ = jacobi_eigen<4>(rho_);
  if (eig_.values(3) < -1e-9) {
    throw InvalidStateError("density matrix has a negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

int DensityMatrix::rank() const noexcept {
  int r = 0;
  for (int k = 0; k < 4; ++k) r += eig_.values(k) > kRankTol ? 1 : 0;
  return r;
}

Matrix4c PureDecomposition::reconstruct() const {
  Matrix4c out = Matrix4c::Zero();
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& a = states[k].amplitudes();
    out += probabilities[k] * (a * a.adjoint());
  }
  return out;
}

EntanglementMeasure linear_entropy_measure() {
  return {"linear_entropy", [](const PureState& psi) { return linear_entropy(psi); }};
}

EntanglementMeasure von_neumann_measure() {
  return {"von_neumann", [](const PureState& psi) { return von_neumann_entanglement(psi); }};
}

EntanglementMeasure measure_by_name(const std::string& name) {
  if (name == "linear_entropy") return linear_entropy_measure();
  if (name == "von_neumann") return von_neumann_measure();
  throw std::invalid_argument("unknown measure '" + name +
                              "' (expected linear_entropy or von_neumann)");
}

double concurrence_wootters(const DensityMatrix& rho) {
  Matrix4c yy = Matrix4c::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Matrix4c tilde = yy * rho.matrix().conjugate() * yy;
  const auto& eig = rho.spectrum();
  Eigen::Matrix<double, 4, 1> roots;
  for (int k = 0; k < 4; ++k) roots(k) = std::sqrt(std::max(0.0, eig.values(k)));
  const Matrix4c sqrt_rho = eig.vectors * roots.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  const auto r = jacobi_eigen<4>(Matrix4c(sqrt_rho * tilde * sqrt_rho));
  std::array<double, 4> mu{};
  for (int k = 0; k < 4; ++k) mu[static_cast<std::size_t>(k)] = std::sqrt(std::max(0.0, r.values(k)));
  return std::max(0.0, mu[0] - mu[1] - mu[2] - mu[3]);
}

double entanglement_of_formation(const DensityMatrix& rho) {
  const double c = std::clamp(concurrence_wootters(rho), 0.0, 1.0);
  return binary_entropy(0.5 * (1.0 + std::sqrt(1.0 - c * c)));
}

PureDecomposition decomposition_from_isometry(const DensityMatrix& rho,
                                              const Eigen::MatrixXcd& V) {
  const int r = rho.rank();
  if (V.cols() != r || V.rows() < r) {
    throw DimensionError("isometry must be m x " + std::to_string(r) + " with m >= " +
                         std::to_string(r));
  }
  const Eigen::MatrixXcd gram = V.adjoint() * V;
  if (max_abs(gram - Eigen::MatrixXcd::Identity(r, r)) > 1e-8) {
    throw InvalidStateError("isometry columns are not orthonormal");
  }
  const auto& eig = rho.spectrum();
  PureDecomposition out;
  for (Eigen::Index k = 0; k < V.rows(); ++k) {
    Vector4c psi = Vector4c::Zero();
    for (int j = 0; j < r; ++j) psi += V(k, j) * std::sqrt(eig.values(j)) * eig.vectors.col(j);
    const double p = psi.squaredNorm();
    if (p <= std::numeric_limits<double>::min()) continue;
    out.probabilities.push_back(p);
    out.states.push_back(PureState::normalized(psi));
  }
  return out;
}

RoofResult roof_entanglement(const DensityMatrix& rho, const EntanglementMeasure& measure,
                             const RoofOptions& options) {
  const int r = rho.rank();
  const int m = options.ensemble_size > 0 ? options.ensemble_size : std::min(2 * r, 8);
  if (m < r) {
    throw DimensionError("ensemble size " + std::to_string(m) + " is below the rank " +
                         std::to_string(r));
  }
  if (options.restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  if (!(options.fd_step > 0.0)) throw std::invalid_argument("fd_step must be positive");

  const EnsembleObjective f(rho, measure);
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(m, r);

  std::vector<Descent> runs(static_cast<std::size_t>(options.restarts));
  const EnsembleObjective f_squared(rho, measure, true);
  auto run = [&](int i) {
    Descent d = descend(f, haar_isometry(m, r, options.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1))),
                        options);
    // Near zero the measure has a kink; its square has the same zeros and is
    // smooth there.
    if (d.value > 1e-15 && d.value < kPolishBelow) {
      Descent p = polish(f_squared, d.v, options);
      const double fv = f.value(p.v);
      if (fv < d.value) {
        d.value = fv;
        d.v = std::move(p.v);
      }
    }
    runs[static_cast<std::size_t>(i)] = std::move(d);
  };
  const int jobs = std::clamp(options.jobs, 1, options.restarts);
  if (jobs == 1) {
    for (int i = 0; i < options.restarts; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&, t] {
        for (int i = t; i < options.restarts; i += jobs) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  RoofResult out;
  out.ensemble_size = m;
  out.eigen_ensemble_value = f.value(eye);
  out.value = out.eigen_ensemble_value;
  Eigen::MatrixXcd best = eye;
  for (int i = 0; i < options.restarts; ++i) {
    const auto& d = runs[static_cast<std::size_t>(i)];
    out.converged = out.converged || d.converged;
    if (d.value < out.value) {
      out.value = d.value;
      out.best_restart = i;
      best = d.v;
    }
  }
  out.decomposition = decomposition_from_isometry(rho, best);
  return out;
}

PureState bell_state() {
  Vector4c a = Vector4c::Zero();
  a(0) = a(3) = 1.0 / std::sqrt(2.0);
  return PureState(a);
}

DensityMatrix werner_state(double p) {
  if (!(p >= -1.0 / 3.0 && p <= 1.0)) {
    throw InvalidStateError("Werner parameter must lie in [-1/3, 1]");
  }
  const Vector4c phi = bell_state().amplitudes();
  return DensityMatrix(p * (phi * phi.adjoint()) + (1.0 - p) / 4.0 * Matrix4c::Identity());
}

DensityMatrix random_state(std::uint64_t seed, int rank) {
  if (rank < 1 || rank > 4) throw std::invalid_argument("rank must be in 1..4");
  auto rng = stream(seed, 0);
  std::exponential_distribution<double> e;
  Matrix4c rho = Matrix4c::Zero();
  std::vector<double> w(static_cast<std::size_t>(rank));
  double total = 0.0;
  for (double& x : w) total += (x = e(rng));
  for (int k = 0; k < rank; ++k) {
    const Vector4c psi = Vector4c(gaussian(4, 1, rng).col(0)).normalized();
    rho += (w[static_cast<std::size_t>(k)] / total) * (psi * psi.adjoint());
  }
  return DensityMatrix(rho);
}

DensityMatrix random_separable_state(std::uint64_t seed, int members) {
  if (members < 1) throw std::invalid_argument("members must be positive");
  auto rng = stream(seed, 1);
  std::exponential_distribution<double> e;
  std::vector<double> w(static_cast<std::size_t>(members));
  double total = 0.0;
  for (double& x : w) total += (x = e(rng));
  Matrix4c rho = Matrix4c::Zero();
  for (int k = 0; k < members; ++k) {
    const Vector4c psi = kron(random_qubit(rng), random_qubit(rng));
    rho += (w[static_cast<std::size_t>(k)] / total) * (psi * psi.adjoint());
  }
  return DensityMatrix(rho);
}

Matrix4c random_local_unitary(std::uint64_t seed) {
  auto rng = stream(seed, 2);
  const Matrix2c u1 = orthonormal_factor(gaussian(2, 2, rng));
  const Matrix2c u2 = orthonormal_factor(gaussian(2, 2, rng));
  return kron(u1, u2);
}

Eigen::MatrixXcd haar_isometry(int rows, int cols, std::uint64_t seed) {
  if (cols < 1 || rows < cols) throw std::invalid_argument("isometry needs rows >= cols >= 1");
  auto rng = stream(seed, 3);
  return orthonormal_factor(gaussian(rows, cols, rng));
}

}  // namespace convroof::quantum
