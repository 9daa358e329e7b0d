#pragma once

#include "convroof/jacobi.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace convroof::quantum {

using Complex = std::complex<double>;
using Vector2c = Eigen::Matrix<Complex, 2, 1>;
using Vector4c = Eigen::Matrix<Complex, 4, 1>;
using Matrix2c = CMatrix<2>;
using Matrix4c = CMatrix<4>;

/// Two-qubit pure state in the basis |00>, |01>, |10>, |11>.
class PureState {
 public:
  /// Throws InvalidStateError unless the norm is 1 within 1e-10.
  explicit PureState(const Vector4c& amplitudes);
  /// Scales a nonzero vector to unit norm.
  static PureState normalized(const Vector4c& v);

  const Vector4c& amplitudes() const noexcept { return amps_; }
  /// M(i, j) = <ij|psi>.
  Matrix2c coefficient_matrix() const;

 private:
  Vector4c amps_;
};

struct SchmidtData {
  std::vector<double> lambdas;  // descending, > 1e-12
  std::vector<Vector2c> left;
  std::vector<Vector2c> right;

  int rank() const noexcept { return static_cast<int>(lambdas.size()); }
  Vector4c reconstruct() const;
};

SchmidtData schmidt(const PureState& psi);

/// Both squared singular values of the coefficient matrix, descending, with no
/// rank cut.
std::array<double, 2> schmidt_coefficients(const PureState& psi);

double linear_entropy(const PureState& psi);
double von_neumann_entanglement(const PureState& psi);
/// 2|a00 a11 - a01 a10|
double pure_concurrence(const PureState& psi);
/// -p log2 p - (1-p) log2(1-p)
double binary_entropy(double p);

class DensityMatrix {
 public:
  /// Throws InvalidStateError unless Hermitian (1e-10), trace one (1e-10) and
  /// positive semidefinite (-1e-9).
  explicit DensityMatrix(const Matrix4c& rho);
  static DensityMatrix from_pure(const PureState& psi);

  const Matrix4c& matrix() const noexcept { return rho_; }
  /// Eigenvalues descending with matching eigenvector columns.
  const HermitianEigen<4>& spectrum() const noexcept { return eig_; }
  /// Number of eigenvalues above 1e-12.
  int rank() const noexcept;

 private:
  Matrix4c rho_;
  HermitianEigen<4> eig_;
};

struct PureDecomposition {
  std::vector<double> probabilities;
  std::vector<PureState> states;

  std::size_t size() const noexcept { return states.size(); }
  Matrix4c reconstruct() const;
};

/// Plug-in pure-state measure; evaluate must be >= 0 and vanish on product
/// states.
struct EntanglementMeasure {
  std::string name;
  std::function<double(const PureState&)> evaluate;
};

EntanglementMeasure linear_entropy_measure();
EntanglementMeasure von_neumann_measure();
/// linear_entropy or von_neumann; throws std::invalid_argument otherwise.
EntanglementMeasure measure_by_name(const std::string& name);

double concurrence_wootters(const DensityMatrix& rho);
double entanglement_of_formation(const DensityMatrix& rho);

/// psi_k ~ sum_j V_kj sqrt(mu_j) e_j over the eigenpairs of rho with
/// mu_j > 1e-12. V is m x rank with orthonormal columns (1e-8). Members with
/// zero weight are dropped.
PureDecomposition decomposition_from_isometry(const DensityMatrix& rho,
                                              const Eigen::MatrixXcd& V);

struct RoofOptions {
  /// 0 selects 2 * rank, capped at 8.
  int ensemble_size = 0;
  int restarts = 20;
  int iterations = 3000;
  /// Second-order steps once the value is near zero.
  int polish_iterations = 200;
  std::uint64_t seed = 0;
  int jobs = 1;
  double fd_step = 1e-5;
  double gradient_tol = 1e-10;
};

struct RoofResult {
  /// Upper bound on the convex roof of the measure at rho.
  double value = 0.0;
  PureDecomposition decomposition;
  /// Value of the eigen-ensemble (V = identity).
  double eigen_ensemble_value = 0.0;
  /// Restart that produced `value`; -1 for the eigen ensemble.
  int best_restart = -1;
  int ensemble_size = 0;
  bool converged = false;
};

/// Minimizes sum_k p_k measure(psi_k) over isometries V by Riemannian
/// conjugate gradient with QR retraction, best of `restarts` Haar starts and
/// the eigen ensemble.
RoofResult roof_entanglement(const DensityMatrix& rho, const EntanglementMeasure& measure,
                             const RoofOptions& options = {});

PureState bell_state();
/// p |Phi+><Phi+| + (1-p) I/4
DensityMatrix werner_state(double p);
/// Mixture of `rank` Haar-random pure states with random weights.
DensityMatrix random_state(std::uint64_t seed, int rank);
/// Mixture of `members` random product states.
DensityMatrix random_separable_state(std::uint64_t seed, int members);
/// U1 (x) U2 with Haar-random single-qubit unitaries.
Matrix4c random_local_unitary(std::uint64_t seed);
/// Haar-random m x r isometry from a Gaussian QR with phase fix.
Eigen::MatrixXcd haar_isometry(int rows, int cols, std::uint64_t seed);

}  // namespace convroof::quantum
