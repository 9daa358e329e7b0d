#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace convroof::lp {

/// minimize c'x  subject to  A x = b,  x >= 0.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd constraints;
  Eigen::VectorXd rhs;
};

enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status status);

struct Solution {
  Status status = Status::Infeasible;
  Eigen::VectorXd primal;            // size n, >= 0
  double objective = 0.0;
  std::vector<Eigen::Index> basis;   // structural columns in the final basis
  Eigen::VectorXd dual;              // size m, A'y <= c at optimality
  double phase_one_residual = 0.0;   // scaled infeasibility left after phase 1
  Eigen::Index iterations = 0;
};

struct Options {
  /// Infeasible iff the phase-1 optimum (in row-scaled units) exceeds this.
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-11;
  /// Default cap is 50 * (m + n).
  std::optional<Eigen::Index> max_iterations;
};

/// Dense-tableau two-phase primal simplex.
///
/// Rows are scaled by their max-abs entry and sign-normalized so that b >= 0;
/// phase 1 starts from an all-artificial basis. Pricing is Dantzig, switching
/// to Bland's rule after 3m consecutive degenerate pivots until a pivot makes
/// progress. The reported primal and dual vectors are recomputed from a fresh
/// factorization of the final basis rather than read off the tableau.
///
/// One solve at a time per instance; the tableau of the last solve is kept for
/// `dump_tableau`.
class SimplexSolver {
 public:
  explicit SimplexSolver(Options options = {});

  Solution solve(const LinearProgram& lp);
  Solution solve(const Eigen::Ref<const Eigen::MatrixXd>& A,
                 const Eigen::Ref<const Eigen::VectorXd>& b,
                 const Eigen::Ref<const Eigen::VectorXd>& c);

  std::string dump_tableau() const;

 private:
  using Tableau =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  void pivot(Eigen::Index row, Eigen::Index col);
  // Runs the simplex loop on the current objective row. Returns false when
  // the problem is unbounded. `allowed` bounds the entering columns.
  bool iterate(Eigen::Index allowed, Eigen::Index cap);

  Options options_;
  Tableau tableau_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index rows_ = 0;
  Eigen::Index structural_ = 0;
  Eigen::Index iterations_ = 0;
};

}  // namespace convroof::lp
