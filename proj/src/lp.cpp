#include "convroof/lp.hpp"

#include "convroof/errors.hpp"

#include <cmath>
#include <sstream>

namespace convroof::lp {

using Eigen::Index;

const char* to_string(Status status) {
  switch (status) {
    case Status::Optimal:
      return "optimal";
    case Status::Infeasible:
      return "infeasible";
    case Status::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

SimplexSolver::SimplexSolver(Options options) : options_(options) {}

Solution SimplexSolver::solve(const LinearProgram& lp) {
  return solve(lp.constraints, lp.rhs, lp.objective);
}

void SimplexSolver::pivot(Index row, Index col) {
  const double p = tableau_(row, col);
  tableau_.row(row) /= p;
  tableau_(row, col) = 1.0;
  for (Index i = 0; i < tableau_.rows(); ++i) {
    if (i == row) continue;
    const double factor = tableau_(i, col);
    if (factor == 0.0) continue;
    tableau_.row(i) -= factor * tableau_.row(row);
    tableau_(i, col) = 0.0;
  }
  basis_[static_cast<std::size_t>(row)] = col;
}

bool SimplexSolver::iterate(Index allowed, Index cap) {
  const Index rhs = tableau_.cols() - 1;
  const Index objective_row = rows_;
  double cost_scale = 0.0;
  for (Index j = 0; j < allowed; ++j) {
    cost_scale = std::max(cost_scale, std::abs(tableau_(objective_row, j)));
  }
  const double cost_tol = options_.optimality_tol * std::max(1.0, cost_scale);
  Index degenerate_streak = 0;

  for (;;) {
    if (iterations_ >= cap) {
      throw NonterminationError("simplex exceeded iteration cap of " +
                                std::to_string(cap));
    }
    const bool bland = degenerate_streak >= 3 * std::max<Index>(rows_, 1);

    Index entering = -1;
    double best_cost = -cost_tol;
    for (Index j = 0; j < allowed; ++j) {
      const double r = tableau_(objective_row, j);
      if (r < best_cost) {
        entering = j;
        if (bland) break;
        best_cost = r;
      }
    }
    if (entering < 0) return true;

    Index leaving = -1;
    double best_ratio = 0.0;
    for (Index i = 0; i < rows_; ++i) {
      const double a = tableau_(i, entering);
      if (a <= options_.pivot_tol) continue;
      const double ratio = std::max(0.0, tableau_(i, rhs)) / a;
      if (leaving < 0) {
        leaving = i;
        best_ratio = ratio;
        continue;
      }
      const double slack = 1e-12 * (1.0 + best_ratio);
      if (ratio < best_ratio - slack) {
        leaving = i;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + slack) {
        const auto ui = static_cast<std::size_t>(i);
        const auto ul = static_cast<std::size_t>(leaving);
        const bool prefer = bland ? basis_[ui] < basis_[ul]
                                  : a > tableau_(leaving, entering);
        if (prefer) {
          leaving = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
    }
    if (leaving < 0) return false;

    degenerate_streak = best_ratio <= 1e-12 ? degenerate_streak + 1 : 0;
    pivot(leaving, entering);
    ++iterations_;
  }
}

Solution SimplexSolver::solve(const Eigen::Ref<const Eigen::MatrixXd>& A,
                              const Eigen::Ref<const Eigen::VectorXd>& b,
                              const Eigen::Ref<const Eigen::VectorXd>& c) {
  const Index m = A.rows();
  const Index n = A.cols();
  if (b.size() != m || c.size() != n) {
    throw DimensionError("linear program: inconsistent dimensions");
  }
  if (!A.allFinite() || !b.allFinite() || !c.allFinite()) {
    throw DimensionError("linear program: non-finite entries");
  }

  Solution out;
  out.primal = Eigen::VectorXd::Zero(n);
  out.dual = Eigen::VectorXd::Zero(m);

  // Row scaling by max-abs, sign chosen so the scaled rhs is nonnegative.
  std::vector<Index> active;
  std::vector<double> scale;
  for (Index i = 0; i < m; ++i) {
    const double s = n > 0 ? A.row(i).cwiseAbs().maxCoeff() : 0.0;
    if (s == 0.0) {
      if (std::abs(b(i)) > options_.feasibility_tol) {
        out.status = Status::Infeasible;
        out.phase_one_residual = std::abs(b(i));
        return out;
      }
      continue;
    }
    active.push_back(i);
    scale.push_back((b(i) < 0.0 ? -1.0 : 1.0) / s);
  }

  rows_ = static_cast<Index>(active.size());
  structural_ = n;
  iterations_ = 0;
  const Index cols = n + rows_ + 1;
  const Index rhs = cols - 1;
  tableau_ = Tableau::Zero(rows_ + 1, cols);
  basis_.assign(static_cast<std::size_t>(rows_), 0);
  for (Index r = 0; r < rows_; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    const Index i = active[ur];
    tableau_.row(r).head(n) = scale[ur] * A.row(i);
    tableau_(r, n + r) = 1.0;
    tableau_(r, rhs) = scale[ur] * b(i);
    basis_[ur] = n + r;
  }

  const Index cap = options_.max_iterations.value_or(50 * (m + n));

  // Phase 1: minimize the sum of artificials.
  tableau_.row(rows_).setZero();
  for (Index r = 0; r < rows_; ++r) {
    tableau_.row(rows_).head(n) -= tableau_.row(r).head(n);
    tableau_(rows_, rhs) -= tableau_(r, rhs);
  }
  iterate(n, cap);
  out.phase_one_residual = std::max(0.0, -tableau_(rows_, rhs));
  if (out.phase_one_residual > options_.feasibility_tol) {
    out.status = Status::Infeasible;
    out.iterations = iterations_;
    return out;
  }

  // Drive artificials out of the basis; rows with no usable pivot are redundant.
  for (Index r = 0; r < rows_; ++r) {
    if (basis_[static_cast<std::size_t>(r)] < n) continue;
    Index best = -1;
    double best_abs = 1e-9;
    for (Index j = 0; j < n; ++j) {
      const double a = std::abs(tableau_(r, j));
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best >= 0) pivot(r, best);
  }

  // Phase 2.
  tableau_.row(rows_).setZero();
  tableau_.row(rows_).head(n) = c.transpose();
  for (Index r = 0; r < rows_; ++r) {
    const Index k = basis_[static_cast<std::size_t>(r)];
    const double cb = k < n ? c(k) : 0.0;
    if (cb != 0.0) tableau_.row(rows_) -= cb * tableau_.row(r);
  }
  const bool bounded = iterate(n, cap);
  out.iterations = iterations_;
  if (!bounded) {
    out.status = Status::Unbounded;
    return out;
  }

  // Recover primal and dual from the basis matrix of the original data.
  for (Index k : basis_) {
    if (k < n) out.basis.push_back(k);
  }
  const auto kb = static_cast<Index>(out.basis.size());
  Eigen::MatrixXd B(m, kb);
  Eigen::VectorXd cb(kb);
  for (Index j = 0; j < kb; ++j) {
    B.col(j) = A.col(out.basis[static_cast<std::size_t>(j)]);
    cb(j) = c(out.basis[static_cast<std::size_t>(j)]);
  }
  if (kb > 0) {
    // A rhs accepted within the feasibility tolerance but off the cone of an
    // ill-conditioned basis yields large negative weights; drop those columns
    // and refit the rest in least squares instead of clamping.
    std::vector<Index> keep(static_cast<std::size_t>(kb));
    for (Index j = 0; j < kb; ++j) keep[static_cast<std::size_t>(j)] = j;
    Eigen::VectorXd xb;
    while (true) {
      Eigen::MatrixXd Bk(m, static_cast<Index>(keep.size()));
      for (std::size_t j = 0; j < keep.size(); ++j) Bk.col(static_cast<Index>(j)) = B.col(keep[j]);
      xb = Bk.colPivHouseholderQr().solve(b);
      Index worst = -1;
      double most_negative = -1e-12;
      for (Index j = 0; j < xb.size(); ++j) {
        if (xb(j) < most_negative) {
          most_negative = xb(j);
          worst = j;
        }
      }
      if (worst < 0 || keep.size() == 1) break;
      keep.erase(keep.begin() + worst);
    }
    for (std::size_t j = 0; j < keep.size(); ++j) {
      out.primal(out.basis[static_cast<std::size_t>(keep[j])]) =
          std::max(0.0, xb(static_cast<Index>(j)));
    }
    out.dual = B.transpose().completeOrthogonalDecomposition().solve(cb);
  }
  out.objective = c.dot(out.primal);
  out.status = Status::Optimal;
  return out;
}

std::string SimplexSolver::dump_tableau() const {
  std::ostringstream os;
  os << "simplex tableau: " << rows_ << " rows, " << structural_
     << " structural columns, " << iterations_ << " pivots\n";
  os << "basis:";
  for (Index k : basis_) os << ' ' << k;
  os << '\n';
  const Eigen::IOFormat fmt(6, 0, " ", "\n", "  [", "]");
  os << tableau_.format(fmt) << '\n';
  return os.str();
}

}  // namespace convroof::lp
