#ifndef IEVRP_MILP_HPP
#define IEVRP_MILP_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "ievrp/error.hpp"
#include <string>
#include <vector>

namespace ievrp {

enum class RowSense : char { LE = 'L', GE = 'G', EQ = 'E' };

struct LinearRow {
  std::vector<std::pair<int, double>> terms;  // (column, coefficient)
  RowSense sense = RowSense::LE;
  double rhs = 0.0;
  std::string name;
};

/// Minimization problem  min c'x  s.t. rows, lower <= x <= upper.
/// Integrality marks binary columns only (their bounds must lie in [0,1]).
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<std::uint8_t> is_binary;
  std::vector<LinearRow> rows;
  std::vector<std::string> column_names;
  std::string name = "model";
  /// Branching priority per column (empty means all equal). Binaries of the
  /// highest class present among fractional candidates are branched first;
  /// dives fix them to 0 (class > 0) or round the relaxation value (class 0).
  std::vector<int> branch_priority;

  int num_cols() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
  int add_column(const std::string& name, double lo, double hi, double obj,
                 bool binary = false);
  void add_row(LinearRow row);

  /// Row activity for a point, plus feasibility check helpers.
  double row_activity(const LinearRow& row, const Eigen::VectorXd& x) const;
  double max_violation(const Eigen::VectorXd& x) const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, GapLimit, TimeLimit };

std::string to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  double best_bound = 0.0;
  std::int64_t node_count = 0;
  std::int64_t simplex_iterations = 0;
  double elapsed_seconds = 0.0;
};

struct SolverParams {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double integrality_tol = 1e-6;
  double gap_tol = 1e-6;          // relative MILP gap
  double time_limit = 1e30;       // seconds
  int refactor_interval = 128;
  int bland_after_degenerate = 5000;
  static SolverParams from_key_values(const std::vector<std::pair<std::string, std::string>>& kv);
};

/// Bounded-variable primal simplex on the LP relaxation (integrality is
/// ignored). Deterministic: Dantzig pricing with lowest-index tie breaking,
/// Bland's rule after bland_after_degenerate degenerate pivots.
SolveResult solve_lp(const LinearProgram& lp, const SolverParams& params = {});

/// Best-bound branch and bound over the binary columns; branches on the most
/// fractional binary (ties: lowest column index) and plunges depth-first
/// until the first incumbent.
SolveResult solve_milp(const LinearProgram& lp, const SolverParams& params = {});

/// Reference solver: exhaustive enumeration over all binary assignments with
/// an LP on the continuous remainder. Only for models with few binaries.
SolveResult solve_milp_enumerate(const LinearProgram& lp, const SolverParams& params = {});

namespace detail {
/// LP solve with bound overrides, shared by the branch-and-bound tree so a
/// node never copies the whole program.
SolveResult solve_lp_bounded(const LinearProgram& lp, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& up, const SolverParams& params);
}  // namespace detail

/// LP text format (CPLEX-style) writer/reader. The writer is byte-stable:
/// identical programs produce identical files, all variables are listed in
/// the Bounds section in column order and the reader restores that order,
/// so write/read round-trips to an identical LinearProgram.
void export_lp_file(const LinearProgram& lp, const std::string& path);
std::string write_lp_string(const LinearProgram& lp);
LinearProgram read_lp_string(const std::string& text, const std::string& origin = "<string>");
LinearProgram import_lp_file(const std::string& path);

}  // namespace ievrp

#endif  // IEVRP_MILP_HPP
