#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

#include "ievrp/instance.hpp"
#include "ievrp/milp.hpp"

namespace ievrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct TreeNode {
  double bound = -kInf;  // parent LP objective, a valid lower bound
  int parent = -1;
  int branch_var = -1;
  int branch_value = 0;  // 0 or 1
};

// Most fractional binary within the highest fractional priority class; ties
// go to the lowest column index. Returns -1 when every binary is within tol
// of an integer.
int pick_branch_var(const LinearProgram& lp, const Eigen::VectorXd& x, double tol) {
  int best = -1;
  double best_dist = kInf;
  int best_prio = std::numeric_limits<int>::min();
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (!lp.is_binary[j]) continue;
    double frac = x(j) - std::floor(x(j));
    double to_int = std::min(frac, 1.0 - frac);
    if (to_int <= tol) continue;
    int prio = lp.branch_priority.empty() ? 0 : lp.branch_priority[j];
    double dist = std::abs(frac - 0.5);
    if (prio > best_prio || (prio == best_prio && dist < best_dist - 1e-12)) {
      best_prio = prio;
      best_dist = dist;
      best = j;
    }
  }
  return best;
}

int dive_value(const LinearProgram& lp, int column, double relaxation_value) {
  int prio = lp.branch_priority.empty() ? 0 : lp.branch_priority[column];
  if (prio > 0) return 0;  // dropping a routing arc keeps dives feasible
  return relaxation_value >= 0.5 ? 1 : 0;
}

}  // namespace

// Best-bound search with depth-first plunging: every node popped from the
// best-bound heap roots a dive that follows the 0-side of the branching
// variable down to a leaf (dropping an arc keeps the relaxation feasible,
// so dives reliably reach integral points), while the 1-side children join
// the heap. Dives supply incumbents; the heap supplies the proof.
SolveResult solve_milp(const LinearProgram& lp, const SolverParams& params) {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  SolveResult out;
  std::vector<TreeNode> nodes(1);
  using HeapItem = std::pair<double, int>;  // (bound, id); FIFO ids break ties
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>> heap;
  std::vector<int> dive_stack{0};
  bool have_incumbent = false;
  Eigen::VectorXd incumbent;
  double incumbent_obj = kInf;
  double global_lower = -kInf;
  std::int64_t node_count = 0, simplex_iters = 0;

  Eigen::VectorXd lo(lp.num_cols()), up(lp.num_cols());
  auto node_bounds = [&](int id) {
    lo = lp.lower;
    up = lp.upper;
    for (int cur = id; cur > 0; cur = nodes[cur].parent) {
      int v = nodes[cur].branch_var;
      lo(v) = up(v) = static_cast<double>(nodes[cur].branch_value);
    }
  };

  auto cutoff = [&]() {
    return incumbent_obj - params.gap_tol * std::max(1.0, std::abs(incumbent_obj));
  };

  auto finish = [&](SolveStatus st) {
    out.status = st;
    out.node_count = node_count;
    out.simplex_iterations = simplex_iters;
    out.elapsed_seconds = elapsed();
    if (have_incumbent) {
      out.x = incumbent;
      out.objective = incumbent_obj;
    }
    out.best_bound = std::min(global_lower, incumbent_obj);
    return out;
  };

  while (true) {
    if (elapsed() > params.time_limit) return finish(SolveStatus::TimeLimit);

    int id;
    if (!dive_stack.empty()) {
      id = dive_stack.back();
      dive_stack.pop_back();
      if (have_incumbent && nodes[id].bound >= cutoff()) continue;
    } else {
      if (heap.empty()) {
        global_lower = incumbent_obj;
        return finish(have_incumbent ? SolveStatus::Optimal : SolveStatus::Infeasible);
      }
      auto [bound, top] = heap.top();
      heap.pop();
      global_lower = std::max(global_lower, std::min(bound, incumbent_obj));
      if (have_incumbent && bound >= cutoff()) return finish(SolveStatus::Optimal);
      id = top;
    }

    node_bounds(id);
    SolveResult rel = detail::solve_lp_bounded(lp, lo, up, params);
    ++node_count;
    simplex_iters += rel.simplex_iterations;
    if (rel.status == SolveStatus::Unbounded && id == 0)
      return finish(SolveStatus::Unbounded);
    if (rel.status != SolveStatus::Optimal) {
      if (id == 0 && rel.status == SolveStatus::Infeasible)
        return finish(SolveStatus::Infeasible);
      continue;
    }
    if (have_incumbent && rel.objective >= cutoff()) continue;

    int branch = pick_branch_var(lp, rel.x, params.integrality_tol);
    if (branch < 0) {
      // Integral point. If the relaxation left binaries a hair off their
      // integer value, re-solve with them pinned so big-M rows are honored
      // at the exact 0/1 point.
      Eigen::VectorXd cand = rel.x;
      double cand_obj = rel.objective;
      double worst = 0.0;
      for (int j = 0; j < lp.num_cols(); ++j)
        if (lp.is_binary[j])
          worst = std::max(worst, std::abs(cand(j) - std::round(cand(j))));
      if (worst > 1e-10) {
        for (int j = 0; j < lp.num_cols(); ++j)
          if (lp.is_binary[j]) lo(j) = up(j) = std::round(cand(j));
        SolveResult fixed = detail::solve_lp_bounded(lp, lo, up, params);
        simplex_iters += fixed.simplex_iterations;
        if (fixed.status != SolveStatus::Optimal) {
          // Rounding breaks feasibility: force a dichotomy on the worst one.
          int v = -1;
          double w = 1e-10;
          for (int j = 0; j < lp.num_cols(); ++j)
            if (lp.is_binary[j] && std::abs(rel.x(j) - std::round(rel.x(j))) > w) {
              w = std::abs(rel.x(j) - std::round(rel.x(j)));
              v = j;
            }
          if (v < 0) continue;
          branch = v;
        } else {
          cand = fixed.x;
          cand_obj = fixed.objective;
        }
      }
      if (branch < 0) {
        if (cand_obj < incumbent_obj - 1e-12) {
          incumbent = cand;
          incumbent_obj = cand_obj;
          have_incumbent = true;
        }
        continue;
      }
    }

    int dive_side = dive_value(lp, branch, rel.x(branch));
    TreeNode child;
    child.bound = rel.objective;
    child.parent = id;
    child.branch_var = branch;
    child.branch_value = 1 - dive_side;
    nodes.push_back(child);
    heap.push({rel.objective, static_cast<int>(nodes.size()) - 1});
    child.branch_value = dive_side;
    nodes.push_back(child);
    dive_stack.push_back(static_cast<int>(nodes.size()) - 1);
  }
}

SolveResult solve_milp_enumerate(const LinearProgram& lp, const SolverParams& params) {
  std::vector<int> bins;
  for (int j = 0; j < lp.num_cols(); ++j)
    if (lp.is_binary[j] && lp.lower(j) < lp.upper(j)) bins.push_back(j);
  if (bins.size() > 20)
    throw Error("solve_milp_enumerate: too many binaries (" +
                std::to_string(bins.size()) + ")");
  auto t0 = std::chrono::steady_clock::now();
  SolveResult out;
  out.status = SolveStatus::Infeasible;
  double best = kInf;
  Eigen::VectorXd lo = lp.lower, up = lp.upper;
  for (std::uint64_t mask = 0; mask < (1ULL << bins.size()); ++mask) {
    for (std::size_t b = 0; b < bins.size(); ++b) {
      double v = (mask >> b) & 1 ? 1.0 : 0.0;
      lo(bins[b]) = up(bins[b]) = v;
    }
    SolveResult res = detail::solve_lp_bounded(lp, lo, up, params);
    ++out.node_count;
    out.simplex_iterations += res.simplex_iterations;
    if (res.status == SolveStatus::Optimal && res.objective < best - 1e-12) {
      best = res.objective;
      out.x = res.x;
      out.objective = res.objective;
      out.status = SolveStatus::Optimal;
    }
  }
  out.best_bound = best;
  out.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace ievrp
