#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "ievrp/instance.hpp"
#include "ievrp/milp.hpp"

namespace ievrp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int LinearProgram::add_column(const std::string& name, double lo, double hi, double obj,
                              bool binary) {
  int idx = num_cols();
  objective.conservativeResize(idx + 1);
  lower.conservativeResize(idx + 1);
  upper.conservativeResize(idx + 1);
  objective(idx) = obj;
  lower(idx) = lo;
  upper(idx) = hi;
  is_binary.push_back(binary ? 1 : 0);
  column_names.push_back(name);
  return idx;
}

void LinearProgram::add_row(LinearRow row) {
  // Canonical form: terms sorted by column, duplicates merged, zeros dropped.
  std::sort(row.terms.begin(), row.terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> merged;
  for (auto [j, coef] : row.terms) {
    if (!merged.empty() && merged.back().first == j)
      merged.back().second += coef;
    else
      merged.push_back({j, coef});
  }
  std::erase_if(merged, [](const auto& t) { return t.second == 0.0; });
  row.terms = std::move(merged);
  rows.push_back(std::move(row));
}

double LinearProgram::row_activity(const LinearRow& row, const Eigen::VectorXd& x) const {
  double a = 0.0;
  for (auto [j, coef] : row.terms) a += coef * x(j);
  return a;
}

double LinearProgram::max_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_cols(); ++j) {
    worst = std::max(worst, lower(j) - x(j));
    worst = std::max(worst, x(j) - upper(j));
  }
  for (const auto& row : rows) {
    double a = row_activity(row, x);
    if (row.sense == RowSense::LE) worst = std::max(worst, a - row.rhs);
    if (row.sense == RowSense::GE) worst = std::max(worst, row.rhs - a);
    if (row.sense == RowSense::EQ) worst = std::max(worst, std::abs(a - row.rhs));
  }
  return worst;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::GapLimit: return "gap_limit";
    case SolveStatus::TimeLimit: return "time_limit";
  }
  return "?";
}

SolverParams SolverParams::from_key_values(
    const std::vector<std::pair<std::string, std::string>>& kv) {
  SolverParams p;
  for (const auto& [key, value] : kv) {
    if (key == "feasibility_tol") p.feasibility_tol = std::stod(value);
    else if (key == "optimality_tol") p.optimality_tol = std::stod(value);
    else if (key == "integrality_tol") p.integrality_tol = std::stod(value);
    else if (key == "gap_tol") p.gap_tol = std::stod(value);
    else if (key == "time_limit") p.time_limit = std::stod(value);
    else if (key == "refactor_interval") p.refactor_interval = std::stoi(value);
    else if (key == "bland_after_degenerate") p.bland_after_degenerate = std::stoi(value);
    else throw Error("unknown solver parameter '" + key + "'");
  }
  return p;
}

namespace {

enum class VarStatus : char { AtLower, AtUpper, Basic };

// Bounded-variable primal simplex over the standard form Ax + s = b.
// The basis inverse is kept as a dense LU factorization plus product-form
// eta updates; the basics are recomputed from scratch at every
// refactorization to keep drift in check.
class Simplex {
public:
  Simplex(const LinearProgram& lp, const Eigen::VectorXd& lo, const Eigen::VectorXd& up,
          const SolverParams& params)
      : params_(params) {
    n_struct_ = lp.num_cols();
    // Singleton rows tighten bounds (the only presolve performed); rows that
    // can never bind within the tightened bounds are not installed at all.
    lo_.resize(n_struct_);
    up_.resize(n_struct_);
    for (int j = 0; j < n_struct_; ++j) {
      lo_[j] = lo(j);
      up_[j] = up(j);
    }
    std::vector<const LinearRow*> kept;
    for (const auto& row : lp.rows) {
      if (row.terms.size() == 1) {
        auto [j, coef] = row.terms[0];
        if (std::abs(coef) > 1e-12) {
          double v = row.rhs / coef;
          bool up_side = (row.sense == RowSense::LE) == (coef > 0.0);
          if (row.sense == RowSense::EQ) {
            lo_[j] = std::max(lo_[j], v);
            up_[j] = std::min(up_[j], v);
          } else if (up_side) {
            up_[j] = std::min(up_[j], v);
          } else {
            lo_[j] = std::max(lo_[j], v);
          }
          continue;
        }
      }
      kept.push_back(&row);
    }
    for (int j = 0; j < n_struct_; ++j)
      if (lo_[j] > up_[j] + params_.feasibility_tol) {
        bound_infeasible_ = true;
        return;
      }
    for (const LinearRow* row : kept) {
      double amin = 0.0, amax = 0.0;
      for (auto [j, coef] : row->terms) {
        double a = coef * lo_[j], b = coef * up_[j];
        amin += std::min(a, b);
        amax += std::max(a, b);
      }
      bool redundant = false;
      if (row->sense == RowSense::LE) redundant = amax <= row->rhs;
      if (row->sense == RowSense::GE) redundant = amin >= row->rhs;
      if (redundant) continue;
      rows_.push_back(row);
    }

    m_ = static_cast<int>(rows_.size());
    n_total_ = n_struct_ + m_;
    cols_.resize(n_total_);
    for (int i = 0; i < m_; ++i)
      for (auto [j, coef] : rows_[i]->terms)
        if (coef != 0.0) cols_[j].push_back({i, coef});
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) b_(i) = rows_[i]->rhs;
    lo_.resize(n_total_);
    up_.resize(n_total_);
    for (int i = 0; i < m_; ++i) {
      int s = n_struct_ + i;
      cols_[s] = {{i, 1.0}};
      switch (rows_[i]->sense) {
        case RowSense::LE: lo_[s] = 0.0; up_[s] = kInf; break;
        case RowSense::GE: lo_[s] = -kInf; up_[s] = 0.0; break;
        case RowSense::EQ: lo_[s] = 0.0; up_[s] = 0.0; break;
      }
    }
    cost_.assign(n_total_, 0.0);
    for (int j = 0; j < n_struct_; ++j) cost_[j] = lp.objective(j);
  }

  SolveStatus run(Eigen::VectorXd* x_out, double* obj_out, std::int64_t* iters_out) {
    if (bound_infeasible_) return SolveStatus::Infeasible;
    init_start_point();
    setup_artificials();

    SolveStatus st;
    if (num_artificial_active_ > 0) {
      phase1_ = true;
      st = iterate();
      phase1_ = false;
      if (st != SolveStatus::Optimal) return st;
      double infeas = 0.0;
      for (int p = 0; p < m_; ++p)
        if (basis_[p] >= n_total_) infeas += std::abs(xb_(p));
      for (int j = n_total_; j < n_total_ + n_art_; ++j)
        if (status_[j] != VarStatus::Basic) infeas += value_[j];
      if (infeas > 1e-8) return SolveStatus::Infeasible;
      // Fix every artificial at zero for phase 2.
      for (int j = n_total_; j < n_total_ + n_art_; ++j) {
        alo_[j - n_total_] = 0.0;
        aup_[j - n_total_] = 0.0;
        if (status_[j] != VarStatus::Basic) {
          status_[j] = VarStatus::AtLower;
          value_[j] = 0.0;
        }
      }
    }
    st = iterate();
    if (st != SolveStatus::Optimal) return st;

    refactorize();  // final clean solve of the basics
    Eigen::VectorXd x(n_struct_);
    for (int j = 0; j < n_struct_; ++j) x(j) = value_[j];
    double obj = 0.0;
    for (int j = 0; j < n_struct_; ++j) obj += cost_[j] * x(j);
    *x_out = x;
    *obj_out = obj;
    *iters_out = iterations_;
    return SolveStatus::Optimal;
  }

private:
  double bound_of(int j, bool upper) const {
    if (j >= n_total_) return upper ? aup_[j - n_total_] : alo_[j - n_total_];
    return upper ? up_[j] : lo_[j];
  }
  const std::vector<std::pair<int, double>>& column(int j) const {
    return j >= n_total_ ? acols_[j - n_total_] : cols_[j];
  }
  double cost_of(int j) const {
    if (phase1_) return j >= n_total_ ? 1.0 : 0.0;
    return j >= n_total_ ? 0.0 : cost_[j];
  }

  void init_start_point() {
    status_.assign(n_total_, VarStatus::AtLower);
    value_.assign(n_total_, 0.0);
    for (int j = 0; j < n_total_; ++j) {
      if (std::isfinite(lo_[j])) {
        status_[j] = VarStatus::AtLower;
        value_[j] = lo_[j];
      } else {
        status_[j] = VarStatus::AtUpper;
        value_[j] = up_[j];
      }
    }
  }

  void setup_artificials() {
    Eigen::VectorXd resid = b_;
    for (int j = 0; j < n_total_; ++j)
      if (value_[j] != 0.0)
        for (auto [i, coef] : cols_[j]) resid(i) -= coef * value_[j];

    basis_.assign(m_, -1);
    in_basis_pos_.assign(n_total_, -1);
    xb_.resize(m_);
    n_art_ = 0;
    num_artificial_active_ = 0;
    acols_.clear();
    alo_.clear();
    aup_.clear();
    art_of_row_.assign(m_, -1);

    for (int i = 0; i < m_; ++i) {
      int s = n_struct_ + i;
      double r = resid(i) + value_[s];  // candidate basic slack value
      bool slack_ok = r >= lo_[s] - params_.feasibility_tol &&
                      r <= up_[s] + params_.feasibility_tol;
      if (slack_ok) {
        basis_[i] = s;
        in_basis_pos_[s] = i;
        status_[s] = VarStatus::Basic;
        xb_(i) = r;
      } else {
        double sign = r - value_[s] >= 0.0 ? 1.0 : -1.0;
        acols_.push_back({{i, sign}});
        alo_.push_back(0.0);
        aup_.push_back(kInf);
        int aj = n_total_ + n_art_;
        art_of_row_[i] = aj;
        basis_[i] = aj;
        xb_(i) = std::abs(r - value_[s]);
        ++n_art_;
        ++num_artificial_active_;
      }
    }
    status_.resize(n_total_ + n_art_, VarStatus::Basic);
    value_.resize(n_total_ + n_art_, 0.0);
    in_basis_pos_.resize(n_total_ + n_art_, -1);
    for (int i = 0; i < m_; ++i) {
      in_basis_pos_[basis_[i]] = i;
      status_[basis_[i]] = VarStatus::Basic;
    }
    refactorize();
  }

  void refactorize() {
    // An all-slack/artificial basis is diagonal; skip the dense factorization
    // (every node LP starts here, so this is the common case).
    diag_basis_ = true;
    diag_.resize(m_);
    for (int p = 0; p < m_ && diag_basis_; ++p) {
      const auto& col = column(basis_[p]);
      if (col.size() == 1 && col[0].first == p)
        diag_(p) = col[0].second;
      else
        diag_basis_ = false;
    }
    if (!diag_basis_) {
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
      for (int p = 0; p < m_; ++p)
        for (auto [i, coef] : column(basis_[p])) B(i, p) += coef;
      lu_.compute(B);
    }
    etas_.clear();
    // Recompute basic values from the nonbasic point.
    Eigen::VectorXd rhs = b_;
    int total = n_total_ + n_art_;
    for (int j = 0; j < total; ++j) {
      if (status_[j] == VarStatus::Basic || value_[j] == 0.0) continue;
      for (auto [i, coef] : column(j)) rhs(i) -= coef * value_[j];
    }
    xb_ = base_solve(rhs);
    for (int p = 0; p < m_; ++p) value_[basis_[p]] = xb_(p);
  }

  Eigen::VectorXd base_solve(const Eigen::VectorXd& v) const {
    if (diag_basis_) return v.cwiseQuotient(diag_);
    return lu_.solve(v);
  }
  Eigen::VectorXd base_solve_transpose(const Eigen::VectorXd& v) const {
    if (diag_basis_) return v.cwiseQuotient(diag_);
    return lu_.transpose().solve(v);
  }

  Eigen::VectorXd ftran(int j) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m_);
    for (auto [i, coef] : column(j)) v(i) += coef;
    Eigen::VectorXd u = base_solve(v);
    for (const auto& [w, p] : etas_) {
      double t = u(p) / w(p);
      if (t != 0.0) {
        u -= t * w;
        u(p) = t;
      } else {
        u(p) = 0.0;
      }
    }
    return u;
  }

  // y^T B^{-1}: eta-transposed updates newest-first, then the LU transpose.
  Eigen::VectorXd btran(Eigen::VectorXd y) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const auto& [w, p] = *it;
      double s = w.dot(y);
      y(p) = y(p) - (s - y(p)) / w(p);
    }
    return base_solve_transpose(y);
  }

  SolveStatus iterate() {
    int degenerate_run = 0;
    bool bland = false;
    const double dtol = params_.optimality_tol;
    const int total = n_total_ + n_art_;
    const std::int64_t iter_limit =
        200000 + 200LL * static_cast<std::int64_t>(m_ + n_total_);

    while (true) {
      if (iterations_ > iter_limit)
        throw Error("simplex: iteration limit exceeded (" + std::to_string(iterations_) +
                    ")");
      // Reduced costs via BTRAN of the basic cost vector.
      Eigen::VectorXd cb(m_);
      for (int p = 0; p < m_; ++p) cb(p) = cost_of(basis_[p]);
      Eigen::VectorXd y = btran(cb);

      int enter = -1;
      double best_viol = bland ? 0.0 : dtol;
      bool enter_from_lower = true;
      for (int j = 0; j < total; ++j) {
        if (status_[j] == VarStatus::Basic) continue;
        double blo = bound_of(j, false), bup = bound_of(j, true);
        if (blo == bup) continue;  // fixed
        double d = cost_of(j);
        for (auto [i, coef] : column(j)) d -= coef * y(i);
        if (status_[j] == VarStatus::AtLower && d < -dtol) {
          double viol = -d;
          if (bland) { enter = j; enter_from_lower = true; break; }
          if (viol > best_viol) { best_viol = viol; enter = j; enter_from_lower = true; }
        } else if (status_[j] == VarStatus::AtUpper && d > dtol) {
          if (bland) { enter = j; enter_from_lower = false; break; }
          if (d > best_viol) { best_viol = d; enter = j; enter_from_lower = false; }
        }
      }
      if (enter < 0) return SolveStatus::Optimal;

      Eigen::VectorXd w = ftran(enter);
      double dir = enter_from_lower ? 1.0 : -1.0;

      // Ratio test: basic variables block at their bounds; the entering
      // variable itself blocks at its opposite bound (bound flip).
      double limit = bound_of(enter, true) - bound_of(enter, false);
      int leave_pos = -1;
      bool leave_at_upper = false;
      const double piv_tol = 1e-10;
      for (int p = 0; p < m_; ++p) {
        double rate = -dir * w(p);
        if (std::abs(rate) < piv_tol) continue;
        int bj = basis_[p];
        double cand;
        bool at_upper;
        if (rate > 0.0) {
          double bup = bound_of(bj, true);
          if (!std::isfinite(bup)) continue;
          cand = (bup - xb_(p)) / rate;
          at_upper = true;
        } else {
          double blo = bound_of(bj, false);
          if (!std::isfinite(blo)) continue;
          cand = (xb_(p) - blo) / (-rate);
          at_upper = false;
        }
        cand = std::max(cand, 0.0);
        bool better = cand < limit - 1e-10;
        bool tie = std::abs(cand - limit) <= 1e-10 && leave_pos >= 0;
        if (tie) {
          // Prefer the numerically strongest pivot; break remaining ties on
          // the lowest column index (Bland-compatible and deterministic).
          bool take = std::abs(w(p)) > std::abs(w(leave_pos)) + 1e-12 ||
                      (std::abs(w(p)) >= std::abs(w(leave_pos)) - 1e-12 &&
                       basis_[p] < basis_[leave_pos]);
          if (bland) take = basis_[p] < basis_[leave_pos];
          if (take) { limit = std::min(limit, cand); leave_pos = p; leave_at_upper = at_upper; }
        } else if (better) {
          limit = cand;
          leave_pos = p;
          leave_at_upper = at_upper;
        }
      }
      if (!std::isfinite(limit)) return SolveStatus::Unbounded;

      ++iterations_;
      if (limit <= 1e-12) {
        if (++degenerate_run > params_.bland_after_degenerate) bland = true;
      } else {
        degenerate_run = 0;
      }

      if (leave_pos < 0) {
        // Bound flip: the entering variable crosses to its other bound.
        double delta = dir * limit;
        xb_ -= delta * w;
        for (int p = 0; p < m_; ++p) value_[basis_[p]] = xb_(p);
        status_[enter] = enter_from_lower ? VarStatus::AtUpper : VarStatus::AtLower;
        value_[enter] = bound_of(enter, enter_from_lower);
        continue;
      }

      // Pivot: entering becomes basic at bound + dir*limit.
      double enter_val = value_[enter] + dir * limit;
      xb_ -= dir * limit * w;
      int leave_var = basis_[leave_pos];
      status_[leave_var] = leave_at_upper ? VarStatus::AtUpper : VarStatus::AtLower;
      value_[leave_var] = bound_of(leave_var, leave_at_upper);
      in_basis_pos_[leave_var] = -1;

      basis_[leave_pos] = enter;
      in_basis_pos_[enter] = leave_pos;
      status_[enter] = VarStatus::Basic;
      xb_(leave_pos) = enter_val;
      for (int p = 0; p < m_; ++p) value_[basis_[p]] = xb_(p);

      etas_.push_back({w, leave_pos});
      if (static_cast<int>(etas_.size()) >= params_.refactor_interval) refactorize();
    }
  }

  const SolverParams& params_;
  bool bound_infeasible_ = false;
  bool phase1_ = false;
  int n_struct_ = 0, m_ = 0, n_total_ = 0, n_art_ = 0;
  int num_artificial_active_ = 0;
  std::vector<const LinearRow*> rows_;
  std::vector<std::vector<std::pair<int, double>>> cols_, acols_;
  std::vector<double> lo_, up_, alo_, aup_, cost_;
  Eigen::VectorXd b_, xb_;
  std::vector<int> basis_, in_basis_pos_, art_of_row_;
  std::vector<VarStatus> status_;
  std::vector<double> value_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  bool diag_basis_ = false;
  Eigen::VectorXd diag_;
  std::vector<std::pair<Eigen::VectorXd, int>> etas_;
  std::int64_t iterations_ = 0;
};

}  // namespace

namespace detail {

SolveResult solve_lp_bounded(const LinearProgram& lp, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& up, const SolverParams& params) {
  auto t0 = std::chrono::steady_clock::now();
  SolveResult res;
  Simplex spx(lp, lo, up, params);
  Eigen::VectorXd x;
  double obj = 0.0;
  std::int64_t iters = 0;
  res.status = spx.run(&x, &obj, &iters);
  res.simplex_iterations = iters;
  if (res.status == SolveStatus::Optimal) {
    res.x = x;
    res.objective = obj;
    res.best_bound = obj;
  }
  res.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace detail

SolveResult solve_lp(const LinearProgram& lp, const SolverParams& params) {
  return detail::solve_lp_bounded(lp, lp.lower, lp.upper, params);
}

}  // namespace ievrp
