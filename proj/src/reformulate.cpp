#include "ievrp/reformulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ievrp {

namespace {

double profile_spread(const InconvenienceProfile& p) {
  // Largest epigraph slack attainable by a feasible (delay, eps) pair with
  // eps on the envelope; the slack is convex in the delay, so the endpoints
  // of [0, delay_cap] realize the maximum.
  double worst = 0.0;
  for (double d : {0.0, p.delay_cap}) {
    double env = -1e300, low = 1e300;
    for (int m = 0; m < p.segment_count(); ++m) {
      double v = p.slopes[m] * d + p.intercepts[m];
      env = std::max(env, v);
      low = std::min(low, v);
    }
    worst = std::max(worst, env - low);
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// VariableCatalog
// ---------------------------------------------------------------------------

int VariableCatalog::x(int k, int i, int j) const {
  return (k * num_nodes + i) * num_nodes + j;
}
int VariableCatalog::r(int k, int i) const {
  return num_vehicles * num_nodes * num_nodes + k * num_nodes + i;
}
int VariableCatalog::t(int i) const {
  return num_vehicles * num_nodes * num_nodes + num_vehicles * num_nodes + i;
}
int VariableCatalog::energy(int k, int i) const {
  return num_vehicles * num_nodes * num_nodes + num_vehicles * num_nodes + num_nodes +
         k * num_nodes + i;
}
int VariableCatalog::follower_offset(int c) const {
  int base = num_vehicles * num_nodes * num_nodes + 2 * num_vehicles * num_nodes +
             num_nodes;
  for (int cc = 0; cc < c; ++cc) base += 7 + 2 * segment_counts[cc];
  return base;
}
int VariableCatalog::follower_block_size() const {
  if (!has_follower_block) return 0;
  int total = 0;
  for (int n : segment_counts) total += 7 + 2 * n;
  return total;
}
int VariableCatalog::q(int c) const { return follower_offset(c); }
int VariableCatalog::delta(int c) const { return follower_offset(c) + 1; }
int VariableCatalog::eps(int c) const { return follower_offset(c) + 2; }
int VariableCatalog::u(int c) const { return follower_offset(c) + 3; }
int VariableCatalog::v(int c) const { return follower_offset(c) + 4; }
int VariableCatalog::zeta(int c, int m) const { return follower_offset(c) + 5 + m; }
int VariableCatalog::psi(int c, int m) const {
  return follower_offset(c) + 5 + segment_counts[c] + m;
}
int VariableCatalog::eta1(int k, int i, int j) const {
  int base = num_vehicles * num_nodes * num_nodes + 2 * num_vehicles * num_nodes +
             num_nodes + follower_block_size();
  return base + (k * num_nodes + i) * num_nodes + j;
}
int VariableCatalog::eta2(int k, int i, int j) const {
  return eta1(k, i, j) + num_vehicles * num_nodes * num_nodes;
}
int VariableCatalog::eta3(int c) const {
  int base = num_vehicles * num_nodes * num_nodes + 2 * num_vehicles * num_nodes +
             num_nodes + follower_block_size() +
             2 * num_vehicles * num_nodes * num_nodes;
  return base + c;
}
int VariableCatalog::total() const {
  int base = num_vehicles * num_nodes * num_nodes + 2 * num_vehicles * num_nodes +
             num_nodes + follower_block_size() +
             2 * num_vehicles * num_nodes * num_nodes;
  return has_follower_block ? base + num_customers : base;
}

// ---------------------------------------------------------------------------
// Big-M configuration
// ---------------------------------------------------------------------------

BigMConfig compute_big_m(const Instance& inst) {
  BigMConfig m;
  const FleetParams& f = inst.fleet;
  double g_max = 0.0, p_max = 0.0;
  for (const Node& node : inst.nodes)
    if (node.has_charger()) {
      g_max = std::max(g_max, node.charge_rate);
      p_max = std::max(p_max, node.charge_price);
    }
  double tau_max = 0.0;
  for (const Node& node : inst.nodes) tau_max = std::max(tau_max, node.desired_time);
  double cap_max = 0.0, gamma_max = 0.0, spread_max = 0.0, chi_abs_max = 0.0;
  for (const auto& [c, p] : inst.profiles) {
    cap_max = std::max(cap_max, p.delay_cap);
    gamma_max = std::max(gamma_max, p.slopes.back());
    spread_max = std::max(spread_max, profile_spread(p));
    double chi_abs = 0.0;
    for (double chi : p.intercepts) chi_abs += std::abs(chi);
    chi_abs_max = std::max(chi_abs_max, chi_abs);
  }

  m.M_time = tau_max + cap_max + inst.travel_time.maxCoeff() + g_max * f.battery_capacity;
  m.M_energy = f.battery_capacity + inst.energy.maxCoeff();
  m.q_max = gamma_max;
  m.M_dual_u = m.q_max + gamma_max;
  m.M_dual_v = gamma_max;
  // One extra unit of headroom: the raw suprema (a delay at its cap, an
  // epigraph slack at the spread) are attainable, and the post-solve audit
  // requires every guarded expression to stay strictly below its M.
  m.M_delta = cap_max + 1.0;
  m.M_epi = spread_max + 1.0;
  m.M_eta1 = f.time_value * g_max * f.battery_capacity + 1.0;
  m.M_eta2 = p_max * f.battery_capacity + 1.0;
  m.M_eta3 = m.M_epi + m.M_dual_u * cap_max + chi_abs_max + 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// Model builder
// ---------------------------------------------------------------------------

namespace {

struct Builder {
  const Instance& inst;
  const BuildOptions& opt;
  bool incentive;
  MilpModel model;
  int V, K, R;

  Builder(const Instance& instance, const BuildOptions& options, bool with_incentives)
      : inst(instance), opt(options), incentive(with_incentives) {
    V = inst.size();
    K = inst.fleet.vehicle_count;
    R = inst.customer_count();
  }

  bool arc_free(int i, int j) const {
    return i != j && i != inst.end_depot() && j != inst.start_depot();
  }
  const InconvenienceProfile& profile(int c) const {
    return inst.profiles.at(c + 1);  // customer ids are 1..R
  }
  double r_upper(int i) const {
    if (i == inst.end_depot() || !inst.nodes[i].has_charger()) return 0.0;
    return inst.fleet.battery_capacity;
  }
  double t_lower(int i) const { return inst.is_customer(i) ? inst.nodes[i].desired_time
                                                           : (i == inst.start_depot() ? 0.0 : inst.nodes[i].desired_time); }
  double t_upper(int i) const {
    if (i == inst.start_depot()) return 0.0;
    if (i == inst.end_depot()) return inst.nodes[i].desired_time + inst.fleet.horizon;
    double width = incentive ? profile(i - 1).delay_cap : opt.baseline_window;
    return inst.nodes[i].desired_time + width;
  }
  // Arc usage fee: the printed cost vector puts c_v on every arc leaving the
  // start depot and the (negative) revenue on arcs leaving a customer. The
  // default option exempts the direct depot-to-depot arc so an idle vehicle
  // is free.
  double arc_cost(int i, int j) const {
    double c = inst.fleet.time_value * inst.travel_time(i, j);
    if (i == inst.start_depot() && (opt.charge_idle_vehicles || inst.is_customer(j)))
      c += inst.fleet.usage_cost;
    if (inst.is_customer(i)) c -= inst.nodes[i].delivery_revenue;
    return c;
  }

  std::string idx(int a) const { return "_" + std::to_string(a); }

  void add_columns() {
    VariableCatalog& cat = model.catalog;
    cat.num_nodes = V;
    cat.num_vehicles = K;
    cat.num_customers = R;
    cat.has_follower_block = incentive;
    if (incentive)
      for (int c = 0; c < R; ++c)
        cat.segment_counts.push_back(profile(c).segment_count());

    LinearProgram& lp = model.lp;
    const BigMConfig& M = model.big_m;
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j) {
          double up = arc_free(i, j) ? 1.0 : 0.0;
          lp.add_column("x_k" + std::to_string(k) + idx(i) + idx(j), 0.0, up,
                        arc_free(i, j) ? arc_cost(i, j) : 0.0, true);
        }
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i)
        lp.add_column("r_k" + std::to_string(k) + idx(i), 0.0, r_upper(i), 0.0);
    for (int i = 0; i < V; ++i)
      lp.add_column("t" + idx(i), t_lower(i), t_upper(i), 0.0);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i) {
        double lo = 0.0, up = inst.fleet.battery_capacity;
        if (i == inst.start_depot()) lo = up = inst.fleet.initial_energy[k];  // Eq8
        lp.add_column("E_k" + std::to_string(k) + idx(i), lo, up, 0.0);
      }
    if (incentive) {
      for (int c = 0; c < R; ++c) {
        const InconvenienceProfile& p = profile(c);
        int cust = c + 1;
        double eps_lo = 1e300, eps_up = -1e300;
        for (int m = 0; m < p.segment_count(); ++m)
          for (double d : {0.0, p.delay_cap}) {
            eps_lo = std::min(eps_lo, p.slopes[m] * d + p.intercepts[m]);
          }
        eps_up = std::max(inconvenience_value(p, 0.0),
                          inconvenience_value(p, p.delay_cap)) + 1.0;
        lp.add_column("q" + idx(cust), 0.0, M.q_max * opt.q_cap_scale, 0.0);
        lp.add_column("delta" + idx(cust), 0.0, p.delay_cap, 0.0);
        lp.add_column("eps" + idx(cust), eps_lo, eps_up, 0.0);
        lp.add_column("u" + idx(cust), 0.0, dual_u_cap(), 0.0);
        lp.add_column("v" + idx(cust), 0.0, M.M_dual_v, 0.0);
        for (int m = 0; m < p.segment_count(); ++m)
          lp.add_column("zeta" + idx(cust) + idx(m + 1), 0.0, 1.0, 0.0);
        for (int m = 0; m < p.segment_count() + 2; ++m)
          lp.add_column("psi" + idx(cust) + idx(m + 1), 0.0, 1.0, 0.0, true);
      }
    }
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j)
          lp.add_column("eta1_k" + std::to_string(k) + idx(i) + idx(j), 0.0, M.M_eta1,
                        1.0);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j)
          lp.add_column("eta2_k" + std::to_string(k) + idx(i) + idx(j), 0.0, M.M_eta2,
                        1.0);
    if (incentive)
      for (int c = 0; c < R; ++c)
        lp.add_column("eta3" + idx(c + 1), 0.0, M.M_eta3, 1.0);
  }

  double dual_u_cap() const {
    return model.big_m.q_max * opt.q_cap_scale + model.big_m.M_dual_u -
           model.big_m.q_max;  // rescaled q cap keeps the slope part
  }

  // Per-row big-M values, tightened from the variable bounds; each stays
  // sound for the family reasoning and strictly above its attainable range.
  double m_time(int k, int i, int j) const {
    (void)k;
    return t_upper(i) + inst.travel_time(i, j) +
           inst.nodes[i].charge_rate * r_upper(i) - t_lower(j) + 1.0;
  }
  double m_energy_up(int i) const {
    double chargeable = std::min(r_upper(i), inst.energy.row(i).maxCoeff());
    return inst.fleet.battery_capacity + chargeable + 1.0;
  }
  double m_energy_lo() const { return inst.fleet.battery_capacity + 1.0; }
  double m_eta1(int i) const {
    return inst.fleet.time_value * inst.nodes[i].charge_rate * r_upper(i) + 1.0;
  }
  double m_eta2(int i) const { return inst.nodes[i].charge_price * r_upper(i) + 1.0; }
  double m_eta3(int c) const {
    const InconvenienceProfile& p = profile(c);
    double chi_abs = 0.0;
    for (double chi : p.intercepts) chi_abs += std::abs(chi);
    double eps_up = std::max(inconvenience_value(p, 0.0),
                             inconvenience_value(p, p.delay_cap));
    return eps_up + dual_u_cap() * p.delay_cap + chi_abs + 1.0;
  }
  double m_delta(int c) const { return profile(c).delay_cap + 1.0; }
  double m_epi(int c) const { return profile_spread(profile(c)) + 1.0; }

  void add_rows() {
    LinearProgram& lp = model.lp;
    const VariableCatalog& cat = model.catalog;

    // Eq2: flow conservation per vehicle and node.
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i) {
        LinearRow row;
        row.name = "Eq2" + idx(k) + idx(i);
        row.sense = RowSense::EQ;
        row.rhs = i == inst.start_depot() ? 1.0 : (i == inst.end_depot() ? -1.0 : 0.0);
        for (int j = 0; j < V; ++j) {
          if (j == i) continue;
          row.terms.push_back({cat.x(k, i, j), 1.0});
          row.terms.push_back({cat.x(k, j, i), -1.0});
        }
        lp.add_row(std::move(row));
      }

    // Eq3: each customer served at most once.
    for (int c = 0; c < R; ++c) {
      LinearRow row;
      row.name = "Eq3" + idx(c + 1);
      row.sense = RowSense::LE;
      row.rhs = 1.0;
      for (int k = 0; k < K; ++k)
        for (int j = 0; j < V; ++j)
          if (j != c + 1) row.terms.push_back({cat.x(k, c + 1, j), 1.0});
      lp.add_row(std::move(row));
    }

    // Eq4: time propagation with charging, guarded by arc usage.
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i) {
        if (i == inst.end_depot()) continue;
        for (int j = 0; j < V; ++j) {
          if (j == inst.start_depot()) continue;
          double M = m_time(k, i, j);
          LinearRow row;
          row.name = "Eq4" + idx(k) + idx(i) + idx(j);
          row.sense = RowSense::GE;
          row.rhs = inst.travel_time(i, j) - M;
          row.terms.push_back({cat.t(j), 1.0});
          row.terms.push_back({cat.t(i), -1.0});
          if (r_upper(i) > 0.0)
            row.terms.push_back({cat.r(k, i), -inst.nodes[i].charge_rate});
          row.terms.push_back({cat.x(k, i, j), -M});
          lp.add_row(std::move(row));
        }
      }

    // Eq5: window rows for every node except the start depot.
    for (int j = 1; j < V; ++j) {
      LinearRow lo;
      lo.name = "Eq5lo" + idx(j);
      lo.sense = RowSense::GE;
      lo.rhs = inst.nodes[j].desired_time;
      lo.terms.push_back({cat.t(j), 1.0});
      lp.add_row(std::move(lo));

      LinearRow up;
      up.name = "Eq5up" + idx(j);
      up.sense = RowSense::LE;
      up.terms.push_back({cat.t(j), 1.0});
      if (inst.is_customer(j) && incentive) {
        up.rhs = inst.nodes[j].desired_time;
        up.terms.push_back({cat.delta(j - 1), -1.0});
      } else if (inst.is_customer(j)) {
        up.rhs = inst.nodes[j].desired_time + opt.baseline_window;
      } else {
        up.rhs = inst.nodes[j].desired_time + inst.fleet.horizon;
      }
      lp.add_row(std::move(up));
    }

    // Eq6: battery propagation, two guarded sides.
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i) {
        if (i == inst.end_depot()) continue;
        for (int j = 0; j < V; ++j) {
          if (j == inst.start_depot()) continue;
          double Mu = m_energy_up(i), Ml = m_energy_lo();
          LinearRow up;
          up.name = "Eq6up" + idx(k) + idx(i) + idx(j);
          up.sense = RowSense::LE;
          up.rhs = Mu;
          up.terms.push_back({cat.energy(k, i), 1.0});
          up.terms.push_back({cat.energy(k, j), -1.0});
          if (r_upper(i) > 0.0) up.terms.push_back({cat.r(k, i), 1.0});
          up.terms.push_back({cat.x(k, i, j), Mu - inst.energy(i, j)});
          lp.add_row(std::move(up));

          LinearRow lo;
          lo.name = "Eq6lo" + idx(k) + idx(i) + idx(j);
          lo.sense = RowSense::GE;
          lo.rhs = -Ml;
          lo.terms.push_back({cat.energy(k, i), 1.0});
          lo.terms.push_back({cat.energy(k, j), -1.0});
          if (r_upper(i) > 0.0) lo.terms.push_back({cat.r(k, i), 1.0});
          lo.terms.push_back({cat.x(k, i, j), -(Ml + inst.energy(i, j))});
          lp.add_row(std::move(lo));
        }
      }

    if (incentive) {
      for (int c = 0; c < R; ++c) {
        const InconvenienceProfile& p = profile(c);
        const int n = p.segment_count();
        int cust = c + 1;

        LinearRow st_d;  // Eq9a
        st_d.name = "Eq9a" + idx(cust);
        st_d.sense = RowSense::EQ;
        st_d.rhs = 0.0;
        st_d.terms.push_back({cat.q(c), -1.0});
        st_d.terms.push_back({cat.u(c), 1.0});
        st_d.terms.push_back({cat.v(c), -1.0});
        for (int m = 0; m < n; ++m)
          st_d.terms.push_back({cat.zeta(c, m), p.slopes[m]});
        lp.add_row(std::move(st_d));

        LinearRow st_e;  // Eq9b
        st_e.name = "Eq9b" + idx(cust);
        st_e.sense = RowSense::EQ;
        st_e.rhs = 1.0;
        for (int m = 0; m < n; ++m) st_e.terms.push_back({cat.zeta(c, m), 1.0});
        lp.add_row(std::move(st_e));

        // Eq10a: cap complementarity (psi index n) — delta_bar - delta <= M psi,
        // u <= M (1 - psi).
        double Md = m_delta(c);
        {
          LinearRow a1;
          a1.name = "Eq10a_gap" + idx(cust);
          a1.sense = RowSense::LE;
          a1.rhs = -p.delay_cap;
          a1.terms.push_back({cat.delta(c), -1.0});
          a1.terms.push_back({cat.psi(c, n), -Md});
          lp.add_row(std::move(a1));
          LinearRow a2;
          a2.name = "Eq10a_dual" + idx(cust);
          a2.sense = RowSense::LE;
          a2.rhs = dual_u_cap();
          a2.terms.push_back({cat.u(c), 1.0});
          a2.terms.push_back({cat.psi(c, n), dual_u_cap()});
          lp.add_row(std::move(a2));
        }
        // Eq10b: zero complementarity (psi index n+1).
        {
          LinearRow b1;
          b1.name = "Eq10b_gap" + idx(cust);
          b1.sense = RowSense::LE;
          b1.rhs = 0.0;
          b1.terms.push_back({cat.delta(c), 1.0});
          b1.terms.push_back({cat.psi(c, n + 1), -Md});
          lp.add_row(std::move(b1));
          LinearRow b2;
          b2.name = "Eq10b_dual" + idx(cust);
          b2.sense = RowSense::LE;
          b2.rhs = model.big_m.M_dual_v;
          b2.terms.push_back({cat.v(c), 1.0});
          b2.terms.push_back({cat.psi(c, n + 1), model.big_m.M_dual_v});
          lp.add_row(std::move(b2));
        }
        // Eq10c: epigraph complementarity per segment.
        double Me = m_epi(c);
        for (int m = 0; m < n; ++m) {
          LinearRow feas;
          feas.name = "Eq10c_feas" + idx(cust) + idx(m + 1);
          feas.sense = RowSense::GE;
          feas.rhs = p.intercepts[m];
          feas.terms.push_back({cat.eps(c), 1.0});
          feas.terms.push_back({cat.delta(c), -p.slopes[m]});
          lp.add_row(std::move(feas));

          LinearRow slack;
          slack.name = "Eq10c_gap" + idx(cust) + idx(m + 1);
          slack.sense = RowSense::LE;
          slack.rhs = p.intercepts[m];
          slack.terms.push_back({cat.eps(c), 1.0});
          slack.terms.push_back({cat.delta(c), -p.slopes[m]});
          slack.terms.push_back({cat.psi(c, m), -Me});
          lp.add_row(std::move(slack));

          LinearRow zu;  // zeta_m <= 2 (1 - psi_m); any zeta is at most 1
          zu.name = "Eq10c_dual" + idx(cust) + idx(m + 1);
          zu.sense = RowSense::LE;
          zu.rhs = 2.0;
          zu.terms.push_back({cat.zeta(c, m), 1.0});
          zu.terms.push_back({cat.psi(c, m), 2.0});
          lp.add_row(std::move(zu));
        }
      }
    }

    // Eq11a/Eq11b: charging bilinear terms per arc.
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j) {
          double M1 = m_eta1(i), M2 = m_eta2(i);
          LinearRow e1;
          e1.name = "Eq11a" + idx(k) + idx(i) + idx(j);
          e1.sense = RowSense::GE;
          e1.rhs = -M1;
          e1.terms.push_back({cat.eta1(k, i, j), 1.0});
          if (r_upper(i) > 0.0)
            e1.terms.push_back(
                {cat.r(k, i), -inst.fleet.time_value * inst.nodes[i].charge_rate});
          e1.terms.push_back({cat.x(k, i, j), -M1});
          lp.add_row(std::move(e1));

          LinearRow e2;
          e2.name = "Eq11b" + idx(k) + idx(i) + idx(j);
          e2.sense = RowSense::GE;
          e2.rhs = -M2;
          e2.terms.push_back({cat.eta2(k, i, j), 1.0});
          if (r_upper(i) > 0.0)
            e2.terms.push_back({cat.r(k, i), -inst.nodes[i].charge_price});
          e2.terms.push_back({cat.x(k, i, j), -M2});
          lp.add_row(std::move(e2));
        }

    // Eq11c: payment switch via strong duality, once per customer.
    if (incentive)
      for (int c = 0; c < R; ++c) {
        const InconvenienceProfile& p = profile(c);
        double M3 = m_eta3(c);
        LinearRow e3;
        e3.name = "Eq11c" + idx(c + 1);
        e3.sense = RowSense::GE;
        e3.rhs = -M3;
        e3.terms.push_back({cat.eta3(c), 1.0});
        e3.terms.push_back({cat.eps(c), -1.0});
        e3.terms.push_back({cat.u(c), -p.delay_cap});
        for (int m = 0; m < p.segment_count(); ++m)
          e3.terms.push_back({cat.zeta(c, m), p.intercepts[m]});
        for (int k = 0; k < K; ++k)
          for (int i = 0; i < V; ++i)
            if (i != c + 1) e3.terms.push_back({cat.x(k, i, c + 1), -M3});
        lp.add_row(std::move(e3));
      }

    // Charge-amount switch: no charging at nodes the vehicle does not leave.
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i) {
        if (r_upper(i) <= 0.0) continue;
        LinearRow cap;
        cap.name = "bounds_rcap" + idx(k) + idx(i);
        cap.sense = RowSense::LE;
        cap.rhs = 0.0;
        cap.terms.push_back({cat.r(k, i), 1.0});
        for (int j = 0; j < V; ++j)
          if (j != i)
            cap.terms.push_back({cat.x(k, i, j), -inst.fleet.battery_capacity});
        lp.add_row(std::move(cap));
      }

    // Interchangeable vehicles: order them by the index of their first stop
    // (idle routes sort last). Cuts mirrored copies of every plan without
    // touching the optimal value; only valid when initial charges match.
    bool identical = true;
    for (int k = 1; k < K; ++k)
      identical &= inst.fleet.initial_energy[k] == inst.fleet.initial_energy[0];
    if (identical)
      for (int k = 0; k + 1 < K; ++k) {
        LinearRow sym;
        sym.name = "bounds_sym" + idx(k);
        sym.sense = RowSense::LE;
        sym.rhs = 0.0;
        for (int j = 1; j < V; ++j) {
          double w = static_cast<double>(j == inst.end_depot() ? V : j);
          sym.terms.push_back({cat.x(k, inst.start_depot(), j), w});
          sym.terms.push_back({cat.x(k + 1, inst.start_depot(), j), -w});
        }
        lp.add_row(std::move(sym));
      }
  }

  MilpModel build() {
    auto violations = validate_instance(inst);
    if (!violations.empty()) {
      std::string msg = "build: instance invalid:";
      for (const auto& v : violations) msg += "\n  " + v;
      throw Error(msg);
    }
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j)
        if (arc_free(i, j)) {
          double chargeable = inst.nodes[i].has_charger() ? inst.fleet.battery_capacity : 0.0;
          if (inst.energy(i, j) > inst.fleet.battery_capacity + chargeable)
            throw Error("build: arc " + std::to_string(i) + "->" + std::to_string(j) +
                        " needs " + std::to_string(inst.energy(i, j)) +
                        " kWh, beyond battery capacity plus tail charging");
        }
    model.big_m = compute_big_m(inst);
    model.options = opt;
    model.incentive = incentive;
    model.lp.name = incentive ? "ievrp_incentive" : "ievrp_baseline";
    add_columns();
    add_rows();
    // Routing decisions shape everything downstream; branch on them before
    // the complementarity selectors.
    model.lp.branch_priority.assign(model.lp.num_cols(), 0);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j)
          model.lp.branch_priority[model.catalog.x(k, i, j)] = 1;
    return std::move(model);
  }
};

}  // namespace

MilpModel build_incentive_milp(const Instance& inst, const BuildOptions& options) {
  return Builder(inst, options, true).build();
}

MilpModel build_baseline_milp(const Instance& inst, const BuildOptions& options) {
  return Builder(inst, options, false).build();
}

std::string MilpModel::row_tag(int row) const {
  const std::string& name = lp.rows[row].name;
  std::size_t cut = name.find('_');
  std::string tag = cut == std::string::npos ? name : name.substr(0, cut);
  if (tag == "bounds") return "bounds";
  // Eq5lo/Eq5up, Eq6up/Eq6lo, Eq10a_gap... collapse to the equation label.
  if (tag.rfind("Eq5", 0) == 0) return "Eq5";
  if (tag.rfind("Eq6", 0) == 0) return "Eq6";
  if (tag.rfind("Eq10a", 0) == 0) return "Eq10a";
  if (tag.rfind("Eq10b", 0) == 0) return "Eq10b";
  if (tag.rfind("Eq10c", 0) == 0) return "Eq10c";
  return tag;
}

// ---------------------------------------------------------------------------
// Big-M audit
// ---------------------------------------------------------------------------

BigMAudit audit_big_m(const Instance& inst, const MilpModel& model,
                      const Eigen::VectorXd& x) {
  BigMAudit audit;
  audit.min_margin = 1e300;
  const VariableCatalog& cat = model.catalog;
  const int V = cat.num_nodes, K = cat.num_vehicles, R = cat.num_customers;

  auto note = [&](double margin, const std::string& row) {
    if (margin < audit.min_margin) {
      audit.min_margin = margin;
      audit.worst_row = row;
    }
  };

  Builder helper(inst, model.options, model.incentive);
  helper.model.big_m = model.big_m;

  for (int k = 0; k < K; ++k)
    for (int i = 0; i < V; ++i) {
      if (i == inst.end_depot()) continue;
      for (int j = 0; j < V; ++j) {
        if (j == inst.start_depot()) continue;
        if (x(cat.x(k, i, j)) > 0.5) continue;  // constraint is live, no guard
        double gr = helper.r_upper(i) > 0.0
                        ? inst.nodes[i].charge_rate * x(cat.r(k, i))
                        : 0.0;
        double expr = x(cat.t(i)) + inst.travel_time(i, j) + gr - x(cat.t(j));
        note(helper.m_time(k, i, j) - expr, "Eq4_" + std::to_string(k));
        double flow = x(cat.energy(k, i)) - x(cat.energy(k, j)) +
                      (helper.r_upper(i) > 0.0 ? x(cat.r(k, i)) : 0.0);
        note(helper.m_energy_up(i) - flow, "Eq6up");
        note(helper.m_energy_lo() + flow, "Eq6lo");
      }
    }

  for (int k = 0; k < K; ++k)
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j) {
        if (x(cat.x(k, i, j)) > 0.5) continue;
        double charge = helper.r_upper(i) > 0.0 ? x(cat.r(k, i)) : 0.0;
        double e1 = inst.fleet.time_value * inst.nodes[i].charge_rate * charge -
                    x(cat.eta1(k, i, j));
        double e2 = inst.nodes[i].charge_price * charge - x(cat.eta2(k, i, j));
        note(helper.m_eta1(i) - e1, "Eq11a");
        note(helper.m_eta2(i) - e2, "Eq11b");
      }

  if (model.incentive) {
    for (int c = 0; c < R; ++c) {
      const InconvenienceProfile& p = inst.profiles.at(c + 1);
      const int n = p.segment_count();
      double d = x(cat.delta(c)), eps = x(cat.eps(c));
      double uu = x(cat.u(c)), vv = x(cat.v(c));
      std::string cust = "_" + std::to_string(c + 1);

      double psi_u = x(cat.psi(c, n));
      if (psi_u > 0.5) note(helper.m_delta(c) - (p.delay_cap - d), "Eq10a_gap" + cust);
      else note(helper.dual_u_cap() - uu, "Eq10a_dual" + cust);
      double psi_v = x(cat.psi(c, n + 1));
      if (psi_v > 0.5) note(helper.m_delta(c) - d, "Eq10b_gap" + cust);
      else note(model.big_m.M_dual_v - vv, "Eq10b_dual" + cust);

      double comp_u = uu * (p.delay_cap - d);
      double comp_v = vv * d;
      audit.max_complementarity = std::max({audit.max_complementarity, comp_u, comp_v});
      for (int m = 0; m < n; ++m) {
        double slack = eps - (p.slopes[m] * d + p.intercepts[m]);
        double zeta = x(cat.zeta(c, m));
        audit.max_complementarity = std::max(audit.max_complementarity, zeta * slack);
        if (x(cat.psi(c, m)) > 0.5) note(helper.m_epi(c) - slack, "Eq10c_gap" + cust);
        else note(2.0 - zeta, "Eq10c_dual" + cust);
      }

      double served = 0.0;
      for (int k = 0; k < K; ++k)
        for (int i = 0; i < V; ++i)
          if (i != c + 1) served += x(cat.x(k, i, c + 1));
      if (served < 0.5) {
        double chi_dot = 0.0;
        for (int m = 0; m < n; ++m) chi_dot += x(cat.zeta(c, m)) * p.intercepts[m];
        double expr = eps + uu * p.delay_cap - chi_dot - x(cat.eta3(c));
        note(helper.m_eta3(c) - expr, "Eq11c" + cust);
      }
    }
  }
  return audit;
}

}  // namespace ievrp
