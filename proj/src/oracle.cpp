#include "ievrp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ievrp {

namespace {
constexpr double kFeasTol = 1e-9;
}

InducedPayment induced_payment(const InconvenienceProfile& profile, double delay,
                               double q_step) {
  if (delay < -1e-12 || delay > profile.delay_cap + 1e-12)
    throw Error("induced_payment: delay outside [0, delay_cap]");
  delay = std::clamp(delay, 0.0, profile.delay_cap);

  // Sweep candidate rates in increasing order; the optimistic response is
  // non-decreasing in q, so the first rate whose response reaches the delay
  // is the minimal one. The exact slopes join the grid so rates that are not
  // grid multiples are still hit exactly.
  std::set<double> grid;
  double q_hi = std::max(0.0, profile.slopes.back());
  for (double q = 0.0; q < q_hi + q_step; q += q_step) grid.insert(q);
  for (double s : profile.slopes)
    if (s >= 0.0) grid.insert(s);
  grid.insert(q_hi);

  for (double q : grid) {
    FollowerSolution sol = best_response(profile, q);
    if (sol.delay >= delay - 1e-9) {
      double effective = std::max(delay, pessimistic_response(profile, q));
      return {q, q * effective};
    }
  }
  double q = q_hi;  // the largest slope always induces the cap
  return {q, q * delay};
}

InducedPayment induced_payment_closed_form(const InconvenienceProfile& profile,
                                           double delay) {
  if (delay < -1e-12 || delay > profile.delay_cap + 1e-12)
    throw Error("induced_payment_closed_form: delay outside [0, delay_cap]");
  if (delay <= 1e-12) return {0.0, 0.0};
  // Left derivative of the envelope: the smallest slope active at the delay.
  double env = inconvenience_value(profile, delay);
  double slope = profile.slopes.back();
  for (int m = 0; m < profile.segment_count(); ++m) {
    double v = profile.slopes[m] * delay + profile.intercepts[m];
    if (env - v <= 1e-9) {
      slope = profile.slopes[m];
      break;  // slopes are increasing, the first active one is the smallest
    }
  }
  double q = std::max(0.0, slope);
  return {q, q * delay};
}

namespace {

struct RouteEval {
  bool feasible = false;
  double cost = 0.0;                  // charging + payments + fees + travel
  std::vector<double> delays;         // per on-route customer
  std::vector<double> charges;        // per stop
};

class RouteOptimizer {
public:
  RouteOptimizer(const Instance& inst, const BuildOptions& opt, double q_step)
      : inst_(inst), opt_(opt), q_step_(q_step) {}

  // stops = [start depot, customers..., end depot]
  RouteEval optimize(const std::vector<int>& stops, int vehicle) {
    stops_ = &stops;
    const int legs = static_cast<int>(stops.size()) - 1;
    leg_energy_.resize(legs);
    leg_time_.resize(legs);
    for (int l = 0; l < legs; ++l) {
      leg_energy_[l] = inst_.energy(stops[l], stops[l + 1]);
      leg_time_[l] = inst_.travel_time(stops[l], stops[l + 1]);
    }
    fixed_cost_ = 0.0;
    for (int l = 0; l < legs; ++l) {
      int i = stops[l], j = stops[l + 1];
      fixed_cost_ += inst_.fleet.time_value * inst_.travel_time(i, j);
      if (i == inst_.start_depot() &&
          (opt_.charge_idle_vehicles || inst_.is_customer(j)))
        fixed_cost_ += inst_.fleet.usage_cost;
      if (inst_.is_customer(i)) fixed_cost_ -= inst_.nodes[i].delivery_revenue;
    }
    best_ = RouteEval{};
    best_.cost = 1e300;
    charges_.assign(stops.size(), 0.0);
    delays_.assign(stops.size(), 0.0);
    descend(0, inst_.fleet.initial_energy[vehicle], 0.0, 0.0);
    if (best_.cost < 1e300) best_.feasible = true;
    best_.cost += best_.feasible ? fixed_cost_ : 0.0;
    return best_;
  }

private:
  // Walk the route stop by stop. `battery`/`ready` describe the state when
  // service at stop s may begin (battery on arrival, clock after waiting).
  // Branches on the charge amount at each charger from a finite candidate
  // set: nothing, exact refills that empty the battery at a later arrival,
  // a full battery, and amounts that pin a later arrival to a window or
  // payment breakpoint. The objective is strictly increasing in every charge
  // beyond need, so an optimal charging plan sits on one of these events.
  void descend(int s, double battery, double ready, double cost_so_far) {
    const std::vector<int>& stops = *stops_;
    const int n = static_cast<int>(stops.size());
    if (battery < -kFeasTol || battery > inst_.fleet.battery_capacity + kFeasTol)
      return;
    if (cost_so_far >= best_.cost - 1e-12) return;  // cannot improve
    int node = stops[s];
    if (inst_.is_customer(node)) {
      double tau = inst_.nodes[node].desired_time;
      const InconvenienceProfile& p = inst_.profiles.at(node);
      double delay = std::max(0.0, ready - tau);
      if (delay > p.delay_cap + kFeasTol) return;
      delay = std::min(delay, p.delay_cap);
      cost_so_far += induced_payment(p, delay, q_step_).payment;
      delays_[s] = delay;
      ready = std::max(ready, tau);
    } else if (node == inst_.end_depot()) {
      if (ready > inst_.nodes[node].desired_time + inst_.fleet.horizon + kFeasTol)
        return;
      if (cost_so_far < best_.cost - 1e-12) {
        best_.cost = cost_so_far;
        best_.charges = charges_;
        best_.delays.assign(delays_.begin() + 1, delays_.end() - 1);
      }
      return;
    }

    // Charge candidates at this stop.
    std::vector<double> cands{0.0};
    if (inst_.nodes[node].has_charger() && node != inst_.end_depot()) {
      double need = 0.0, acc = battery;
      bool deficit = false;
      for (int l = s; l + 1 < n; ++l) {
        acc -= leg_energy_[l];
        need = std::max(need, -acc);
        if (acc < -kFeasTol) deficit = true;
      }
      if (deficit) {
        double cap = inst_.fleet.battery_capacity;
        auto push = [&](double r) {
          if (r > kFeasTol && r <= cap + kFeasTol) cands.push_back(std::min(r, cap));
        };
        // battery exactly empty on a later arrival (no interim charge)
        double consumed = 0.0;
        for (int l = s; l + 1 < n; ++l) {
          consumed += leg_energy_[l];
          push(consumed - battery);
        }
        push(cap - battery);  // refill on departure
        push(cap);            // charge-amount cap
        // pin a later arrival to a window edge or payment breakpoint
        double g = inst_.nodes[node].charge_rate;
        if (g > 0.0) {
          double travel = 0.0;
          for (int l = s; l + 1 < n; ++l) {
            travel += leg_time_[l];
            int later = stops[l + 1];
            if (!inst_.is_customer(later)) continue;
            const InconvenienceProfile& p = inst_.profiles.at(later);
            double tau = inst_.nodes[later].desired_time;
            std::vector<double> targets{tau, tau + p.delay_cap};
            for (int a = 0; a < p.segment_count(); ++a)
              for (int b = a + 1; b < p.segment_count(); ++b) {
                double dg = p.slopes[b] - p.slopes[a];
                if (dg == 0.0) continue;
                double cross = (p.intercepts[a] - p.intercepts[b]) / dg;
                if (cross > 0.0 && cross < p.delay_cap) targets.push_back(tau + cross);
              }
            for (double target : targets) push((target - ready - travel) / g);
          }
        }
        std::sort(cands.begin(), cands.end());
        cands.erase(std::unique(cands.begin(), cands.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                    cands.end());
      }
    }

    for (double r : cands) {
      charges_[s] = r;
      double charge_cost = r * (inst_.nodes[node].charge_price +
                                inst_.fleet.time_value * inst_.nodes[node].charge_rate);
      double depart = ready + r * inst_.nodes[node].charge_rate;
      double next_battery = battery + r - leg_energy_[s];
      descend(s + 1, next_battery, depart + leg_time_[s], cost_so_far + charge_cost);
    }
    charges_[s] = 0.0;
  }

  const Instance& inst_;
  const BuildOptions& opt_;
  double q_step_;
  const std::vector<int>* stops_ = nullptr;
  std::vector<double> leg_energy_, leg_time_;
  double fixed_cost_ = 0.0;
  RouteEval best_;
  std::vector<double> charges_, delays_;
};

}  // namespace

OracleResult solve_bruteforce(const Instance& inst, double delta_grid_step,
                              const BuildOptions& options) {
  const int R = inst.customer_count();
  const int K = inst.fleet.vehicle_count;
  if (R > 4 || K > 2)
    throw Error("solve_bruteforce: guarded to at most 4 customers and 2 vehicles");

  OracleResult result;
  result.objective = 1e300;
  RouteOptimizer optimizer(inst, options, delta_grid_step);

  std::vector<int> all_customers = inst.customers();
  for (int mask = 0; mask < (1 << R); ++mask) {
    std::vector<int> subset;
    for (int c = 0; c < R; ++c)
      if (mask & (1 << c)) subset.push_back(all_customers[c]);
    std::sort(subset.begin(), subset.end());
    std::vector<int> perm = subset;
    do {
      // compositions of the permutation into K consecutive blocks
      std::vector<std::vector<int>> size_choices;
      {
        std::vector<int> cur(K, 0);
        auto rec = [&](auto&& self, int k, int rest) -> void {
          if (k == K - 1) {
            cur[k] = rest;
            size_choices.push_back(cur);
            return;
          }
          for (int take = 0; take <= rest; ++take) {
            cur[k] = take;
            self(self, k + 1, rest - take);
          }
        };
        rec(rec, 0, static_cast<int>(perm.size()));
      }
      for (const auto& choice : size_choices) {
        ++result.plans_enumerated;
        double total = 0.0;
        bool ok = true;
        OraclePlan plan;
        plan.routes.assign(K, {});
        int at = 0;
        for (int k = 0; k < K && ok; ++k) {
          std::vector<int> stops{inst.start_depot()};
          for (int s = 0; s < choice[k]; ++s) stops.push_back(perm[at + s]);
          at += choice[k];
          stops.push_back(inst.end_depot());
          RouteEval eval = optimizer.optimize(stops, k);
          if (!eval.feasible) {
            ok = false;
            break;
          }
          total += eval.cost;
          plan.routes[k].assign(stops.begin() + 1, stops.end() - 1);
          for (std::size_t s = 0; s + 2 < stops.size(); ++s) {
            plan.delay_customers.push_back(stops[s + 1]);
            plan.delays.push_back(eval.delays[s]);
            plan.payment_total +=
                induced_payment(inst.profiles.at(stops[s + 1]), eval.delays[s],
                                delta_grid_step)
                    .payment;
          }
        }
        if (ok && total < result.objective - 1e-12) {
          result.objective = total;
          result.best = plan;
          result.feasible = true;
        }
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return result;
}

}  // namespace ievrp
