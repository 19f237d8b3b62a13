#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ievrp/reformulate.hpp"

namespace ievrp {

namespace {
constexpr double kTol = 1e-6;
}

RoutingPlan extract_solution(const Instance& inst, const MilpModel& model,
                             const Eigen::VectorXd& x) {
  if (x.size() != model.lp.num_cols())
    throw Error("extract: assignment size does not match the model");
  const VariableCatalog& cat = model.catalog;
  const int V = cat.num_nodes, K = cat.num_vehicles, R = cat.num_customers;
  RoutingPlan plan;

  auto arc_used = [&](int k, int i, int j) { return x(cat.x(k, i, j)) > 0.5; };

  std::set<std::pair<int, std::pair<int, int>>> used_arcs;
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j)
        if (i != j && arc_used(k, i, j)) used_arcs.insert({k, {i, j}});

  for (int k = 0; k < K; ++k) {
    VehicleRoute route;
    route.vehicle = k;
    int cur = inst.start_depot();
    route.stops.push_back(cur);
    int guard = 0;
    while (cur != inst.end_depot()) {
      if (++guard > V)
        throw Error("extract: route of vehicle " + std::to_string(k) +
                    " does not reach the end depot (subtour?)");
      int next = -1;
      for (int j = 0; j < V; ++j) {
        if (j == cur) continue;
        if (arc_used(k, cur, j)) {
          if (next >= 0)
            throw Error("extract: node " + std::to_string(cur) + " of vehicle " +
                        std::to_string(k) + " has two successors");
          next = j;
        }
      }
      if (next < 0)
        throw Error("extract: broken chain at " + std::to_string(cur) + " (vehicle " +
                    std::to_string(k) + ")");
      used_arcs.erase({k, {cur, next}});
      cur = next;
      route.stops.push_back(cur);
    }
    for (int stop : route.stops) {
      route.charge.push_back(stop != inst.end_depot() && inst.nodes[stop].has_charger()
                                 ? x(cat.r(k, stop))
                                 : 0.0);
      route.battery.push_back(x(cat.energy(k, stop)));
      route.arrival.push_back(x(cat.t(stop)));
    }
    plan.routes.push_back(std::move(route));
  }
  for (const auto& [k, arc] : used_arcs)
    throw Error("extract: arc " + std::to_string(arc.first) + "->" +
                std::to_string(arc.second) + " of vehicle " + std::to_string(k) +
                " lies on a cycle detached from the depot");

  std::vector<char> served(V, 0);
  for (const auto& route : plan.routes)
    for (int stop : route.stops)
      if (inst.is_customer(stop)) served[stop] = 1;
  for (int c = 0; c < R; ++c)
    if (served[c + 1]) plan.served.push_back(c + 1);

  // Plan invariants: battery range, window compliance, energy bookkeeping.
  for (const auto& route : plan.routes) {
    for (std::size_t s = 0; s < route.stops.size(); ++s) {
      int node = route.stops[s];
      double battery = route.battery[s];
      if (battery < -kTol || battery > inst.fleet.battery_capacity + kTol)
        throw Error("extract: battery at node " + std::to_string(node) +
                    " outside [0, E_max]");
      if (s + 1 < route.stops.size()) {
        double next = battery + route.charge[s] - inst.energy(node, route.stops[s + 1]);
        if (std::abs(next - route.battery[s + 1]) > kTol)
          throw Error("extract: battery bookkeeping broken on arc " +
                      std::to_string(node) + "->" + std::to_string(route.stops[s + 1]));
      }
      if (inst.is_customer(node)) {
        double tau = inst.nodes[node].desired_time;
        double width = 0.0;
        if (model.incentive)
          width = x(cat.delta(node - 1));
        else
          width = model.options.baseline_window;
        double arrival = route.arrival[s];
        if (arrival < tau - kTol || arrival > tau + width + kTol)
          throw Error("extract: arrival at customer " + std::to_string(node) +
                      " outside its window");
      }
    }
  }

  // Customer outcomes and the objective rebuilt from the plan alone.
  ObjectiveBreakdown bd;
  for (const auto& route : plan.routes) {
    for (std::size_t s = 0; s + 1 < route.stops.size(); ++s) {
      int i = route.stops[s], j = route.stops[s + 1];
      bd.travel_time_cost += inst.fleet.time_value * inst.travel_time(i, j);
      bd.charging_cost += route.charge[s] * inst.nodes[i].charge_price;
      bd.charging_time_cost +=
          inst.fleet.time_value * route.charge[s] * inst.nodes[i].charge_rate;
      if (i == inst.start_depot() &&
          (model.options.charge_idle_vehicles || inst.is_customer(j)))
        bd.usage_minus_revenue += inst.fleet.usage_cost;
      if (inst.is_customer(i)) bd.usage_minus_revenue -= inst.nodes[i].delivery_revenue;
    }
  }
  for (int c = 0; c < R; ++c) {
    CustomerOutcome out;
    out.node = c + 1;
    out.served = served[c + 1] != 0;
    if (model.incentive) {
      out.q = x(cat.q(c));
      out.delay = x(cat.delta(c));
      out.payment = out.served ? out.q * out.delay : 0.0;
      bd.incentive_payout += out.payment;
      if (out.served) {
        // The embedded KKT system must have anchored (q, delta) at a
        // follower optimum.
        const InconvenienceProfile& p = inst.profiles.at(c + 1);
        double primal = inconvenience_value(p, out.delay) - out.q * out.delay;
        double best = best_response(p, out.q).objective;
        if (std::abs(primal - best) > kTol)
          throw Error("extract: customer " + std::to_string(c + 1) +
                      " delay is not a best response to its rate");
      }
    }
    plan.customer_outcomes.push_back(out);
  }
  plan.breakdown = bd;
  plan.objective = bd.total();

  double model_obj = model.lp.objective.dot(x);
  if (std::abs(model_obj - plan.objective) > kTol) {
    std::ostringstream os;
    os << "extract: plan objective " << plan.objective
       << " disagrees with the model objective " << model_obj;
    throw Error(os.str());
  }
  return plan;
}

}  // namespace ievrp
