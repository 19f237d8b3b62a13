#ifndef IEVRP_ORACLE_HPP
#define IEVRP_ORACLE_HPP

#include <vector>

#include "ievrp/customer.hpp"
#include "ievrp/instance.hpp"
#include "ievrp/reformulate.hpp"

namespace ievrp {

struct InducedPayment {
  double rate = 0.0;     // minimal q making the delay a best response
  double payment = 0.0;  // rate * delay
};

/// Minimal incentive rate q such that `delay` lies in the follower's argmin
/// under q, found by sweeping best_response over a q grid of the given step
/// (the profile slopes are included as exact sweep candidates, so grid
/// placement of the slopes is not required). Throws outside [0, delay_cap].
InducedPayment induced_payment(const InconvenienceProfile& profile, double delay,
                               double q_step = 1e-3);

/// Closed form of the same quantity: q = max(0, left derivative of the
/// envelope at `delay`). Used to cross-check the sweep, never to replace it.
InducedPayment induced_payment_closed_form(const InconvenienceProfile& profile,
                                           double delay);

struct OraclePlan {
  std::vector<std::vector<int>> routes;  // customer ids per vehicle, in order
  std::vector<double> delays;            // per customer id present in routes
  std::vector<int> delay_customers;
  double payment_total = 0.0;
};

struct OracleResult {
  bool feasible = false;
  double objective = 0.0;
  OraclePlan best;
  std::int64_t plans_enumerated = 0;
};

/// Brute-force optimistic bi-level reference for tiny instances (at most
/// 4 customers and 2 vehicles, guarded). Enumerates every ordered partition
/// of every served subset into vehicle routes; per route the continuous
/// charging/delay subproblem is solved by exhaustive enumeration of event
/// candidates (battery-empty, battery-full and window-criticality points),
/// with delays priced through induced_payment at the given grid step.
OracleResult solve_bruteforce(const Instance& inst, double delta_grid_step = 1e-3,
                              const BuildOptions& options = {});

}  // namespace ievrp

#endif  // IEVRP_ORACLE_HPP
