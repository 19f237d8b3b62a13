#ifndef IEVRP_CUSTOMER_HPP
#define IEVRP_CUSTOMER_HPP

#include <vector>

#include "ievrp/instance.hpp"

namespace ievrp {

/// Primal/dual solution of one customer's delay-choice problem
///   min_{d,e} e - q*d   s.t. 0 <= d <= delta_bar, e >= slope_m*d + chi_m.
/// u, v are the multipliers of d <= delta_bar and -d <= 0; zeta_m of the
/// epigraph rows.
struct FollowerSolution {
  double delay = 0.0;     // d, h
  double epigraph = 0.0;  // e, $; equals I(delay) at any optimum
  double objective = 0.0; // e - q*d
  double u = 0.0;
  double v = 0.0;
  std::vector<double> zeta;
};

/// I(d) = max_m slope_m*d + chi_m. Throws Error outside [0, delay_cap].
double inconvenience_value(const InconvenienceProfile& profile, double delay);

/// Analytic best response to an incentive rate q >= 0. Among optimal delays
/// the largest one is returned (the leader-preferred element of the argmin,
/// i.e. what the KKT-embedded single-level model may select). Duals satisfy
/// the stationarity/complementarity system to 1e-9.
FollowerSolution best_response(const InconvenienceProfile& profile, double q);

/// Smallest optimal delay for rate q (same tie set as best_response).
double pessimistic_response(const InconvenienceProfile& profile, double q);

struct KktResiduals {
  double stationarity_delta = 0.0;  // |-q + u - v + sum slope_m zeta_m|
  double stationarity_eps = 0.0;    // |1 - sum zeta_m|
  double comp_u = 0.0;              // |u (delta_bar - d)|
  double comp_v = 0.0;              // |v d|
  double comp_zeta = 0.0;           // max_m |zeta_m (e - slope_m d - chi_m)|
  double primal_feasibility = 0.0;  // worst violated primal slack
  double dual_feasibility = 0.0;    // worst negative multiplier

  double max() const;
};

KktResiduals kkt_residuals(const InconvenienceProfile& profile, double q,
                           const FollowerSolution& sol);

/// (e - q d) - (-u delta_bar + sum zeta_m chi_m): primal minus dual objective.
/// Zero at any optimum of the follower problem.
double strong_duality_gap(const InconvenienceProfile& profile, double q,
                          const FollowerSolution& sol);

}  // namespace ievrp

#endif  // IEVRP_CUSTOMER_HPP
