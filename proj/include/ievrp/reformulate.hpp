#ifndef IEVRP_REFORMULATE_HPP
#define IEVRP_REFORMULATE_HPP

#include <string>
#include <vector>

#include "ievrp/customer.hpp"
#include "ievrp/instance.hpp"
#include "ievrp/milp.hpp"

namespace ievrp {

/// One big-M constant per guarded constraint family. Values must strictly
/// exceed the attainable range of the guarded expression; a post-solve audit
/// checks that no expression comes within 1e-6 of its M.
struct BigMConfig {
  double M_time = 0.0;    // h
  double M_energy = 0.0;  // kWh
  double M_delta = 0.0;   // h
  double M_dual_u = 0.0;  // $/h
  double M_dual_v = 0.0;  // $/h
  double M_epi = 0.0;     // $
  double M_eta1 = 0.0;    // $
  double M_eta2 = 0.0;    // $
  double M_eta3 = 0.0;    // $
  double q_max = 0.0;     // $/h, incentive-rate cap
};

BigMConfig compute_big_m(const Instance& inst);

/// Column layout of the single-level model. Blocks appear in this order:
/// x (k,i,j), r (k,i), t (i), E (k,i), then per customer q, delta, eps, u,
/// v, zeta_m, psi_m, then eta1 (k,i,j), eta2 (k,i,j), eta3 (customer).
/// Structurally impossible arcs (self loops, into the start depot, out of
/// the end depot) keep their column with [0,0] bounds.
struct VariableCatalog {
  int num_nodes = 0;
  int num_vehicles = 0;
  int num_customers = 0;
  std::vector<int> segment_counts;  // per customer, catalog order
  bool has_follower_block = true;   // false for the incentive-free baseline

  int x(int k, int i, int j) const;
  int r(int k, int i) const;
  int t(int i) const;
  int energy(int k, int i) const;
  int q(int c) const;        // c = customer position (0-based among customers)
  int delta(int c) const;
  int eps(int c) const;
  int u(int c) const;
  int v(int c) const;
  int zeta(int c, int m) const;
  int psi(int c, int m) const;  // m in [0, n_c+2): m<n_c epigraph, n_c: u, n_c+1: v
  int eta1(int k, int i, int j) const;
  int eta2(int k, int i, int j) const;
  int eta3(int c) const;
  int total() const;

private:
  int follower_offset(int c) const;
  int follower_block_size() const;
};

struct BuildOptions {
  /// When false (default), the vehicle usage fee is charged only on arcs
  /// from the start depot to a customer, so an idle vehicle costs nothing.
  /// When true, c_v is charged on every arc leaving the start depot as
  /// printed in the operator cost vector.
  bool charge_idle_vehicles = false;
  /// Rigid window width for the incentive-free baseline (h).
  double baseline_window = 0.0;
  /// Multiplies the q upper bound (and the dual big-Ms derived from it);
  /// used by the cap-doubling audit.
  double q_cap_scale = 1.0;
};

/// Solver-agnostic MILP: catalog + linear program whose rows carry a
/// provenance tag (Eq2..Eq8, Eq9a, Eq9b, Eq10a..Eq10c, Eq11a..Eq11c, bounds)
/// encoded as the prefix of the row name.
struct MilpModel {
  VariableCatalog catalog;
  LinearProgram lp;
  BigMConfig big_m;
  BuildOptions options;
  bool incentive = true;

  std::string row_tag(int row) const;  // provenance prefix of row name
};

MilpModel build_incentive_milp(const Instance& inst, const BuildOptions& options = {});
MilpModel build_baseline_milp(const Instance& inst, const BuildOptions& options = {});

struct VehicleRoute {
  int vehicle = 0;
  std::vector<int> stops;            // node ids, start depot .. end depot
  std::vector<double> charge;        // kWh charged at each stop
  std::vector<double> battery;       // kWh on arrival at each stop
  std::vector<double> arrival;       // h, shared t at each stop
};

struct ObjectiveBreakdown {
  double charging_cost = 0.0;       // sum r p
  double usage_minus_revenue = 0.0; // sum c_i x
  double travel_time_cost = 0.0;    // omega_T sum T x
  double charging_time_cost = 0.0;  // omega_T sum r g x
  double incentive_payout = 0.0;    // sum q d over served customers

  double total() const {
    return charging_cost + usage_minus_revenue + travel_time_cost +
           charging_time_cost + incentive_payout;
  }
};

struct CustomerOutcome {
  int node = 0;
  bool served = false;
  double q = 0.0;
  double delay = 0.0;
  double payment = 0.0;  // q * delay if served else 0
};

struct RoutingPlan {
  std::vector<VehicleRoute> routes;
  std::vector<int> served;  // customer node ids
  std::vector<CustomerOutcome> customer_outcomes;
  ObjectiveBreakdown breakdown;
  double objective = 0.0;
};

/// Decodes a constraint-feasible assignment into routes, rechecks the plan
/// invariants, recomputes the objective from the plan (must agree with the
/// model objective to 1e-6) and verifies each served customer's (q, delta)
/// is follower-optimal. Throws Error on subtours, broken successor chains
/// or any consistency failure.
RoutingPlan extract_solution(const Instance& inst, const MilpModel& model,
                             const Eigen::VectorXd& assignment);

/// Post-solve certificate that every big-M constant stayed inactive.
struct BigMAudit {
  double min_margin = 0.0;       // min over guarded rows of M - expression
  double max_complementarity = 0.0;  // max of u(db-d), v d, zeta*slack
  std::string worst_row;
};

BigMAudit audit_big_m(const Instance& inst, const MilpModel& model,
                      const Eigen::VectorXd& assignment);

}  // namespace ievrp

#endif  // IEVRP_REFORMULATE_HPP
