#ifndef IEVRP_INSTANCE_HPP
#define IEVRP_INSTANCE_HPP

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ievrp/error.hpp"

namespace ievrp {

enum class NodeKind { StartDepot, Customer, EndDepot };
enum class ChargerKind { None, Slow, Fast };

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::Customer;
  Eigen::Vector2d position{0.0, 0.0};  // planar km
  ChargerKind charger = ChargerKind::None;
  double charge_price = 0.0;  // p_i, $/kWh (valid iff charger != None)
  double charge_rate = 0.0;   // g_i, h/kWh  (valid iff charger != None)
  double desired_time = 0.0;  // tau, h
  double delivery_revenue = 0.0;  // D_i, $ (customers only)

  bool has_charger() const { return charger != ChargerKind::None; }
};

struct FleetParams {
  int vehicle_count = 1;
  double battery_capacity = 90.0;        // E_max, kWh
  std::vector<double> initial_energy;    // E_0 per vehicle, kWh
  double usage_cost = 199.0;             // c_v, $
  double consumption_rate = 0.24;        // phi, kWh/km
  double speed = 60.0;                   // km/h
  double time_value = 2.0;               // omega_T, $/h
  double horizon = 24.0;                 // depot window width, h
};

/// Piecewise-affine inconvenience I(d) = max_m slope[m]*d + intercept[m],
/// together with the largest admissible delay.
struct InconvenienceProfile {
  std::vector<double> slopes;      // gamma_m, $/h, strictly increasing
  std::vector<double> intercepts;  // chi_m, $
  double delay_cap = 1.0;          // delta_bar, h

  int segment_count() const { return static_cast<int>(slopes.size()); }
};

struct Instance {
  std::vector<Node> nodes;  // nodes[0] start depot, nodes.back() end depot
  FleetParams fleet;
  std::map<int, InconvenienceProfile> profiles;  // keyed by customer node id
  Eigen::MatrixXd distance;     // d_ij, km
  Eigen::MatrixXd travel_time;  // T_ij, h
  Eigen::MatrixXd energy;       // e_ij, kWh

  int size() const { return static_cast<int>(nodes.size()); }
  int start_depot() const { return 0; }
  int end_depot() const { return size() - 1; }
  int customer_count() const { return size() - 2; }
  bool is_customer(int i) const { return i > 0 && i + 1 < size(); }

  std::vector<int> customers() const;

  /// Recomputes travel_time and energy from distance and the fleet rates.
  void derive_matrices();
};

/// Fills derived matrices from node coordinates (Euclidean distances).
void compute_matrices_from_coordinates(Instance& inst);

/// Structural validation. Empty result means every type invariant holds;
/// each entry names the node/field that is violated.
std::vector<std::string> validate_instance(const Instance& inst);

/// Non-fatal advisories (e.g. an arc whose energy demand exceeds what a full
/// battery plus tail charging could cover, or coincident customer sites).
std::vector<std::string> instance_warnings(const Instance& inst);

/// Reads the sectioned text format documented in docs/instance-format.md.
Instance load_instance(const std::string& path);
/// Writes an instance such that load_instance round-trips bit-exactly.
void save_instance(const Instance& inst, const std::string& path);
std::string instance_to_string(const Instance& inst);
Instance parse_instance(const std::string& text, const std::string& origin = "<string>");

struct GeneratorParams {
  int n_customers = 6;
  int n_vehicles = 2;
  double delay_cap = 1.5;   // delta_bar, h, same for every customer
  double gamma2 = 1.5;      // second profile slope, $/h
  // Optional coordinate pool; when empty, points are uniform in a
  // 100x100 km box. Sampling is without replacement.
  std::vector<Eigen::Vector2d> coordinate_pool;
};

/// Deterministic instance generator. Draw order is fixed and never depends
/// on delay_cap/gamma2, so sweeps over those parameters share coordinates,
/// revenues and desired times seed-for-seed.
Instance generate_random_instance(std::uint64_t seed, const GeneratorParams& params);
Instance generate_random_instance(std::uint64_t seed, int n_customers, int n_vehicles,
                                  double delay_cap, double gamma2);

/// Loads a whitespace-separated "x y" per line coordinate pool file.
std::vector<Eigen::Vector2d> load_coordinate_pool(const std::string& path);

}  // namespace ievrp

#endif  // IEVRP_INSTANCE_HPP
