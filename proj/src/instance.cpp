#include "ievrp/instance.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace ievrp {

namespace {

// Deterministic draws: distributions are hand-rolled on top of mt19937_64 so
// generated instances do not depend on the standard library's
// std::*_distribution implementations.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal(double mean, double stddev) {
    double u1 = (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * z;
  }
  std::uint64_t below(std::uint64_t n) { return gen() % n; }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::StartDepot: return "start_depot";
    case NodeKind::Customer: return "customer";
    case NodeKind::EndDepot: return "end_depot";
  }
  return "?";
}

const char* charger_name(ChargerKind c) {
  switch (c) {
    case ChargerKind::None: return "none";
    case ChargerKind::Slow: return "slow";
    case ChargerKind::Fast: return "fast";
  }
  return "?";
}

NodeKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "start_depot") return NodeKind::StartDepot;
  if (s == "customer") return NodeKind::Customer;
  if (s == "end_depot") return NodeKind::EndDepot;
  throw Error(where + ": unknown node kind '" + s + "'");
}

ChargerKind parse_charger(const std::string& s, const std::string& where) {
  if (s == "none") return ChargerKind::None;
  if (s == "slow") return ChargerKind::Slow;
  if (s == "fast") return ChargerKind::Fast;
  throw Error(where + ": unknown charger kind '" + s + "'");
}

double parse_num(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(where + ": expected a number, got '" + s + "'");
  }
}

}  // namespace

std::vector<int> Instance::customers() const {
  std::vector<int> out;
  for (int i = 1; i + 1 < size(); ++i) out.push_back(i);
  return out;
}

void Instance::derive_matrices() {
  travel_time = distance / fleet.speed;
  energy = fleet.consumption_rate * distance;
}

void compute_matrices_from_coordinates(Instance& inst) {
  const int n = inst.size();
  inst.distance.setZero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        inst.distance(i, j) = (inst.nodes[i].position - inst.nodes[j].position).norm();
  inst.derive_matrices();
}

std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> out;
  auto add = [&](const std::string& s) { out.push_back(s); };
  const int n = inst.size();
  if (n < 2) {
    add("instance: needs at least a start and an end depot");
    return out;
  }
  int starts = 0, ends = 0;
  for (const auto& node : inst.nodes) {
    if (node.kind == NodeKind::StartDepot) ++starts;
    if (node.kind == NodeKind::EndDepot) ++ends;
  }
  if (starts != 1) add("instance: exactly one start_depot required");
  if (ends != 1) add("instance: exactly one end_depot required");
  if (inst.nodes.front().kind != NodeKind::StartDepot)
    add("node[0]: must be the start_depot");
  if (inst.nodes.back().kind != NodeKind::EndDepot)
    add("node[" + std::to_string(n - 1) + "]: must be the end_depot");

  for (int i = 0; i < n; ++i) {
    const Node& node = inst.nodes[i];
    std::string tag = "node[" + std::to_string(i) + "]";
    if (node.id != i) add(tag + ": id must equal its position in the node list");
    if (node.has_charger() && node.charge_rate <= 0.0)
      add(tag + ": charge_rate must be positive when a charger is present");
    if (node.has_charger() && node.charge_price < 0.0)
      add(tag + ": charge_price must be nonnegative");
    if (node.desired_time < 0.0) add(tag + ": desired_time must be nonnegative");
    if (node.kind == NodeKind::Customer && !(node.delivery_revenue > 0.0))
      add(tag + ": delivery_revenue required");
  }

  const FleetParams& f = inst.fleet;
  if (f.vehicle_count < 1) add("fleet: vehicle_count must be at least 1");
  if (!(f.battery_capacity > 0.0)) add("fleet: battery_capacity must be positive");
  if (!(f.consumption_rate > 0.0)) add("fleet: consumption_rate must be positive");
  if (!(f.speed > 0.0)) add("fleet: speed must be positive");
  if (!(f.time_value > 0.0)) add("fleet: time_value must be positive");
  if (!(f.horizon > 0.0)) add("fleet: horizon must be positive");
  if (static_cast<int>(f.initial_energy.size()) != f.vehicle_count)
    add("fleet: initial_energy must list one value per vehicle");
  for (std::size_t k = 0; k < f.initial_energy.size(); ++k)
    if (f.initial_energy[k] < 0.0 || f.initial_energy[k] > f.battery_capacity)
      add("fleet: initial_energy[" + std::to_string(k) + "] outside [0, E_max]");

  for (int c : inst.customers()) {
    std::string tag = "profile[" + std::to_string(c) + "]";
    auto it = inst.profiles.find(c);
    if (it == inst.profiles.end()) {
      add(tag + ": missing inconvenience profile");
      continue;
    }
    const InconvenienceProfile& p = it->second;
    if (p.slopes.empty()) add(tag + ": needs at least one segment");
    if (p.slopes.size() != p.intercepts.size())
      add(tag + ": slopes and intercepts must have the same length");
    for (std::size_t m = 1; m < p.slopes.size(); ++m)
      if (!(p.slopes[m] > p.slopes[m - 1])) {
        add(tag + ": segment slopes must be strictly increasing");
        break;
      }
    if (!(p.delay_cap > 0.0)) add(tag + ": delay_cap must be positive");
  }

  auto check_matrix = [&](const Eigen::MatrixXd& mat, const std::string& name) {
    if (mat.rows() != n || mat.cols() != n) {
      add("matrix " + name + ": must be " + std::to_string(n) + "x" + std::to_string(n));
      return false;
    }
    for (int i = 0; i < n; ++i)
      if (mat(i, i) != 0.0) {
        add("matrix " + name + ": diagonal must be zero");
        return false;
      }
    return true;
  };
  bool dims = check_matrix(inst.distance, "distance") &&
              check_matrix(inst.travel_time, "travel_time") &&
              check_matrix(inst.energy, "energy");
  if (dims) {
    for (int i = 0; i < n && dims; ++i)
      for (int j = 0; j < n && dims; ++j) {
        double d = inst.distance(i, j);
        double scale = std::max(1.0, std::abs(d));
        if (std::abs(inst.travel_time(i, j) * inst.fleet.speed - d) > 1e-9 * scale) {
          add("matrix travel_time: T*speed must equal distance (entry " +
              std::to_string(i) + "," + std::to_string(j) + ")");
          dims = false;
        } else if (std::abs(inst.energy(i, j) - inst.fleet.consumption_rate * d) >
                   1e-9 * scale) {
          add("matrix energy: e must equal phi*distance (entry " + std::to_string(i) +
              "," + std::to_string(j) + ")");
          dims = false;
        }
      }
  }
  return out;
}

std::vector<std::string> instance_warnings(const Instance& inst) {
  std::vector<std::string> out;
  const int n = inst.size();
  if (inst.energy.rows() != n || inst.energy.cols() != n) return out;
  for (int i = 0; i + 1 < n; ++i) {
    double chargeable = inst.nodes[i].has_charger() ? inst.fleet.battery_capacity : 0.0;
    for (int j = 1; j < n; ++j) {
      if (i == j) continue;
      if (inst.energy(i, j) > inst.fleet.battery_capacity + chargeable)
        out.push_back("arc " + std::to_string(i) + "->" + std::to_string(j) +
                      ": energy demand exceeds battery capacity plus tail charging");
    }
  }
  for (int i = 1; i + 1 < n; ++i)
    for (int j = i + 1; j + 1 < n; ++j)
      if ((inst.nodes[i].position - inst.nodes[j].position).norm() < 1e-12)
        out.push_back("customers " + std::to_string(i) + " and " + std::to_string(j) +
                      " are coincident; zero-length arcs admit phantom cycles");
  return out;
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

std::string instance_to_string(const Instance& inst) {
  std::ostringstream os;
  os << "ievrp-instance 1\n";
  const FleetParams& f = inst.fleet;
  os << "[fleet]\n";
  os << "vehicles " << f.vehicle_count << "\n";
  os << "battery_kwh " << fmt(f.battery_capacity) << "\n";
  os << "initial_kwh";
  for (double e : f.initial_energy) os << " " << fmt(e);
  os << "\n";
  os << "usage_cost " << fmt(f.usage_cost) << "\n";
  os << "consumption_kwh_per_km " << fmt(f.consumption_rate) << "\n";
  os << "speed_km_h " << fmt(f.speed) << "\n";
  os << "time_value_per_h " << fmt(f.time_value) << "\n";
  os << "horizon_h " << fmt(f.horizon) << "\n";
  os << "[nodes]\n";
  for (const Node& node : inst.nodes) {
    os << node.id << " " << kind_name(node.kind) << " " << fmt(node.position.x())
       << " " << fmt(node.position.y()) << " " << charger_name(node.charger);
    if (node.has_charger())
      os << " " << fmt(node.charge_price) << " " << fmt(node.charge_rate);
    else
      os << " - -";
    os << " " << fmt(node.desired_time);
    if (node.kind == NodeKind::Customer)
      os << " " << fmt(node.delivery_revenue);
    else
      os << " -";
    os << "\n";
  }
  os << "[profiles]\n";
  for (const auto& [cust, p] : inst.profiles) {
    os << cust << " " << p.segment_count();
    for (double s : p.slopes) os << " " << fmt(s);
    for (double c : p.intercepts) os << " " << fmt(c);
    os << " " << fmt(p.delay_cap) << "\n";
  }
  os << "[matrices]\n";
  os << "distance\n";
  for (int i = 0; i < inst.size(); ++i) {
    for (int j = 0; j < inst.size(); ++j)
      os << (j ? " " : "") << fmt(inst.distance(i, j));
    os << "\n";
  }
  return os.str();
}

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << instance_to_string(inst);
}

Instance parse_instance(const std::string& text, const std::string& origin) {
  Instance inst;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  std::string section;
  bool have_distance = false;
  std::vector<std::vector<double>> dist_rows;
  bool in_distance = false;

  auto where = [&]() { return origin + ":" + std::to_string(line_no); };
  auto tokens_of = [](const std::string& s) {
    std::vector<std::string> toks;
    std::istringstream ts(s);
    std::string t;
    while (ts >> t) toks.push_back(t);
    return toks;
  };

  if (!std::getline(is, line))
    throw Error(origin + ": empty instance file");
  ++line_no;
  if (line.rfind("ievrp-instance", 0) != 0)
    throw Error(where() + ": missing 'ievrp-instance' header");

  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '[') {
      section = line;
      in_distance = false;
      continue;
    }
    auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (section == "[fleet]") {
      const std::string& key = toks[0];
      auto need = [&](std::size_t k) {
        if (toks.size() < k + 1) throw Error(where() + ": '" + key + "' needs a value");
      };
      if (key == "vehicles") {
        need(1);
        inst.fleet.vehicle_count = static_cast<int>(parse_num(toks[1], where()));
      } else if (key == "battery_kwh") {
        need(1);
        inst.fleet.battery_capacity = parse_num(toks[1], where());
      } else if (key == "initial_kwh") {
        inst.fleet.initial_energy.clear();
        for (std::size_t i = 1; i < toks.size(); ++i)
          inst.fleet.initial_energy.push_back(parse_num(toks[i], where()));
      } else if (key == "usage_cost") {
        need(1);
        inst.fleet.usage_cost = parse_num(toks[1], where());
      } else if (key == "consumption_kwh_per_km") {
        need(1);
        inst.fleet.consumption_rate = parse_num(toks[1], where());
      } else if (key == "speed_km_h") {
        need(1);
        inst.fleet.speed = parse_num(toks[1], where());
      } else if (key == "time_value_per_h") {
        need(1);
        inst.fleet.time_value = parse_num(toks[1], where());
      } else if (key == "horizon_h") {
        need(1);
        inst.fleet.horizon = parse_num(toks[1], where());
      } else {
        throw Error(where() + ": unknown fleet key '" + key + "'");
      }
    } else if (section == "[nodes]") {
      if (toks.size() != 9)
        throw Error(where() + ": node line needs 9 fields "
                    "(id kind x y charger price rate desired revenue)");
      Node node;
      node.id = static_cast<int>(parse_num(toks[0], where()));
      node.kind = parse_kind(toks[1], where());
      node.position = {parse_num(toks[2], where()), parse_num(toks[3], where())};
      node.charger = parse_charger(toks[4], where());
      if (node.has_charger()) {
        if (toks[5] == "-" || toks[6] == "-")
          throw Error(where() + ": charge_price/charge_rate required with a charger");
        node.charge_price = parse_num(toks[5], where());
        node.charge_rate = parse_num(toks[6], where());
      } else if (toks[5] != "-" || toks[6] != "-") {
        throw Error(where() + ": charge_price/charge_rate must be '-' without a charger");
      }
      node.desired_time = parse_num(toks[7], where());
      if (node.kind == NodeKind::Customer) {
        if (toks[8] == "-")
          throw Error(where() + ": delivery_revenue required");
        node.delivery_revenue = parse_num(toks[8], where());
      } else if (toks[8] != "-") {
        throw Error(where() + ": delivery_revenue must be '-' for depots");
      }
      inst.nodes.push_back(node);
    } else if (section == "[profiles]") {
      if (toks.size() < 2) throw Error(where() + ": malformed profile line");
      int cust = static_cast<int>(parse_num(toks[0], where()));
      int n = static_cast<int>(parse_num(toks[1], where()));
      if (n < 1 || static_cast<int>(toks.size()) != 2 + 2 * n + 1)
        throw Error(where() + ": profile line needs " + std::to_string(2 + 2 * n + 1) +
                    " fields for " + std::to_string(n) + " segments");
      InconvenienceProfile p;
      for (int m = 0; m < n; ++m) p.slopes.push_back(parse_num(toks[2 + m], where()));
      for (int m = 0; m < n; ++m)
        p.intercepts.push_back(parse_num(toks[2 + n + m], where()));
      p.delay_cap = parse_num(toks[2 + 2 * n], where());
      inst.profiles[cust] = p;
    } else if (section == "[matrices]") {
      if (toks.size() == 1 && toks[0] == "distance") {
        in_distance = true;
        have_distance = true;
        continue;
      }
      if (in_distance) {
        std::vector<double> row;
        for (const auto& t : toks) row.push_back(parse_num(t, where()));
        dist_rows.push_back(std::move(row));
      } else {
        throw Error(where() + ": unknown matrix '" + toks[0] + "'");
      }
    } else {
      throw Error(where() + ": content outside any known section");
    }
  }

  if (inst.nodes.empty()) throw Error(origin + ": no [nodes] section");
  if (have_distance) {
    const int n = inst.size();
    if (static_cast<int>(dist_rows.size()) != n)
      throw Error(origin + ": distance matrix must have " + std::to_string(n) + " rows");
    inst.distance.setZero(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(dist_rows[i].size()) != n)
        throw Error(origin + ": distance row " + std::to_string(i) + " must have " +
                    std::to_string(n) + " entries");
      for (int j = 0; j < n; ++j) inst.distance(i, j) = dist_rows[i][j];
    }
    inst.derive_matrices();
  } else {
    compute_matrices_from_coordinates(inst);
  }

  auto violations = validate_instance(inst);
  if (!violations.empty()) {
    std::string msg = origin + ": instance invalid:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw Error(msg);
  }
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open instance file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str(), path);
}

std::vector<Eigen::Vector2d> load_coordinate_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open coordinate file '" + path + "'");
  std::vector<Eigen::Vector2d> pool;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x >> y))
      throw Error(path + ":" + std::to_string(line_no) + ": expected 'x y'");
    pool.emplace_back(x, y);
  }
  return pool;
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

Instance generate_random_instance(std::uint64_t seed, const GeneratorParams& params) {
  if (params.n_customers < 1) throw Error("generator: n_customers must be >= 1");
  if (params.n_vehicles < 1) throw Error("generator: n_vehicles must be >= 1");
  Rng rng(seed);

  // Fixed draw order: depot point, customer points, revenues, desired times.
  // delay_cap/gamma2 enter only the profiles, never the stream.
  std::vector<Eigen::Vector2d> points;
  if (!params.coordinate_pool.empty()) {
    if (static_cast<int>(params.coordinate_pool.size()) < params.n_customers + 1)
      throw Error("generator: coordinate pool smaller than n_customers + 1");
    std::vector<std::size_t> idx(params.coordinate_pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (int picked = 0; picked < params.n_customers + 1; ++picked) {
      std::size_t j = picked + rng.below(idx.size() - picked);
      std::swap(idx[picked], idx[j]);
      points.push_back(params.coordinate_pool[idx[picked]]);
    }
  } else {
    for (int i = 0; i < params.n_customers + 1; ++i)
      points.emplace_back(rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0));
  }

  std::vector<double> revenue(params.n_customers);
  for (int c = 0; c < params.n_customers; ++c)
    revenue[c] = std::max(0.5, rng.normal(9.05, 5.0));
  std::vector<double> desired(params.n_customers);
  for (int c = 0; c < params.n_customers; ++c) desired[c] = rng.uniform(1.0, 8.0);

  Instance inst;
  inst.fleet.vehicle_count = params.n_vehicles;
  inst.fleet.battery_capacity = 90.0;
  inst.fleet.initial_energy.assign(params.n_vehicles, 45.0);
  inst.fleet.usage_cost = 199.0;
  inst.fleet.consumption_rate = 0.24;
  inst.fleet.speed = 60.0;
  inst.fleet.time_value = 2.0;
  inst.fleet.horizon = 24.0;

  Node start;
  start.id = 0;
  start.kind = NodeKind::StartDepot;
  start.position = points[0];
  start.charger = ChargerKind::Fast;
  start.charge_price = 0.299;
  start.charge_rate = 1.0 / 150.0;
  start.desired_time = 0.0;
  inst.nodes.push_back(start);

  for (int c = 0; c < params.n_customers; ++c) {
    Node node;
    node.id = c + 1;
    node.kind = NodeKind::Customer;
    node.position = points[c + 1];
    node.charger = ChargerKind::Slow;
    node.charge_price = 0.129;
    node.charge_rate = 1.0 / 22.0;
    node.desired_time = desired[c];
    node.delivery_revenue = revenue[c];
    inst.nodes.push_back(node);

    InconvenienceProfile p;
    p.slopes = {0.0, params.gamma2};
    p.intercepts = {0.01, -0.01};
    p.delay_cap = params.delay_cap;
    inst.profiles[node.id] = p;
  }

  Node end = start;  // co-located with the start depot
  end.id = params.n_customers + 1;
  end.kind = NodeKind::EndDepot;
  end.charger = ChargerKind::None;
  end.charge_price = 0.0;
  end.charge_rate = 0.0;
  inst.nodes.push_back(end);

  compute_matrices_from_coordinates(inst);
  return inst;
}

Instance generate_random_instance(std::uint64_t seed, int n_customers, int n_vehicles,
                                  double delay_cap, double gamma2) {
  GeneratorParams p;
  p.n_customers = n_customers;
  p.n_vehicles = n_vehicles;
  p.delay_cap = delay_cap;
  p.gamma2 = gamma2;
  return generate_random_instance(seed, p);
}

}  // namespace ievrp
