#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ievrp/oracle.hpp"
#include "ievrp/reformulate.hpp"

using namespace ievrp;

namespace {

// Hand-built instance: depots co-located at the origin, customers on a line.
Instance line_instance(std::vector<double> xs, std::vector<double> taus,
                       std::vector<double> revenues, double delay_cap = 1.0,
                       double gamma2 = 1.5, double usage_cost = 199.0,
                       int vehicles = 1) {
  Instance inst;
  inst.fleet.vehicle_count = vehicles;
  inst.fleet.initial_energy.assign(vehicles, 45.0);
  inst.fleet.usage_cost = usage_cost;
  inst.fleet.time_value = 2.0;

  Node depot;
  depot.id = 0;
  depot.kind = NodeKind::StartDepot;
  depot.charger = ChargerKind::Fast;
  depot.charge_price = 0.299;
  depot.charge_rate = 1.0 / 150.0;
  inst.nodes.push_back(depot);
  for (std::size_t c = 0; c < xs.size(); ++c) {
    Node node;
    node.id = static_cast<int>(c) + 1;
    node.kind = NodeKind::Customer;
    node.position = {xs[c], 0.0};
    node.charger = ChargerKind::Slow;
    node.charge_price = 0.129;
    node.charge_rate = 1.0 / 22.0;
    node.desired_time = taus[c];
    node.delivery_revenue = revenues[c];
    inst.nodes.push_back(node);
    InconvenienceProfile p;
    p.slopes = {0.0, gamma2};
    p.intercepts = {0.01, -0.01};
    p.delay_cap = delay_cap;
    inst.profiles[node.id] = p;
  }
  Node end = depot;
  end.id = static_cast<int>(xs.size()) + 1;
  end.kind = NodeKind::EndDepot;
  end.charger = ChargerKind::None;
  end.charge_price = end.charge_rate = 0.0;
  inst.nodes.push_back(end);
  compute_matrices_from_coordinates(inst);
  return inst;
}

}  // namespace

TEST_CASE("catalog of the one-customer model matches the block arithmetic") {
  Instance inst = line_instance({30.0}, {1.0}, {9.05});
  MilpModel model = build_incentive_milp(inst);
  const VariableCatalog& cat = model.catalog;
  // x:9 r:3 t:3 E:3 q/delta/eps:3 u/v:2 zeta:2 psi:4 eta1/eta2:18 eta3:1
  CHECK(cat.total() == 48);
  CHECK(model.lp.num_cols() == 48);
  CHECK(cat.x(0, 0, 0) == 0);
  CHECK(cat.r(0, 0) == 9);
  CHECK(cat.t(0) == 12);
  CHECK(cat.energy(0, 0) == 15);
  CHECK(cat.q(0) == 18);
  CHECK(cat.zeta(0, 0) == 23);
  CHECK(cat.psi(0, 0) == 25);
  CHECK(cat.eta1(0, 0, 0) == 29);
  CHECK(cat.eta2(0, 0, 0) == 38);
  CHECK(cat.eta3(0) == 47);
  // structurally impossible arcs keep their column, pinned to zero
  CHECK(model.lp.upper(cat.x(0, 0, 0)) == 0.0);
  CHECK(model.lp.upper(cat.x(0, 2, 1)) == 0.0);
  CHECK(model.lp.upper(cat.x(0, 0, 1)) == 1.0);

  MilpModel base = build_baseline_milp(inst);
  CHECK(base.lp.num_cols() == 48 - 12);  // follower block and eta3 gone
}

TEST_CASE("every row carries a known provenance tag") {
  Instance inst = line_instance({30.0, 40.0}, {1.0, 2.0}, {9.05, 9.05}, 1.0, 1.5,
                                199.0, 2);
  const std::set<std::string> allowed{"Eq2",  "Eq3",  "Eq4",   "Eq5",   "Eq6",
                                      "Eq7",  "Eq8",  "Eq9a",  "Eq9b",  "Eq10a",
                                      "Eq10b", "Eq10c", "Eq11a", "Eq11b", "Eq11c",
                                      "bounds"};
  for (bool incentive : {true, false}) {
    MilpModel model = incentive ? build_incentive_milp(inst) : build_baseline_milp(inst);
    std::set<std::string> seen;
    for (int rix = 0; rix < model.lp.num_rows(); ++rix) {
      std::string tag = model.row_tag(rix);
      CHECK(allowed.count(tag) == 1);
      seen.insert(tag);
      for (auto [col, coef] : model.lp.rows[rix].terms) {
        CHECK(col >= 0);
        CHECK(col < model.lp.num_cols());
      }
    }
    for (const char* tag : {"Eq2", "Eq3", "Eq4", "Eq5", "Eq6", "Eq11a", "Eq11b"})
      CHECK(seen.count(tag) == 1);
    if (incentive)
      for (const char* tag : {"Eq9a", "Eq9b", "Eq10a", "Eq10b", "Eq10c", "Eq11c"})
        CHECK(seen.count(tag) == 1);
  }
}

TEST_CASE("stated constraint-family counts for one customer, one vehicle") {
  Instance inst = line_instance({30.0}, {1.0}, {9.05});
  MilpModel model = build_incentive_milp(inst);
  std::map<std::string, int> count;
  for (int rix = 0; rix < model.lp.num_rows(); ++rix) ++count[model.row_tag(rix)];
  const int V = 3, K = 1, n = 2;
  CHECK(count["Eq2"] == V * K);
  CHECK(count["Eq3"] == 1);
  CHECK(count["Eq4"] == (V - 1) * (V - 1) * K);
  CHECK(count["Eq5"] == 2 * (V - 1));
  CHECK(count["Eq6"] == 2 * (V - 1) * (V - 1) * K);
  CHECK(count["Eq9a"] == 1);
  CHECK(count["Eq9b"] == 1);
  // n+2 selector pairs plus the n epigraph feasibility rows
  CHECK(count["Eq10a"] + count["Eq10b"] + count["Eq10c"] == 2 * (n + 2) + n);
  CHECK(count["Eq11c"] == 1);
}

TEST_CASE("serving a worthless customer is declined at zero cost") {
  // travel to the customer costs ~2 dollars of time; revenue is one cent;
  // the builder default exempts idle vehicles from the usage fee
  Instance inst = line_instance({30.0}, {1.0}, {0.01});
  MilpModel model = build_incentive_milp(inst);
  SolveResult res = solve_milp(model.lp);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(res.x(model.catalog.x(0, 0, 2)) == doctest::Approx(1.0));
  RoutingPlan plan = extract_solution(inst, model, res.x);
  CHECK(plan.served.empty());
  CHECK(plan.routes[0].stops == std::vector<int>{0, 2});
}

TEST_CASE("big-M config follows the stated formulas") {
  Instance inst = line_instance({60.0, 120.0}, {8.0, 4.0}, {9.0, 9.0}, 1.5);
  BigMConfig m = compute_big_m(inst);
  // max tau 8, cap 1.5, max T = 2h (120 km at 60 km/h), g_max*E = 90/22
  CHECK(m.M_time == doctest::Approx(8.0 + 1.5 + 2.0 + 90.0 / 22.0));
  CHECK(m.M_energy == doctest::Approx(90.0 + inst.energy.maxCoeff()));
  CHECK(m.q_max == doctest::Approx(1.5));
  CHECK(m.M_dual_v == doctest::Approx(1.5));
  CHECK(m.M_delta > 1.5);  // strictly above the attainable delay range
  CHECK(m.M_epi > 0.0);
}

TEST_CASE("baseline with rigid windows is dominated by the incentive model") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    Instance inst = generate_random_instance(seed, 3, 1, 1.0, 1.5);
    BuildOptions opt;
    opt.charge_idle_vehicles = true;
    MilpModel inc = build_incentive_milp(inst, opt);
    MilpModel base = build_baseline_milp(inst, opt);
    SolveResult ri = solve_milp(inc.lp);
    SolveResult rb = solve_milp(base.lp);
    REQUIRE(ri.status == SolveStatus::Optimal);
    REQUIRE(rb.status == SolveStatus::Optimal);
    CHECK(ri.objective <= rb.objective + 1e-9);
  }
}

TEST_CASE("flat inconvenience with zero rate equals the baseline with wide windows") {
  // With a single flat segment every delay in [0, cap] is optimal for q = 0,
  // so the zero-capped incentive model and the baseline with w = cap describe
  // the same routing freedom.
  Instance inst = generate_random_instance(21, 3, 1, 1.2, 1.5);
  for (int c : inst.customers()) {
    inst.profiles[c].slopes = {0.0};
    inst.profiles[c].intercepts = {0.0};
  }
  BuildOptions opt;
  opt.charge_idle_vehicles = true;
  opt.q_cap_scale = 0.0;  // q pinned to zero
  MilpModel inc = build_incentive_milp(inst, opt);
  BuildOptions base_opt;
  base_opt.charge_idle_vehicles = true;
  base_opt.baseline_window = 1.2;
  MilpModel base = build_baseline_milp(inst, base_opt);
  SolveResult ri = solve_milp(inc.lp);
  SolveResult rb = solve_milp(base.lp);
  REQUIRE(ri.status == SolveStatus::Optimal);
  REQUIRE(rb.status == SolveStatus::Optimal);
  CHECK(ri.objective == doctest::Approx(rb.objective).epsilon(1e-9));
  RoutingPlan pi = extract_solution(inst, inc, ri.x);
  RoutingPlan pb = extract_solution(inst, base, rb.x);
  CHECK(pi.served == pb.served);
}

TEST_CASE("decode of a two-customer chain and its failure modes") {
  Instance inst = line_instance({10.0, 20.0}, {0.5, 1.0}, {9.0, 9.0}, 1.0, 1.5, 1.0);
  MilpModel model = build_incentive_milp(inst);
  SolveResult res = solve_milp(model.lp);
  REQUIRE(res.status == SolveStatus::Optimal);
  RoutingPlan plan = extract_solution(inst, model, res.x);
  CHECK(plan.routes[0].stops == std::vector<int>{0, 1, 2, 3});
  CHECK(plan.served == std::vector<int>{1, 2});

  SUBCASE("broken successor chain") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.lp.num_cols());
    x(model.catalog.x(0, 0, 1)) = 1.0;  // depot -> c1
    x(model.catalog.x(0, 2, 3)) = 1.0;  // c2 -> end, nothing out of c1
    CHECK_THROWS_WITH_AS(extract_solution(inst, model, x),
                         doctest::Contains("broken chain at 1"), Error);
  }
  SUBCASE("detached cycle") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.lp.num_cols());
    x(model.catalog.x(0, 0, 3)) = 1.0;  // idle route
    x(model.catalog.x(0, 1, 2)) = 1.0;  // floating c1 <-> c2 loop
    x(model.catalog.x(0, 2, 1)) = 1.0;
    CHECK_THROWS_WITH_AS(extract_solution(inst, model, x), doctest::Contains("cycle"),
                         Error);
  }
}

TEST_CASE("solved optima honor the follower, payment and big-M certificates") {
  for (std::uint64_t seed : {31u, 32u}) {
    Instance inst = generate_random_instance(seed, 3, 1, 1.5, 1.5);
    BuildOptions opt;
    opt.charge_idle_vehicles = true;
    MilpModel model = build_incentive_milp(inst, opt);
    SolveResult res = solve_milp(model.lp);
    REQUIRE(res.status == SolveStatus::Optimal);
    RoutingPlan plan = extract_solution(inst, model, res.x);

    const VariableCatalog& cat = model.catalog;
    for (int c = 0; c < cat.num_customers; ++c) {
      bool served = std::find(plan.served.begin(), plan.served.end(), c + 1) !=
                    plan.served.end();
      double eta3 = res.x(cat.eta3(c));
      double payment = res.x(cat.q(c)) * res.x(cat.delta(c));
      if (served)
        CHECK(eta3 == doctest::Approx(payment).epsilon(1e-6));
      else
        CHECK(eta3 == doctest::Approx(0.0).epsilon(1e-6));
    }
    for (int k = 0; k < cat.num_vehicles; ++k)
      for (int i = 0; i < cat.num_nodes; ++i)
        for (int j = 0; j < cat.num_nodes; ++j) {
          double x = res.x(cat.x(k, i, j));
          double r = inst.nodes[i].has_charger() && i != inst.end_depot()
                         ? res.x(cat.r(k, i))
                         : 0.0;
          CHECK(std::abs(res.x(cat.eta1(k, i, j)) -
                         inst.fleet.time_value * inst.nodes[i].charge_rate * r * x) <=
                1e-6);
          CHECK(std::abs(res.x(cat.eta2(k, i, j)) -
                         inst.nodes[i].charge_price * r * x) <= 1e-6);
        }

    BigMAudit audit = audit_big_m(inst, model, res.x);
    CHECK(audit.min_margin >= 1e-6);
    CHECK(audit.max_complementarity <= 1e-6);
  }
}

TEST_CASE("arc that no battery could cross is rejected at build time") {
  Instance inst = line_instance({30.0}, {1.0}, {9.05});
  inst.distance(0, 1) = 800.0;  // 192 kWh with a 90 kWh pack and full recharge
  inst.distance(1, 0) = 800.0;
  inst.derive_matrices();
  CHECK_THROWS_WITH_AS(build_incentive_milp(inst), doctest::Contains("beyond battery"),
                       Error);
}

TEST_CASE("milp optimum equals the brute-force bi-level optimum on small seeds") {
  for (std::uint64_t seed : {101u, 102u, 103u}) {
    int n = 1 + static_cast<int>(seed % 3);
    Instance inst = generate_random_instance(seed, n, 1, 1.0, 1.5);
    BuildOptions opt;
    opt.charge_idle_vehicles = true;
    MilpModel model = build_incentive_milp(inst, opt);
    SolveResult res = solve_milp(model.lp);
    REQUIRE(res.status == SolveStatus::Optimal);
    OracleResult oracle = solve_bruteforce(inst, 1e-3, opt);
    REQUIRE(oracle.feasible);
    CHECK(std::abs(res.objective - oracle.objective) <= 1e-6 + 1.5 * 1e-3);
  }
}

TEST_CASE("doubling the incentive-rate cap leaves the optimum unchanged") {
  Instance inst = generate_random_instance(7, 2, 1, 1.5, 1.5);
  BuildOptions opt;
  opt.charge_idle_vehicles = true;
  MilpModel base = build_incentive_milp(inst, opt);
  opt.q_cap_scale = 2.0;
  MilpModel wide = build_incentive_milp(inst, opt);
  SolveResult a = solve_milp(base.lp);
  SolveResult b = solve_milp(wide.lp);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-6));
}
