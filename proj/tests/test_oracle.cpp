#include <doctest.h>

#include <cmath>

#include "ievrp/milp.hpp"
#include "ievrp/oracle.hpp"
#include "ievrp/reformulate.hpp"

using namespace ievrp;

namespace {

InconvenienceProfile paper_profile(double delay_cap = 1.5, double gamma2 = 1.5) {
  InconvenienceProfile p;
  p.slopes = {0.0, gamma2};
  p.intercepts = {0.01, -0.01};
  p.delay_cap = delay_cap;
  return p;
}

Instance one_customer(double x_km, double tau, double revenue, double usage = 1.0,
                      double delay_cap = 1.5) {
  Instance inst;
  inst.fleet.vehicle_count = 1;
  inst.fleet.initial_energy = {45.0};
  inst.fleet.usage_cost = usage;
  inst.fleet.time_value = 2.0;
  Node depot;
  depot.id = 0;
  depot.kind = NodeKind::StartDepot;
  depot.charger = ChargerKind::Fast;
  depot.charge_price = 0.299;
  depot.charge_rate = 1.0 / 150.0;
  inst.nodes.push_back(depot);
  Node cust;
  cust.id = 1;
  cust.kind = NodeKind::Customer;
  cust.position = {x_km, 0.0};
  cust.charger = ChargerKind::Slow;
  cust.charge_price = 0.129;
  cust.charge_rate = 1.0 / 22.0;
  cust.desired_time = tau;
  cust.delivery_revenue = revenue;
  inst.nodes.push_back(cust);
  Node end = depot;
  end.id = 2;
  end.kind = NodeKind::EndDepot;
  end.charger = ChargerKind::None;
  inst.nodes.push_back(end);
  inst.profiles[1] = paper_profile(delay_cap);
  compute_matrices_from_coordinates(inst);
  return inst;
}

}  // namespace

TEST_CASE("induced payment on the two-segment profile") {
  auto p = paper_profile();
  SUBCASE("delays inside the free tie set cost nothing") {
    auto ip = induced_payment(p, 0.01);
    CHECK(ip.rate == 0.0);
    CHECK(ip.payment == 0.0);
  }
  SUBCASE("delays beyond the breakpoint need the full slope") {
    auto ip = induced_payment(p, 1.0);
    CHECK(ip.rate == doctest::Approx(1.5));
    CHECK(ip.payment == doctest::Approx(1.5));
  }
  SUBCASE("zero delay is free") {
    auto ip = induced_payment(p, 0.0);
    CHECK(ip.rate == 0.0);
    CHECK(ip.payment == 0.0);
  }
  CHECK_THROWS_AS(induced_payment(p, 2.0), Error);
}

TEST_CASE("closed form matches the rate sweep on the 1e-3 grid") {
  for (double gamma2 : {1.5, 2.5, 5.0}) {
    auto p = paper_profile(1.5, gamma2);
    double prev = -1.0;
    for (int g = 0; g <= 1500; ++g) {
      double delay = g * 1e-3;
      auto sweep = induced_payment(p, delay);
      auto closed = induced_payment_closed_form(p, delay);
      CHECK(sweep.rate == doctest::Approx(closed.rate).epsilon(1e-12));
      CHECK(sweep.payment == doctest::Approx(closed.payment).epsilon(1e-12));
      // non-decreasing in the delay
      CHECK(sweep.payment >= prev - 1e-12);
      prev = sweep.payment;
    }
  }
}

TEST_CASE("oracle on a single reachable customer") {
  // 15 km out: arrival at 0.25 h, tau = 1 h, so the vehicle waits; no delay.
  Instance inst = one_customer(15.0, 1.0, 9.05);
  OracleResult res = solve_bruteforce(inst, 1e-3);
  REQUIRE(res.feasible);
  // usage fee + time value of the round trip minus the revenue
  double expect = 1.0 + 2.0 * (0.5) - 9.05;
  CHECK(res.objective == doctest::Approx(expect).epsilon(1e-9));
  CHECK(res.best.routes[0] == std::vector<int>{1});
  CHECK(res.best.payment_total == doctest::Approx(0.0));
}

TEST_CASE("oracle declines an unprofitable customer") {
  Instance inst = one_customer(15.0, 1.0, 0.01);
  OracleResult res = solve_bruteforce(inst, 1e-3);
  REQUIRE(res.feasible);
  CHECK(res.objective == doctest::Approx(0.0));
  CHECK(res.best.routes[0].empty());
}

TEST_CASE("oracle buys a delay when the window forces one") {
  // 30 km out: earliest arrival 0.5 h; tau = 0 forces a 0.5 h delay paid at
  // the slope, 1.5 * 0.5 = 0.75, still worth the 9.05 revenue.
  Instance inst = one_customer(30.0, 0.0, 9.05);
  OracleResult res = solve_bruteforce(inst, 1e-3);
  REQUIRE(res.feasible);
  double expect = 1.0 + 2.0 * 1.0 - 9.05 + 0.75;
  CHECK(res.objective == doctest::Approx(expect).epsilon(1e-9));
  REQUIRE(res.best.delays.size() == 1);
  CHECK(res.best.delays[0] == doctest::Approx(0.5));
  CHECK(res.best.payment_total == doctest::Approx(0.75));
}

TEST_CASE("oracle size guard") {
  Instance inst = generate_random_instance(1, 5, 1, 1.0, 1.5);
  CHECK_THROWS_WITH_AS(solve_bruteforce(inst), doctest::Contains("guarded"), Error);
}

TEST_CASE("oracle matches the MILP within the grid tolerance, both directions") {
  for (std::uint64_t seed : {41u, 42u, 43u, 44u}) {
    int n = 1 + static_cast<int>(seed % 3);
    Instance inst = generate_random_instance(seed, n, 1, 1.5, 1.5);
    BuildOptions opt;
    opt.charge_idle_vehicles = true;
    OracleResult oracle = solve_bruteforce(inst, 1e-3, opt);
    MilpModel model = build_incentive_milp(inst, opt);
    SolveResult milp = solve_milp(model.lp);
    REQUIRE(milp.status == SolveStatus::Optimal);
    REQUIRE(oracle.feasible);
    CHECK(std::abs(milp.objective - oracle.objective) <= 1e-6 + 1.5 * 1e-3);
  }
}

TEST_CASE("shrinking the grid step never widens the oracle gap") {
  for (std::uint64_t seed : {51u, 52u}) {
    Instance inst = generate_random_instance(seed, 2, 1, 1.5, 1.5);
    BuildOptions opt;
    opt.charge_idle_vehicles = true;
    MilpModel model = build_incentive_milp(inst, opt);
    SolveResult milp = solve_milp(model.lp);
    REQUIRE(milp.status == SolveStatus::Optimal);
    double prev_gap = 1e300;
    for (double step : {1e-2, 1e-3, 1e-4}) {
      OracleResult oracle = solve_bruteforce(inst, step, opt);
      double gap = std::abs(milp.objective - oracle.objective);
      CHECK(gap <= prev_gap + 1e-12);
      prev_gap = gap;
    }
  }
}

TEST_CASE("oracle exercises charging when the pack is small") {
  // 90 km out and back (43.2 kWh) with a 30 kWh start: charging is forced.
  Instance inst = one_customer(90.0, 2.0, 50.0, 1.0, 1.5);
  inst.fleet.initial_energy = {30.0};
  OracleResult oracle = solve_bruteforce(inst, 1e-3);
  REQUIRE(oracle.feasible);
  REQUIRE(!oracle.best.routes[0].empty());

  BuildOptions opt;  // default usage-fee handling matches the oracle's
  MilpModel model = build_incentive_milp(inst, opt);
  SolveResult milp = solve_milp(model.lp);
  REQUIRE(milp.status == SolveStatus::Optimal);
  CHECK(std::abs(milp.objective - oracle.objective) <= 1e-6 + 1.5 * 1e-3);
}
