#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ievrp/experiment.hpp"

using namespace ievrp;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.seeds = {1, 2};
  cfg.n_customers = 2;
  cfg.n_vehicles = 1;
  cfg.delta_max_sweep = {0.5, 1.5};
  cfg.gamma2_sweep = {1.5};
  cfg.mode = RunMode::Both;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("report has one row per (seed, delta, gamma, mode) cell") {
  ExperimentConfig cfg = small_config();
  ExperimentReport report = run_experiments(cfg);
  CHECK(report.rows.size() == 2 * 2 * 1 * 2);
  int incentive_rows = 0;
  for (const auto& row : report.rows) {
    CHECK(row.status == SolveStatus::Optimal);
    if (row.mode == RunMode::Incentive) ++incentive_rows;
    // definition check: saving percent recomputed from the row's own fields
    double expect = row.served_revenue > 0.0
                        ? 100.0 * row.incentive_payout / row.served_revenue
                        : 0.0;
    CHECK(row.fee_saving_pct == doctest::Approx(expect).epsilon(1e-9));
    if (row.mode == RunMode::Baseline) {
      CHECK(row.incentive_payout == 0.0);
      CHECK(row.fee_saving_pct == 0.0);
    }
  }
  CHECK(incentive_rows == 4);

  // domination: per (seed, delta) pair the incentive cost never exceeds the
  // baseline cost
  for (const auto& a : report.rows)
    if (a.mode == RunMode::Incentive)
      for (const auto& b : report.rows)
        if (b.mode == RunMode::Baseline && b.seed == a.seed &&
            b.delta_max == a.delta_max)
          CHECK(a.operation_cost <= b.operation_cost + 1e-7);
}

TEST_CASE("aggregate means and deviations") {
  ExperimentConfig cfg = small_config();
  ExperimentReport report = run_experiments(cfg);
  auto cells = aggregate(report);
  CHECK(cells.size() == 4);  // 2 delta values x 2 modes
  for (const auto& cell : cells) CHECK(cell.runs == 2);

  // single-row report: mean is the row, deviation zero
  ExperimentReport single;
  single.config = cfg;
  single.rows.push_back(report.rows[0]);
  auto one = aggregate(single);
  REQUIRE(one.size() == 1);
  CHECK(one[0].runs == 1);
  CHECK(one[0].mean_cost == doctest::Approx(report.rows[0].operation_cost));
  CHECK(one[0].std_cost == 0.0);

  // meanwise domination follows from rowwise domination
  for (const auto& a : cells)
    if (a.mode == RunMode::Incentive)
      for (const auto& b : cells)
        if (b.mode == RunMode::Baseline && b.delta_max == a.delta_max)
          CHECK(a.mean_cost <= b.mean_cost + 1e-7);
}

TEST_CASE("incentive cost is non-increasing in the delay cap, seed by seed") {
  ExperimentConfig cfg = small_config();
  cfg.mode = RunMode::Incentive;
  ExperimentReport report = run_experiments(cfg);
  for (std::uint64_t seed : cfg.seeds) {
    double prev = 1e300;
    for (double dm : cfg.delta_max_sweep) {
      for (const auto& row : report.rows)
        if (row.seed == seed && row.delta_max == dm) {
          CHECK(row.operation_cost <= prev + 1e-7);
          prev = row.operation_cost;
        }
    }
  }
}

TEST_CASE("the whole report is a pure function of the config") {
  ExperimentConfig cfg = small_config();
  ExperimentReport a = run_experiments(cfg);
  ExperimentReport b = run_experiments(cfg);
  // wall times differ; compare everything else via the CSV with the runtime
  // column stripped
  auto strip_runtime = [](std::string csv) {
    std::string out;
    for (std::size_t pos = 0; pos < csv.size();) {
      std::size_t eol = csv.find('\n', pos);
      std::string line = csv.substr(pos, eol - pos);
      out += line.substr(0, line.rfind(','));
      out += '\n';
      pos = eol + 1;
    }
    return out;
  };
  CHECK(strip_runtime(report_csv(a)) == strip_runtime(report_csv(b)));
  CHECK(summary_csv(aggregate(a)) == summary_csv(aggregate(b)));
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].nodes == b.rows[i].nodes);
    CHECK(a.rows[i].operation_cost == b.rows[i].operation_cost);
  }
}

TEST_CASE("outputs land in the requested directory") {
  ExperimentConfig cfg = small_config();
  cfg.seeds = {1};
  cfg.delta_max_sweep = {1.0};
  cfg.out_dir = (std::filesystem::temp_directory_path() / "ievrp_exp_out").string();
  std::filesystem::remove_all(cfg.out_dir);
  ExperimentReport report = run_experiments(cfg);
  write_outputs(report);
  CHECK(std::filesystem::exists(cfg.out_dir + "/report.csv"));
  CHECK(std::filesystem::exists(cfg.out_dir + "/summary.csv"));
  CHECK(std::filesystem::exists(cfg.out_dir + "/run_config.json"));
  CHECK(std::filesystem::exists(cfg.out_dir + "/plan_1_incentive.txt"));
  CHECK(std::filesystem::exists(cfg.out_dir + "/plan_1_baseline.txt"));

  std::ifstream in(cfg.out_dir + "/report.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "seed,delta_max,gamma2,mode,status,operation_cost,incentive_payout,"
        "served_revenue,fee_saving_pct,served_count,nodes,simplex_iterations,"
        "runtime_s");
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("config files parse and validate") {
  auto path = std::filesystem::temp_directory_path() / "ievrp_cfg.json";
  {
    std::ofstream out(path);
    out << R"({"seeds":[3,4],"n_customers":2,"n_vehicles":1,
               "delta_max":[0.5],"gamma2":[1.5,2.5],"mode":"incentive",
               "time_limit":60,"gap":1e-6,"threads":2})";
  }
  ExperimentConfig cfg = ExperimentConfig::from_json_file(path.string());
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(cfg.gamma2_sweep == std::vector<double>{1.5, 2.5});
  CHECK(cfg.mode == RunMode::Incentive);
  CHECK(cfg.build.charge_idle_vehicles);  // experiment default

  {
    std::ofstream out(path);
    out << R"({"seeds":[]})";
  }
  CHECK_THROWS_AS(ExperimentConfig::from_json_file(path.string()), Error);
  std::filesystem::remove(path);
}
