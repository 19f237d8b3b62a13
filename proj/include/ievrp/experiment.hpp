#ifndef IEVRP_EXPERIMENT_HPP
#define IEVRP_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ievrp/instance.hpp"
#include "ievrp/milp.hpp"
#include "ievrp/reformulate.hpp"

namespace ievrp {

enum class RunMode { Incentive, Baseline, Both };

struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{1};
  int n_customers = 6;
  int n_vehicles = 2;
  std::vector<double> delta_max_sweep{1.5};
  std::vector<double> gamma2_sweep{1.5};
  RunMode mode = RunMode::Both;
  double time_limit = 600.0;
  double gap = 1e-6;
  std::string out_dir;
  int threads = 1;
  // Experiments follow the printed operator cost vector: the usage fee is a
  // per-vehicle constant, identical in both modes.
  BuildOptions build{.charge_idle_vehicles = true};

  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json() const;
};

struct ExperimentRow {
  std::uint64_t seed = 0;
  double delta_max = 0.0;
  double gamma2 = 0.0;
  RunMode mode = RunMode::Incentive;
  SolveStatus status = SolveStatus::Optimal;
  double operation_cost = 0.0;
  double incentive_payout = 0.0;
  double served_revenue = 0.0;   // sum D_j over served customers
  double fee_saving_pct = 0.0;   // 100 * payout / served_revenue
  int served_count = 0;
  std::int64_t nodes = 0;
  std::int64_t simplex_iterations = 0;
  double runtime_seconds = 0.0;  // wall time; excluded from determinism checks
  RoutingPlan plan;
  Eigen::VectorXd assignment;  // raw optimal point, for post-solve audits
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ExperimentRow> rows;
};

/// Runs every (seed, delta_max, gamma2, mode) cell. Cells are independent
/// and may execute on config.threads workers; results are merged in config
/// order so the report is a pure function of the config (wall times aside).
ExperimentReport run_experiments(const ExperimentConfig& config);

struct SummaryCell {
  double delta_max = 0.0;
  double gamma2 = 0.0;
  RunMode mode = RunMode::Incentive;
  int runs = 0;
  double mean_cost = 0.0;
  double std_cost = 0.0;
  double mean_payout = 0.0;
  double mean_saving_pct = 0.0;
  double mean_served = 0.0;
};

std::vector<SummaryCell> aggregate(const ExperimentReport& report);

std::string report_csv(const ExperimentReport& report);
std::string summary_csv(const std::vector<SummaryCell>& cells);
std::string plan_text(const Instance& inst, const ExperimentRow& row);
/// Writes report.csv, summary.csv and plan_<seed>_<mode>.txt under out_dir.
void write_outputs(const ExperimentReport& report);

std::string to_string(RunMode m);

}  // namespace ievrp

#endif  // IEVRP_EXPERIMENT_HPP
