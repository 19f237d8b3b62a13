#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "ievrp/experiment.hpp"
#include "ievrp/instance.hpp"
#include "ievrp/milp.hpp"
#include "ievrp/oracle.hpp"
#include "ievrp/reformulate.hpp"

using namespace ievrp;

namespace {

int solve_single_instance(const Instance& inst, RunMode mode, const BuildOptions& build,
                          double time_limit, double gap, const std::string& export_lp) {
  std::vector<RunMode> modes = mode == RunMode::Both
                                   ? std::vector<RunMode>{RunMode::Incentive, RunMode::Baseline}
                                   : std::vector<RunMode>{mode};
  bool all_ok = true;
  for (RunMode m : modes) {
    MilpModel model = m == RunMode::Incentive ? build_incentive_milp(inst, build)
                                              : build_baseline_milp(inst, build);
    if (!export_lp.empty()) {
      std::string path = modes.size() == 1 ? export_lp
                                           : export_lp + "." + to_string(m) + ".lp";
      export_lp_file(model.lp, path);
      std::cout << "wrote " << path << " (" << model.lp.num_cols() << " columns, "
                << model.lp.num_rows() << " rows)\n";
      continue;
    }
    SolverParams params;
    params.time_limit = time_limit;
    params.gap_tol = gap;
    SolveResult res = solve_milp(model.lp, params);
    std::cout << to_string(m) << ": status " << to_string(res.status) << ", objective "
              << res.objective << ", bound " << res.best_bound << ", nodes "
              << res.node_count << ", iterations " << res.simplex_iterations << ", "
              << res.elapsed_seconds << " s\n";
    if (res.status == SolveStatus::Optimal) {
      RoutingPlan plan = extract_solution(inst, model, res.x);
      ExperimentRow row;
      row.mode = m;
      row.status = res.status;
      row.operation_cost = res.objective;
      row.plan = plan;
      std::cout << plan_text(inst, row);
    } else {
      all_ok = res.status == SolveStatus::TimeLimit || res.status == SolveStatus::GapLimit;
    }
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incentive-aware EV routing: bi-level model, single-level MILP "
               "reformulation, built-in solver and experiment runner"};

  std::string config_path, instance_path, export_lp, out_dir;
  std::uint64_t seed = 1;
  int customers = 6, vehicles = 2, threads = 1;
  std::vector<double> delta_max{1.5}, gamma2{1.5};
  std::string mode = "both";
  double time_limit = 600.0, gap = 1e-6;
  bool idle_fee = true;
  double baseline_window = 0.0;

  app.add_option("--config", config_path, "experiment config JSON (overrides other flags)");
  app.add_option("--instance", instance_path, "solve one instance file instead of sweeping");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--customers", customers, "number of customers");
  app.add_option("--vehicles", vehicles, "number of vehicles");
  app.add_option("--delta-max", delta_max, "delay cap sweep (h)")->expected(-1);
  app.add_option("--gamma2", gamma2, "second inconvenience slope sweep ($/h)")->expected(-1);
  app.add_option("--mode", mode, "incentive | baseline | both");
  app.add_option("--time-limit", time_limit, "per-solve time limit (s)");
  app.add_option("--gap", gap, "relative MILP gap tolerance");
  app.add_option("--export-lp", export_lp, "write the model in LP format and exit");
  app.add_option("--out", out_dir, "output directory for report.csv/summary.csv/plans");
  app.add_option("--threads", threads, "worker threads for independent cells");
  app.add_flag("--idle-fee,!--no-idle-fee", idle_fee,
               "charge the vehicle usage fee on every arc leaving the start depot "
               "(default) or only when a customer is visited");
  app.add_option("--baseline-window", baseline_window, "rigid window width w (h)");

  CLI11_PARSE(app, argc, argv);

  try {
    RunMode run_mode = mode == "incentive" ? RunMode::Incentive
                       : mode == "baseline" ? RunMode::Baseline
                                            : RunMode::Both;
    BuildOptions build;
    build.charge_idle_vehicles = idle_fee;
    build.baseline_window = baseline_window;

    if (!instance_path.empty()) {
      Instance inst = load_instance(instance_path);
      return solve_single_instance(inst, run_mode, build, time_limit, gap, export_lp);
    }

    ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = ExperimentConfig::from_json_file(config_path);
    } else {
      cfg.seeds = {seed};
      cfg.n_customers = customers;
      cfg.n_vehicles = vehicles;
      cfg.delta_max_sweep = delta_max;
      cfg.gamma2_sweep = gamma2;
      cfg.mode = run_mode;
      cfg.time_limit = time_limit;
      cfg.gap = gap;
      cfg.out_dir = out_dir;
      cfg.threads = threads;
      cfg.build = build;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    if (!export_lp.empty()) {
      Instance inst = generate_random_instance(cfg.seeds.front(), cfg.n_customers,
                                               cfg.n_vehicles, cfg.delta_max_sweep.front(),
                                               cfg.gamma2_sweep.front());
      return solve_single_instance(inst, run_mode, cfg.build, time_limit, gap, export_lp);
    }

    ExperimentReport report = run_experiments(cfg);
    if (!cfg.out_dir.empty()) write_outputs(report);
    for (const auto& cell : aggregate(report))
      std::cout << "delta_max=" << cell.delta_max << " gamma2=" << cell.gamma2
                << " mode=" << to_string(cell.mode) << " runs=" << cell.runs
                << " mean_cost=" << cell.mean_cost << " mean_saving_pct="
                << cell.mean_saving_pct << "\n";
    for (const auto& row : report.rows)
      if (row.status != SolveStatus::Optimal && row.status != SolveStatus::TimeLimit &&
          row.status != SolveStatus::GapLimit)
        return 1;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
