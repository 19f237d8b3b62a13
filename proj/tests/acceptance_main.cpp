// Acceptance suite. Each criterion prints one pass/fail line; the process
// exits nonzero if any criterion fails. CSV artifacts land in
// ./acceptance_out next to the working directory.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "ievrp/experiment.hpp"
#include "ievrp/milp.hpp"
#include "ievrp/oracle.hpp"
#include "ievrp/reformulate.hpp"
#include "test_util.hpp"

using namespace ievrp;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%d] %-28s %s (%s)\n", criterion, name.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

constexpr double kGamma2 = 1.5;
constexpr double kGridStep = 1e-3;

BuildOptions experiment_options() {
  BuildOptions opt;
  opt.charge_idle_vehicles = true;
  return opt;
}

struct TinyCase {
  std::uint64_t seed;
  Instance inst;
  MilpModel model;
  SolveResult milp;
  OracleResult oracle;
};

// Criterion 1 solves are shared with criteria 2, 6 and 8.
std::vector<TinyCase> solve_tiny_cases() {
  std::vector<TinyCase> cases;
  const double caps[3] = {0.5, 1.0, 1.5};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TinyCase c;
    c.seed = seed;
    int n = 1 + static_cast<int>(seed % 3);
    double cap = caps[seed % 3];
    c.inst = generate_random_instance(seed, n, 1, cap, kGamma2);
    c.model = build_incentive_milp(c.inst, experiment_options());
    c.milp = solve_milp(c.model.lp);
    c.oracle = solve_bruteforce(c.inst, kGridStep, experiment_options());
    cases.push_back(std::move(c));
  }
  return cases;
}

std::string tiny_case_csv(const std::vector<TinyCase>& cases) {
  std::ostringstream os;
  os << "seed,customers,milp_objective,oracle_objective,gap\n";
  for (const auto& c : cases) {
    char line[160];
    std::snprintf(line, sizeof(line), "%llu,%d,%.12g,%.12g,%.3e\n",
                  static_cast<unsigned long long>(c.seed), c.inst.customer_count(),
                  c.milp.objective, c.oracle.objective,
                  std::abs(c.milp.objective - c.oracle.objective));
    os << line;
  }
  return os.str();
}

void criterion_1(const std::vector<TinyCase>& cases) {
  double worst = 0.0;
  bool pass = true;
  const double tol = 1e-6 + kGamma2 * kGridStep;
  for (const auto& c : cases) {
    if (c.milp.status != SolveStatus::Optimal || !c.oracle.feasible) {
      pass = false;
      continue;
    }
    double gap = std::abs(c.milp.objective - c.oracle.objective);
    worst = std::max(worst, gap);
    pass &= gap <= tol;
  }
  report(1, "reformulation-exactness", pass,
         "max |milp - oracle| = " + fmt(worst) + " <= " + fmt(tol));
}

void criterion_2(const std::vector<TinyCase>& cases) {
  double worst_obj = 0.0, worst_kkt = 0.0, worst_dual = 0.0, worst_pay = 0.0;
  bool pass = true;
  for (const auto& c : cases) {
    const VariableCatalog& cat = c.model.catalog;
    const Eigen::VectorXd& x = c.milp.x;
    for (int ci = 0; ci < cat.num_customers; ++ci) {
      double served = 0.0;
      for (int i = 0; i < cat.num_nodes; ++i)
        if (i != ci + 1) served += x(cat.x(0, i, ci + 1));
      if (served < 0.5) continue;
      const InconvenienceProfile& p = c.inst.profiles.at(ci + 1);
      double q = x(cat.q(ci));
      FollowerSolution sol;
      sol.delay = x(cat.delta(ci));
      sol.epigraph = x(cat.eps(ci));
      sol.objective = sol.epigraph - q * sol.delay;
      sol.u = x(cat.u(ci));
      sol.v = x(cat.v(ci));
      for (int m = 0; m < p.segment_count(); ++m) sol.zeta.push_back(x(cat.zeta(ci, m)));

      worst_obj = std::max(worst_obj,
                           std::abs(sol.objective - best_response(p, q).objective));
      worst_kkt = std::max(worst_kkt, kkt_residuals(p, q, sol).max());
      worst_dual = std::max(worst_dual, std::abs(strong_duality_gap(p, q, sol)));
      worst_pay = std::max(worst_pay, std::abs(x(cat.eta3(ci)) - q * sol.delay));
    }
  }
  pass = worst_obj <= 1e-6 && worst_kkt <= 1e-6 && worst_dual <= 1e-6 &&
         worst_pay <= 1e-6;
  report(2, "follower-consistency", pass,
         "best-response " + fmt(worst_obj) + ", kkt " + fmt(worst_kkt) + ", duality " +
             fmt(worst_dual) + ", eta3-payment " + fmt(worst_pay) + ", all <= 1e-6");
}

struct SweepResults {
  ExperimentReport flexibility;  // delta sweep, incentive mode
  ExperimentReport sensitivity;  // gamma sweep at cap 1.5, incentive mode
  ExperimentReport baseline;     // single cell, baseline mode
};

std::vector<std::uint64_t> fifty_seeds() {
  std::vector<std::uint64_t> seeds(50);
  for (int i = 0; i < 50; ++i) seeds[i] = i + 1;
  return seeds;
}

ExperimentConfig sweep_config(std::vector<double> caps, std::vector<double> gammas,
                              RunMode mode) {
  ExperimentConfig cfg;
  cfg.seeds = fifty_seeds();
  cfg.n_customers = 6;
  cfg.n_vehicles = 2;
  cfg.delta_max_sweep = std::move(caps);
  cfg.gamma2_sweep = std::move(gammas);
  cfg.mode = mode;
  cfg.time_limit = 900.0;
  cfg.threads = 2;
  return cfg;
}

SweepResults run_sweeps() {
  SweepResults out;
  out.flexibility =
      run_experiments(sweep_config({0.5, 1.0, 1.5}, {1.5}, RunMode::Incentive));
  out.sensitivity =
      run_experiments(sweep_config({1.5}, {2.5, 5.0}, RunMode::Incentive));
  out.baseline = run_experiments(sweep_config({1.5}, {1.5}, RunMode::Baseline));
  return out;
}

const ExperimentRow* find_row(const ExperimentReport& rep, std::uint64_t seed, double dm,
                              double g2) {
  for (const auto& row : rep.rows)
    if (row.seed == seed && row.delta_max == dm && row.gamma2 == g2) return &row;
  return nullptr;
}

// Comparisons between proven optima carry twice the relative MILP gap.
double order_slack(double a, double b) {
  return 2e-6 * std::max({1.0, std::abs(a), std::abs(b)});
}

void criterion_3(const SweepResults& sweeps) {
  bool all_optimal = true;
  bool dominated = true;
  double mean_reduction = 0.0, worst = 1e300;
  int n = 0;
  for (std::uint64_t seed : fifty_seeds()) {
    const ExperimentRow* inc = find_row(sweeps.flexibility, seed, 1.5, 1.5);
    const ExperimentRow* base = find_row(sweeps.baseline, seed, 1.5, 1.5);
    if (!inc || !base || inc->status != SolveStatus::Optimal ||
        base->status != SolveStatus::Optimal) {
      all_optimal = false;
      continue;
    }
    double reduction = base->operation_cost - inc->operation_cost;
    dominated &= reduction >= -order_slack(base->operation_cost, inc->operation_cost);
    mean_reduction += reduction;
    worst = std::min(worst, reduction);
    ++n;
  }
  mean_reduction /= std::max(1, n);
  bool pass = all_optimal && dominated && mean_reduction > 0.0;
  report(3, "incentive-domination", pass,
         std::string(all_optimal ? "50/50 optimal" : "NOT ALL OPTIMAL") +
             ", min reduction " + fmt(worst) + ", mean reduction " +
             fmt(mean_reduction) + " > 0");
}

void criterion_4(const SweepResults& sweeps) {
  bool pass = true;
  double worst = 0.0;
  for (std::uint64_t seed : fifty_seeds()) {
    double prev = 1e300;
    for (double dm : {0.5, 1.0, 1.5}) {
      const ExperimentRow* row = find_row(sweeps.flexibility, seed, dm, 1.5);
      if (!row || row->status != SolveStatus::Optimal) {
        pass = false;
        continue;
      }
      if (prev < 1e300) {
        worst = std::max(worst, row->operation_cost - prev);
        pass &= row->operation_cost <= prev + order_slack(row->operation_cost, prev);
      }
      prev = row->operation_cost;
    }
  }
  report(4, "delay-cap-monotonicity", pass,
         "worst cost increase along 0.5->1.0->1.5 h: " + fmt(worst));
}

void criterion_5(const SweepResults& sweeps) {
  bool pass = true;
  double worst = 0.0;
  for (std::uint64_t seed : fifty_seeds()) {
    const ExperimentRow* base = find_row(sweeps.flexibility, seed, 1.5, 1.5);
    double prev;
    if (base && base->status == SolveStatus::Optimal) {
      prev = base->operation_cost;
    } else {
      pass = false;
      continue;
    }
    for (double g2 : {2.5, 5.0}) {
      const ExperimentRow* row = find_row(sweeps.sensitivity, seed, 1.5, g2);
      if (!row || row->status != SolveStatus::Optimal) {
        pass = false;
        continue;
      }
      worst = std::max(worst, prev - row->operation_cost);
      pass &= row->operation_cost >= prev - order_slack(row->operation_cost, prev);
      prev = row->operation_cost;
    }
  }
  report(5, "sensitivity-monotonicity", pass,
         "worst cost decrease along 1.5->2.5->5 $/h: " + fmt(worst));
}

void criterion_6(const std::vector<TinyCase>& tiny, const SweepResults& sweeps) {
  double min_margin = 1e300, max_comp = 0.0;
  auto take = [&](const BigMAudit& audit) {
    min_margin = std::min(min_margin, audit.min_margin);
    max_comp = std::max(max_comp, audit.max_complementarity);
  };
  for (const auto& c : tiny)
    if (c.milp.status == SolveStatus::Optimal)
      take(audit_big_m(c.inst, c.model, c.milp.x));

  auto audit_report = [&](const ExperimentReport& rep) {
    for (const auto& row : rep.rows) {
      if (row.status != SolveStatus::Optimal) continue;
      Instance inst = generate_random_instance(row.seed, rep.config.n_customers,
                                               rep.config.n_vehicles, row.delta_max,
                                               row.gamma2);
      MilpModel model = row.mode == RunMode::Incentive
                            ? build_incentive_milp(inst, rep.config.build)
                            : build_baseline_milp(inst, rep.config.build);
      take(audit_big_m(inst, model, row.assignment));
    }
  };
  audit_report(sweeps.flexibility);
  audit_report(sweeps.sensitivity);
  audit_report(sweeps.baseline);
  bool pass = min_margin >= 1e-6 && max_comp <= 1e-6;
  report(6, "big-m-soundness", pass,
         "min guard margin " + fmt(min_margin) + " >= 1e-6, max complementarity " +
             fmt(max_comp) + " <= 1e-6");
}

void criterion_7() {
  using namespace ievrp_test;
  bool pass = true;
  double worst = 0.0;
  std::mt19937_64 rng(424242);
  for (int trial = 0; trial < 100; ++trial) {
    LinearProgram lp = random_feasible_lp(rng, 6, 5, trial % 2 == 1);
    SolveResult res = solve_lp(lp);
    auto oracle = dense_lp_min(lp);
    if (res.status != SolveStatus::Optimal || !oracle) {
      pass = false;
      continue;
    }
    double err = std::abs(res.objective - *oracle) / std::max(1.0, std::abs(*oracle));
    worst = std::max(worst, err);
    pass &= err <= 1e-8;
  }

  std::int64_t bb_mismatch = 0;
  std::mt19937_64 rng2(555);
  for (int trial = 0; trial < 25; ++trial) {
    LinearProgram lp = random_feasible_lp(rng2, 9, 6);
    int binaries = 0;
    for (int j = 0; j < lp.num_cols() && binaries < 12; ++j) {
      if (j % 3 == 2) continue;
      lp.is_binary[j] = 1;
      lp.lower(j) = 0.0;
      lp.upper(j) = 1.0;
      ++binaries;
    }
    SolveResult bb = solve_milp(lp);
    SolveResult full = solve_milp_enumerate(lp);
    if (bb.status != full.status)
      ++bb_mismatch;
    else if (bb.status == SolveStatus::Optimal &&
             std::abs(bb.objective - full.objective) > 1e-9)
      ++bb_mismatch;
  }
  pass &= bb_mismatch == 0;
  report(7, "solver-correctness", pass,
         "simplex worst rel err " + fmt(worst) + " <= 1e-8 on 100 LPs, " +
             std::to_string(bb_mismatch) + " enumeration mismatches");
}

void criterion_8(const std::vector<TinyCase>& cases) {
  bool pass = true;
  double worst = 0.0;
  for (const auto& c : cases) {
    BuildOptions wide = experiment_options();
    wide.q_cap_scale = 2.0;
    MilpModel model = build_incentive_milp(c.inst, wide);
    SolveResult res = solve_milp(model.lp);
    if (res.status != SolveStatus::Optimal || c.milp.status != SolveStatus::Optimal) {
      pass = false;
      continue;
    }
    double diff = std::abs(res.objective - c.milp.objective);
    worst = std::max(worst, diff);
    pass &= diff <= 1e-6;
  }
  report(8, "rate-cap-harmlessness", pass,
         "max |optimum shift| after doubling the cap = " + fmt(worst) + " <= 1e-6");
}

std::string strip_runtime_column(const std::string& csv) {
  std::string out;
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line)) {
    out += line.substr(0, line.rfind(','));
    out += '\n';
  }
  return out;
}

void criterion_9(const std::vector<TinyCase>& first_tiny, const SweepResults& sweeps) {
  // Re-run the tiny-case batch and the baseline batch; every CSV byte other
  // than wall time must repeat.
  auto tiny_again = solve_tiny_cases();
  bool pass = tiny_case_csv(first_tiny) == tiny_case_csv(tiny_again);

  ExperimentReport base_again =
      run_experiments(sweep_config({1.5}, {1.5}, RunMode::Baseline));
  pass &= summary_csv(aggregate(sweeps.baseline)) == summary_csv(aggregate(base_again));
  pass &= strip_runtime_column(report_csv(sweeps.baseline)) ==
          strip_runtime_column(report_csv(base_again));
  report(9, "determinism", pass,
         pass ? "repeated runs give byte-identical CSVs" : "CSV bytes differ");
}

}  // namespace

int main() {
  std::filesystem::create_directories("acceptance_out");
  auto write = [](const std::string& name, const std::string& content) {
    std::ofstream out("acceptance_out/" + name, std::ios::binary);
    out << content;
  };

  std::printf("building and solving the tiny reformulation-exactness cases...\n");
  auto tiny = solve_tiny_cases();
  write("exactness.csv", tiny_case_csv(tiny));
  criterion_1(tiny);
  criterion_2(tiny);

  std::printf("running the 50-seed sweeps (this is the long part)...\n");
  SweepResults sweeps = run_sweeps();
  {
    ExperimentReport merged;
    merged.config = sweep_config({0.5, 1.0, 1.5}, {1.5, 2.5, 5.0}, RunMode::Both);
    for (const auto* rep : {&sweeps.flexibility, &sweeps.sensitivity, &sweeps.baseline})
      merged.rows.insert(merged.rows.end(), rep->rows.begin(), rep->rows.end());
    write("report.csv", report_csv(merged));
    write("summary.csv", summary_csv(aggregate(merged)));
  }
  criterion_3(sweeps);
  criterion_4(sweeps);
  criterion_5(sweeps);
  criterion_6(tiny, sweeps);
  criterion_7();
  criterion_8(tiny);
  criterion_9(tiny, sweeps);

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", g_failures);
  return 1;
}
