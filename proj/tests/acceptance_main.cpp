// End-to-end acceptance checks. Runs the full solver stack on the shipped
// fixtures and prints one PASS/FAIL line per property; exits nonzero if any
// property fails. Usage: acceptance --cli <sgrid binary> --data <data dir>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgrid/dispatch.hpp"
#include "sgrid/experiment.hpp"
#include "sgrid/metrics.hpp"
#include "sgrid/network.hpp"
#include "sgrid/placement.hpp"
#include "sgrid/scenario.hpp"
#include "sgrid/util.hpp"

using namespace sgrid;

namespace {

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Verdict> verdicts;

void record(const std::string& name, bool pass, const std::string& detail = "") {
  verdicts.push_back({name, pass, detail});
}

struct Fixture {
  std::string name;
  Network net;
  ScenarioSet set;
  int k = 0;
  double u = 0.0;
  bool multi_cut = false;
};

Fixture load_fixture(const std::string& data_dir, const std::string& name, int k,
                     double u, bool multi_cut) {
  Fixture f;
  f.name = name;
  f.net = network_from_json(
      nlohmann::json::parse(read_file(data_dir + "/networks/" + name + ".json")));
  f.set = load_scenarios(data_dir + "/scenarios/" + name + ".csv", f.net);
  normalize_probabilities(f.set);
  f.k = k;
  f.u = u;
  f.multi_cut = multi_cut;
  return f;
}

PlacementConfig config_for(const Fixture& f) {
  PlacementConfig cfg;
  cfg.max_units = f.k;
  cfg.unit_capacity_mw = f.u;
  cfg.multi_cut = f.multi_cut;
  return cfg;
}

// Everything the run produces funnels through these accumulators so the
// residual and identity checks really cover every solution and report.
double worst_fidelity = -1.0;
long solutions_audited = 0;
double worst_identity = -1.0;
long reports_checked = 0;
bool capacity_in_range = true;
long capacity_checked = 0;

void audit_solutions(const std::vector<int>& x, const Network& net,
                     const ScenarioSet& set, double unit_capacity_mw,
                     const std::vector<DispatchSolution>& sols) {
  bool any = false;
  for (int v : x) any = any || v > 0;
  for (std::size_t s = 0; s < sols.size(); ++s) {
    DispatchInputs in = inputs_for_scenario(net, set, static_cast<int>(s));
    if (any) in.placement = PlacementOverlay{x, unit_capacity_mw};
    worst_fidelity = std::max(worst_fidelity, audit_dispatch(sols[s], in).worst());
    ++solutions_audited;
  }
}

void check_report_identities(const MetricReport& r) {
  double spill = r.wind_spill + r.import_spill + r.renewable_spill;
  double d1 = std::abs(r.dispatched_total - (r.absorbed_pos_lmp + r.absorbed_nonpos_lmp));
  double d2 = std::abs(r.stranded - (r.absorbed_nonpos_lmp + spill));
  worst_identity = std::max({worst_identity, d1, d2});
  ++reports_checked;
}

void check_capacity(const AchievedCapacity& ac) {
  auto in01 = [](double v) { return v >= -1e-9 && v <= 1.0 + 1e-9; };
  capacity_in_range = capacity_in_range && in01(ac.count_mean) && in01(ac.energy_mean);
  for (const auto& scen : ac.count_fraction)
    for (double f : scen) capacity_in_range = capacity_in_range && in01(f);
  ++capacity_checked;
}

std::string fmt(double v) { return format_double(v); }

int run_command(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string make_temp_dir() {
  std::string tmpl =
      (std::filesystem::temp_directory_path() / "sgrid-acceptance-XXXXXX").string();
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (!mkdtemp(buf.data())) throw IoError("cannot create a scratch directory");
  return std::string(buf.data());
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli, data_dir;
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string flag = argv[i];
    if (flag == "--cli") cli = argv[i + 1];
    else if (flag == "--data") data_dir = argv[i + 1];
  }
  if (cli.empty() || data_dir.empty()) {
    std::fprintf(stderr, "usage: acceptance --cli <sgrid binary> --data <data dir>\n");
    return 2;
  }

  try {
    // 1. The cutting-plane solver must reproduce the exhaustive single-model
    // answer on every fixture, quickly.
    std::vector<Fixture> fixtures;
    fixtures.push_back(load_fixture(data_dir, "twobus_t4", 1, 25.0, false));
    fixtures.push_back(load_fixture(data_dir, "fivebus_t6", 3, 30.0, true));
    fixtures.push_back(load_fixture(data_dir, "fivebus_t8", 5, 20.0, false));

    std::vector<PlacementSolution> benders_runs;
    bool oracle_ok = true;
    std::string oracle_detail;
    auto t0 = std::chrono::steady_clock::now();
    for (const Fixture& f : fixtures) {
      PlacementConfig cfg = config_for(f);
      PlacementSolution bs = solve_benders(f.net, f.set, cfg);
      PlacementSolution ds = solve_deterministic_equivalent(f.net, f.set, cfg);
      double rel = std::abs(bs.expected_cost - ds.expected_cost) /
                   std::max(1.0, std::abs(ds.expected_cost));
      bool ok = bs.converged && ds.converged && rel <= 1e-6;
      oracle_ok = oracle_ok && ok;
      std::printf("    %-11s K=%d U=%g cuts %s exhaustive %s rel %s %s\n",
                  f.name.c_str(), f.k, f.u, fmt(bs.expected_cost).c_str(),
                  fmt(ds.expected_cost).c_str(), fmt(rel).c_str(),
                  ok ? "ok" : "MISMATCH");

      PlacementEvaluation ev =
          evaluate_placement(bs.x, f.net, f.set, f.u);
      audit_solutions(bs.x, f.net, f.set, f.u, ev.solutions);
      for (const MetricReport& r : ev.reports) check_report_identities(r);
      if (f.k > 0) {
        std::vector<double> probs;
        for (const auto& sc : f.set.scenarios) probs.push_back(sc.probability);
        check_capacity(achieved_capacity(ev.solutions, probs, f.k, f.u));
      }
      benders_runs.push_back(std::move(bs));
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    oracle_ok = oracle_ok && elapsed < 60.0;
    record("cut solver matches exhaustive model", oracle_ok,
           fmt(elapsed) + "s for " + std::to_string(fixtures.size()) + " fixtures");

    // 4 + 5. Full sweep over cases, day types, and wind levels, in process.
    nlohmann::json cfg_json =
        nlohmann::json::parse(read_file(data_dir + "/experiments/sweep.json"));
    ExperimentSpec spec = experiment_from_json(cfg_json, data_dir + "/experiments");
    ExperimentReport sweep = run_experiment(spec);
    bool cells_ok = sweep.all_ok();
    for (const CellResult& cell : sweep.cells) {
      if (!cell.ok) continue;
      for (const MetricReport& r : cell.reports) check_report_identities(r);
      if (cell.achieved) check_capacity(*cell.achieved);
    }

    auto cell_at = [&](int case_id, const std::string& day,
                       double level) -> const CellResult* {
      for (const CellResult& c : sweep.cells)
        if (c.case_id == case_id && c.day == day && c.wind_level == level)
          return c.ok ? &c : nullptr;
      return nullptr;
    };
    std::vector<std::string> days;
    for (const auto& d : spec.days) days.push_back(d.label);

    bool trend_ok = cells_ok && !spec.wind_levels.empty() &&
                    spec.wind_levels.front() == 0.0 &&
                    spec.wind_levels.back() == 0.5;
    for (const std::string& day : days) {
      double prev_thermal = kInf, prev_spill = -kInf;
      for (double level : spec.wind_levels) {
        const CellResult* c = cell_at(1, day, level);
        if (!c) { trend_ok = false; break; }
        double thermal = c->stats.mean.thermal;
        double spill = c->stats.mean.wind_spill;
        if (thermal > prev_thermal + 1e-9 * std::max(1.0, prev_thermal))
          trend_ok = false;
        if (spill < prev_spill - 1e-9 * std::max(1.0, std::abs(prev_spill)))
          trend_ok = false;
        prev_thermal = thermal;
        prev_spill = spill;
      }
    }
    record("wind sweep trends", trend_ok,
           "thermal non-increasing, spillage non-decreasing over " +
               std::to_string(spec.wind_levels.size()) + " levels x " +
               std::to_string(days.size()) + " day types");

    bool stabilize_ok = cells_ok;
    for (const std::string& day : days) {
      for (double level : spec.wind_levels) {
        const CellResult* c1 = cell_at(1, day, level);
        const CellResult* c4 = cell_at(4, day, level);
        if (!c1 || !c4) { stabilize_ok = false; continue; }
        double slack_m = 1e-9 * std::max(1.0, std::abs(c1->stats.mean.cost));
        double slack_s = 1e-9 * std::max(1.0, c1->stats.cost_stddev);
        if (c4->stats.mean.cost > c1->stats.mean.cost + slack_m) stabilize_ok = false;
        if (c4->stats.cost_stddev > c1->stats.cost_stddev + slack_s)
          stabilize_ok = false;
      }
    }
    record("placed units lower cost mean and spread", stabilize_ok,
           std::to_string(spec.wind_levels.size() * days.size()) +
               " level/day cells compared");

    // 6. Expected cost must be monotone in the unit budget, and a zero budget
    // must coincide with the plain dispatch ensemble.
    {
      const Fixture& f = fixtures[1];
      std::vector<int> zeros(f.net.buses.size(), 0);
      PlacementEvaluation base = evaluate_placement(zeros, f.net, f.set, 0.0);
      audit_solutions(zeros, f.net, f.set, 0.0, base.solutions);
      for (const MetricReport& r : base.reports) check_report_identities(r);

      bool mono_ok = true;
      double prev = kInf;
      double cost0 = 0.0;
      for (int k = 0; k <= 5; ++k) {
        PlacementConfig cfg = config_for(f);
        cfg.max_units = k;
        PlacementSolution sol = solve_benders(f.net, f.set, cfg);
        mono_ok = mono_ok && sol.converged;
        if (sol.expected_cost > prev + 1e-9 * std::max(1.0, std::abs(prev)))
          mono_ok = false;
        prev = sol.expected_cost;
        if (k == 0) cost0 = sol.expected_cost;

        PlacementEvaluation ev = evaluate_placement(sol.x, f.net, f.set, f.u);
        audit_solutions(sol.x, f.net, f.set, f.u, ev.solutions);
        for (const MetricReport& r : ev.reports) check_report_identities(r);
      }
      double rel0 = std::abs(cost0 - base.expected_cost) /
                    std::max(1.0, std::abs(base.expected_cost));
      mono_ok = mono_ok && rel0 <= 1e-9;
      record("cost non-increasing in unit budget", mono_ok,
             "K=0..5 on " + f.name + ", zero-budget gap " + fmt(rel0));
    }

    // 8. Every retained cut must stay below the recourse cost it bounds, at
    // placements the solver never visited.
    {
      std::mt19937 rng(20260815);
      long pairs = 0, violations = 0;
      for (std::size_t fi = 0; fi < fixtures.size(); ++fi) {
        const Fixture& f = fixtures[fi];
        const PlacementSolution& sol = benders_runs[fi];
        const int nb = static_cast<int>(f.net.buses.size());
        const int S = static_cast<int>(f.set.scenarios.size());
        std::vector<std::unique_ptr<RecourseSolver>> workers;
        for (int s = 0; s < S; ++s)
          workers.push_back(std::make_unique<RecourseSolver>(
              f.net, f.set.scenarios[s].output, f.u));
        std::uniform_int_distribution<int> unit(0, f.k);
        for (int trial = 0; trial < 20; ++trial) {
          std::vector<int> x(nb);
          for (int n = 0; n < nb; ++n) x[n] = unit(rng);
          std::vector<double> q(S);
          double expected = 0.0;
          for (int s = 0; s < S; ++s) {
            q[s] = workers[s]->solve(x).cost;
            expected += f.set.scenarios[s].probability * q[s];
          }
          for (const BendersCut& cut : sol.cuts) {
            double bound = expected;
            if (cut.source != "agg") {
              int s = 0;
              for (; s < S; ++s)
                if (f.set.scenarios[s].id == cut.source) break;
              if (s == S) { ++violations; ++pairs; continue; }
              bound = q[s];
            }
            ++pairs;
            if (cut.value_at(x) > bound + 1e-6) ++violations;
          }
        }
      }
      record("cut validity", violations == 0,
             std::to_string(pairs) + " cut/placement pairs, " +
                 std::to_string(violations) + " violations");
    }

    // 9. Byte-identical sweep outputs regardless of worker threads.
    {
      std::string scratch = make_temp_dir();
      std::string config = data_dir + "/experiments/sweep.json";
      std::vector<std::string> thread_env = {"1", "2", "max"};
      std::vector<std::string> out_dirs;
      bool runs_ok = true;
      for (const std::string& te : thread_env) {
        std::string dir = scratch + "/threads-" + te;
        out_dirs.push_back(dir);
        std::string cmd = "STRANDED_GRID_THREADS=" + te + " '" + cli +
                          "' experiment --config '" + config + "' --out '" + dir +
                          "' >/dev/null 2>&1";
        if (run_command(cmd) != 0) runs_ok = false;
      }
      bool identical = runs_ok;
      std::vector<std::string> files = {"metrics.csv", "metrics_summary.csv",
                                        "placement.csv", "convergence.csv"};
      if (runs_ok) {
        for (const std::string& name : files) {
          std::string ref = read_file(out_dirs[0] + "/" + name);
          for (std::size_t i = 1; i < out_dirs.size(); ++i)
            if (read_file(out_dirs[i] + "/" + name) != ref) identical = false;
        }
      }
      record("thread-count determinism", identical,
             std::to_string(files.size()) + " output files across threads {1,2,max}");

      // Exit-code contract probes ride along on the same scratch space.
      bool probes_ok = true;
      std::string good = data_dir + "/networks/fivebus_t12.json";
      probes_ok = probes_ok &&
                  run_command("'" + cli + "' validate '" + good + "' >/dev/null 2>&1") == 0;
      probes_ok = probes_ok &&
                  run_command("'" + cli + "' validate '" + scratch +
                              "/missing.json' >/dev/null 2>&1") == 2;
      nlohmann::json broken = nlohmann::json::parse(read_file(good));
      broken["lines"][0]["flow_max"] = -5.0;
      write_file(scratch + "/broken.json", broken.dump());
      probes_ok = probes_ok &&
                  run_command("'" + cli + "' validate '" + scratch +
                              "/broken.json' >/dev/null 2>&1") == 1;
      if (!probes_ok) {
        std::fprintf(stderr, "CLI exit-code probes failed\n");
        record("thread-count determinism", false, "exit-code probes failed");
      } else {
        std::printf("    CLI exit codes: ok=0, unreadable=2, invalid=1\n");
      }
      std::error_code ec;
      std::filesystem::remove_all(scratch, ec);
    }

    // 2, 3, 7 summarize the accumulators fed by everything above.
    Tolerances tol;
    LpAudit& audit = lp_audit();
    bool cert_ok = audit.solves > 0 && audit.ok(tol);
    record("lp optimality certificates", cert_ok,
           std::to_string(audit.solves) + " solves, worst residual " +
               fmt(audit.worst_primal_residual) + ", gap " +
               fmt(audit.worst_duality_gap) + ", comp " +
               fmt(audit.worst_complementarity));
    record("dispatch constraint residuals",
           solutions_audited > 0 && worst_fidelity <= 1e-8,
           std::to_string(solutions_audited) + " solutions, worst " +
               fmt(worst_fidelity));
    record("metric identities",
           reports_checked > 0 && worst_identity <= 1e-6 && capacity_in_range &&
               capacity_checked > 0,
           std::to_string(reports_checked) + " reports, worst " +
               fmt(worst_identity) + "; " + std::to_string(capacity_checked) +
               " capacity reports in [0,1]");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 1;
  }

  // Print in the canonical order regardless of evaluation order.
  std::vector<std::string> order = {
      "cut solver matches exhaustive model",
      "lp optimality certificates",
      "dispatch constraint residuals",
      "wind sweep trends",
      "placed units lower cost mean and spread",
      "cost non-increasing in unit budget",
      "metric identities",
      "cut validity",
      "thread-count determinism",
  };
  bool all = true;
  int idx = 1;
  for (const std::string& name : order) {
    bool pass = false;
    std::string detail;
    bool found = false;
    for (const Verdict& v : verdicts)
      if (v.name == name) {
        pass = found ? (pass && v.pass) : v.pass;
        if (!detail.empty()) detail += "; ";
        detail += v.detail;
        found = true;
      }
    pass = pass && found;
    all = all && pass;
    std::printf("%d. %-42s %s  (%s)\n", idx++, name.c_str(),
                pass ? "PASS" : "FAIL", detail.c_str());
  }
  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
