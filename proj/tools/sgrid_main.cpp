#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "sgrid/experiment.hpp"
#include "sgrid/manifest.hpp"

using namespace sgrid;

namespace {

struct DispatchArgs {
  std::string net_path;
  std::string scenarios_path;
  std::string day;
  double level = -1.0;
  bool level_given = false;
  std::string out_dir;
  int threads = 0;
};

struct PlaceArgs {
  std::string net_path;
  std::string scenarios_path;
  int k = 0;
  double u = 0.0;
  std::string method = "benders";
  double tol = 1e-6;
  bool multi_cut = false;
  std::vector<std::string> candidates;
  int iters = 200;
  long nodes = 200000;
  std::string out_dir;
  int threads = 0;
  bool timing = false;
};

struct ExperimentArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  bool threads_given = false;
  bool timing = false;
};

int cmd_validate(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    std::fprintf(stderr, "error: invalid JSON in %s: %s\n", path.c_str(), e.what());
    return 1;
  }
  ValidationReport rep;
  network_from_json(j, &rep);
  for (const auto& w : rep.warnings)
    std::printf("warning: %s\n", w.c_str());
  for (const auto& e : rep.errors)
    std::printf("error: %s\n", e.c_str());
  if (!rep.ok()) {
    std::printf("%s: invalid (%zu error%s)\n", path.c_str(), rep.errors.size(),
                rep.errors.size() == 1 ? "" : "s");
    return 1;
  }
  std::printf("%s: ok\n", path.c_str());
  return 0;
}

ScenarioSet scenario_source(const Network& net, const std::string& path,
                            RunManifest& manifest) {
  ScenarioSet set;
  if (path.empty()) {
    set.horizon = net.horizon;
    for (const auto& w : net.wind_farms) set.farm_ids.push_back(w.id);
    set.scenarios.push_back(attached_trajectories(net));
  } else {
    set = load_scenarios(path, net);
    record_input(manifest, path);
  }
  normalize_probabilities(set);
  return set;
}

void write_scenario_tables(RunManifest& manifest, const std::string& dir,
                           const ScenarioSet& set,
                           const std::vector<DispatchInputs>& inputs,
                           const PlacementEvaluation& ev) {
  CsvWriter dispatch({"scenario", "symbol", "id", "period", "value"});
  CsvWriter lmp({"scenario", "bus", "period", "lmp"});
  std::vector<std::string> header = {"scenario"};
  for (const auto& f : metric_csv_fields()) header.push_back(f);
  CsvWriter metrics(header);
  for (std::size_t s = 0; s < set.scenarios.size(); ++s) {
    const std::string& id = set.scenarios[s].id;
    dispatch_csv_rows(dispatch, ev.solutions[s], inputs[s], {id});
    lmp_csv_rows(lmp, ev.solutions[s], *inputs[s].net, {id});
    std::vector<std::string> row = {id};
    for (auto& v : metric_csv_values(ev.reports[s])) row.push_back(std::move(v));
    metrics.row(row);
  }
  write_output(manifest, dir, "dispatch.csv", dispatch.str());
  write_output(manifest, dir, "lmp.csv", lmp.str());
  write_output(manifest, dir, "metrics.csv", metrics.str());
}

int cmd_dispatch(const DispatchArgs& args) {
  RunManifest manifest = start_manifest("dispatch");
  Network net = load_network(args.net_path);
  record_input(manifest, args.net_path);

  ScenarioSet set = scenario_source(net, args.scenarios_path, manifest);
  if (!args.day.empty()) {
    set.day_type = parse_day_type(args.day);
    manifest.extra["day_type"] = args.day;
  }
  if (args.level_given) {
    set = scale_to_penetration(set, net, args.level);
    manifest.extra["wind_level"] = args.level;
  }
  if (!net.wind_farms.empty()) {
    try {
      manifest.extra["wind_penetration_percent"] =
          100.0 * wind_penetration_fraction(set, net);
    } catch (const Error&) {
    }
  }

  std::vector<int> zeros(net.buses.size(), 0);
  std::vector<DispatchInputs> inputs(set.scenarios.size());
  for (std::size_t s = 0; s < set.scenarios.size(); ++s)
    inputs[s] = inputs_for_scenario(net, set, s, args.day);
  PlacementEvaluation ev =
      evaluate_placement(zeros, net, set, 0.0, args.threads);

  std::filesystem::create_directories(args.out_dir);
  write_scenario_tables(manifest, args.out_dir, set, inputs, ev);
  manifest.extra["scenarios"] = set.scenarios.size();
  manifest.extra["expected_cost"] = ev.expected_cost;
  write_manifest(args.out_dir, manifest);
  std::printf("dispatched %zu scenario%s, expected cost %s\n",
              set.scenarios.size(), set.scenarios.size() == 1 ? "" : "s",
              format_double(ev.expected_cost).c_str());
  return 0;
}

int cmd_place(const PlaceArgs& args) {
  RunManifest manifest = start_manifest("place");
  Network net = load_network(args.net_path);
  record_input(manifest, args.net_path);
  ScenarioSet set = scenario_source(net, args.scenarios_path, manifest);

  PlacementConfig cfg;
  cfg.max_units = args.k;
  cfg.unit_capacity_mw = args.u;
  cfg.tolerance = args.tol;
  cfg.multi_cut = args.multi_cut;
  cfg.max_iterations = args.iters;
  cfg.node_budget = args.nodes;
  cfg.threads = args.threads;
  cfg.record_timing = args.timing;
  for (const auto& id : args.candidates) {
    int n = net.bus_index(id);
    if (n < 0) throw Error("candidate bus '" + id + "' is not in the network");
    cfg.candidate_buses.push_back(n);
  }

  PlacementSolution sol = args.method == "benders"
                              ? solve_benders(net, set, cfg)
                              : solve_deterministic_equivalent(net, set, cfg);
  PlacementEvaluation ev =
      evaluate_placement(sol.x, net, set, args.u, args.threads);

  std::filesystem::create_directories(args.out_dir);
  write_output(manifest, args.out_dir, "placement.csv", placement_csv(sol.x, net));
  if (args.method == "benders")
    write_output(manifest, args.out_dir, "convergence.csv", convergence_csv(sol.log));

  std::vector<DispatchInputs> inputs(set.scenarios.size());
  for (std::size_t s = 0; s < set.scenarios.size(); ++s) {
    inputs[s] = inputs_for_scenario(net, set, s);
    bool any = false;
    for (int v : sol.x) any = any || v > 0;
    if (any) inputs[s].placement = PlacementOverlay{sol.x, args.u};
  }
  write_scenario_tables(manifest, args.out_dir, set, inputs, ev);

  manifest.extra["method"] = args.method;
  manifest.extra["max_units"] = args.k;
  manifest.extra["unit_capacity_mw"] = args.u;
  manifest.extra["expected_cost"] = sol.expected_cost;
  manifest.extra["lower_bound"] = sol.lower_bound;
  manifest.extra["gap"] = sol.gap;
  manifest.extra["iterations"] = sol.iterations;
  manifest.extra["converged"] = sol.converged;
  if (args.k > 0) {
    std::vector<double> probs;
    for (const auto& sc : set.scenarios) probs.push_back(sc.probability);
    AchievedCapacity cap =
        achieved_capacity(ev.solutions, probs, args.k, args.u);
    manifest.extra["achieved_capacity_count"] = cap.count_mean;
    manifest.extra["achieved_capacity_energy"] = cap.energy_mean;
  }
  if (!sol.converged) {
    manifest.status = "incomplete";
    write_manifest(args.out_dir, manifest);
    std::fprintf(stderr, "error: placement stopped at gap %s without converging\n",
                 format_double(sol.gap).c_str());
    return 1;
  }
  write_manifest(args.out_dir, manifest);
  std::string sited;
  for (std::size_t n = 0; n < sol.x.size(); ++n)
    for (int c = 0; c < sol.x[n]; ++c)
      sited += (sited.empty() ? "" : " ") + net.buses[n].id;
  std::printf("placed %d unit(s)%s%s, expected cost %s\n", args.k,
              sited.empty() ? "" : " at ", sited.c_str(),
              format_double(sol.expected_cost).c_str());
  return 0;
}

int cmd_experiment(const ExperimentArgs& args) {
  RunManifest manifest = start_manifest("experiment");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(args.config_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("invalid JSON in " + args.config_path + ": " + e.what());
  }
  std::string base_dir =
      std::filesystem::path(args.config_path).parent_path().string();
  ExperimentSpec spec = experiment_from_json(j, base_dir);
  if (!args.out_dir.empty()) spec.output_dir = args.out_dir;
  if (args.threads_given) spec.threads = args.threads;
  if (args.timing) spec.record_timing = true;

  record_input(manifest, args.config_path);
  for (const auto& p : spec.input_files) record_input(manifest, p);

  ExperimentReport report = run_experiment(spec);

  std::filesystem::create_directories(spec.output_dir);
  write_output(manifest, spec.output_dir, "metrics.csv",
               experiment_metrics_csv(report));
  write_output(manifest, spec.output_dir, "metrics_summary.csv",
               experiment_summary_csv(report));
  write_output(manifest, spec.output_dir, "placement.csv",
               experiment_placement_csv(report, spec.net));
  write_output(manifest, spec.output_dir, "convergence.csv",
               experiment_convergence_csv(report));

  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : report.cells)
    cells.push_back({{"case", cell.case_id},
                     {"day_type", cell.day},
                     {"wind_level", cell.wind_level},
                     {"status", cell.ok ? "ok" : cell.error}});
  manifest.extra["cells"] = std::move(cells);
  if (!report.all_ok()) manifest.status = "partial";
  write_manifest(spec.output_dir, manifest);

  std::size_t bad = 0;
  for (const auto& cell : report.cells)
    if (!cell.ok) ++bad;
  std::printf("ran %zu cell(s), %zu failed, outputs in %s\n",
              report.cells.size(), bad, spec.output_dir.c_str());
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"economic dispatch and data-center placement for stranded power"};
  app.set_version_flag("--version", std::string("sgrid ") + kVersion);
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate =
      app.add_subcommand("validate", "check a network file and report problems");
  validate->add_option("network", validate_path, "network JSON file")->required();

  DispatchArgs dargs;
  auto* dispatch = app.add_subcommand(
      "dispatch", "solve hourly dispatch over one or more wind scenarios");
  dispatch->add_option("--net", dargs.net_path, "network JSON file")->required();
  dispatch->add_option("--scenarios", dargs.scenarios_path,
                       "wind scenario CSV; defaults to trajectories attached "
                       "to the network");
  dispatch->add_option("--day", dargs.day, "day-type label, e.g. SummerWD");
  auto* level_opt = dispatch->add_option(
      "--level", dargs.level, "rescale wind to this penetration fraction");
  dispatch->add_option("--out", dargs.out_dir, "output directory")->required();
  dispatch->add_option("--threads", dargs.threads,
                       "scenario solves to run in parallel");

  PlaceArgs pargs;
  auto* place = app.add_subcommand(
      "place", "choose data-center buses against a wind scenario set");
  place->add_option("--net", pargs.net_path, "network JSON file")->required();
  place->add_option("--scenarios", pargs.scenarios_path, "wind scenario CSV")
      ->required();
  place->add_option("--k", pargs.k, "number of units to site")
      ->required()
      ->check(CLI::NonNegativeNumber);
  place->add_option("--u", pargs.u, "capacity of one unit in MW")
      ->required()
      ->check(CLI::NonNegativeNumber);
  place->add_option("--method", pargs.method, "benders or detequiv")
      ->check(CLI::IsMember({"benders", "detequiv"}));
  place->add_option("--tol", pargs.tol, "relative optimality gap");
  place->add_flag("--multi-cut", pargs.multi_cut, "one cut per scenario");
  place->add_option("--candidates", pargs.candidates,
                    "restrict siting to these bus ids")
      ->delimiter(',');
  place->add_option("--iters", pargs.iters, "iteration budget");
  place->add_option("--nodes", pargs.nodes, "branch-and-bound node budget");
  place->add_option("--out", pargs.out_dir, "output directory")->required();
  place->add_option("--threads", pargs.threads,
                    "scenario solves to run in parallel");
  place->add_flag("--timing", pargs.timing,
                  "record wall-clock seconds in convergence.csv");

  ExperimentArgs eargs;
  auto* experiment = app.add_subcommand(
      "experiment", "run a case/day/wind-level sweep from a config file");
  experiment->add_option("--config", eargs.config_path, "experiment JSON config")
      ->required();
  experiment->add_option("--out", eargs.out_dir,
                         "override the config output directory");
  auto* ethreads = experiment->add_option("--threads", eargs.threads,
                                          "override the config thread count");
  experiment->add_flag("--timing", eargs.timing,
                       "record wall-clock seconds in convergence.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_path);
    if (dispatch->parsed()) {
      dargs.level_given = level_opt->count() > 0;
      return cmd_dispatch(dargs);
    }
    if (place->parsed()) return cmd_place(pargs);
    if (experiment->parsed()) {
      eargs.threads_given = ethreads->count() > 0;
      return cmd_experiment(eargs);
    }
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
