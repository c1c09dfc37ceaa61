#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sgrid/cases.hpp"
#include "sgrid/metrics.hpp"
#include "sgrid/placement.hpp"

namespace sgrid {

struct DaySet {
  std::string label;
  ScenarioSet set;
};

struct ExperimentSpec {
  Network net;
  std::vector<DaySet> days;
  std::vector<double> wind_levels;
  std::vector<CaseSpec> cases;
  int threads = 0;
  bool record_timing = false;
  std::string output_dir;
  std::vector<std::string> input_files;  // resolved paths the config referenced
};

inline std::string resolve_path(const std::string& base_dir, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base_dir.empty()) return p;
  return (std::filesystem::path(base_dir) / path).string();
}

inline CaseSpec case_from_json(const nlohmann::json& j, const std::string& ctx) {
  using namespace detail;
  CaseSpec spec;
  const auto& c = need(j, "case", ctx);
  if (!c.is_number_integer()) throw Error(ctx + ".case must be an integer");
  spec.case_id = c.get<int>();
  spec.dc_size = num_or(j, "dc_size", 0.0, ctx);
  spec.dc_shed_cost = num_or(j, "dc_shed_cost", 1000.0, ctx);
  spec.capacity_factor = num_or(j, "capacity_factor", 0.30, ctx);
  spec.tolerance = num_or(j, "tolerance", 1e-6, ctx);
  spec.max_iterations = static_cast<int>(num_or(j, "max_iterations", 200, ctx));
  spec.node_budget = static_cast<long>(num_or(j, "node_budget", 200000, ctx));
  if (auto it = j.find("multi_cut"); it != j.end()) {
    if (!it->is_boolean()) throw Error(ctx + ".multi_cut must be a boolean");
    spec.multi_cut = it->get<bool>();
  }
  if (auto it = j.find("dc_count"); it != j.end()) {
    if (!it->is_number_integer()) throw Error(ctx + ".dc_count must be an integer");
    spec.dc_count = it->get<int>();
  }
  if (auto it = j.find("dc_buses"); it != j.end()) {
    if (!it->is_array()) throw Error(ctx + ".dc_buses must be an array");
    for (const auto& b : *it) {
      if (!b.is_string()) throw Error(ctx + ".dc_buses must hold strings");
      spec.dc_buses.push_back(b.get<std::string>());
    }
  }
  if (spec.dc_count == 0 && !spec.dc_buses.empty())
    spec.dc_count = static_cast<int>(spec.dc_buses.size());
  return spec;
}

// Relative paths inside the document resolve against base_dir, normally the
// directory holding the config file. Scenario weights are normalized on load.
inline ExperimentSpec experiment_from_json(const nlohmann::json& j,
                                           const std::string& base_dir) {
  using namespace detail;
  if (!j.is_object()) throw Error("experiment config must be a JSON object");
  ExperimentSpec spec;
  std::string net_path = resolve_path(base_dir, str_at(j, "network", "config"));
  spec.net = load_network(net_path);
  spec.input_files.push_back(net_path);

  const auto& sets = need(j, "scenario_sets", "config");
  if (!sets.is_array() || sets.empty())
    throw Error("config.scenario_sets must be a non-empty array");
  int i = 0;
  for (const auto& e : sets) {
    std::string ctx = "scenario_sets[" + std::to_string(i++) + "]";
    DaySet day;
    day.label = str_at(e, "day_type", ctx);
    std::string day_path = resolve_path(base_dir, str_at(e, "path", ctx));
    day.set = load_scenarios(day_path, spec.net);
    day.set.day_type = parse_day_type(day.label);
    normalize_probabilities(day.set);
    spec.days.push_back(std::move(day));
    spec.input_files.push_back(day_path);
  }

  const auto& levels = need(j, "wind_levels", "config");
  if (!levels.is_array() || levels.empty())
    throw Error("config.wind_levels must be a non-empty array");
  for (const auto& l : levels) {
    if (!l.is_number() || l.get<double>() < 0.0)
      throw Error("config.wind_levels must hold nonnegative numbers");
    spec.wind_levels.push_back(l.get<double>());
  }

  const auto& cases = need(j, "cases", "config");
  if (!cases.is_array() || cases.empty())
    throw Error("config.cases must be a non-empty array");
  i = 0;
  for (const auto& e : cases) {
    CaseSpec cs = case_from_json(e, "cases[" + std::to_string(i++) + "]");
    validate_case_spec(cs, spec.net);
    spec.cases.push_back(std::move(cs));
  }

  spec.output_dir = resolve_path(base_dir, str_at(j, "output_dir", "config"));
  spec.threads = static_cast<int>(num_or(j, "threads", 0, "config"));
  return spec;
}

struct CellResult {
  int case_id = 0;
  std::string day;
  double wind_level = 0.0;
  bool ok = false;
  std::string error;
  std::vector<std::string> scenario_ids;
  std::vector<double> probabilities;
  std::vector<MetricReport> reports;
  EnsembleStats stats;
  std::optional<PlacementSolution> placement;
  std::optional<AchievedCapacity> achieved;
};

struct ExperimentReport {
  std::vector<CellResult> cells;
  bool all_ok() const {
    for (const auto& c : cells)
      if (!c.ok) return false;
    return true;
  }
};

inline CellResult run_cell(const ExperimentSpec& spec, const CaseSpec& cs,
                           const DaySet& day, double level) {
  CellResult cell;
  cell.case_id = cs.case_id;
  cell.day = day.label;
  cell.wind_level = level;

  // Collocated farms are sized from the unscaled set, then the base farms are
  // scaled to the requested level; the additions never move with the level.
  CaseSetup setup = apply_case(spec.net, cs, &day.set);
  ScenarioSet leveled = scale_to_penetration(day.set, spec.net, level);
  ScenarioSet full = apply_added_farms(leveled, setup);

  for (const auto& sc : full.scenarios) {
    cell.scenario_ids.push_back(sc.id);
    cell.probabilities.push_back(sc.probability);
  }

  PlacementEvaluation ev;
  if (cs.case_id == 4) {
    PlacementConfig cfg = *setup.placement;
    cfg.threads = spec.threads;
    cfg.record_timing = spec.record_timing;
    PlacementSolution sol = solve_benders(setup.net, full, cfg);
    if (!sol.converged)
      throw SolverError("placement did not converge within its budgets");
    ev = evaluate_placement(sol.x, setup.net, full, cfg.unit_capacity_mw,
                            spec.threads, setup.base_farm_count);
    if (cfg.max_units > 0)
      cell.achieved = achieved_capacity(ev.solutions, cell.probabilities,
                                        cfg.max_units, cfg.unit_capacity_mw);
    cell.placement = std::move(sol);
  } else {
    std::vector<int> zeros(setup.net.buses.size(), 0);
    ev = evaluate_placement(zeros, setup.net, full, 0.0, spec.threads,
                            setup.base_farm_count);
  }
  cell.reports = std::move(ev.reports);
  cell.stats = ensemble_stats(cell.reports, cell.probabilities);
  cell.ok = true;
  return cell;
}

// Sweeps the whole (case, day type, wind level) grid. A failing cell records
// its error and the sweep continues.
inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
  ExperimentReport report;
  for (const auto& cs : spec.cases) {
    for (const auto& day : spec.days) {
      for (double level : spec.wind_levels) {
        try {
          report.cells.push_back(run_cell(spec, cs, day, level));
        } catch (const std::exception& e) {
          CellResult cell;
          cell.case_id = cs.case_id;
          cell.day = day.label;
          cell.wind_level = level;
          cell.ok = false;
          cell.error = e.what();
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return report;
}

inline std::string experiment_metrics_csv(const ExperimentReport& report) {
  std::vector<std::string> header = {"case", "day_type", "wind_level", "scenario"};
  for (const auto& f : metric_csv_fields()) header.push_back(f);
  CsvWriter csv(header);
  for (const auto& cell : report.cells) {
    if (!cell.ok) continue;
    for (std::size_t s = 0; s < cell.reports.size(); ++s) {
      std::vector<std::string> row = {std::to_string(cell.case_id), cell.day,
                                      format_double(cell.wind_level),
                                      cell.scenario_ids[s]};
      for (auto& v : metric_csv_values(cell.reports[s])) row.push_back(std::move(v));
      csv.row(row);
    }
  }
  return csv.str();
}

inline std::string experiment_summary_csv(const ExperimentReport& report) {
  std::vector<std::string> header = {"case", "day_type", "wind_level",
                                     "scenarios", "status", "cost_stddev"};
  for (const auto& f : metric_csv_fields()) header.push_back("mean_" + f);
  header.push_back("achieved_capacity_count");
  header.push_back("achieved_capacity_energy");
  CsvWriter csv(header);
  for (const auto& cell : report.cells) {
    std::string status = "ok";
    if (!cell.ok) {
      status = cell.error;
      for (char& c : status)
        if (c == ',' || c == '\n') c = ';';
    }
    std::vector<std::string> row = {std::to_string(cell.case_id), cell.day,
                                    format_double(cell.wind_level),
                                    std::to_string(cell.scenario_ids.size()),
                                    status};
    if (cell.ok) {
      row.push_back(format_double(cell.stats.cost_stddev));
      for (auto& v : metric_csv_values(cell.stats.mean)) row.push_back(std::move(v));
    } else {
      row.insert(row.end(), 1 + metric_csv_fields().size(), "");
    }
    if (cell.achieved) {
      row.push_back(format_double(cell.achieved->count_mean));
      row.push_back(format_double(cell.achieved->energy_mean));
    } else {
      row.push_back("");
      row.push_back("");
    }
    csv.row(row);
  }
  return csv.str();
}

inline std::string experiment_placement_csv(const ExperimentReport& report,
                                            const Network& net) {
  CsvWriter csv({"case", "day_type", "wind_level", "bus", "x"});
  for (const auto& cell : report.cells) {
    if (!cell.ok || !cell.placement) continue;
    for (std::size_t n = 0; n < net.buses.size(); ++n)
      csv.row({std::to_string(cell.case_id), cell.day,
               format_double(cell.wind_level), net.buses[n].id,
               std::to_string(cell.placement->x[n])});
  }
  return csv.str();
}

inline std::string experiment_convergence_csv(const ExperimentReport& report) {
  CsvWriter csv({"case", "day_type", "wind_level", "iteration", "lb", "ub", "gap",
                 "seconds", "cuts_added"});
  for (const auto& cell : report.cells) {
    if (!cell.ok || !cell.placement) continue;
    for (const auto& r : cell.placement->log) {
      std::string gap = std::isfinite(r.gap) ? format_double(r.gap) : "inf";
      csv.row({std::to_string(cell.case_id), cell.day,
               format_double(cell.wind_level), std::to_string(r.iteration),
               format_double(r.lower_bound), format_double(r.upper_bound), gap,
               format_double(r.seconds), std::to_string(r.cuts_added)});
    }
  }
  return csv.str();
}

}  // namespace sgrid
