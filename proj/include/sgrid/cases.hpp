#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "sgrid/placement.hpp"
#include "sgrid/scenario.hpp"

namespace sgrid {

// The four system configurations of the study:
//   1 base system as given
//   2 inflexible data centers: fixed loads of dc_size at chosen buses
//   3 case 2 plus a collocated wind farm per data center, sized so its mean
//     output covers the data center's draw
//   4 the same fleet as dispatchable loads, sited by the placement solver
struct CaseSpec {
  int case_id = 1;
  int dc_count = 0;
  double dc_size = 0.0;          // MW per data center
  double dc_shed_cost = 1000.0;  // $/MWh penalty for cases 2 and 3
  std::vector<std::string> dc_buses;  // cases 2 and 3
  double capacity_factor = 0.30;      // case 3 nameplate = dc_size / factor
  double tolerance = 1e-6;            // case 4 solver knobs
  bool multi_cut = false;
  int max_iterations = 200;
  long node_budget = 200000;
};

inline void validate_case_spec(const CaseSpec& spec, const Network& net) {
  if (spec.case_id < 1 || spec.case_id > 4)
    throw Error("case must be 1, 2, 3 or 4");
  if (spec.dc_count < 0) throw Error("dc_count must be nonnegative");
  if (spec.dc_size < 0.0) throw Error("dc_size must be nonnegative");
  if (spec.dc_shed_cost < 0.0) throw Error("dc_shed_cost must be nonnegative");
  if (!(spec.capacity_factor > 0.0) || spec.capacity_factor > 1.0)
    throw Error("capacity_factor must lie in (0, 1]");
  if (spec.case_id == 2 || spec.case_id == 3) {
    if (spec.dc_buses.empty())
      throw Error("cases 2 and 3 need explicit dc_buses");
    if (spec.dc_count != 0 &&
        spec.dc_count != static_cast<int>(spec.dc_buses.size()))
      throw Error("dc_count disagrees with the dc_buses list");
  }
  for (const auto& b : spec.dc_buses)
    if (net.bus_index(b) < 0)
      throw Error("dc bus '" + b + "' is not in the network");
}

// Nearest bus with a wind farm by line hops, then the first farm there.
// Returns -1 when no farm is reachable.
inline int nearest_wind_farm(const Network& net, int bus) {
  const int nb = static_cast<int>(net.buses.size());
  if (bus < 0 || bus >= nb) throw Error("bus index out of range");
  std::vector<std::vector<int>> adj(nb);
  for (const auto& l : net.lines) {
    int f = net.bus_index(l.from_bus), t = net.bus_index(l.to_bus);
    adj[f].push_back(t);
    adj[t].push_back(f);
  }
  Incidence inc = incidence(net);
  std::vector<bool> seen(nb, false);
  std::deque<int> queue{bus};
  seen[bus] = true;
  while (!queue.empty()) {
    int n = queue.front();
    queue.pop_front();
    if (!inc.wind_farms[n].empty()) return inc.wind_farms[n][0];
    for (int m : adj[n])
      if (!seen[m]) {
        seen[m] = true;
        queue.push_back(m);
      }
  }
  return -1;
}

struct CaseSetup {
  Network net;
  int base_farm_count = 0;  // farms of the input system, before any collocated
  std::vector<std::string> added_ids;
  std::vector<std::vector<std::vector<double>>> added_output;  // [farm][scen][t]
  std::optional<PlacementConfig> placement;  // case 4 only
};

// donor supplies the trajectory shapes for case 3; its probabilities must be
// normalized and it stays unscaled so sizing does not move with wind levels.
inline CaseSetup apply_case(const Network& base, const CaseSpec& spec,
                            const ScenarioSet* donor = nullptr) {
  validate_case_spec(spec, base);
  CaseSetup setup;
  setup.net = base;
  setup.base_farm_count = static_cast<int>(base.wind_farms.size());

  if (spec.case_id == 2 || spec.case_id == 3) {
    for (std::size_t i = 0; i < spec.dc_buses.size(); ++i) {
      FixedLoad dc;
      dc.id = "dc" + std::to_string(i + 1);
      dc.bus = spec.dc_buses[i];
      dc.demand.assign(base.horizon, spec.dc_size);
      dc.shed_cost = spec.dc_shed_cost;
      setup.net.loads.push_back(std::move(dc));
    }
  }

  if (spec.case_id == 3) {
    if (!donor) throw Error("case 3 needs a scenario set to clone shapes from");
    if (base.wind_farms.empty())
      throw Error("case 3 needs an existing wind farm shape to clone");
    if (donor->farm_ids.size() != base.wind_farms.size())
      throw Error("donor scenario set does not match the network's farms");
    for (std::size_t i = 0; i < spec.dc_buses.size(); ++i) {
      int farm = nearest_wind_farm(base, base.bus_index(spec.dc_buses[i]));
      if (farm < 0)
        throw Error("no wind farm reachable from bus " + spec.dc_buses[i]);
      double mean = mean_farm_output(*donor, farm);
      if (!(mean > 0.0))
        throw Error("donor farm " + donor->farm_ids[farm] +
                    " has zero mean output; cannot size a collocated farm");
      double k = spec.dc_size / mean;
      WindFarm coll;
      coll.id = "wdc" + std::to_string(i + 1);
      coll.bus = spec.dc_buses[i];
      coll.spill_cost = base.wind_farms[farm].spill_cost;
      setup.net.wind_farms.push_back(std::move(coll));
      setup.added_ids.push_back("wdc" + std::to_string(i + 1));
      std::vector<std::vector<double>> shape;
      for (const auto& sc : donor->scenarios) {
        std::vector<double> tr = sc.output[farm];
        for (double& v : tr) v *= k;
        shape.push_back(std::move(tr));
      }
      setup.added_output.push_back(std::move(shape));
    }
  }

  if (spec.case_id == 4) {
    PlacementConfig cfg;
    cfg.max_units = spec.dc_count;
    cfg.unit_capacity_mw = spec.dc_size;
    for (const auto& b : spec.dc_buses)
      cfg.candidate_buses.push_back(base.bus_index(b));
    cfg.tolerance = spec.tolerance;
    cfg.multi_cut = spec.multi_cut;
    cfg.max_iterations = spec.max_iterations;
    cfg.node_budget = spec.node_budget;
    setup.placement = cfg;
  }

  ValidationReport rep = validate_network(setup.net);
  if (!rep.ok()) throw Error("case produced an invalid network:\n" + rep.joined());
  return setup;
}

// Joins the collocated trajectories onto a (possibly level-scaled) set.
inline ScenarioSet apply_added_farms(const ScenarioSet& set, const CaseSetup& setup) {
  ScenarioSet out = set;
  if (setup.added_ids.empty()) return out;
  for (std::size_t f = 0; f < setup.added_ids.size(); ++f) {
    if (setup.added_output[f].size() != set.scenarios.size())
      throw Error("collocated farm scenarios do not match the set");
    out.farm_ids.push_back(setup.added_ids[f]);
    for (std::size_t s = 0; s < out.scenarios.size(); ++s) {
      if (static_cast<int>(setup.added_output[f][s].size()) != set.horizon)
        throw Error("collocated farm horizon does not match the set");
      out.scenarios[s].output.push_back(setup.added_output[f][s]);
    }
  }
  return out;
}

}  // namespace sgrid
