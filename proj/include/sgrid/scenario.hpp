#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sgrid/network.hpp"
#include "sgrid/util.hpp"

namespace sgrid {

enum class Season { Spring, Summer, Fall, Winter };
enum class DayKind { Weekday, Weekend };

struct DayType {
  Season season = Season::Spring;
  DayKind kind = DayKind::Weekday;
  bool operator==(const DayType&) const = default;
};

inline std::string to_string(DayType d) {
  const char* s = "";
  switch (d.season) {
    case Season::Spring: s = "Spring"; break;
    case Season::Summer: s = "Summer"; break;
    case Season::Fall: s = "Fall"; break;
    case Season::Winter: s = "Winter"; break;
  }
  return std::string(s) + (d.kind == DayKind::Weekday ? "WD" : "WE");
}

inline DayType parse_day_type(const std::string& s) {
  static const std::pair<const char*, Season> seasons[] = {
      {"Spring", Season::Spring},
      {"Summer", Season::Summer},
      {"Fall", Season::Fall},
      {"Winter", Season::Winter}};
  for (const auto& [name, season] : seasons) {
    std::string wd = std::string(name) + "WD";
    std::string we = std::string(name) + "WE";
    if (s == wd) return {season, DayKind::Weekday};
    if (s == we) return {season, DayKind::Weekend};
  }
  throw Error("unknown day type '" + s + "' (expected e.g. SpringWD, FallWE)");
}

struct WindScenario {
  std::string id;
  double probability = 0.0;
  std::vector<std::vector<double>> output;  // [farm][period] MW, farm order from the set
};

struct ScenarioSet {
  DayType day_type;
  int horizon = 0;
  std::vector<std::string> farm_ids;  // matches the network's wind farm order
  std::vector<WindScenario> scenarios;

  double probability_sum() const {
    double s = 0.0;
    for (const auto& sc : scenarios) s += sc.probability;
    return s;
  }
};

// CSV with header scenario_id,farm_id,period,mw,weight. Periods are 1-based in
// files. Every scenario must cover every wind farm of the network over the
// whole horizon; scenario order follows first appearance in the file.
inline ScenarioSet parse_scenarios(const std::string& text, const Network& net,
                                   const std::string& where = "scenario csv") {
  auto rows = parse_csv(text);
  if (rows.empty()) throw Error(where + " is empty");
  const std::vector<std::string> expect = {"scenario_id", "farm_id", "period", "mw",
                                           "weight"};
  if (rows[0] != expect)
    throw Error(where + " must start with header scenario_id,farm_id,period,mw,weight");

  ScenarioSet set;
  set.horizon = net.horizon;
  for (const auto& w : net.wind_farms) set.farm_ids.push_back(w.id);

  std::map<std::string, int> scen_index;
  int F = static_cast<int>(set.farm_ids.size());
  std::vector<std::vector<std::vector<bool>>> seen;  // [scenario][farm][period]

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::string ctx = where + " line " + std::to_string(r + 1);
    if (row.size() != 5) throw Error(ctx + ": expected 5 fields");
    const std::string& sid = row[0];
    int farm = net.wind_farm_index(row[1]);
    if (farm < 0) throw Error(ctx + ": unknown wind farm '" + row[1] + "'");
    long period = parse_long(row[2], ctx);
    if (period < 1 || period > net.horizon)
      throw Error(ctx + ": period " + row[2] + " outside 1.." +
                  std::to_string(net.horizon));
    double mw = parse_double(row[3], ctx);
    if (!(mw >= 0.0) || !std::isfinite(mw))
      throw Error(ctx + ": mw must be nonnegative");
    double weight = parse_double(row[4], ctx);
    if (!(weight > 0.0) || !std::isfinite(weight))
      throw Error(ctx + ": weight must be positive");

    auto it = scen_index.find(sid);
    int s;
    if (it == scen_index.end()) {
      s = static_cast<int>(set.scenarios.size());
      scen_index.emplace(sid, s);
      WindScenario sc;
      sc.id = sid;
      sc.probability = weight;
      sc.output.assign(F, std::vector<double>(net.horizon, 0.0));
      set.scenarios.push_back(std::move(sc));
      seen.emplace_back(F, std::vector<bool>(net.horizon, false));
    } else {
      s = it->second;
      if (std::abs(set.scenarios[s].probability - weight) > 1e-12)
        throw Error(ctx + ": weight differs from earlier rows of scenario " + sid);
    }
    int t = static_cast<int>(period) - 1;
    if (seen[s][farm][t])
      throw Error(ctx + ": duplicate entry for scenario " + sid + ", farm " + row[1] +
                  ", period " + row[2]);
    seen[s][farm][t] = true;
    set.scenarios[s].output[farm][t] = mw;
  }

  for (std::size_t s = 0; s < set.scenarios.size(); ++s)
    for (int f = 0; f < F; ++f)
      for (int t = 0; t < net.horizon; ++t)
        if (!seen[s][f][t])
          throw Error(where + ": scenario " + set.scenarios[s].id + " lacks farm " +
                      set.farm_ids[f] + " period " + std::to_string(t + 1));
  if (set.scenarios.empty()) throw Error(where + " holds no scenario rows");
  return set;
}

inline ScenarioSet load_scenarios(const std::string& path, const Network& net) {
  return parse_scenarios(read_file(path), net, path);
}

inline std::string emit_scenarios(const ScenarioSet& set) {
  CsvWriter csv({"scenario_id", "farm_id", "period", "mw", "weight"});
  for (const auto& sc : set.scenarios)
    for (std::size_t f = 0; f < set.farm_ids.size(); ++f)
      for (int t = 0; t < set.horizon; ++t)
        csv.row({sc.id, set.farm_ids[f], std::to_string(t + 1),
                 format_double(sc.output[f][t]), format_double(sc.probability)});
  return csv.str();
}

inline void normalize_probabilities(ScenarioSet& set) {
  double sum = set.probability_sum();
  if (!(sum > 0.0)) throw Error("scenario probabilities sum to zero");
  for (auto& sc : set.scenarios) sc.probability /= sum;
}

inline void require_normalized(const ScenarioSet& set) {
  if (std::abs(set.probability_sum() - 1.0) > 1e-9)
    throw Error("scenario probabilities sum to " +
                format_double(set.probability_sum()) +
                "; run normalize_probabilities first");
}

// Probability-weighted wind energy divided by total demand energy, as a
// fraction. Only the listed farms count; by default all of them do.
inline double wind_penetration_fraction(const ScenarioSet& set, const Network& net,
                                        int farm_limit = -1) {
  require_normalized(set);
  double demand = 0.0;
  for (const auto& d : net.loads)
    for (double v : d.demand) demand += v;
  if (!(demand > 0.0)) throw Error("network has no demand energy");
  int F = farm_limit < 0 ? static_cast<int>(set.farm_ids.size())
                         : std::min<int>(farm_limit, set.farm_ids.size());
  double wind = 0.0;
  for (const auto& sc : set.scenarios) {
    double e = 0.0;
    for (int f = 0; f < F; ++f)
      for (double v : sc.output[f]) e += v;
    wind += sc.probability * e;
  }
  return wind / demand;
}

// Rescales every trajectory so the expected wind energy equals level (a
// fraction of demand energy). level 0 zeroes the trajectories.
inline ScenarioSet scale_to_penetration(const ScenarioSet& set, const Network& net,
                                        double level) {
  if (level < 0.0) throw Error("penetration level must be nonnegative");
  ScenarioSet out = set;
  if (level == 0.0) {
    for (auto& sc : out.scenarios)
      for (auto& farm : sc.output) std::fill(farm.begin(), farm.end(), 0.0);
    return out;
  }
  double base = wind_penetration_fraction(set, net);
  if (!(base > 0.0))
    throw Error("cannot scale to a positive penetration from zero wind");
  double k = level / base;
  for (auto& sc : out.scenarios)
    for (auto& farm : sc.output)
      for (double& v : farm) v *= k;
  return out;
}

// Probability-weighted time-average output of one farm, in MW.
inline double mean_farm_output(const ScenarioSet& set, int farm) {
  require_normalized(set);
  if (farm < 0 || farm >= static_cast<int>(set.farm_ids.size()))
    throw Error("farm index out of range");
  if (set.horizon < 1) throw Error("scenario set has no horizon");
  double mean = 0.0;
  for (const auto& sc : set.scenarios) {
    double s = 0.0;
    for (double v : sc.output[farm]) s += v;
    mean += sc.probability * s / set.horizon;
  }
  return mean;
}

// Deterministic trajectories taken from the wind farm attachments, usable
// anywhere a scenario realization is expected.
inline WindScenario attached_trajectories(const Network& net) {
  WindScenario sc;
  sc.id = "attached";
  sc.probability = 1.0;
  for (const auto& w : net.wind_farms) {
    if (!w.supply)
      throw Error("wind farm " + w.id + " has no attached supply trajectory");
    sc.output.push_back(*w.supply);
  }
  return sc;
}

}  // namespace sgrid
