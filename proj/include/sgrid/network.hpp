#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgrid/util.hpp"

namespace sgrid {

struct Bus {
  std::string id;
  double theta_min = -30.0;
  double theta_max = 30.0;
};

struct Line {
  std::string id;
  std::string from_bus, to_bus;
  double susceptance = 0.0;  // MW per angle unit
  double flow_max = 0.0;     // MW, symmetric limit
};

struct ThermalGenerator {
  std::string id;
  std::string bus;
  double cost = 0.0;  // $/MWh
  double p_max = 0.0;
  double ramp_up = 0.0;    // MW per period
  double ramp_down = 0.0;  // MW per period
  double p_initial = 0.0;  // output in the period before the horizon
};

struct FixedLoad {
  std::string id;
  std::string bus;
  std::vector<double> demand;  // MW per period
  double shed_cost = 0.0;      // $/MWh of unserved demand
};

struct ImportPoint {
  std::string id;
  std::string bus;
  std::vector<double> supply;  // MW available per period
  double spill_cost = 0.0;     // $/MWh refused
};

struct RenewableUnit {
  std::string id;
  std::string bus;
  std::vector<double> supply;
  double spill_cost = 0.0;
};

struct WindFarm {
  std::string id;
  std::string bus;
  double spill_cost = 0.0;
  // Optional deterministic trajectory; scenario files usually supply it.
  std::optional<std::vector<double>> supply;
};

struct Network {
  int horizon = 0;
  double period_hours = 1.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<ThermalGenerator> generators;
  std::vector<FixedLoad> loads;
  std::vector<ImportPoint> imports;
  std::vector<RenewableUnit> renewables;
  std::vector<WindFarm> wind_farms;

  int bus_index(const std::string& id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
      if (buses[i].id == id) return static_cast<int>(i);
    return -1;
  }
  int wind_farm_index(const std::string& id) const {
    for (std::size_t i = 0; i < wind_farms.size(); ++i)
      if (wind_farms[i].id == id) return static_cast<int>(i);
    return -1;
  }
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
  std::string joined() const {
    std::string s;
    for (const auto& e : errors) s += e + "\n";
    return s;
  }
};

// Per-bus attachment lists, all by index into the network vectors.
struct Incidence {
  std::vector<std::vector<int>> lines_in;   // to_bus lands here
  std::vector<std::vector<int>> lines_out;  // from_bus leaves here
  std::vector<std::vector<int>> generators;
  std::vector<std::vector<int>> loads;
  std::vector<std::vector<int>> imports;
  std::vector<std::vector<int>> renewables;
  std::vector<std::vector<int>> wind_farms;
};

inline Incidence incidence(const Network& net) {
  Incidence inc;
  std::size_t nb = net.buses.size();
  inc.lines_in.resize(nb);
  inc.lines_out.resize(nb);
  inc.generators.resize(nb);
  inc.loads.resize(nb);
  inc.imports.resize(nb);
  inc.renewables.resize(nb);
  inc.wind_farms.resize(nb);
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    int f = net.bus_index(net.lines[l].from_bus);
    int t = net.bus_index(net.lines[l].to_bus);
    if (f >= 0) inc.lines_out[f].push_back(static_cast<int>(l));
    if (t >= 0) inc.lines_in[t].push_back(static_cast<int>(l));
  }
  auto attach = [&](auto& slot, const auto& units) {
    for (std::size_t k = 0; k < units.size(); ++k) {
      int b = net.bus_index(units[k].bus);
      if (b >= 0) slot[b].push_back(static_cast<int>(k));
    }
  };
  attach(inc.generators, net.generators);
  attach(inc.loads, net.loads);
  attach(inc.imports, net.imports);
  attach(inc.renewables, net.renewables);
  attach(inc.wind_farms, net.wind_farms);
  return inc;
}

inline ValidationReport validate_network(const Network& net) {
  ValidationReport rep;
  auto err = [&](const std::string& m) { rep.errors.push_back(m); };

  if (net.horizon < 1) err("horizon must be at least 1");
  if (!(net.period_hours > 0.0)) err("period_hours must be positive");
  if (net.buses.empty()) err("at least one bus is required");

  auto check_unique = [&](const auto& units, const char* what) {
    for (std::size_t i = 0; i < units.size(); ++i)
      for (std::size_t k = i + 1; k < units.size(); ++k)
        if (units[i].id == units[k].id)
          err(std::string(what) + " id '" + units[i].id + "' is duplicated");
  };
  check_unique(net.buses, "bus");
  check_unique(net.lines, "line");
  check_unique(net.generators, "generator");
  check_unique(net.loads, "load");
  check_unique(net.imports, "import");
  check_unique(net.renewables, "renewable");
  check_unique(net.wind_farms, "wind_farm");

  auto check_bus_ref = [&](const std::string& bus, const std::string& owner) {
    if (net.bus_index(bus) < 0) err(owner + " references unknown bus '" + bus + "'");
  };
  auto check_series = [&](const std::vector<double>& s, const std::string& owner,
                          const char* field) {
    if (static_cast<int>(s.size()) != net.horizon) {
      err(owner + "." + field + " has " + std::to_string(s.size()) +
          " entries, horizon is " + std::to_string(net.horizon));
      return;
    }
    for (double v : s)
      if (!(v >= 0.0) || !std::isfinite(v)) {
        err(owner + "." + field + " has a negative or non-finite entry");
        return;
      }
  };

  for (const Bus& b : net.buses)
    if (b.theta_min > b.theta_max)
      err("bus " + b.id + " has theta_min > theta_max");
  for (const Line& l : net.lines) {
    check_bus_ref(l.from_bus, "line " + l.id);
    check_bus_ref(l.to_bus, "line " + l.id);
    if (l.from_bus == l.to_bus) err("line " + l.id + " connects a bus to itself");
    if (!(l.susceptance > 0.0)) err("line " + l.id + " needs susceptance > 0");
    if (l.flow_max < 0.0) err("line " + l.id + " has negative flow_max");
  }
  for (const ThermalGenerator& g : net.generators) {
    check_bus_ref(g.bus, "generator " + g.id);
    if (g.cost < 0.0) err("generator " + g.id + " has negative cost");
    if (g.p_max < 0.0) err("generator " + g.id + " has negative p_max");
    if (g.ramp_up < 0.0 || g.ramp_down < 0.0)
      err("generator " + g.id + " has a negative ramp limit");
    if (g.p_initial < 0.0 || g.p_initial > g.p_max)
      err("generator " + g.id + " has p_initial outside [0, p_max]");
  }
  for (const FixedLoad& d : net.loads) {
    check_bus_ref(d.bus, "load " + d.id);
    if (d.shed_cost < 0.0) err("load " + d.id + " has negative shed_cost");
    check_series(d.demand, "load " + d.id, "demand");
  }
  for (const ImportPoint& m : net.imports) {
    check_bus_ref(m.bus, "import " + m.id);
    if (m.spill_cost < 0.0) err("import " + m.id + " has negative spill_cost");
    check_series(m.supply, "import " + m.id, "supply");
  }
  for (const RenewableUnit& r : net.renewables) {
    check_bus_ref(r.bus, "renewable " + r.id);
    if (r.spill_cost < 0.0) err("renewable " + r.id + " has negative spill_cost");
    check_series(r.supply, "renewable " + r.id, "supply");
  }
  for (const WindFarm& w : net.wind_farms) {
    check_bus_ref(w.bus, "wind_farm " + w.id);
    if (w.spill_cost < 0.0) err("wind_farm " + w.id + " has negative spill_cost");
    if (w.supply) check_series(*w.supply, "wind_farm " + w.id, "supply");
  }

  // Connectivity: flag buses that cannot reach the first bus over lines.
  if (!net.buses.empty() && rep.errors.empty()) {
    std::vector<int> parent(net.buses.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (const Line& l : net.lines) {
      int a = find(net.bus_index(l.from_bus));
      int b = find(net.bus_index(l.to_bus));
      if (a != b) parent[a] = b;
    }
    int root = find(0);
    std::string isolated;
    for (std::size_t i = 1; i < net.buses.size(); ++i)
      if (find(static_cast<int>(i)) != root)
        isolated += (isolated.empty() ? "" : ", ") + net.buses[i].id;
    if (!isolated.empty())
      rep.warnings.push_back("buses not connected to " + net.buses[0].id + ": " +
                             isolated);
  }
  return rep;
}

namespace detail {

inline const nlohmann::json& need(const nlohmann::json& j, const char* key,
                                  const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ctx + "." + key + " is missing");
  return *it;
}

inline double num_at(const nlohmann::json& j, const char* key, const std::string& ctx) {
  const auto& v = need(j, key, ctx);
  if (!v.is_number()) throw Error(ctx + "." + key + " must be a number");
  return v.get<double>();
}

inline double num_or(const nlohmann::json& j, const char* key, double fallback,
                     const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw Error(ctx + "." + key + " must be a number");
  return it->get<double>();
}

inline std::string str_at(const nlohmann::json& j, const char* key,
                          const std::string& ctx) {
  const auto& v = need(j, key, ctx);
  if (!v.is_string()) throw Error(ctx + "." + key + " must be a string");
  return v.get<std::string>();
}

inline std::vector<double> series_at(const nlohmann::json& j, const char* key,
                                     const std::string& ctx) {
  const auto& v = need(j, key, ctx);
  if (!v.is_array()) throw Error(ctx + "." + key + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw Error(ctx + "." + key + " must hold only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

// With a report pointer, validation findings land there instead of throwing;
// structural JSON problems still throw either way.
inline Network network_from_json(const nlohmann::json& j,
                                 ValidationReport* report = nullptr) {
  using namespace detail;
  if (!j.is_object()) throw Error("network document must be a JSON object");
  Network net;
  const auto& h = need(j, "horizon", "network");
  if (!h.is_number_integer() || h.get<long>() < 1)
    throw Error("network.horizon must be a positive integer");
  net.horizon = h.get<int>();
  net.period_hours = num_or(j, "period_hours", 1.0, "network");

  auto arr = [&](const char* key) -> const nlohmann::json& {
    static const nlohmann::json empty = nlohmann::json::array();
    auto it = j.find(key);
    if (it == j.end()) return empty;
    if (!it->is_array()) throw Error(std::string("network.") + key + " must be an array");
    return *it;
  };

  int i = 0;
  for (const auto& e : arr("buses")) {
    std::string ctx = "buses[" + std::to_string(i++) + "]";
    Bus b;
    b.id = str_at(e, "id", ctx);
    b.theta_min = num_or(e, "theta_min", -30.0, ctx);
    b.theta_max = num_or(e, "theta_max", 30.0, ctx);
    net.buses.push_back(std::move(b));
  }
  i = 0;
  for (const auto& e : arr("lines")) {
    std::string ctx = "lines[" + std::to_string(i++) + "]";
    Line l;
    l.id = str_at(e, "id", ctx);
    l.from_bus = str_at(e, "from_bus", ctx);
    l.to_bus = str_at(e, "to_bus", ctx);
    l.susceptance = num_at(e, "susceptance", ctx);
    l.flow_max = num_at(e, "flow_max", ctx);
    net.lines.push_back(std::move(l));
  }
  i = 0;
  for (const auto& e : arr("generators")) {
    std::string ctx = "generators[" + std::to_string(i++) + "]";
    ThermalGenerator g;
    g.id = str_at(e, "id", ctx);
    g.bus = str_at(e, "bus", ctx);
    g.cost = num_at(e, "cost", ctx);
    g.p_max = num_at(e, "p_max", ctx);
    g.ramp_up = num_at(e, "ramp_up", ctx);
    g.ramp_down = num_at(e, "ramp_down", ctx);
    g.p_initial = num_or(e, "p_initial", 0.0, ctx);
    net.generators.push_back(std::move(g));
  }
  i = 0;
  for (const auto& e : arr("loads")) {
    std::string ctx = "loads[" + std::to_string(i++) + "]";
    FixedLoad d;
    d.id = str_at(e, "id", ctx);
    d.bus = str_at(e, "bus", ctx);
    d.shed_cost = num_at(e, "shed_cost", ctx);
    d.demand = series_at(e, "demand", ctx);
    net.loads.push_back(std::move(d));
  }
  i = 0;
  for (const auto& e : arr("imports")) {
    std::string ctx = "imports[" + std::to_string(i++) + "]";
    ImportPoint m;
    m.id = str_at(e, "id", ctx);
    m.bus = str_at(e, "bus", ctx);
    m.spill_cost = num_at(e, "spill_cost", ctx);
    m.supply = series_at(e, "supply", ctx);
    net.imports.push_back(std::move(m));
  }
  i = 0;
  for (const auto& e : arr("renewables")) {
    std::string ctx = "renewables[" + std::to_string(i++) + "]";
    RenewableUnit r;
    r.id = str_at(e, "id", ctx);
    r.bus = str_at(e, "bus", ctx);
    r.spill_cost = num_at(e, "spill_cost", ctx);
    r.supply = series_at(e, "supply", ctx);
    net.renewables.push_back(std::move(r));
  }
  i = 0;
  for (const auto& e : arr("wind_farms")) {
    std::string ctx = "wind_farms[" + std::to_string(i++) + "]";
    WindFarm w;
    w.id = str_at(e, "id", ctx);
    w.bus = str_at(e, "bus", ctx);
    w.spill_cost = num_at(e, "spill_cost", ctx);
    if (e.contains("supply")) w.supply = series_at(e, "supply", ctx);
    net.wind_farms.push_back(std::move(w));
  }

  ValidationReport rep = validate_network(net);
  if (report) {
    *report = std::move(rep);
  } else if (!rep.ok()) {
    throw Error("invalid network:\n" + rep.joined());
  }
  return net;
}

inline Network load_network(const std::string& path) {
  std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("invalid JSON in " + path + ": " + e.what());
  }
  return network_from_json(j);
}

inline nlohmann::json emit_network(const Network& net) {
  nlohmann::json j;
  j["horizon"] = net.horizon;
  j["period_hours"] = net.period_hours;
  j["buses"] = nlohmann::json::array();
  for (const Bus& b : net.buses)
    j["buses"].push_back(
        {{"id", b.id}, {"theta_min", b.theta_min}, {"theta_max", b.theta_max}});
  j["lines"] = nlohmann::json::array();
  for (const Line& l : net.lines)
    j["lines"].push_back({{"id", l.id},
                          {"from_bus", l.from_bus},
                          {"to_bus", l.to_bus},
                          {"susceptance", l.susceptance},
                          {"flow_max", l.flow_max}});
  j["generators"] = nlohmann::json::array();
  for (const ThermalGenerator& g : net.generators)
    j["generators"].push_back({{"id", g.id},
                               {"bus", g.bus},
                               {"cost", g.cost},
                               {"p_max", g.p_max},
                               {"ramp_up", g.ramp_up},
                               {"ramp_down", g.ramp_down},
                               {"p_initial", g.p_initial}});
  j["loads"] = nlohmann::json::array();
  for (const FixedLoad& d : net.loads)
    j["loads"].push_back({{"id", d.id},
                          {"bus", d.bus},
                          {"shed_cost", d.shed_cost},
                          {"demand", d.demand}});
  j["imports"] = nlohmann::json::array();
  for (const ImportPoint& m : net.imports)
    j["imports"].push_back({{"id", m.id},
                            {"bus", m.bus},
                            {"spill_cost", m.spill_cost},
                            {"supply", m.supply}});
  j["renewables"] = nlohmann::json::array();
  for (const RenewableUnit& r : net.renewables)
    j["renewables"].push_back({{"id", r.id},
                               {"bus", r.bus},
                               {"spill_cost", r.spill_cost},
                               {"supply", r.supply}});
  j["wind_farms"] = nlohmann::json::array();
  for (const WindFarm& w : net.wind_farms) {
    nlohmann::json e = {{"id", w.id}, {"bus", w.bus}, {"spill_cost", w.spill_cost}};
    if (w.supply) e["supply"] = *w.supply;
    j["wind_farms"].push_back(std::move(e));
  }
  return j;
}

}  // namespace sgrid
