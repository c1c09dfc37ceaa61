#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgrid/network.hpp"
#include "sgrid/scenario.hpp"
#include "sgrid/simplex.hpp"

namespace sgrid {

// Dispatchable data-center units already sited on the grid: units[n] blocks of
// unit_capacity_mw each at bus n. Their served power is a free sink variable
// with no cost term; only the capacity limit binds.
struct PlacementOverlay {
  std::vector<int> units;
  double unit_capacity_mw = 0.0;
};

struct DispatchInputs {
  const Network* net = nullptr;
  std::vector<std::vector<double>> wind;  // [farm][period] realized availability
  std::optional<PlacementOverlay> placement;
  std::string day_label = "unspecified";
  std::string scenario_id = "deterministic";
};

inline DispatchInputs inputs_for_scenario(const Network& net, const ScenarioSet& set,
                                          int s, const std::string& day_label = "") {
  if (s < 0 || s >= static_cast<int>(set.scenarios.size()))
    throw Error("scenario index out of range");
  if (set.farm_ids.size() != net.wind_farms.size())
    throw Error("scenario set farm count does not match the network");
  for (std::size_t f = 0; f < set.farm_ids.size(); ++f)
    if (set.farm_ids[f] != net.wind_farms[f].id)
      throw Error("scenario set farm order does not match the network");
  DispatchInputs in;
  in.net = &net;
  in.wind = set.scenarios[s].output;
  in.scenario_id = set.scenarios[s].id;
  in.day_label = day_label.empty() ? to_string(set.day_type) : day_label;
  return in;
}

inline DispatchInputs inputs_attached(const Network& net) {
  DispatchInputs in;
  in.net = &net;
  in.wind = attached_trajectories(net).output;
  return in;
}

// Variable and row layout of one dispatch block. Offsets support embedding
// several blocks (plus shared variables) in a single program.
struct EdIndex {
  int T = 0;
  int nb = 0, nl = 0, ng = 0, nd = 0, ni = 0, nw = 0, nr = 0;
  bool with_placement = false;
  int var_base = 0, row_base = 0;

  int v_gen() const { return 0; }
  int v_shed() const { return ng * T; }
  int v_flow() const { return v_shed() + nd * T; }
  int v_angle() const { return v_flow() + nl * T; }
  int v_import() const { return v_angle() + nb * T; }
  int v_wind() const { return v_import() + ni * T; }
  int v_ren() const { return v_wind() + nw * T; }
  int v_dc() const { return v_ren() + nr * T; }
  int block_vars() const { return v_dc() + (with_placement ? nb * T : 0); }

  int r_balance() const { return 0; }
  int r_flow() const { return nb * T; }
  int r_ramp() const { return r_flow() + nl * T; }
  int r_cap() const { return r_ramp() + ng * T; }
  int block_rows() const { return r_cap() + (with_placement ? nb * T : 0); }

  int gen(int i, int t) const { return var_base + v_gen() + i * T + t; }
  int shed(int j, int t) const { return var_base + v_shed() + j * T + t; }
  int flow(int l, int t) const { return var_base + v_flow() + l * T + t; }
  int angle(int n, int t) const { return var_base + v_angle() + n * T + t; }
  int import_spill(int i, int t) const { return var_base + v_import() + i * T + t; }
  int wind_spill(int w, int t) const { return var_base + v_wind() + w * T + t; }
  int ren_spill(int r, int t) const { return var_base + v_ren() + r * T + t; }
  int dc_served(int n, int t) const { return var_base + v_dc() + n * T + t; }

  int balance_row(int n, int t) const { return row_base + r_balance() + n * T + t; }
  int flow_row(int l, int t) const { return row_base + r_flow() + l * T + t; }
  int ramp_row(int g, int t) const { return row_base + r_ramp() + g * T + t; }
  int cap_row(int n, int t) const { return row_base + r_cap() + n * T + t; }
};

struct EdBlockOptions {
  double obj_scale = 1.0;     // multiplies every cost coefficient of the block
  std::string prefix;         // name prefix, e.g. "s3."
  // When set, capacity rows couple to these shared unit-count variables
  // (u - cap*x <= 0) instead of a fixed right-hand side from the overlay.
  const std::vector<int>* shared_x = nullptr;
  double shared_unit_cap = 0.0;
};

// Appends one dispatch block: variables, bounds, costs, balance, flow-law,
// ramp and (optionally) data-center capacity rows.
inline EdIndex append_ed_block(LinearProgram& lp, const DispatchInputs& in,
                               const EdBlockOptions& opt = {}) {
  const Network& net = *in.net;
  if (in.wind.size() != net.wind_farms.size())
    throw Error("wind realization count does not match the network's farms");
  for (std::size_t f = 0; f < in.wind.size(); ++f)
    if (static_cast<int>(in.wind[f].size()) != net.horizon)
      throw Error("wind realization for " + net.wind_farms[f].id +
                  " does not span the horizon");
  if (in.placement && opt.shared_x)
    throw Error("a block takes either a fixed overlay or shared unit variables");
  if (in.placement &&
      static_cast<int>(in.placement->units.size()) != static_cast<int>(net.buses.size()))
    throw Error("placement overlay size does not match the bus count");

  EdIndex ix;
  ix.T = net.horizon;
  ix.nb = static_cast<int>(net.buses.size());
  ix.nl = static_cast<int>(net.lines.size());
  ix.ng = static_cast<int>(net.generators.size());
  ix.nd = static_cast<int>(net.loads.size());
  ix.ni = static_cast<int>(net.imports.size());
  ix.nw = static_cast<int>(net.wind_farms.size());
  ix.nr = static_cast<int>(net.renewables.size());
  ix.with_placement = in.placement.has_value() || opt.shared_x != nullptr;
  ix.var_base = lp.num_vars();
  ix.row_base = lp.num_rows();

  const int T = ix.T;
  const double h = net.period_hours;
  const double scale = opt.obj_scale;
  auto vname = [&](const char* sym, const std::string& id, int t) {
    return opt.prefix + sym + "." + id + "." + std::to_string(t + 1);
  };

  for (const auto& g : net.generators)
    for (int t = 0; t < T; ++t)
      lp.add_var(vname("p", g.id, t), 0.0, g.p_max, scale * h * g.cost);
  for (const auto& d : net.loads)
    for (int t = 0; t < T; ++t)
      lp.add_var(vname("sh", d.id, t), 0.0, d.demand[t], scale * h * d.shed_cost);
  for (const auto& l : net.lines)
    for (int t = 0; t < T; ++t)
      lp.add_var(vname("f", l.id, t), -l.flow_max, l.flow_max, 0.0);
  for (const auto& b : net.buses)
    for (int t = 0; t < T; ++t)
      lp.add_var(vname("th", b.id, t), b.theta_min, b.theta_max, 0.0);
  for (std::size_t i = 0; i < net.imports.size(); ++i)
    for (int t = 0; t < T; ++t)
      lp.add_var(vname("mi", net.imports[i].id, t), 0.0, net.imports[i].supply[t],
                 scale * h * net.imports[i].spill_cost);
  for (std::size_t w = 0; w < net.wind_farms.size(); ++w)
    for (int t = 0; t < T; ++t)
      lp.add_var(vname("wn", net.wind_farms[w].id, t), 0.0, in.wind[w][t],
                 scale * h * net.wind_farms[w].spill_cost);
  for (std::size_t r = 0; r < net.renewables.size(); ++r)
    for (int t = 0; t < T; ++t)
      lp.add_var(vname("rn", net.renewables[r].id, t), 0.0, net.renewables[r].supply[t],
                 scale * h * net.renewables[r].spill_cost);
  if (ix.with_placement)
    for (const auto& b : net.buses)
      for (int t = 0; t < T; ++t) lp.add_var(vname("u", b.id, t), 0.0, kInf, 0.0);

  Incidence inc = incidence(net);

  // Power balance per bus and period; the dual is the locational price.
  for (int n = 0; n < ix.nb; ++n) {
    for (int t = 0; t < T; ++t) {
      double rhs = 0.0;
      for (int j : inc.loads[n]) rhs += net.loads[j].demand[t];
      for (int i : inc.imports[n]) rhs -= net.imports[i].supply[t];
      for (int w : inc.wind_farms[n]) rhs -= in.wind[w][t];
      for (int r : inc.renewables[n]) rhs -= net.renewables[r].supply[t];
      int row = lp.add_row(vname("bal", net.buses[n].id, t), rhs, rhs);
      for (int l : inc.lines_in[n]) lp.coef(row, ix.flow(l, t), 1.0);
      for (int l : inc.lines_out[n]) lp.coef(row, ix.flow(l, t), -1.0);
      for (int g : inc.generators[n]) lp.coef(row, ix.gen(g, t), 1.0);
      for (int j : inc.loads[n]) lp.coef(row, ix.shed(j, t), 1.0);
      for (int i : inc.imports[n]) lp.coef(row, ix.import_spill(i, t), -1.0);
      for (int w : inc.wind_farms[n]) lp.coef(row, ix.wind_spill(w, t), -1.0);
      for (int r : inc.renewables[n]) lp.coef(row, ix.ren_spill(r, t), -1.0);
      if (ix.with_placement) lp.coef(row, ix.dc_served(n, t), -1.0);
    }
  }

  // Flow follows the angle difference toward the receiving bus.
  for (int l = 0; l < ix.nl; ++l) {
    int from = net.bus_index(net.lines[l].from_bus);
    int to = net.bus_index(net.lines[l].to_bus);
    double b = net.lines[l].susceptance;
    for (int t = 0; t < T; ++t) {
      int row = lp.add_row(vname("fl", net.lines[l].id, t), 0.0, 0.0);
      lp.coef(row, ix.flow(l, t), 1.0);
      lp.coef(row, ix.angle(to, t), -b);
      lp.coef(row, ix.angle(from, t), b);
    }
  }

  // Ramping, including the step from the pre-horizon output.
  for (int g = 0; g < ix.ng; ++g) {
    const auto& gen = net.generators[g];
    for (int t = 0; t < T; ++t) {
      int row = lp.add_row(vname("rmp", gen.id, t), -gen.ramp_down, gen.ramp_up);
      lp.coef(row, ix.gen(g, t), 1.0);
      if (t == 0) {
        lp.rows[row].lower += gen.p_initial;
        lp.rows[row].upper += gen.p_initial;
      } else {
        lp.coef(row, ix.gen(g, t - 1), -1.0);
      }
    }
  }

  if (ix.with_placement) {
    for (int n = 0; n < ix.nb; ++n) {
      for (int t = 0; t < T; ++t) {
        int row = lp.add_row(vname("cap", net.buses[n].id, t), -kInf, 0.0);
        lp.coef(row, ix.dc_served(n, t), 1.0);
        if (opt.shared_x) {
          lp.coef(row, (*opt.shared_x)[n], -opt.shared_unit_cap);
        } else {
          lp.rows[row].upper =
              in.placement->unit_capacity_mw * in.placement->units[n];
        }
      }
    }
  }
  return ix;
}

struct EdModel {
  LinearProgram lp;
  EdIndex ix;
};

inline EdModel build_ed(const DispatchInputs& in) {
  EdModel model;
  model.ix = append_ed_block(model.lp, in);
  return model;
}

struct DispatchSolution {
  LpStatus status = LpStatus::Optimal;
  int T = 0;
  double objective = 0.0;  // $ over the horizon
  long iterations = 0;
  std::vector<double> generation, shed, flow, angle;           // [unit*T+t]
  std::vector<double> import_spill, wind_spill, renewable_spill;
  std::vector<double> dc_served;  // [bus*T+t], zero without a placement
  std::vector<double> lmp;        // [bus*T+t], $/MWh
  std::vector<double> cap_dual;   // [bus*T+t] capacity-row duals, placement only
  bool ok() const { return status == LpStatus::Optimal; }
};

inline DispatchSolution extract_dispatch(const LpSolution& s, const EdIndex& ix,
                                         const Network& net) {
  DispatchSolution out;
  out.status = s.status;
  out.T = ix.T;
  out.iterations = s.iterations;
  if (s.status != LpStatus::Optimal) {
    out.objective = s.objective;
    return out;
  }
  out.objective = s.objective;
  const int T = ix.T;
  auto pull = [&](int count, auto get) {
    std::vector<double> v(static_cast<std::size_t>(count) * T);
    for (int u = 0; u < count; ++u)
      for (int t = 0; t < T; ++t) v[u * T + t] = get(u, t);
    return v;
  };
  out.generation = pull(ix.ng, [&](int u, int t) { return s.x[ix.gen(u, t)]; });
  out.shed = pull(ix.nd, [&](int u, int t) { return s.x[ix.shed(u, t)]; });
  out.flow = pull(ix.nl, [&](int u, int t) { return s.x[ix.flow(u, t)]; });
  out.angle = pull(ix.nb, [&](int u, int t) { return s.x[ix.angle(u, t)]; });
  out.import_spill =
      pull(ix.ni, [&](int u, int t) { return s.x[ix.import_spill(u, t)]; });
  out.wind_spill = pull(ix.nw, [&](int u, int t) { return s.x[ix.wind_spill(u, t)]; });
  out.renewable_spill =
      pull(ix.nr, [&](int u, int t) { return s.x[ix.ren_spill(u, t)]; });
  out.lmp = pull(ix.nb, [&](int u, int t) {
    return s.row_dual[ix.balance_row(u, t)] / net.period_hours;
  });
  if (ix.with_placement) {
    out.dc_served = pull(ix.nb, [&](int u, int t) { return s.x[ix.dc_served(u, t)]; });
    out.cap_dual =
        pull(ix.nb, [&](int u, int t) { return s.row_dual[ix.cap_row(u, t)]; });
  } else {
    out.dc_served.assign(static_cast<std::size_t>(ix.nb) * T, 0.0);
  }
  return out;
}

inline DispatchSolution solve_ed(const DispatchInputs& in,
                                 const SimplexOptions& opt = {}) {
  EdModel model = build_ed(in);
  LpSolution s = solve_lp(model.lp, opt);
  if (s.status == LpStatus::Unbounded)
    throw SolverError("dispatch relaxation is unbounded; model bounds are broken");
  return extract_dispatch(s, model.ix, *in.net);
}

// Recomputes the objective from the primal arrays, independent of the solver.
inline double dispatch_cost(const DispatchSolution& sol, const DispatchInputs& in) {
  const Network& net = *in.net;
  const double h = net.period_hours;
  const int T = sol.T;
  double c = 0.0;
  for (std::size_t g = 0; g < net.generators.size(); ++g)
    for (int t = 0; t < T; ++t)
      c += h * net.generators[g].cost * sol.generation[g * T + t];
  for (std::size_t d = 0; d < net.loads.size(); ++d)
    for (int t = 0; t < T; ++t) c += h * net.loads[d].shed_cost * sol.shed[d * T + t];
  for (std::size_t i = 0; i < net.imports.size(); ++i)
    for (int t = 0; t < T; ++t)
      c += h * net.imports[i].spill_cost * sol.import_spill[i * T + t];
  for (std::size_t w = 0; w < net.wind_farms.size(); ++w)
    for (int t = 0; t < T; ++t)
      c += h * net.wind_farms[w].spill_cost * sol.wind_spill[w * T + t];
  for (std::size_t r = 0; r < net.renewables.size(); ++r)
    for (int t = 0; t < T; ++t)
      c += h * net.renewables[r].spill_cost * sol.renewable_spill[r * T + t];
  return c;
}

// Residuals of every model constraint recomputed from the primal arrays.
struct DispatchCheck {
  double balance = 0.0;
  double flow_law = 0.0;
  double ramp = 0.0;
  double bounds = 0.0;
  double worst() const {
    return std::max(std::max(balance, flow_law), std::max(ramp, bounds));
  }
};

inline DispatchCheck audit_dispatch(const DispatchSolution& sol,
                                    const DispatchInputs& in) {
  const Network& net = *in.net;
  const int T = sol.T;
  DispatchCheck chk;
  Incidence inc = incidence(net);
  auto over = [](double v, double lo, double hi) {
    return std::max(std::max(lo - v, v - hi), 0.0);
  };

  for (std::size_t n = 0; n < net.buses.size(); ++n) {
    for (int t = 0; t < T; ++t) {
      double acc = 0.0;
      for (int l : inc.lines_in[n]) acc += sol.flow[l * T + t];
      for (int l : inc.lines_out[n]) acc -= sol.flow[l * T + t];
      for (int g : inc.generators[n]) acc += sol.generation[g * T + t];
      for (int i : inc.imports[n])
        acc += net.imports[i].supply[t] - sol.import_spill[i * T + t];
      for (int w : inc.wind_farms[n]) acc += in.wind[w][t] - sol.wind_spill[w * T + t];
      for (int r : inc.renewables[n])
        acc += net.renewables[r].supply[t] - sol.renewable_spill[r * T + t];
      acc -= sol.dc_served[n * T + t];
      for (int j : inc.loads[n]) acc -= net.loads[j].demand[t] - sol.shed[j * T + t];
      chk.balance = std::max(chk.balance, std::abs(acc));
    }
  }
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    int from = net.bus_index(net.lines[l].from_bus);
    int to = net.bus_index(net.lines[l].to_bus);
    for (int t = 0; t < T; ++t) {
      double want = net.lines[l].susceptance *
                    (sol.angle[to * T + t] - sol.angle[from * T + t]);
      chk.flow_law = std::max(chk.flow_law, std::abs(sol.flow[l * T + t] - want));
      chk.bounds = std::max(chk.bounds, over(sol.flow[l * T + t],
                                             -net.lines[l].flow_max,
                                             net.lines[l].flow_max));
    }
  }
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    const auto& gen = net.generators[g];
    for (int t = 0; t < T; ++t) {
      double prev = t == 0 ? gen.p_initial : sol.generation[g * T + t - 1];
      double step = sol.generation[g * T + t] - prev;
      chk.ramp = std::max(chk.ramp, over(step, -gen.ramp_down, gen.ramp_up));
      chk.bounds = std::max(chk.bounds, over(sol.generation[g * T + t], 0.0, gen.p_max));
    }
  }
  for (std::size_t d = 0; d < net.loads.size(); ++d)
    for (int t = 0; t < T; ++t)
      chk.bounds =
          std::max(chk.bounds, over(sol.shed[d * T + t], 0.0, net.loads[d].demand[t]));
  for (std::size_t i = 0; i < net.imports.size(); ++i)
    for (int t = 0; t < T; ++t)
      chk.bounds = std::max(
          chk.bounds, over(sol.import_spill[i * T + t], 0.0, net.imports[i].supply[t]));
  for (std::size_t w = 0; w < net.wind_farms.size(); ++w)
    for (int t = 0; t < T; ++t)
      chk.bounds =
          std::max(chk.bounds, over(sol.wind_spill[w * T + t], 0.0, in.wind[w][t]));
  for (std::size_t r = 0; r < net.renewables.size(); ++r)
    for (int t = 0; t < T; ++t)
      chk.bounds = std::max(chk.bounds, over(sol.renewable_spill[r * T + t], 0.0,
                                             net.renewables[r].supply[t]));
  for (std::size_t n = 0; n < net.buses.size(); ++n) {
    double cap = 0.0;
    if (in.placement)
      cap = in.placement->unit_capacity_mw * in.placement->units[n];
    for (int t = 0; t < T; ++t) {
      chk.bounds = std::max(chk.bounds, over(sol.dc_served[n * T + t], 0.0, cap));
      chk.bounds = std::max(chk.bounds, over(sol.angle[n * T + t],
                                             net.buses[n].theta_min,
                                             net.buses[n].theta_max));
    }
  }
  return chk;
}

inline void dispatch_csv_rows(CsvWriter& csv, const DispatchSolution& sol,
                              const DispatchInputs& in,
                              const std::vector<std::string>& prefix = {}) {
  const Network& net = *in.net;
  const int T = sol.T;
  auto emit = [&](const char* sym, const std::string& id, int u,
                  const std::vector<double>& v) {
    for (int t = 0; t < T; ++t) {
      std::vector<std::string> row = prefix;
      row.insert(row.end(),
                 {sym, id, std::to_string(t + 1), format_double(v[u * T + t])});
      csv.row(row);
    }
  };
  for (std::size_t g = 0; g < net.generators.size(); ++g)
    emit("gen", net.generators[g].id, g, sol.generation);
  for (std::size_t d = 0; d < net.loads.size(); ++d)
    emit("shed", net.loads[d].id, d, sol.shed);
  for (std::size_t l = 0; l < net.lines.size(); ++l)
    emit("flow", net.lines[l].id, l, sol.flow);
  for (std::size_t n = 0; n < net.buses.size(); ++n)
    emit("angle", net.buses[n].id, n, sol.angle);
  for (std::size_t i = 0; i < net.imports.size(); ++i)
    emit("import_spill", net.imports[i].id, i, sol.import_spill);
  for (std::size_t w = 0; w < net.wind_farms.size(); ++w)
    emit("wind_spill", net.wind_farms[w].id, w, sol.wind_spill);
  for (std::size_t r = 0; r < net.renewables.size(); ++r)
    emit("renewable_spill", net.renewables[r].id, r, sol.renewable_spill);
  if (in.placement)
    for (std::size_t n = 0; n < net.buses.size(); ++n)
      emit("dc_served", net.buses[n].id, n, sol.dc_served);
}

inline std::string dispatch_csv(const DispatchSolution& sol, const DispatchInputs& in) {
  CsvWriter csv({"symbol", "id", "period", "value"});
  dispatch_csv_rows(csv, sol, in);
  return csv.str();
}

inline void lmp_csv_rows(CsvWriter& csv, const DispatchSolution& sol,
                         const Network& net,
                         const std::vector<std::string>& prefix = {}) {
  const int T = sol.T;
  for (std::size_t n = 0; n < net.buses.size(); ++n)
    for (int t = 0; t < T; ++t) {
      std::vector<std::string> row = prefix;
      row.insert(row.end(), {net.buses[n].id, std::to_string(t + 1),
                             format_double(sol.lmp[n * T + t])});
      csv.row(row);
    }
}

inline std::string lmp_csv(const DispatchSolution& sol, const Network& net) {
  CsvWriter csv({"bus", "period", "lmp"});
  lmp_csv_rows(csv, sol, net);
  return csv.str();
}

}  // namespace sgrid
