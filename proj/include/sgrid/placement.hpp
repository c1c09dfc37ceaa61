#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "sgrid/dispatch.hpp"
#include "sgrid/metrics.hpp"
#include "sgrid/mip.hpp"
#include "sgrid/scenario.hpp"

namespace sgrid {

struct PlacementConfig {
  int max_units = 0;              // fleet budget
  double unit_capacity_mw = 0.0;  // capacity of one unit
  std::vector<int> candidate_buses;  // bus indexes; empty admits every bus
  double tolerance = 1e-6;           // relative optimality gap
  bool multi_cut = false;            // one cut per scenario instead of one total
  int max_iterations = 200;
  long node_budget = 200000;  // master search budget per iteration
  int threads = 0;            // 0 follows the environment, see resolve_threads
  bool record_timing = false; // keep wall-clock seconds in the convergence log
};

inline void validate_config(const PlacementConfig& cfg, const Network& net) {
  if (cfg.max_units < 0) throw Error("unit budget must be nonnegative");
  if (cfg.unit_capacity_mw < 0.0) throw Error("unit capacity must be nonnegative");
  if (!(cfg.tolerance > 0.0)) throw Error("tolerance must be positive");
  if (cfg.max_iterations < 1) throw Error("iteration budget must be positive");
  for (int b : cfg.candidate_buses)
    if (b < 0 || b >= static_cast<int>(net.buses.size()))
      throw Error("candidate bus index " + std::to_string(b) + " is out of range");
}

struct BendersCut {
  double intercept = 0.0;       // $
  std::vector<double> coeff;    // $ per unit, per bus
  std::string source;           // scenario id, or "agg" for the weighted sum
  double value_at(const std::vector<int>& x) const {
    double v = intercept;
    for (std::size_t n = 0; n < coeff.size(); ++n) v += coeff[n] * x[n];
    return v;
  }
};

struct ConvergenceRecord {
  int iteration = 0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double gap = 0.0;
  double seconds = 0.0;
  int cuts_added = 0;
};

struct PlacementSolution {
  std::vector<int> x;  // units per bus
  double expected_cost = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<ConvergenceRecord> log;
  std::vector<BendersCut> cuts;
  long master_nodes = 0;
  long recourse_iterations = 0;
};

struct RecourseResult {
  double cost = 0.0;
  std::vector<double> cap_dual;  // [bus*T+t], duals of the capacity rows
  long iterations = 0;
};

// One scenario's second-stage program, kept warm across placements: only the
// capacity right-hand sides change between solves.
class RecourseSolver {
 public:
  RecourseSolver(const Network& net, std::vector<std::vector<double>> wind,
                 double unit_capacity_mw)
      : unit_cap_(unit_capacity_mw) {
    in_.net = &net;
    in_.wind = std::move(wind);
    in_.placement =
        PlacementOverlay{std::vector<int>(net.buses.size(), 0), unit_capacity_mw};
    model_ = build_ed(in_);
  }

  RecourseResult solve(const std::vector<int>& x) {
    const EdIndex& ix = model_.ix;
    if (static_cast<int>(x.size()) != ix.nb)
      throw Error("placement vector size does not match the bus count");
    for (int n = 0; n < ix.nb; ++n) {
      if (x[n] < 0) throw Error("unit counts must be nonnegative");
      double cap = unit_cap_ * x[n];
      for (int t = 0; t < ix.T; ++t) model_.lp.rows[ix.cap_row(n, t)].upper = cap;
    }
    LpSolution s = fresh_ ? solver_.solve(model_.lp) : solver_.resolve(model_.lp);
    fresh_ = false;
    if (s.status != LpStatus::Optimal)
      throw SolverError(
          std::string("recourse subproblem not optimal; spillage and shedding "
                      "slacks should make it feasible (status ") +
          to_string(s.status) + ")");
    RecourseResult res;
    res.cost = s.objective;
    res.iterations = s.iterations;
    res.cap_dual.resize(static_cast<std::size_t>(ix.nb) * ix.T);
    for (int n = 0; n < ix.nb; ++n)
      for (int t = 0; t < ix.T; ++t)
        res.cap_dual[n * ix.T + t] = s.row_dual[ix.cap_row(n, t)];
    return res;
  }

  const EdIndex& index() const { return model_.ix; }

 private:
  double unit_cap_;
  DispatchInputs in_;
  EdModel model_;
  SimplexSolver solver_;
  bool fresh_ = true;
};

// Single-shot recourse evaluation.
inline RecourseResult recourse(const std::vector<int>& x, const Network& net,
                               const std::vector<std::vector<double>>& wind,
                               double unit_capacity_mw) {
  RecourseSolver solver(net, wind, unit_capacity_mw);
  return solver.solve(x);
}

struct DetEquivModel {
  LinearProgram lp;
  std::vector<int> x_vars;        // per bus
  std::vector<EdIndex> blocks;    // per scenario, set order
  int budget_row = -1;
};

inline std::vector<bool> candidate_mask(const PlacementConfig& cfg,
                                        const Network& net) {
  std::vector<bool> mask(net.buses.size(), cfg.candidate_buses.empty());
  for (int b : cfg.candidate_buses) mask[b] = true;
  return mask;
}

// All scenario blocks share the integer siting variables; block costs carry
// their scenario's probability so the objective is the expectation.
inline DetEquivModel build_deterministic_equivalent(const Network& net,
                                                    const ScenarioSet& set,
                                                    const PlacementConfig& cfg) {
  validate_config(cfg, net);
  require_normalized(set);
  if (set.scenarios.empty()) throw Error("scenario set is empty");

  DetEquivModel m;
  std::vector<bool> mask = candidate_mask(cfg, net);
  for (std::size_t n = 0; n < net.buses.size(); ++n)
    m.x_vars.push_back(m.lp.add_var("x." + net.buses[n].id, 0.0,
                                    mask[n] ? cfg.max_units : 0, 0.0, true));
  m.budget_row = m.lp.add_row("budget", -kInf, cfg.max_units);
  for (int v : m.x_vars) m.lp.coef(m.budget_row, v, 1.0);

  for (std::size_t s = 0; s < set.scenarios.size(); ++s) {
    DispatchInputs in = inputs_for_scenario(net, set, static_cast<int>(s));
    EdBlockOptions opt;
    opt.obj_scale = set.scenarios[s].probability;
    opt.prefix = "s" + set.scenarios[s].id + ".";
    opt.shared_x = &m.x_vars;
    opt.shared_unit_cap = cfg.unit_capacity_mw;
    m.blocks.push_back(append_ed_block(m.lp, in, opt));
  }
  return m;
}

inline PlacementSolution solve_deterministic_equivalent(const Network& net,
                                                        const ScenarioSet& set,
                                                        const PlacementConfig& cfg) {
  DetEquivModel model = build_deterministic_equivalent(net, set, cfg);
  MipOptions opt;
  opt.gap_tol = std::min(cfg.tolerance, 1e-9);
  opt.node_budget = cfg.node_budget;
  MipSolution mip = solve_mip(model.lp, opt);
  if (!mip.has_incumbent)
    throw SolverError("deterministic equivalent found no feasible placement");
  PlacementSolution out;
  out.x.resize(net.buses.size());
  for (std::size_t n = 0; n < net.buses.size(); ++n)
    out.x[n] = static_cast<int>(std::llround(mip.x[model.x_vars[n]]));
  out.expected_cost = mip.objective;
  out.lower_bound = mip.best_bound;
  out.gap = mip.gap;
  out.converged = mip.status == MipStatus::Optimal;
  out.iterations = 1;
  out.master_nodes = mip.nodes;
  out.recourse_iterations = mip.lp_iterations;
  return out;
}

struct PlacementEvaluation {
  double expected_cost = 0.0;
  std::vector<MetricReport> reports;        // per scenario, set order
  std::vector<DispatchSolution> solutions;  // per scenario, set order
};

// Expected dispatch under a fixed placement. A zero placement is dispatched
// without any data-center columns, so it reproduces the plain model exactly.
inline PlacementEvaluation evaluate_placement(const std::vector<int>& x,
                                              const Network& net,
                                              const ScenarioSet& set,
                                              double unit_capacity_mw,
                                              int threads = 0,
                                              int farm_limit = -1) {
  require_normalized(set);
  if (x.size() != net.buses.size())
    throw Error("placement vector size does not match the bus count");
  bool any = false;
  for (int v : x) {
    if (v < 0) throw Error("unit counts must be nonnegative");
    any = any || v > 0;
  }
  const int S = static_cast<int>(set.scenarios.size());
  PlacementEvaluation ev;
  ev.solutions.resize(S);
  ev.reports.resize(S);
  std::vector<DispatchInputs> inputs(S);
  for (int s = 0; s < S; ++s) {
    inputs[s] = inputs_for_scenario(net, set, s);
    if (any) inputs[s].placement = PlacementOverlay{x, unit_capacity_mw};
  }
  parallel_for(S, resolve_threads(threads), [&](int s) {
    DispatchSolution sol = solve_ed(inputs[s]);
    if (!sol.ok())
      throw SolverError("scenario " + set.scenarios[s].id +
                        " is infeasible under the given placement");
    ev.reports[s] = compute_metrics(sol, inputs[s], farm_limit);
    ev.solutions[s] = std::move(sol);
  });
  ev.expected_cost = 0.0;
  for (int s = 0; s < S; ++s)
    ev.expected_cost += set.scenarios[s].probability * ev.reports[s].cost;
  return ev;
}

namespace detail {

// Aggregation follows scenario ids, not file order, so logs and cut sets do
// not depend on how the input happened to be sorted.
inline std::vector<int> order_by_id(const ScenarioSet& set) {
  std::vector<int> order(set.scenarios.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return set.scenarios[a].id < set.scenarios[b].id;
  });
  return order;
}

inline BendersCut make_cut(const RecourseResult& res, const std::vector<int>& xhat,
                           double unit_cap, int nb, int T, double weight,
                           const std::string& source) {
  BendersCut cut;
  cut.source = source;
  cut.coeff.assign(nb, 0.0);
  for (int n = 0; n < nb; ++n) {
    double c = 0.0;
    for (int t = 0; t < T; ++t) c += res.cap_dual[n * T + t];
    cut.coeff[n] = weight * unit_cap * c;
  }
  cut.intercept = weight * res.cost;
  for (int n = 0; n < nb; ++n) cut.intercept -= cut.coeff[n] * xhat[n];
  return cut;
}

}  // namespace detail

// L-shaped decomposition: an integer master over sitings and an epigraph of
// the expected recourse, tightened by duals of the scenario subproblems. The
// zero placement is evaluated first, so an incumbent always exists and the
// placed system can never score worse than the unplaced one.
inline PlacementSolution solve_benders(const Network& net, const ScenarioSet& set,
                                       const PlacementConfig& cfg) {
  validate_config(cfg, net);
  require_normalized(set);
  if (set.scenarios.empty()) throw Error("scenario set is empty");

  const int nb = static_cast<int>(net.buses.size());
  const int T = net.horizon;
  const int S = static_cast<int>(set.scenarios.size());
  const std::vector<int> order = detail::order_by_id(set);

  std::vector<std::unique_ptr<RecourseSolver>> workers(S);
  for (int s = 0; s < S; ++s)
    workers[s] = std::make_unique<RecourseSolver>(net, set.scenarios[s].output,
                                                  cfg.unit_capacity_mw);

  PlacementSolution out;
  std::vector<RecourseResult> results(S);
  auto evaluate = [&](const std::vector<int>& xhat) {
    parallel_for(S, resolve_threads(cfg.threads),
                 [&](int s) { results[s] = workers[s]->solve(xhat); });
    double expected = 0.0;
    for (int s : order) {
      expected += set.scenarios[s].probability * results[s].cost;
      out.recourse_iterations += results[s].iterations;
    }
    return expected;
  };
  auto add_cuts = [&](const std::vector<int>& xhat) {
    if (cfg.multi_cut) {
      for (int s : order)
        out.cuts.push_back(detail::make_cut(results[s], xhat, cfg.unit_capacity_mw,
                                            nb, T, 1.0, set.scenarios[s].id));
      return S;
    }
    BendersCut agg;
    agg.source = "agg";
    agg.coeff.assign(nb, 0.0);
    agg.intercept = 0.0;
    for (int s : order) {
      BendersCut c = detail::make_cut(results[s], xhat, cfg.unit_capacity_mw, nb, T,
                                      set.scenarios[s].probability,
                                      set.scenarios[s].id);
      agg.intercept += c.intercept;
      for (int n = 0; n < nb; ++n) agg.coeff[n] += c.coeff[n];
    }
    out.cuts.push_back(std::move(agg));
    return 1;
  };

  // Master skeleton. Cuts land as rows eta - c'x >= intercept; with multi-cut
  // each scenario owns an epigraph variable weighted by its probability.
  LinearProgram master;
  std::vector<bool> mask = candidate_mask(cfg, net);
  std::vector<int> xv;
  for (int n = 0; n < nb; ++n)
    xv.push_back(master.add_var("x." + net.buses[n].id, 0.0,
                                mask[n] ? cfg.max_units : 0, 0.0, true));
  int budget = master.add_row("budget", -kInf, cfg.max_units);
  for (int v : xv) master.coef(budget, v, 1.0);
  std::vector<int> etas;
  if (cfg.multi_cut) {
    for (int s : order)
      etas.push_back(master.add_var("eta." + set.scenarios[s].id, 0.0, kInf,
                                    set.scenarios[s].probability));
  } else {
    etas.push_back(master.add_var("eta", 0.0, kInf, 1.0));
  }
  auto append_cut_rows = [&](std::size_t from) {
    for (std::size_t k = from; k < out.cuts.size(); ++k) {
      const BendersCut& c = out.cuts[k];
      int row = master.add_row("cut" + std::to_string(k), c.intercept, kInf);
      int eta;
      if (cfg.multi_cut) {
        int pos = 0;
        for (; pos < S; ++pos)
          if (set.scenarios[order[pos]].id == c.source) break;
        eta = etas[pos];
      } else {
        eta = etas[0];
      }
      master.coef(row, eta, 1.0);
      for (int n = 0; n < nb; ++n)
        if (c.coeff[n] != 0.0) master.coef(row, xv[n], -c.coeff[n]);
    }
  };

  auto clock_start = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    if (!cfg.record_timing) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         clock_start)
        .count();
  };

  std::vector<int> xhat(nb, 0);
  double ub = evaluate(xhat);
  out.x = xhat;
  out.expected_cost = ub;
  std::size_t appended = 0;
  int added = add_cuts(xhat);
  out.log.push_back({0, 0.0, ub, kInf, elapsed(), added});

  MipOptions mopt;
  mopt.gap_tol = std::min(cfg.tolerance, 1e-9);
  mopt.node_budget = cfg.node_budget;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    append_cut_rows(appended);
    appended = out.cuts.size();

    LinearProgram snapshot = master;
    MipSolution ms = solve_mip(snapshot, mopt);
    if (!ms.has_incumbent)
      throw SolverError("placement master found no feasible siting");
    out.master_nodes += ms.nodes;
    out.lower_bound = ms.objective;

    for (int n = 0; n < nb; ++n)
      xhat[n] = static_cast<int>(std::llround(ms.x[xv[n]]));
    double cost = evaluate(xhat);
    if (cost < ub - 1e-12 * std::max(1.0, std::abs(ub))) {
      ub = cost;
      out.x = xhat;
      out.expected_cost = cost;
    }
    added = add_cuts(xhat);
    out.gap = (ub - out.lower_bound) / std::max(1.0, std::abs(ub));
    out.iterations = it;
    out.log.push_back({it, out.lower_bound, ub, out.gap, elapsed(), added});
    if (out.gap <= cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

inline std::string placement_csv(const std::vector<int>& x, const Network& net) {
  if (x.size() != net.buses.size())
    throw Error("placement vector size does not match the bus count");
  CsvWriter csv({"bus", "x"});
  for (std::size_t n = 0; n < net.buses.size(); ++n)
    csv.row({net.buses[n].id, std::to_string(x[n])});
  return csv.str();
}

inline std::string convergence_csv(const std::vector<ConvergenceRecord>& log) {
  CsvWriter csv({"iteration", "lb", "ub", "gap", "seconds", "cuts_added"});
  for (const auto& r : log) {
    std::string gap = std::isfinite(r.gap) ? format_double(r.gap) : "inf";
    csv.row({std::to_string(r.iteration), format_double(r.lower_bound),
             format_double(r.upper_bound), gap, format_double(r.seconds),
             std::to_string(r.cuts_added)});
  }
  return csv.str();
}

}  // namespace sgrid
