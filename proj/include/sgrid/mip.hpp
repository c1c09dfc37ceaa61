#pragma once

#include <cmath>
#include <functional>

#include "sgrid/simplex.hpp"

namespace sgrid {

struct MipOptions {
  double gap_tol = 1e-6;     // relative incumbent/bound gap that stops the search
  long node_budget = 200000; // nodes explored before giving up with a gap
  SimplexOptions lp;
};

// Depth-first branch and bound. Branches on the most fractional integer
// variable (ties to the lowest index), floor child first, so the search
// order and the answer are deterministic. One simplex instance is reused
// across nodes; only bounds change between solves.
inline MipSolution solve_mip(const LinearProgram& lp0, const MipOptions& opt = {}) {
  lp0.validate();
  double int_tol = opt.lp.tol.integrality;
  std::vector<int> int_vars;
  for (int j = 0; j < lp0.num_vars(); ++j) {
    if (!lp0.vars[j].integral) continue;
    if (!std::isfinite(lp0.vars[j].lower) || !std::isfinite(lp0.vars[j].upper))
      throw Error("integer variable " + lp0.vars[j].name + " must have finite bounds");
    int_vars.push_back(j);
  }

  MipSolution out;
  LinearProgram lp = lp0;
  SimplexSolver solver(opt.lp);
  LpSolution root = solver.solve(lp);
  out.lp_iterations += root.iterations;
  ++out.nodes;
  if (root.status == LpStatus::Infeasible) {
    out.status = MipStatus::Infeasible;
    out.objective = kInf;
    out.best_bound = kInf;
    return out;
  }
  if (root.status == LpStatus::Unbounded) {
    out.status = MipStatus::Unbounded;
    out.objective = -kInf;
    out.best_bound = -kInf;
    return out;
  }
  if (int_vars.empty()) {
    out.status = MipStatus::Optimal;
    out.objective = root.objective;
    out.best_bound = root.objective;
    out.x = root.x;
    out.has_incumbent = true;
    return out;
  }

  double incumbent = kInf;
  std::vector<double> incumbent_x;
  bool budget_hit = false;
  double frontier = kInf;  // valid bound for subtrees the budget cut off

  auto most_fractional = [&](const std::vector<double>& x) {
    int pick = -1;
    double best = 0.5;
    for (int j : int_vars) {
      double frac = x[j] - std::floor(x[j]);
      double dist = std::min(frac, 1.0 - frac);
      if (dist <= int_tol) continue;
      double score = std::abs(frac - 0.5);
      if (pick < 0 || score < best - 1e-12) {
        best = score;
        pick = j;
      }
    }
    return pick;
  };

  std::function<void(const LpSolution&, bool)> visit =
      [&](const LpSolution& sol, bool is_root) {
        if (sol.status == LpStatus::Infeasible) return;
        if (sol.status == LpStatus::Unbounded)
          throw SolverError("relaxation became unbounded during branching");
        double obj = sol.objective;
        if (obj >= incumbent - opt.gap_tol * std::max(1.0, std::abs(incumbent)))
          return;
        int k = most_fractional(sol.x);
        if (k < 0) {
          incumbent = obj;
          incumbent_x = sol.x;
          for (int j : int_vars) incumbent_x[j] = std::round(incumbent_x[j]);
          return;
        }
        double f = std::floor(sol.x[k]);
        struct Child {
          bool upper;
          double value;
        } children[2] = {{true, f}, {false, f + 1.0}};
        for (const Child& c : children) {
          if (budget_hit || out.nodes >= opt.node_budget) {
            budget_hit = true;
            frontier = std::min(frontier, obj);
            continue;
          }
          double saved = c.upper ? lp.vars[k].upper : lp.vars[k].lower;
          (c.upper ? lp.vars[k].upper : lp.vars[k].lower) = c.value;
          LpSolution child = solver.resolve(lp);
          ++out.nodes;
          out.lp_iterations += child.iterations;
          visit(child, false);
          (c.upper ? lp.vars[k].upper : lp.vars[k].lower) = saved;
        }
        (void)is_root;
      };

  visit(root, true);

  out.has_incumbent = std::isfinite(incumbent);
  out.objective = incumbent;
  out.x = incumbent_x;
  if (budget_hit) {
    out.status = MipStatus::BudgetExhausted;
    out.best_bound = std::min(frontier, incumbent);
  } else {
    out.status = out.has_incumbent ? MipStatus::Optimal : MipStatus::Infeasible;
    out.best_bound = incumbent;
  }
  out.gap = out.has_incumbent && std::isfinite(out.best_bound)
                ? (out.objective - out.best_bound) /
                      std::max(1.0, std::abs(out.objective))
                : (out.has_incumbent ? 0.0 : kInf);
  return out;
}

}  // namespace sgrid
