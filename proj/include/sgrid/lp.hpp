#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <string>
#include <vector>

#include "sgrid/util.hpp"

namespace sgrid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tolerances {
  double feasibility = 1e-8;    // max primal residual accepted on returned solutions
  double duality = 1e-6;        // relative primal/dual objective gap
  double integrality = 1e-6;    // distance from nearest integer that counts as integral
  double mip_gap = 1e-6;        // relative branch-and-bound termination gap
  double pivot = 1e-7;          // smallest pivot magnitude accepted in a basis change
  double reduced_cost = 1e-9;   // pricing cutoff
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  bool integral = false;
};

// Ranged row: lower <= a'x <= upper. Equality rows set lower == upper.
struct Row {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
};

// Minimization problem over bounded variables and ranged rows. Coefficients
// are stored as triplets; duplicates for the same (row, var) pair add up.
struct LinearProgram {
  std::vector<Variable> vars;
  std::vector<Row> rows;
  std::vector<int> entry_row;
  std::vector<int> entry_var;
  std::vector<double> entry_val;

  int add_var(std::string name, double lower, double upper, double cost,
              bool integral = false) {
    vars.push_back({std::move(name), lower, upper, cost, integral});
    return static_cast<int>(vars.size()) - 1;
  }
  int add_row(std::string name, double lower, double upper) {
    rows.push_back({std::move(name), lower, upper});
    return static_cast<int>(rows.size()) - 1;
  }
  void coef(int row, int var, double val) {
    if (val == 0.0) return;
    entry_row.push_back(row);
    entry_var.push_back(var);
    entry_val.push_back(val);
  }
  int num_vars() const { return static_cast<int>(vars.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  void validate() const {
    for (std::size_t j = 0; j < vars.size(); ++j) {
      const Variable& v = vars[j];
      if (std::isnan(v.lower) || std::isnan(v.upper) || !std::isfinite(v.cost))
        throw Error("variable " + std::to_string(j) + " has a non-finite bound or cost");
      if (v.lower > v.upper)
        throw Error("variable " + std::to_string(j) + " (" + v.name +
                    ") has lower > upper");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      if (std::isnan(r.lower) || std::isnan(r.upper))
        throw Error("row " + std::to_string(i) + " has a NaN bound");
      if (r.lower > r.upper)
        throw Error("row " + std::to_string(i) + " (" + r.name + ") has lower > upper");
    }
    for (std::size_t k = 0; k < entry_row.size(); ++k) {
      if (entry_row[k] < 0 || entry_row[k] >= num_rows() || entry_var[k] < 0 ||
          entry_var[k] >= num_vars())
        throw Error("matrix entry " + std::to_string(k) + " out of range");
      if (!std::isfinite(entry_val[k]))
        throw Error("matrix entry " + std::to_string(k) + " is not finite");
    }
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

// Variable/row basis statuses, enough to warm-start a later solve.
enum class BasisStatus : std::int8_t { Basic = 0, AtLower = 1, AtUpper = 2, Free = 3 };

struct Basis {
  std::vector<BasisStatus> var_stat;
  std::vector<BasisStatus> row_stat;
  bool empty() const { return var_stat.empty() && row_stat.empty(); }
};

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> row_activity;
  // row_dual[i] is d(objective)/d(rhs_i): positive when the lower side binds
  // and tightening it raises cost, negative when the upper side binds.
  std::vector<double> row_dual;
  std::vector<double> reduced_cost;  // c - A'y, exact with respect to row_dual
  long iterations = 0;

  // Certificate quality, filled for every Optimal solve.
  double max_primal_residual = 0.0;
  double duality_gap_rel = 0.0;
  double max_complementarity_violation = 0.0;

  // Infeasible solves carry row prices proving no x fits (positive score);
  // unbounded solves carry an improving ray over the structural variables.
  std::vector<double> farkas;
  double farkas_score = 0.0;
  std::vector<double> ray;

  Basis basis;

  bool certificates_ok(const Tolerances& tol = {}) const {
    return max_primal_residual <= tol.feasibility && duality_gap_rel <= tol.duality &&
           max_complementarity_violation <= tol.duality;
  }
};

enum class MipStatus { Optimal, Infeasible, Unbounded, BudgetExhausted };

inline const char* to_string(MipStatus s) {
  switch (s) {
    case MipStatus::Optimal: return "optimal";
    case MipStatus::Infeasible: return "infeasible";
    case MipStatus::Unbounded: return "unbounded";
    case MipStatus::BudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

struct MipSolution {
  MipStatus status = MipStatus::Optimal;
  double objective = 0.0;
  double best_bound = 0.0;
  double gap = 0.0;           // (objective - best_bound) / max(1, |objective|)
  std::vector<double> x;      // integral entries land exactly on integers
  long nodes = 0;
  long lp_iterations = 0;
  bool has_incumbent = false;
};

// Running tally of certificate quality over every LP solved in the process.
// Tests assert on it at the end of a run; solves always feed it.
struct LpAudit {
  long solves = 0;
  double worst_primal_residual = 0.0;
  double worst_duality_gap = 0.0;
  double worst_complementarity = 0.0;

  void record(const LpSolution& s) {
    std::lock_guard<std::mutex> lk(mu_);
    ++solves;
    worst_primal_residual = std::max(worst_primal_residual, s.max_primal_residual);
    worst_duality_gap = std::max(worst_duality_gap, s.duality_gap_rel);
    worst_complementarity =
        std::max(worst_complementarity, s.max_complementarity_violation);
  }
  void reset() {
    std::lock_guard<std::mutex> lk(mu_);
    solves = 0;
    worst_primal_residual = worst_duality_gap = worst_complementarity = 0.0;
  }
  bool ok(const Tolerances& tol = {}) {
    std::lock_guard<std::mutex> lk(mu_);
    return worst_primal_residual <= tol.feasibility &&
           worst_duality_gap <= tol.duality && worst_complementarity <= tol.duality;
  }

 private:
  std::mutex mu_;
};

inline LpAudit& lp_audit() {
  static LpAudit audit;
  return audit;
}

}  // namespace sgrid
