#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "sgrid/mps.hpp"
#include "sgrid/simplex.hpp"

using namespace sgrid;

namespace {

void require_certificates(const LpSolution& s, const Tolerances& tol = {}) {
  REQUIRE(s.status == LpStatus::Optimal);
  REQUIRE(s.max_primal_residual <= tol.feasibility);
  REQUIRE(s.duality_gap_rel <= tol.duality);
  REQUIRE(s.max_complementarity_violation <= tol.duality);
}

}  // namespace

TEST_CASE("single variable against a lower-bounding row") {
  LinearProgram lp;
  int x = lp.add_var("x", 0.0, kInf, 1.0);
  int r = lp.add_row("floor", 3.0, kInf);
  lp.coef(r, x, 1.0);
  LpSolution s = solve_lp(lp);
  require_certificates(s);
  REQUIRE(s.objective == Catch::Approx(3.0).margin(1e-9));
  REQUIRE(s.x[0] == Catch::Approx(3.0).margin(1e-9));
  REQUIRE(s.row_dual[0] == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(s.reduced_cost[0] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("binding capacity row prices both variables") {
  LinearProgram lp;
  int x = lp.add_var("x", 0.0, 1.0, -2.0);
  int y = lp.add_var("y", 0.0, 1.0, -1.0);
  int cap = lp.add_row("cap", -kInf, 1.0);
  lp.coef(cap, x, 1.0);
  lp.coef(cap, y, 1.0);
  LpSolution s = solve_lp(lp);
  require_certificates(s);
  REQUIRE(s.objective == Catch::Approx(-2.0).margin(1e-9));
  REQUIRE(s.x[x] == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(s.x[y] == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(s.row_dual[cap] == Catch::Approx(-1.0).margin(1e-9));
  REQUIRE(s.reduced_cost[x] == Catch::Approx(-1.0).margin(1e-9));
  REQUIRE(s.reduced_cost[y] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("negative lower bounds and pure bound optima") {
  LinearProgram lp;
  lp.add_var("a", -5.0, 7.0, 1.0);
  lp.add_var("b", -5.0, 7.0, -1.0);
  LpSolution s = solve_lp(lp);
  require_certificates(s);
  REQUIRE(s.objective == Catch::Approx(-12.0).margin(1e-9));
  REQUIRE(s.x[0] == Catch::Approx(-5.0).margin(1e-12));
  REQUIRE(s.x[1] == Catch::Approx(7.0).margin(1e-12));
}

TEST_CASE("ranged row binds on its cheap side") {
  LinearProgram lp;
  int x = lp.add_var("x", 0.0, 3.0, 1.0);
  int y = lp.add_var("y", 0.0, 3.0, 2.0);
  int r = lp.add_row("band", 1.0, 2.0);
  lp.coef(r, x, 1.0);
  lp.coef(r, y, 1.0);
  LpSolution s = solve_lp(lp);
  require_certificates(s);
  REQUIRE(s.objective == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(s.x[x] == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(s.row_dual[r] == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(s.reduced_cost[y] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("equality row with free variable") {
  LinearProgram lp;
  int x = lp.add_var("x", -kInf, kInf, 2.0);
  int y = lp.add_var("y", 0.0, 10.0, 1.0);
  int r = lp.add_row("fix", 4.0, 4.0);
  lp.coef(r, x, 1.0);
  lp.coef(r, y, -1.0);
  LpSolution s = solve_lp(lp);
  require_certificates(s);
  // x - y = 4; cost 2x + y = 2(4 + y) + y, so y stays at 0.
  REQUIRE(s.objective == Catch::Approx(8.0).margin(1e-9));
  REQUIRE(s.x[x] == Catch::Approx(4.0).margin(1e-9));
  REQUIRE(s.x[y] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(s.row_dual[r] == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("infeasible box against row produces a scoring certificate") {
  LinearProgram lp;
  int x = lp.add_var("x", 0.0, 1.0, 1.0);
  int r = lp.add_row("floor", 3.0, kInf);
  lp.coef(r, x, 1.0);
  LpSolution s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::Infeasible);
  REQUIRE_FALSE(s.farkas.empty());
  REQUIRE(s.farkas_score > 1e-9);
}

TEST_CASE("unbounded direction is reported with a ray") {
  LinearProgram lp;
  int x = lp.add_var("x", 0.0, kInf, -1.0);
  int y = lp.add_var("y", 0.0, 5.0, 1.0);
  int r = lp.add_row("tie", 0.0, kInf);
  lp.coef(r, x, 1.0);
  lp.coef(r, y, 1.0);
  LpSolution s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::Unbounded);
  REQUIRE_FALSE(s.ray.empty());
  REQUIRE(s.ray[x] > 0.0);
}

TEST_CASE("random boxed instances match vertex enumeration") {
  std::mt19937 rng(20240811);
  for (int trial = 0; trial < 80; ++trial) {
    int n = 3 + (trial % 2);
    int m = 4 + (trial % 3);
    LinearProgram lp = oracle::random_lp(rng, n, m, 0.7, trial % 3 == 0 ? 1 : 0);
    oracle::Result ref = oracle::enumerate_lp(lp);
    REQUIRE(ref.feasible);
    LpSolution s = solve_lp(lp);
    INFO("trial " << trial);
    require_certificates(s);
    REQUIRE(s.objective ==
            Catch::Approx(ref.objective).epsilon(1e-8).margin(1e-8));
  }
}

TEST_CASE("forced infeasible random rows are detected") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    LinearProgram lp = oracle::random_lp(rng, 3, 3, 0.8, 0);
    double reach = 0.0;
    int r = lp.add_row("impossible", 0.0, kInf);
    for (int j = 0; j < lp.num_vars(); ++j) {
      lp.coef(r, j, 1.0);
      reach += lp.vars[j].upper;
    }
    lp.rows[r].lower = reach + 1.0;
    LpSolution s = solve_lp(lp);
    INFO("trial " << trial);
    REQUIRE(s.status == LpStatus::Infeasible);
    REQUIRE(s.farkas_score > 1e-9);
  }
}

TEST_CASE("certificates hold on a larger random instance") {
  std::mt19937 rng(99);
  LinearProgram lp = oracle::random_lp(rng, 30, 20, 0.3, 4);
  LpSolution s = solve_lp(lp);
  require_certificates(s);
  double obj = 0.0;
  for (int j = 0; j < lp.num_vars(); ++j) obj += lp.vars[j].cost * s.x[j];
  REQUIRE(s.objective == Catch::Approx(obj).margin(1e-9));
}

TEST_CASE("resolve after bound edits matches fresh solves") {
  std::mt19937 rng(4242);
  LinearProgram lp = oracle::random_lp(rng, 6, 5, 0.6, 1);
  SimplexSolver solver;
  LpSolution first = solver.solve(lp);
  require_certificates(first);

  double saved_upper = lp.vars[2].upper;
  lp.vars[2].upper = 0.5 * (lp.vars[2].lower + saved_upper);
  LpSolution tightened = solver.resolve(lp);
  LpSolution fresh = solve_lp(lp);
  require_certificates(tightened);
  REQUIRE(tightened.objective ==
          Catch::Approx(fresh.objective).epsilon(1e-9).margin(1e-9));

  lp.vars[2].upper = saved_upper;
  LpSolution restored = solver.resolve(lp);
  require_certificates(restored);
  REQUIRE(restored.objective ==
          Catch::Approx(first.objective).epsilon(1e-9).margin(1e-9));
}

TEST_CASE("resolve tracks row bound changes") {
  LinearProgram lp;
  int x = lp.add_var("x", 0.0, 10.0, 1.0);
  int r = lp.add_row("floor", 2.0, kInf);
  lp.coef(r, x, 1.0);
  SimplexSolver solver;
  REQUIRE(solver.solve(lp).objective == Catch::Approx(2.0).margin(1e-10));
  lp.rows[r].lower = 7.0;
  REQUIRE(solver.resolve(lp).objective == Catch::Approx(7.0).margin(1e-10));
  lp.rows[r].lower = 1.0;
  REQUIRE(solver.resolve(lp).objective == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("warm basis restart reaches the same optimum") {
  std::mt19937 rng(555);
  LinearProgram lp = oracle::random_lp(rng, 8, 6, 0.5, 2);
  LpSolution cold = solve_lp(lp);
  require_certificates(cold);
  SimplexSolver warm_solver;
  LpSolution warm = warm_solver.solve(lp, cold.basis);
  require_certificates(warm);
  REQUIRE(warm.objective == Catch::Approx(cold.objective).epsilon(1e-10).margin(1e-10));
  REQUIRE(warm.iterations <= 2);
}

TEST_CASE("mps export freezes the exact layout") {
  LinearProgram lp;
  int x = lp.add_var("make", 0.0, 4.0, -3.0);
  int y = lp.add_var("buy", 1.0, 3.0, 2.5);
  int n = lp.add_var("count", 0.0, 2.0, 1.0, true);
  int r1 = lp.add_row("blend", 1.0, 5.0);
  int r2 = lp.add_row("fix", 2.0, 2.0);
  lp.coef(r1, x, 1.0);
  lp.coef(r1, y, 2.0);
  lp.coef(r2, y, 1.0);
  lp.coef(r2, n, -1.0);
  std::string expected =
      "NAME blendtest\n"
      "ROWS\n"
      " N OBJ\n"
      " L blend\n"
      " E fix\n"
      "COLUMNS\n"
      "    make OBJ -3\n"
      "    make blend 1\n"
      "    buy OBJ 2.5\n"
      "    buy blend 2\n"
      "    buy fix 1\n"
      "    MARKER M1 'MARKER' 'INTORG'\n"
      "    count OBJ 1\n"
      "    count fix -1\n"
      "    MARKER M3 'MARKER' 'INTEND'\n"
      "RHS\n"
      "    RHS1 blend 5\n"
      "    RHS1 fix 2\n"
      "RANGES\n"
      "    RNG1 blend 4\n"
      "BOUNDS\n"
      " UP BND1 make 4\n"
      " LO BND1 buy 1\n"
      " UP BND1 buy 3\n"
      " LO BND1 count 0\n"
      " UP BND1 count 2\n"
      "ENDATA\n";
  REQUIRE(to_mps(lp, "blendtest") == expected);
}
