#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "sgrid/lp.hpp"

namespace sgrid {

struct SimplexOptions {
  long max_iterations = 0;  // 0 picks 20000 + 30 * (rows + vars)
  int refresh_every = 128;  // exact recompute cadence for values and prices
  int stall_pivots = 200;   // degenerate steps before switching to Bland's rule
  int max_rounds = 6;       // refresh-and-confirm cycles before accepting the claim
  Tolerances tol;
};

// Primal simplex over bounded variables with an explicit dense basis inverse.
// Rows are handled as logical columns (a'x - s = 0, s within the row bounds),
// so the working system always has a square basis and bound changes never
// disturb the factorization. resolve() re-optimizes after bound/cost edits
// while keeping the basis and inverse, which is what branch-and-bound and
// repeated scenario solves need.
class SimplexSolver {
 public:
  explicit SimplexSolver(SimplexOptions opt = {}) : opt_(opt) {}

  LpSolution solve(const LinearProgram& lp) {
    load_(lp);
    reset_slack_basis_();
    return run_(lp);
  }

  LpSolution solve(const LinearProgram& lp, const Basis& warm) {
    load_(lp);
    if (!apply_warm_(warm)) reset_slack_basis_();
    return run_(lp);
  }

  // Same matrix, possibly new bounds and costs. Keeps basis and inverse.
  LpSolution resolve(const LinearProgram& lp) {
    if (!loaded_ || lp.num_vars() != n_ || lp.num_rows() != m_)
      return solve(lp);
    refresh_bounds_costs_(lp);
    for (int j = 0; j < N_; ++j) {
      if (stat_[j] == BasisStatus::Basic) continue;
      set_nonbasic_value_(j);
    }
    return run_(lp);
  }

  bool loaded() const { return loaded_; }

 private:
  enum class StepResult { Pivoted, Flipped, NoEntering, Unbounded, Dead };

  SimplexOptions opt_;
  bool loaded_ = false;
  int m_ = 0, n_ = 0, N_ = 0;
  std::vector<int> col_ptr_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> lb_, ub_, cost_;
  std::vector<double> invB_;
  std::vector<int> basic_;
  std::vector<int> pos_;
  std::vector<BasisStatus> stat_;
  std::vector<double> xval_;
  std::vector<double> d_, y_;
  std::vector<double> alpha_, rhs_, scratch_;
  std::vector<signed char> infcls_;  // per basis position: -1 below, +1 above, 0 ok
  bool phase1_ = false;
  bool bland_ = false;
  bool prices_stale_ = true;
  long iters_ = 0;
  long iter_limit_ = 0;
  int stall_ = 0;
  int refactors_ = 0;

  static constexpr double kViolTol = 1e-9;    // basic value outside bound by more than this
  static constexpr double kLooseViol = 1e-7;  // residual infeasibility still accepted
  static constexpr double kRatioSkip = 1e-9;  // |alpha| below this never blocks
  static constexpr double kTieWindow = 1e-9;

  double* invrow_(int i) { return invB_.data() + static_cast<std::size_t>(i) * m_; }

  void load_(const LinearProgram& lp) {
    lp.validate();
    n_ = lp.num_vars();
    m_ = lp.num_rows();
    N_ = n_ + m_;
    col_ptr_.assign(n_ + 1, 0);
    for (int k = 0; k < static_cast<int>(lp.entry_var.size()); ++k)
      ++col_ptr_[lp.entry_var[k] + 1];
    for (int j = 0; j < n_; ++j) col_ptr_[j + 1] += col_ptr_[j];
    col_row_.resize(lp.entry_var.size());
    col_val_.resize(lp.entry_var.size());
    std::vector<int> fill(col_ptr_.begin(), col_ptr_.end() - 1);
    for (std::size_t k = 0; k < lp.entry_var.size(); ++k) {
      int at = fill[lp.entry_var[k]]++;
      col_row_[at] = lp.entry_row[k];
      col_val_[at] = lp.entry_val[k];
    }
    refresh_bounds_costs_(lp);
    xval_.assign(N_, 0.0);
    stat_.assign(N_, BasisStatus::AtLower);
    pos_.assign(N_, -1);
    d_.assign(N_, 0.0);
    y_.assign(m_, 0.0);
    alpha_.assign(m_, 0.0);
    rhs_.assign(m_, 0.0);
    scratch_.assign(m_, 0.0);
    infcls_.assign(m_, 0);
    loaded_ = true;
  }

  void refresh_bounds_costs_(const LinearProgram& lp) {
    lb_.resize(N_);
    ub_.resize(N_);
    cost_.assign(N_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = lp.vars[j].lower;
      ub_[j] = lp.vars[j].upper;
      cost_[j] = lp.vars[j].cost;
    }
    for (int i = 0; i < m_; ++i) {
      lb_[n_ + i] = lp.rows[i].lower;
      ub_[n_ + i] = lp.rows[i].upper;
    }
  }

  void set_nonbasic_value_(int j) {
    switch (stat_[j]) {
      case BasisStatus::AtLower:
        if (std::isfinite(lb_[j])) {
          xval_[j] = lb_[j];
        } else if (std::isfinite(ub_[j])) {
          stat_[j] = BasisStatus::AtUpper;
          xval_[j] = ub_[j];
        } else {
          stat_[j] = BasisStatus::Free;
          xval_[j] = 0.0;
        }
        break;
      case BasisStatus::AtUpper:
        if (std::isfinite(ub_[j])) {
          xval_[j] = ub_[j];
        } else if (std::isfinite(lb_[j])) {
          stat_[j] = BasisStatus::AtLower;
          xval_[j] = lb_[j];
        } else {
          stat_[j] = BasisStatus::Free;
          xval_[j] = 0.0;
        }
        break;
      case BasisStatus::Free:
        xval_[j] = 0.0;
        break;
      case BasisStatus::Basic:
        break;
    }
  }

  BasisStatus crash_status_(int j) const {
    bool lf = std::isfinite(lb_[j]), uf = std::isfinite(ub_[j]);
    if (lf && uf) return std::abs(lb_[j]) <= std::abs(ub_[j]) ? BasisStatus::AtLower
                                                              : BasisStatus::AtUpper;
    if (lf) return BasisStatus::AtLower;
    if (uf) return BasisStatus::AtUpper;
    return BasisStatus::Free;
  }

  void reset_slack_basis_() {
    basic_.resize(m_);
    std::fill(pos_.begin(), pos_.end(), -1);
    for (int j = 0; j < n_; ++j) {
      stat_[j] = crash_status_(j);
      set_nonbasic_value_(j);
    }
    for (int i = 0; i < m_; ++i) {
      basic_[i] = n_ + i;
      stat_[n_ + i] = BasisStatus::Basic;
      pos_[n_ + i] = i;
    }
    invB_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) invrow_(i)[i] = -1.0;
  }

  bool apply_warm_(const Basis& warm) {
    if (static_cast<int>(warm.var_stat.size()) != n_ ||
        static_cast<int>(warm.row_stat.size()) != m_)
      return false;
    basic_.clear();
    std::fill(pos_.begin(), pos_.end(), -1);
    for (int j = 0; j < N_; ++j) {
      BasisStatus s = j < n_ ? warm.var_stat[j] : warm.row_stat[j - n_];
      stat_[j] = s;
      if (s == BasisStatus::Basic) {
        pos_[j] = static_cast<int>(basic_.size());
        basic_.push_back(j);
      } else {
        set_nonbasic_value_(j);
      }
    }
    if (static_cast<int>(basic_.size()) != m_) return false;
    return factorize_();
  }

  // Dense Gauss-Jordan inverse of the current basis matrix.
  bool factorize_() {
    std::vector<double> M(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int p = 0; p < m_; ++p) {
      int j = basic_[p];
      if (j < n_) {
        for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
          M[static_cast<std::size_t>(col_row_[k]) * m_ + p] += col_val_[k];
      } else {
        M[static_cast<std::size_t>(j - n_) * m_ + p] += -1.0;
      }
    }
    invB_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) invrow_(i)[i] = 1.0;
    for (int k = 0; k < m_; ++k) {
      int pr = k;
      double best = std::abs(M[static_cast<std::size_t>(k) * m_ + k]);
      for (int i = k + 1; i < m_; ++i) {
        double v = std::abs(M[static_cast<std::size_t>(i) * m_ + k]);
        if (v > best) {
          best = v;
          pr = i;
        }
      }
      if (best < 1e-11) return false;
      if (pr != k) {
        for (int c = 0; c < m_; ++c)
          std::swap(M[static_cast<std::size_t>(pr) * m_ + c],
                    M[static_cast<std::size_t>(k) * m_ + c]);
        for (int c = 0; c < m_; ++c) std::swap(invrow_(pr)[c], invrow_(k)[c]);
      }
      double s = 1.0 / M[static_cast<std::size_t>(k) * m_ + k];
      double* mk = M.data() + static_cast<std::size_t>(k) * m_;
      double* ik = invrow_(k);
      for (int c = 0; c < m_; ++c) {
        mk[c] *= s;
        ik[c] *= s;
      }
      for (int i = 0; i < m_; ++i) {
        if (i == k) continue;
        double f = M[static_cast<std::size_t>(i) * m_ + k];
        if (f == 0.0) continue;
        double* mi = M.data() + static_cast<std::size_t>(i) * m_;
        double* ii = invrow_(i);
        for (int c = 0; c < m_; ++c) {
          mi[c] -= f * mk[c];
          ii[c] -= f * ik[c];
        }
      }
    }
    return true;
  }

  // alpha = B^-1 * column(j)
  void ftran_(int j, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    if (j < n_) {
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
        int r = col_row_[k];
        double v = col_val_[k];
        for (int i = 0; i < m_; ++i) out[i] += invrow_(i)[r] * v;
      }
    } else {
      int r = j - n_;
      for (int i = 0; i < m_; ++i) out[i] -= invrow_(i)[r];
    }
  }

  double col_dot_(int j, const std::vector<double>& v) const {
    if (j < n_) {
      double s = 0.0;
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        s += col_val_[k] * v[col_row_[k]];
      return s;
    }
    return -v[j - n_];
  }

  double phase_cost_(int j) const {
    if (!phase1_) return j < n_ ? cost_[j] : 0.0;
    int p = pos_[j];
    if (p < 0) return 0.0;
    return static_cast<double>(infcls_[p]);
  }

  void classify_basics_() {
    for (int i = 0; i < m_; ++i) {
      int j = basic_[i];
      double v = xval_[j];
      if (v < lb_[j] - kViolTol)
        infcls_[i] = -1;
      else if (v > ub_[j] + kViolTol)
        infcls_[i] = 1;
      else
        infcls_[i] = 0;
    }
  }

  double total_infeasibility_() const {
    double t = 0.0;
    for (int i = 0; i < m_; ++i) {
      int j = basic_[i];
      if (infcls_[i] < 0) t += lb_[j] - xval_[j];
      if (infcls_[i] > 0) t += xval_[j] - ub_[j];
    }
    return t;
  }

  double max_violation_() const {
    double t = 0.0;
    for (int i = 0; i < m_; ++i) {
      int j = basic_[i];
      t = std::max(t, lb_[j] - xval_[j]);
      t = std::max(t, xval_[j] - ub_[j]);
    }
    return std::max(t, 0.0);
  }

  // Recomputes basic values from nonbasic ones, with one refinement pass.
  // Returns the residual after refinement so callers can spot a stale inverse.
  double recompute_basics_() {
    std::fill(rhs_.begin(), rhs_.end(), 0.0);
    for (int j = 0; j < N_; ++j) {
      if (stat_[j] == BasisStatus::Basic || xval_[j] == 0.0) continue;
      if (j < n_) {
        for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
          rhs_[col_row_[k]] -= col_val_[k] * xval_[j];
      } else {
        rhs_[j - n_] += xval_[j];
      }
    }
    std::vector<double> beta(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double* row = invrow_(i);
      double s = 0.0;
      for (int k = 0; k < m_; ++k) s += row[k] * rhs_[k];
      beta[i] = s;
    }
    double resid = refine_basics_(beta);
    for (int i = 0; i < m_; ++i) xval_[basic_[i]] = beta[i];
    return resid;
  }

  double refine_basics_(std::vector<double>& beta) {
    std::fill(scratch_.begin(), scratch_.end(), 0.0);
    for (int p = 0; p < m_; ++p) {
      int j = basic_[p];
      double b = beta[p];
      if (b == 0.0) continue;
      if (j < n_) {
        for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
          scratch_[col_row_[k]] += col_val_[k] * b;
      } else {
        scratch_[j - n_] -= b;
      }
    }
    double resid = 0.0;
    for (int i = 0; i < m_; ++i) {
      scratch_[i] = rhs_[i] - scratch_[i];
      resid = std::max(resid, std::abs(scratch_[i]));
    }
    if (resid > 0.0) {
      for (int i = 0; i < m_; ++i) {
        const double* row = invrow_(i);
        double s = 0.0;
        for (int k = 0; k < m_; ++k) s += row[k] * scratch_[k];
        beta[i] += s;
      }
    }
    return resid;
  }

  // y = B^-T * (costs of basic variables under the current phase), refined once,
  // then reduced costs for every column.
  void reprice_() {
    std::vector<double> cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = phase_cost_(basic_[i]);
    std::fill(y_.begin(), y_.end(), 0.0);
    for (int i = 0; i < m_; ++i) {
      double c = cb[i];
      if (c == 0.0) continue;
      const double* row = invrow_(i);
      for (int k = 0; k < m_; ++k) y_[k] += c * row[k];
    }
    for (int i = 0; i < m_; ++i) scratch_[i] = cb[i] - col_dot_(basic_[i], y_);
    bool any = false;
    for (int i = 0; i < m_; ++i)
      if (scratch_[i] != 0.0) any = true;
    if (any) {
      std::vector<double> dy(m_, 0.0);
      for (int i = 0; i < m_; ++i) {
        double c = scratch_[i];
        if (c == 0.0) continue;
        const double* row = invrow_(i);
        for (int k = 0; k < m_; ++k) dy[k] += c * row[k];
      }
      for (int k = 0; k < m_; ++k) y_[k] += dy[k];
    }
    for (int j = 0; j < N_; ++j) {
      if (stat_[j] == BasisStatus::Basic) {
        d_[j] = 0.0;
        continue;
      }
      d_[j] = phase_cost_(j) - col_dot_(j, y_);
    }
    prices_stale_ = false;
  }

  void full_refresh_() {
    double resid = recompute_basics_();
    double scale = 1.0;
    for (int i = 0; i < m_; ++i) scale = std::max(scale, std::abs(xval_[basic_[i]]));
    if (resid > 1e-7 * scale) {
      if (!factorize_()) {
        reset_slack_basis_();
      }
      ++refactors_;
      if (refactors_ > 60) throw SolverError("simplex: basis kept degrading");
      recompute_basics_();
    }
    classify_basics_();
    reprice_();
  }

  int pick_entering_(int& dir) const {
    double eps = opt_.tol.reduced_cost;
    int best = -1;
    double best_score = eps;
    dir = 0;
    for (int j = 0; j < N_; ++j) {
      BasisStatus s = stat_[j];
      if (s == BasisStatus::Basic || lb_[j] == ub_[j]) continue;
      double dj = d_[j];
      bool up = (s == BasisStatus::AtLower || s == BasisStatus::Free) && dj < -eps;
      bool down = (s == BasisStatus::AtUpper || s == BasisStatus::Free) && dj > eps;
      if (!up && !down) continue;
      if (bland_) {  // first eligible index
        dir = up ? 1 : -1;
        return j;
      }
      double score = std::abs(dj);
      if (score > best_score) {
        best_score = score;
        best = j;
        dir = up ? 1 : -1;
      }
    }
    return best;
  }

  StepResult step_() {
    int dir = 0;
    int q = pick_entering_(dir);
    if (q < 0) return StepResult::NoEntering;
    ftran_(q, alpha_);
    double sigma = static_cast<double>(dir);

    double own_range = ub_[q] - lb_[q];
    bool own_finite = std::isfinite(own_range);

    auto block_delta = [&](int i, double& bound_hit) -> double {
      double a = alpha_[i];
      if (std::abs(a) <= kRatioSkip) return kInf;
      double g = sigma * a;  // basic value moves by -g per unit step
      int j = basic_[i];
      double b = xval_[j], l = lb_[j], u = ub_[j];
      if (g > 0.0) {
        if (b < l - kViolTol) return kInf;
        double bound = (b > u + kViolTol) ? u : l;
        if (!std::isfinite(bound)) return kInf;
        bound_hit = bound;
        return std::max((b - bound) / g, 0.0);
      }
      if (b > u + kViolTol) return kInf;
      double bound = (b < l - kViolTol) ? l : u;
      if (!std::isfinite(bound)) return kInf;
      bound_hit = bound;
      return std::max((bound - b) / (-g), 0.0);
    };

    double hit = 0.0;
    double dblock = kInf;
    for (int i = 0; i < m_; ++i) dblock = std::min(dblock, block_delta(i, hit));

    if (own_finite && own_range <= dblock) {
      // Bound flip: q runs to its other bound, no basis change.
      double step = sigma * own_range;
      for (int i = 0; i < m_; ++i) {
        if (alpha_[i] != 0.0) xval_[basic_[i]] -= step * alpha_[i];
      }
      stat_[q] = (dir > 0) ? BasisStatus::AtUpper : BasisStatus::AtLower;
      xval_[q] = (dir > 0) ? ub_[q] : lb_[q];
      if (phase1_) {
        for (int i = 0; i < m_; ++i) {
          int j = basic_[i];
          signed char cls = 0;
          if (xval_[j] < lb_[j] - kViolTol)
            cls = -1;
          else if (xval_[j] > ub_[j] + kViolTol)
            cls = 1;
          if (cls != infcls_[i]) {
            infcls_[i] = cls;
            prices_stale_ = true;
          }
        }
      }
      ++iters_;
      track_stall_(own_range);
      return StepResult::Flipped;
    }
    if (!std::isfinite(dblock)) {
      if (phase1_) throw SolverError("simplex: no breakpoint while repairing feasibility");
      return StepResult::Unbounded;
    }

    // Among blockers tied near the minimum step, prefer the largest pivot.
    int p = -1;
    double p_bound = 0.0, best_mag = 0.0;
    for (int i = 0; i < m_; ++i) {
      double bnd = 0.0;
      double delta = block_delta(i, bnd);
      if (delta > dblock + kTieWindow) continue;
      if (bland_ ? (p < 0 || basic_[i] < basic_[p]) : (std::abs(alpha_[i]) > best_mag)) {
        best_mag = std::abs(alpha_[i]);
        p = i;
        p_bound = bnd;
      }
    }
    if (p < 0) {
      if (phase1_) throw SolverError("simplex: ratio test found no blocking variable");
      return StepResult::Unbounded;
    }

    double ap = alpha_[p];
    double delta;
    {
      double g = sigma * ap;
      int j = basic_[p];
      delta = g > 0.0 ? (xval_[j] - p_bound) / g : (p_bound - xval_[j]) / (-g);
      delta = std::max(delta, 0.0);
    }

    int lv = basic_[p];
    signed char lv_cls = infcls_[p];
    double dq_old = d_[q];

    double step = sigma * delta;
    for (int i = 0; i < m_; ++i) {
      if (i == p || alpha_[i] == 0.0) continue;
      xval_[basic_[i]] -= step * alpha_[i];
    }
    xval_[q] += step;
    xval_[lv] = p_bound;
    stat_[lv] = (p_bound == lb_[lv]) ? BasisStatus::AtLower : BasisStatus::AtUpper;
    pos_[lv] = -1;

    // Rank-one update of the inverse.
    double inv_ap = 1.0 / ap;
    double* rowp = invrow_(p);
    for (int c = 0; c < m_; ++c) rowp[c] *= inv_ap;
    for (int i = 0; i < m_; ++i) {
      if (i == p) continue;
      double f = alpha_[i];
      if (f == 0.0) continue;
      double* ri = invrow_(i);
      for (int c = 0; c < m_; ++c) ri[c] -= f * rowp[c];
    }

    basic_[p] = q;
    pos_[q] = p;
    stat_[q] = BasisStatus::Basic;

    // Price update against the new row p of the inverse.
    std::vector<double> rp(rowp, rowp + m_);
    if (dq_old != 0.0) {
      for (int j = 0; j < N_; ++j) {
        if (stat_[j] == BasisStatus::Basic) continue;
        d_[j] -= dq_old * col_dot_(j, rp);
      }
    }
    d_[q] = 0.0;
    if (phase1_ && lv_cls != 0) d_[lv] -= static_cast<double>(lv_cls);

    if (phase1_) {
      // Any basic that changed feasibility state invalidates the prices; the
      // first-breakpoint rule makes that rare (bound-landing ties only).
      for (int i = 0; i < m_; ++i) {
        int j = basic_[i];
        signed char cls = 0;
        if (xval_[j] < lb_[j] - kViolTol)
          cls = -1;
        else if (xval_[j] > ub_[j] + kViolTol)
          cls = 1;
        if (cls != infcls_[i]) {
          infcls_[i] = cls;
          if (i != p) prices_stale_ = true;
        }
      }
    }

    ++iters_;
    if (std::abs(ap) < opt_.tol.pivot) prices_stale_ = true;
    track_stall_(delta);
    return StepResult::Pivoted;
  }

  void track_stall_(double delta) {
    if (delta > 1e-10) {
      stall_ = 0;
      bland_ = false;
    } else if (++stall_ > opt_.stall_pivots) {
      bland_ = true;
    }
  }

  // Drives basic infeasibility to zero. True when feasible (or nearly so),
  // false when the phase-1 optimum still carries real infeasibility.
  bool phase1_loop_() {
    phase1_ = true;
    classify_basics_();
    prices_stale_ = true;
    int confirmations = 0;
    long since_refresh = 0;
    while (true) {
      if (max_violation_() <= kViolTol) {
        phase1_ = false;
        return true;
      }
      if (iters_ >= iter_limit_) throw SolverError("simplex: iteration limit");
      if (prices_stale_ || since_refresh >= opt_.refresh_every) {
        if (since_refresh >= opt_.refresh_every) {
          full_refresh_();
          since_refresh = 0;
          continue;  // feasibility may have been pure drift
        }
        classify_basics_();
        reprice_();
      }
      StepResult r = step_();
      ++since_refresh;
      if (r == StepResult::NoEntering) {
        full_refresh_();
        since_refresh = 0;
        if (max_violation_() <= kViolTol) {
          phase1_ = false;
          return true;
        }
        int dir;
        if (pick_entering_(dir) >= 0) continue;  // refreshed prices found work
        if (++confirmations >= 2) {
          phase1_ = false;
          return max_violation_() <= kLooseViol;
        }
      }
    }
  }

  // Optimizes the true objective from a feasible basis. Returns NoEntering on
  // a (claimed) optimum and Unbounded when a ray is found.
  StepResult phase2_loop_() {
    phase1_ = false;
    reprice_();
    long since_refresh = 0;
    while (true) {
      if (iters_ >= iter_limit_) throw SolverError("simplex: iteration limit");
      if (since_refresh >= opt_.refresh_every || prices_stale_) {
        full_refresh_();
        since_refresh = 0;
        if (max_violation_() > kViolTol) return StepResult::Dead;  // drift, redo phase 1
      }
      StepResult r = step_();
      ++since_refresh;
      if (r == StepResult::NoEntering || r == StepResult::Unbounded) return r;
    }
  }

  LpSolution run_(const LinearProgram& lp) {
    iter_limit_ = opt_.max_iterations > 0 ? opt_.max_iterations
                                          : 20000 + 30L * (m_ + n_);
    iters_ = 0;
    stall_ = 0;
    bland_ = false;
    refactors_ = 0;
    recompute_basics_();

    int last_entering_dir = 0;
    int unbounded_q = -1;
    for (int round = 0; round < opt_.max_rounds; ++round) {
      if (!phase1_loop_()) return finalize_infeasible_(lp);
      StepResult r = phase2_loop_();
      if (r == StepResult::Dead) continue;
      if (r == StepResult::Unbounded) {
        unbounded_q = pick_entering_(last_entering_dir);
        return finalize_unbounded_(lp, unbounded_q, last_entering_dir);
      }
      // Claimed optimal: re-verify against freshly computed values and prices.
      full_refresh_();
      int dir;
      if (max_violation_() <= kViolTol && pick_entering_(dir) < 0)
        return finalize_optimal_(lp);
    }
    return finalize_optimal_(lp);  // certificates expose any remaining gap
  }

  void fill_common_(const LinearProgram& lp, LpSolution& out) const {
    out.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) out.x[j] = xval_[j];
    out.row_activity.assign(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      double v = out.x[j];
      if (v == 0.0) continue;
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        out.row_activity[col_row_[k]] += col_val_[k] * v;
    }
    out.iterations = iters_;
    out.basis.var_stat.assign(n_, BasisStatus::AtLower);
    out.basis.row_stat.assign(m_, BasisStatus::AtLower);
    for (int j = 0; j < n_; ++j) out.basis.var_stat[j] = stat_[j];
    for (int i = 0; i < m_; ++i) out.basis.row_stat[i] = stat_[n_ + i];
    (void)lp;
  }

  LpSolution finalize_optimal_(const LinearProgram& lp) {
    LpSolution out;
    out.status = LpStatus::Optimal;
    fill_common_(lp, out);

    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += cost_[j] * out.x[j];
    out.objective = obj;

    out.row_dual.assign(y_.begin(), y_.end());
    out.reduced_cost.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) out.reduced_cost[j] = cost_[j] - col_dot_(j, y_);

    double resid = 0.0;
    for (int j = 0; j < n_; ++j) {
      resid = std::max(resid, lb_[j] - out.x[j]);
      resid = std::max(resid, out.x[j] - ub_[j]);
    }
    for (int i = 0; i < m_; ++i) {
      resid = std::max(resid, lb_[n_ + i] - out.row_activity[i]);
      resid = std::max(resid, out.row_activity[i] - ub_[n_ + i]);
    }
    out.max_primal_residual = std::max(resid, 0.0);

    double dual_obj = 0.0;
    bool dual_ok = true;
    for (int i = 0; i < m_; ++i) {
      double yv = out.row_dual[i];
      if (std::abs(yv) <= 1e-11) continue;
      double b = yv > 0 ? lb_[n_ + i] : ub_[n_ + i];
      if (!std::isfinite(b)) {
        dual_ok = false;
        break;
      }
      dual_obj += yv * b;
    }
    if (dual_ok) {
      for (int j = 0; j < n_; ++j) {
        double zv = out.reduced_cost[j];
        if (std::abs(zv) <= 1e-11) continue;
        double b = zv > 0 ? lb_[j] : ub_[j];
        if (!std::isfinite(b)) {
          dual_ok = false;
          break;
        }
        dual_obj += zv * b;
      }
    }
    out.duality_gap_rel =
        dual_ok ? std::abs(obj - dual_obj) / std::max(1.0, std::abs(obj)) : kInf;

    double comp = 0.0;
    for (int i = 0; i < m_; ++i) {
      double yv = out.row_dual[i];
      if (std::abs(yv) <= 1e-7) continue;
      double b = yv > 0 ? lb_[n_ + i] : ub_[n_ + i];
      comp = std::max(comp, std::isfinite(b) ? std::abs(out.row_activity[i] - b) : kInf);
    }
    for (int j = 0; j < n_; ++j) {
      double zv = out.reduced_cost[j];
      if (std::abs(zv) <= 1e-7) continue;
      double b = zv > 0 ? lb_[j] : ub_[j];
      comp = std::max(comp, std::isfinite(b) ? std::abs(out.x[j] - b) : kInf);
    }
    out.max_complementarity_violation = comp;

    lp_audit().record(out);
    return out;
  }

  LpSolution finalize_infeasible_(const LinearProgram& lp) {
    LpSolution out;
    out.status = LpStatus::Infeasible;
    fill_common_(lp, out);
    out.objective = kInf;
    out.row_dual.assign(m_, 0.0);
    out.reduced_cost.assign(n_, 0.0);
    out.max_primal_residual = max_violation_();

    // Phase-1 prices certify infeasibility; orient them so the score is positive.
    phase1_ = true;
    classify_basics_();
    reprice_();
    phase1_ = false;
    // Certificate shape: with t = A'y, every x in the box gives y'(Ax) at most
    // sum_j max(t_j l_j, t_j u_j), yet any feasible activity s needs y's at
    // least sum_i min(y_i lo_i, y_i hi_i). A positive margin proves emptiness.
    for (int flip = 0; flip < 2; ++flip) {
      double sgn = flip == 0 ? 1.0 : -1.0;
      bool usable = true;
      double need = 0.0;
      for (int i = 0; i < m_ && usable; ++i) {
        double yv = sgn * y_[i];
        if (std::abs(yv) <= 1e-11) continue;
        double b = yv > 0 ? lb_[n_ + i] : ub_[n_ + i];
        if (!std::isfinite(b)) {
          usable = false;
          break;
        }
        need += yv * b;
      }
      double reach = 0.0;
      for (int j = 0; j < n_ && usable; ++j) {
        double t = sgn * col_dot_(j, y_);
        if (std::abs(t) <= 1e-11) continue;
        double b = t > 0 ? ub_[j] : lb_[j];
        if (!std::isfinite(b)) {
          usable = false;
          break;
        }
        reach += t * b;
      }
      if (usable && need - reach > 1e-9) {
        out.farkas.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) out.farkas[i] = sgn * y_[i];
        out.farkas_score = need - reach;
        break;
      }
    }
    return out;
  }

  LpSolution finalize_unbounded_(const LinearProgram& lp, int q, int dir) {
    LpSolution out;
    out.status = LpStatus::Unbounded;
    fill_common_(lp, out);
    out.objective = -kInf;
    out.row_dual.assign(m_, 0.0);
    out.reduced_cost.assign(n_, 0.0);
    if (q >= 0) {
      ftran_(q, alpha_);
      out.ray.assign(n_, 0.0);
      double sigma = dir >= 0 ? 1.0 : -1.0;
      if (q < n_) out.ray[q] = sigma;
      for (int i = 0; i < m_; ++i) {
        int j = basic_[i];
        if (j < n_) out.ray[j] = -sigma * alpha_[i];
      }
    }
    return out;
  }
};

inline LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {}) {
  SimplexSolver solver(opt);
  return solver.solve(lp);
}

}  // namespace sgrid
