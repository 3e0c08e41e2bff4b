#pragma once

// Tableau kernel behind solve_lp, templated on the scalar so the same pivoting
// code runs in double and in exact rationals.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "padnet/lp.hpp"

namespace padnet::detail {

template <class T>
struct Arith;

template <>
struct Arith<double> {
  static double from(double v) { return v; }
  static double to_double(double v) { return v; }
  static bool is_zero(double v, double tol) { return std::fabs(v) <= tol; }
  static bool positive(double v, double tol) { return v > tol; }
  static bool negative(double v, double tol) { return v < -tol; }
  // Elimination leaves rounding dust; clearing it keeps pivot rows sparse.
  static void clean(double& v) {
    if (std::fabs(v) < 1e-14) v = 0.0;
  }
  static constexpr bool exact = false;
};

template <>
struct Arith<mpq_class> {
  static mpq_class from(double v) { return mpq_class(v); }
  static double to_double(const mpq_class& v) { return v.get_d(); }
  static bool is_zero(const mpq_class& v, double) { return sgn(v) == 0; }
  static bool positive(const mpq_class& v, double) { return sgn(v) > 0; }
  static bool negative(const mpq_class& v, double) { return sgn(v) < 0; }
  static void clean(mpq_class&) {}
  static constexpr bool exact = true;
};

template <class T>
class Tableau {
  using A = Arith<T>;

 public:
  Tableau(const LpProblem& p, const LpOptions& opt) : opt_(opt) {
    m_ = static_cast<std::size_t>(p.row_count());
    nv_ = static_cast<std::size_t>(p.var_count());
    limit_ = opt.iteration_limit > 0 ? opt.iteration_limit
                                     : 50 * static_cast<long>(2 * m_ + nv_) + 1000;

    dual_ = opt.allow_dual && std::all_of(p.objective.begin(), p.objective.end(), [](double c) { return c >= 0; }) &&
            std::none_of(p.rows.begin(), p.rows.end(),
                         [](const LpRow& r) { return r.sense == RowSense::Equal; });
    if (dual_) {
      // Every row as <= with a slack: the slack basis is dual feasible
      // because no cost is negative, so no artificial phase is needed.
      n_ = nv_ + m_;
      width_ = n_ + 1;
      a_.assign(m_ * width_, T(0));
      z1_.assign(width_, T(0));
      z2_.assign(width_, T(0));
      artificial_.assign(n_, 0);
      basis_.assign(m_, 0);
      for (std::size_t i = 0; i < m_; ++i) {
        const auto& row = p.rows[i];
        const double sign = row.sense == RowSense::GreaterEqual ? -1.0 : 1.0;
        T* r = at(i);
        for (const auto& term : row.terms) {
          r[static_cast<std::size_t>(term.var)] += A::from(sign * term.coef);
        }
        r[n_] = A::from(sign * row.rhs);
        r[nv_ + i] = T(1);
        basis_[i] = nv_ + i;
      }
      for (std::size_t j = 0; j < nv_; ++j) {
        z2_[j] = A::from(p.objective[j]);
      }
      return;
    }

    // Column layout: structural, then one slack/surplus per inequality, then
    // one artificial per row not starting with a slack in the basis.
    std::vector<int> sign(m_, 1);
    std::vector<RowSense> sense(m_);
    std::size_t slacks = 0;
    std::size_t arts = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& row = p.rows[i];
      sense[i] = row.sense;
      if (row.rhs < 0) {
        sign[i] = -1;
        if (row.sense == RowSense::LessEqual) sense[i] = RowSense::GreaterEqual;
        else if (row.sense == RowSense::GreaterEqual) sense[i] = RowSense::LessEqual;
      }
      if (sense[i] != RowSense::Equal) ++slacks;
      if (sense[i] != RowSense::LessEqual) ++arts;
    }
    n_ = nv_ + slacks + arts;
    width_ = n_ + 1;
    a_.assign(m_ * width_, T(0));
    z1_.assign(width_, T(0));
    z2_.assign(width_, T(0));
    artificial_.assign(n_, 0);
    basis_.assign(m_, 0);

    std::size_t next_slack = nv_;
    std::size_t next_art = nv_ + slacks;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& row = p.rows[i];
      T* r = at(i);
      for (const auto& term : row.terms) {
        r[static_cast<std::size_t>(term.var)] += A::from(sign[i] * term.coef);
      }
      r[n_] = A::from(sign[i] * row.rhs);
      if (sense[i] == RowSense::LessEqual) {
        r[next_slack] = T(1);
        basis_[i] = next_slack++;
      } else {
        if (sense[i] == RowSense::GreaterEqual) {
          r[next_slack++] = T(-1);
        }
        r[next_art] = T(1);
        artificial_[next_art] = 1;
        basis_[i] = next_art++;
        for (std::size_t j = 0; j < width_; ++j) {
          z1_[j] -= r[j];
        }
      }
    }
    for (std::size_t j = 0; j < n_; ++j) {
      if (artificial_[j]) z1_[j] = T(0);
    }
    for (std::size_t j = 0; j < nv_; ++j) {
      z2_[j] = A::from(p.objective[j]);
    }
  }

  LpResult solve() {
    LpResult out;
    if (dual_) {
      switch (run_dual()) {
        case Outcome::Optimal:
          out.status = LpStatus::Optimal;
          break;
        case Outcome::Unbounded:
          out.status = LpStatus::Infeasible;
          break;
        case Outcome::Limit:
          out.status = LpStatus::IterationLimit;
          break;
      }
      return finish(out);
    }
    if (run(z1_) == Outcome::Limit) {
      out.status = LpStatus::IterationLimit;
      return finish(out);
    }
    T infeasibility = -z1_[n_];
    double scale = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      scale = std::max(scale, std::fabs(A::to_double(at(i)[n_])));
    }
    if (A::positive(infeasibility, opt_.tolerance * scale * 10)) {
      out.status = LpStatus::Infeasible;
      return finish(out);
    }
    drive_out_artificials();
    const auto phase2 = run(z2_);
    if (phase2 == Outcome::Limit) {
      out.status = LpStatus::IterationLimit;
    } else if (phase2 == Outcome::Unbounded) {
      out.status = LpStatus::Unbounded;
    } else {
      out.status = LpStatus::Optimal;
    }
    return finish(out);
  }

 private:
  enum class Outcome { Optimal, Unbounded, Limit };

  T* at(std::size_t i) { return a_.data() + i * width_; }

  // Entering column: most negative reduced cost, or the first negative one
  // under Bland's rule. Artificial columns never enter.
  std::size_t choose_entering(const std::vector<T>& z, bool bland) const {
    std::size_t best = n_;
    for (std::size_t j = 0; j < n_; ++j) {
      if (artificial_[j] || !A::negative(z[j], opt_.tolerance)) continue;
      if (bland) return j;
      if (best == n_ || z[j] < z[best]) best = j;
    }
    return best;
  }

  std::size_t choose_leaving(std::size_t e, bool bland) {
    std::size_t best = m_;
    T best_ratio{};
    for (std::size_t i = 0; i < m_; ++i) {
      const T* r = at(i);
      if (!A::positive(r[e], opt_.tolerance)) continue;
      T ratio = r[n_] / r[e];
      if (best == m_) {
        best = i;
        best_ratio = ratio;
        continue;
      }
      bool take = false;
      if (ratio < best_ratio && !tie(ratio, best_ratio)) {
        take = true;
      } else if (tie(ratio, best_ratio)) {
        const T* b = at(best);
        if (bland || A::exact) {
          take = basis_[i] < basis_[best];
        } else {
          // Larger pivots are numerically safer; index breaks exact ties.
          const double pi = std::fabs(A::to_double(r[e]));
          const double pb = std::fabs(A::to_double(b[e]));
          take = pi > pb || (pi == pb && basis_[i] < basis_[best]);
        }
      }
      if (take) {
        best = i;
        best_ratio = ratio;
      }
    }
    return best;
  }

  bool tie(const T& a, const T& b) const {
    if constexpr (A::exact) {
      return a == b;
    } else {
      return std::fabs(a - b) <= 1e-12 * (1.0 + std::fabs(a) + std::fabs(b));
    }
  }

  void pivot(std::size_t r, std::size_t e) {
    T* pr = at(r);
    const T inv = T(1) / pr[e];
    nz_.clear();
    for (std::size_t j = 0; j < width_; ++j) {
      if (A::is_zero(pr[j], 0.0)) continue;
      pr[j] *= inv;
      A::clean(pr[j]);
      if (!A::is_zero(pr[j], 0.0)) nz_.push_back(j);
    }
    pr[e] = T(1);
    auto eliminate = [&](T* row) {
      if (A::is_zero(row[e], 0.0)) return;
      const T f = row[e];
      for (std::size_t j : nz_) {
        row[j] -= f * pr[j];
        A::clean(row[j]);
      }
      row[e] = T(0);
    };
    for (std::size_t i = 0; i < m_; ++i) {
      if (i != r) eliminate(at(i));
    }
    eliminate(z1_.data());
    eliminate(z2_.data());
    if (!A::exact && !dual_) {
      // A basic value pushed below zero by rounding is reset.
      for (std::size_t i = 0; i < m_; ++i) {
        T& rhs = at(i)[n_];
        if (rhs < 0 && rhs > -1e-11) rhs = 0;
      }
    }
    basis_[r] = e;
    ++pivots_;
  }

  Outcome run(std::vector<T>& z) {
    bool bland = false;
    int degenerate = 0;
    while (true) {
      if (pivots_ >= limit_) return Outcome::Limit;
      const std::size_t e = choose_entering(z, bland);
      if (e == n_) return Outcome::Optimal;
      const std::size_t r = choose_leaving(e, bland);
      if (r == m_) return Outcome::Unbounded;
      const bool step_zero = A::is_zero(at(r)[n_], opt_.tolerance);
      pivot(r, e);
      if (step_zero) {
        if (++degenerate >= opt_.degenerate_run) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
  }

  // Dual simplex: the leaving row has the most negative basic value (the
  // lowest basic index under Bland's rule); the entering column keeps every
  // reduced cost nonnegative. Unbounded here means the primal is infeasible.
  Outcome run_dual() {
    bool bland = false;
    int degenerate = 0;
    while (true) {
      if (pivots_ >= limit_) return Outcome::Limit;
      std::size_t r = m_;
      for (std::size_t i = 0; i < m_; ++i) {
        const T& v = at(i)[n_];
        if (!A::negative(v, opt_.tolerance)) continue;
        if (r == m_) {
          r = i;
        } else if (bland ? basis_[i] < basis_[r] : v < at(r)[n_]) {
          r = i;
        }
      }
      if (r == m_) return Outcome::Optimal;
      const T* pr = at(r);
      std::size_t e = n_;
      T best_ratio{};
      for (std::size_t j = 0; j < n_; ++j) {
        if (!A::negative(pr[j], opt_.tolerance)) continue;
        T dj = z2_[j];
        if (dj < 0) dj = 0;
        T ratio = dj / -pr[j];
        if (e == n_ || (ratio < best_ratio && !tie(ratio, best_ratio))) {
          e = j;
          best_ratio = ratio;
        } else if (!bland && !A::exact && tie(ratio, best_ratio) &&
                   std::fabs(A::to_double(pr[j])) > std::fabs(A::to_double(pr[e]))) {
          e = j;
          best_ratio = ratio;
        }
      }
      if (e == n_) return Outcome::Unbounded;
      const bool step_zero = A::is_zero(z2_[e], opt_.tolerance);
      pivot(r, e);
      if (step_zero) {
        if (++degenerate >= opt_.degenerate_run) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!artificial_[basis_[i]]) continue;
      const T* r = at(i);
      std::size_t pick = n_;
      double best = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (artificial_[j] || A::is_zero(r[j], opt_.tolerance)) continue;
        const double mag = std::fabs(A::to_double(r[j]));
        if (pick == n_ || (!A::exact && mag > best)) {
          pick = j;
          best = mag;
          if (A::exact) break;
        }
      }
      // No candidate: the row is redundant and its artificial stays at zero.
      if (pick != n_) pivot(i, pick);
    }
  }

  LpResult finish(LpResult out) {
    out.pivots = pivots_;
    out.exact = A::exact;
    out.values.assign(nv_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < nv_) {
        const double v = A::to_double(at(i)[n_]);
        out.values[basis_[i]] = std::fabs(v) < 1e-13 ? 0.0 : v;
      }
    }
    double dual = 0.0;
    const auto& z = out.status == LpStatus::Optimal ? z2_ : z1_;
    for (std::size_t j = 0; j < n_; ++j) {
      if (!artificial_[j]) dual = std::max(dual, -A::to_double(z[j]));
    }
    out.dual_residual = dual;
    return out;
  }

  LpOptions opt_;
  bool dual_ = false;
  std::size_t m_ = 0;
  std::size_t nv_ = 0;
  std::size_t n_ = 0;
  std::size_t width_ = 0;
  std::vector<T> a_;
  std::vector<T> z1_;
  std::vector<T> z2_;
  std::vector<char> artificial_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nz_;
  long pivots_ = 0;
  long limit_ = 0;
};

}  // namespace padnet::detail
