#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "icnte/common.hpp"

namespace icnte::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Row {
  std::vector<std::pair<std::size_t, double>> coeffs;  // (variable, coefficient)
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

// minimize objective . x  subject to rows, x >= 0.
struct Problem {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<Row> rows;
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

// Dense two-phase tableau simplex with Bland's rule. Bland's rule makes the
// pivot sequence, and therefore the returned vertex, a deterministic
// function of the variable and row order. Intended for problems with a few
// hundred rows and columns.
class DenseSimplex {
 public:
  static constexpr double kPivotEps = 1e-11;
  static constexpr double kCostEps = 1e-12;

  static Solution solve(const Problem& p) {
    DenseSimplex s(p);
    return s.run(p);
  }

 private:
  explicit DenseSimplex(const Problem& p) : m_(p.rows.size()), n_(p.num_vars) {
    std::size_t slacks = 0;
    std::size_t artificials = 0;
    for (const auto& r : p.rows) {
      const auto sense = normalized_sense(r);
      if (sense != Sense::Equal) ++slacks;
      if (sense != Sense::LessEqual) ++artificials;
    }
    art_begin_ = n_ + slacks;
    cols_ = art_begin_ + artificials;
    tab_.assign(m_, std::vector<double>(cols_ + 1, 0.0));
    basis_.assign(m_, 0);

    std::size_t next_slack = n_;
    std::size_t next_art = art_begin_;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& r = p.rows[i];
      const double sign = r.rhs < 0.0 ? -1.0 : 1.0;
      for (const auto& [j, a] : r.coeffs) {
        if (j >= n_) throw Error("lp: variable index out of range");
        tab_[i][j] += sign * a;
      }
      tab_[i][cols_] = sign * r.rhs;
      switch (normalized_sense(r)) {
        case Sense::LessEqual:
          tab_[i][next_slack] = 1.0;
          basis_[i] = next_slack++;
          break;
        case Sense::GreaterEqual:
          tab_[i][next_slack++] = -1.0;
          tab_[i][next_art] = 1.0;
          basis_[i] = next_art++;
          break;
        case Sense::Equal:
          tab_[i][next_art] = 1.0;
          basis_[i] = next_art++;
          break;
      }
    }
  }

  static Sense normalized_sense(const Row& r) {
    if (r.rhs >= 0.0 || r.sense == Sense::Equal) return r.sense;
    return r.sense == Sense::LessEqual ? Sense::GreaterEqual : Sense::LessEqual;
  }

  Solution run(const Problem& p) {
    Solution sol;
    if (art_begin_ < cols_) {
      std::vector<double> phase1(cols_, 0.0);
      for (std::size_t j = art_begin_; j < cols_; ++j) phase1[j] = 1.0;
      if (iterate(phase1, cols_) == Status::Unbounded) throw Error("lp: phase one unbounded");
      double infeasibility = 0.0;
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] >= art_begin_) infeasibility += tab_[i][cols_];
      if (infeasibility > 1e-9) return sol;
      evict_artificials();
    }

    std::vector<double> cost(cols_, 0.0);
    for (std::size_t j = 0; j < n_ && j < p.objective.size(); ++j) cost[j] = p.objective[j];
    sol.status = iterate(cost, art_begin_);
    if (sol.status != Status::Optimal) return sol;

    sol.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) sol.x[basis_[i]] = tab_[i][cols_];
    for (std::size_t j = 0; j < n_; ++j) sol.objective += cost[j] * sol.x[j];
    return sol;
  }

  // Runs primal simplex on the current basis; only columns below
  // `allowed_end` may enter.
  Status iterate(const std::vector<double>& cost, std::size_t allowed_end) {
    std::vector<double> reduced(cols_);
    for (;;) {
      for (std::size_t j = 0; j < cols_; ++j) {
        double z = cost[j];
        for (std::size_t i = 0; i < m_; ++i) z -= cost[basis_[i]] * tab_[i][j];
        reduced[j] = z;
      }
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < allowed_end; ++j) {
        if (reduced[j] < -kCostEps && !is_basic(j)) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return Status::Optimal;

      std::size_t leave = m_;
      double best = kInfinity;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = tab_[i][enter];
        if (a <= kPivotEps) continue;
        const double ratio = tab_[i][cols_] / a;
        if (ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && leave < m_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m_) return Status::Unbounded;
      pivot(leave, enter);
    }
  }

  void evict_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (std::abs(tab_[i][j]) > kPivotEps && !is_basic(j)) {
          pivot(i, j);
          break;
        }
      }
      // A row with no eligible column is redundant; its artificial stays at 0.
    }
  }

  bool is_basic(std::size_t j) const {
    for (const auto b : basis_)
      if (b == j) return true;
    return false;
  }

  void pivot(std::size_t r, std::size_t c) {
    auto& prow = tab_[r];
    const double inv = 1.0 / prow[c];
    for (auto& v : prow) v *= inv;
    prow[c] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      auto& row = tab_[i];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) row[j] -= f * prow[j];
      row[c] = 0.0;
      // Round-off can push a degenerate basic value slightly negative.
      if (row[cols_] < 0.0 && row[cols_] > -1e-9) row[cols_] = 0.0;
    }
    basis_[r] = c;
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t art_begin_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::vector<double>> tab_;
  std::vector<std::size_t> basis_;
};

}  // namespace icnte::lp
