#include "carddl/linear.hpp"

#include <stdexcept>

namespace carddl {

void LinProblem::add(std::vector<Int> a, Rel rel, Int rhs) {
  if (int(a.size()) != nvars) throw std::invalid_argument("row width mismatch");
  rows.push_back({std::move(a), rel, std::move(rhs)});
}

namespace {

// Dense phase-1 tableau.  Columns: structural vars, then slacks/surplus,
// then artificials, then the rhs.
struct Tableau {
  int ncols = 0;
  std::vector<std::vector<Rat>> t;  // rows
  std::vector<int> basis;           // basic column per row

  Rat& at(int i, int j) { return t[i][j]; }
};

}  // namespace

std::optional<std::vector<Rat>> lp_feasible(const LinProblem& p) {
  const int n = p.nvars;
  const int m = int(p.rows.size());
  if (m == 0) return std::vector<Rat>(n, Rat(0));

  // Count slack and artificial columns.
  int nslack = 0;
  for (auto& r : p.rows)
    if (r.rel != Rel::Eq) ++nslack;
  int slackBase = n;
  int artBase = n + nslack;
  int ncols = artBase + m;  // at most one artificial per row
  int rhsCol = ncols;

  Tableau tb;
  tb.ncols = ncols;
  tb.t.assign(m, std::vector<Rat>(ncols + 1, Rat(0)));
  tb.basis.assign(m, -1);

  int slack = slackBase, art = artBase;
  int nart = 0;
  for (int i = 0; i < m; ++i) {
    const LinRow& r = p.rows[i];
    Int sign = 1;
    // normalize to rhs >= 0
    bool flip = r.rhs < 0;
    if (flip) sign = -1;
    for (int j = 0; j < n; ++j) tb.at(i, j) = Rat(sign * r.a[j]);
    tb.at(i, rhsCol) = Rat(sign * r.rhs);
    Rel rel = r.rel;
    if (flip) rel = rel == Rel::Le ? Rel::Ge : (rel == Rel::Ge ? Rel::Le : Rel::Eq);
    if (rel == Rel::Le) {
      tb.at(i, slack) = 1;
      tb.basis[i] = slack++;
    } else if (rel == Rel::Ge) {
      tb.at(i, slack) = -1;
      ++slack;
      tb.at(i, art) = 1;
      tb.basis[i] = art++;
      ++nart;
    } else {
      tb.at(i, art) = 1;
      tb.basis[i] = art++;
      ++nart;
    }
  }

  auto isArt = [&](int j) { return j >= artBase; };

  // Objective: minimize the sum of artificial variables.  Expressed over the
  // current basis as objRow/objVal derived from rows with an artificial basic.
  std::vector<Rat> objRow(ncols, Rat(0));
  Rat objVal = 0;
  auto rebuildObj = [&]() {
    std::fill(objRow.begin(), objRow.end(), Rat(0));
    objVal = 0;
    for (int i = 0; i < m; ++i) {
      if (isArt(tb.basis[i])) {
        for (int j = 0; j < ncols; ++j) objRow[j] += tb.at(i, j);
        objVal += tb.at(i, rhsCol);
      }
    }
  };
  rebuildObj();

  while (objVal > 0) {
    // Bland: smallest non-artificial column with positive objective coefficient.
    int enter = -1;
    for (int j = 0; j < artBase; ++j) {
      if (objRow[j] > 0) {
        bool basic = false;
        for (int i = 0; i < m; ++i)
          if (tb.basis[i] == j) basic = true;
        if (!basic) {
          enter = j;
          break;
        }
      }
    }
    if (enter < 0) break;  // optimum reached, objVal > 0 handled below
    int leave = -1;
    Rat best;
    for (int i = 0; i < m; ++i) {
      if (tb.at(i, enter) > 0) {
        Rat ratio = tb.at(i, rhsCol) / tb.at(i, enter);
        if (leave < 0 || ratio < best || (ratio == best && tb.basis[i] < tb.basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction does not help phase 1
    // pivot
    Rat piv = tb.at(leave, enter);
    for (int j = 0; j <= ncols; ++j) tb.at(leave, j) /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      Rat f = tb.at(i, enter);
      if (f == 0) continue;
      for (int j = 0; j <= ncols; ++j) tb.at(i, j) -= f * tb.at(leave, j);
    }
    tb.basis[leave] = enter;
    rebuildObj();
  }

  if (objVal > 0) return std::nullopt;

  std::vector<Rat> x(n, Rat(0));
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < n) x[tb.basis[i]] = tb.at(i, rhsCol);
  return x;
}

void LinearSystem::add(std::vector<Int> row, Int b) {
  if (int(row.size()) != nvars) throw std::invalid_argument("row width mismatch");
  if (b < 0) throw std::invalid_argument("special-form bound must be non-negative");
  rows.push_back(std::move(row));
  bounds.push_back(std::move(b));
}

template <typename Num>
static bool sat_impl(const LinearSystem& sys, const std::vector<Num>& v) {
  if (int(v.size()) != sys.nvars) return false;
  for (auto& x : v)
    if (x < 0) return false;
  for (size_t i = 0; i < sys.rows.size(); ++i) {
    Num acc = 0;
    for (int j = 0; j < sys.nvars; ++j) acc += Num(sys.rows[i][j]) * v[j];
    if (acc < Num(sys.bounds[i])) return false;
  }
  return true;
}

bool lin_satisfies(const LinearSystem& sys, const std::vector<Int>& v) { return sat_impl(sys, v); }
bool lin_satisfies(const LinearSystem& sys, const std::vector<Rat>& v) { return sat_impl(sys, v); }

static LinProblem to_problem(const LinearSystem& sys) {
  LinProblem p;
  p.nvars = sys.nvars;
  for (size_t i = 0; i < sys.rows.size(); ++i) p.add(sys.rows[i], Rel::Ge, sys.bounds[i]);
  return p;
}

std::optional<std::vector<Rat>> lin_feasible_rational(const LinearSystem& sys) {
  return lp_feasible(to_problem(sys));
}

std::vector<Int> scale_to_integer(const std::vector<Rat>& v) {
  Int d = 1;
  for (auto& x : v) d = lcm(d, denominator(x));
  std::vector<Int> out;
  out.reserve(v.size());
  for (auto& x : v) out.push_back(numerator(x) * (d / denominator(x)));
  return out;
}

std::optional<std::vector<Int>> lin_integer_solution(const LinearSystem& sys) {
  auto r = lin_feasible_rational(sys);
  if (!r) return std::nullopt;
  auto v = scale_to_integer(*r);
  if (!lin_satisfies(sys, v)) throw std::logic_error("lcm scaling produced a non-solution");
  return v;
}

std::vector<Int> lin_sum(const LinearSystem& sys, const std::vector<Int>& c,
                         const std::vector<Int>& d) {
  if (!lin_satisfies(sys, c) || !lin_satisfies(sys, d))
    throw std::invalid_argument("lin_sum inputs must satisfy the system");
  std::vector<Int> out(sys.nvars);
  for (int j = 0; j < sys.nvars; ++j) out[j] = c[j] + d[j];
  if (!lin_satisfies(sys, out)) throw std::logic_error("sum of solutions failed re-check");
  return out;
}

std::optional<std::vector<Int>> lin_positive_support(const LinearSystem& sys,
                                                     const std::vector<int>& vars) {
  std::vector<Rat> acc(sys.nvars, Rat(0));
  if (vars.empty()) {
    auto r = lin_feasible_rational(sys);
    if (!r) return std::nullopt;
    return scale_to_integer(*r);
  }
  for (int idx : vars) {
    if (idx < 0 || idx >= sys.nvars) throw std::invalid_argument("variable index out of range");
    LinearSystem ext = sys;
    std::vector<Int> unit(sys.nvars, 0);
    unit[idx] = 1;
    ext.add(std::move(unit), 1);
    auto r = lin_feasible_rational(ext);
    if (!r) return std::nullopt;
    for (int j = 0; j < sys.nvars; ++j) acc[j] += (*r)[j];
  }
  auto v = scale_to_integer(acc);
  if (!lin_satisfies(sys, v)) throw std::logic_error("positive-support sum failed re-check");
  for (int idx : vars)
    if (v[idx] < 1) throw std::logic_error("positive-support component not positive");
  return v;
}

}  // namespace carddl
