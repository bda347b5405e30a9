#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <vector>

// Exact rational linear feasibility.  Everything here is integer/rational
// arithmetic on small dense systems; no floating point anywhere.

namespace carddl {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

enum class Rel { Le, Eq, Ge };

struct LinRow {
  std::vector<Int> a;
  Rel rel = Rel::Ge;
  Int rhs = 0;
};

// Feasibility of { rows, v >= 0 }.
struct LinProblem {
  int nvars = 0;
  std::vector<LinRow> rows;

  void add(std::vector<Int> a, Rel rel, Int rhs);
};

// Phase-1 simplex with Bland's rule; returns a feasible point or nullopt.
std::optional<std::vector<Rat>> lp_feasible(const LinProblem& p);

// The special form A·v >= b, v >= 0 with non-negative b.
struct LinearSystem {
  int nvars = 0;
  std::vector<std::vector<Int>> rows;  // A
  std::vector<Int> bounds;             // b

  void add(std::vector<Int> row, Int b);
};

bool lin_satisfies(const LinearSystem& sys, const std::vector<Int>& v);
bool lin_satisfies(const LinearSystem& sys, const std::vector<Rat>& v);

std::optional<std::vector<Rat>> lin_feasible_rational(const LinearSystem& sys);

// Rational witness scaled by the lcm of its denominators.
std::optional<std::vector<Int>> lin_integer_solution(const LinearSystem& sys);

// Sum of two solutions; throws if either input fails to satisfy the system.
std::vector<Int> lin_sum(const LinearSystem& sys, const std::vector<Int>& c,
                         const std::vector<Int>& d);

// Integer solution with v_i >= 1 for every i in vars, obtained as the scaled
// sum of per-index witnesses; nullopt iff some per-index system is infeasible.
std::optional<std::vector<Int>> lin_positive_support(const LinearSystem& sys,
                                                     const std::vector<int>& vars);

std::vector<Int> scale_to_integer(const std::vector<Rat>& v);

}  // namespace carddl
