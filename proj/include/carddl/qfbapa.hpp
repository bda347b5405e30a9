#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "carddl/ast.hpp"
#include "carddl/linear.hpp"

// QFBAPA satisfiability.  Formulas are boolean combinations of set and
// cardinality atoms over an indexed variable table.  The solver branches on
// the boolean structure, builds Venn regions lazily over the variables that
// actually occur in the asserted literals (regions forced empty by positive
// set atoms are never materialized), prunes with an exact rational
// relaxation, and finishes with a bounded integer search.

namespace carddl::qfbapa {

struct STerm {
  enum K { Var, Empty, Univ, Union, Inter, Compl } k = Empty;
  int var = -1;
  std::vector<STerm> kids;

  static STerm mk_var(int v);
  static STerm mk_empty() { return {}; }
  static STerm mk_univ();
  static STerm mk_union(STerm a, STerm b);
  static STerm mk_inter(STerm a, STerm b);
  static STerm mk_compl(STerm a);
};

struct PTerm {
  enum K { Const, Card, Sum, Mul } k = Const;
  long long c = 0;  // Const value / Mul multiplier
  STerm s;          // Card
  std::vector<PTerm> kids;

  static PTerm mk_const(long long v);
  static PTerm mk_card(STerm s);
  static PTerm mk_sum(PTerm a, PTerm b);
  static PTerm mk_mul(long long n, PTerm a);
};

struct FNode {
  enum K { True, And, Or, Not, SetEq, SetSub, CardEq, CardLt, Div, DivRem } k = True;
  std::vector<FNode> kids;
  STerm s, t;            // SetEq / SetSub
  PTerm a, b;            // CardEq / CardLt; Div/DivRem use a
  long long n = 0;       // divisor
  long long r = 0;       // DivRem remainder (internal; a ≡ r mod n)

  static FNode mk_true() { return {}; }
  static FNode mk_and(std::vector<FNode> kids);
  static FNode mk_or(std::vector<FNode> kids);
  static FNode mk_not(FNode a);
  static FNode mk_set_eq(STerm s, STerm t);
  static FNode mk_set_sub(STerm s, STerm t);
  static FNode mk_card_eq(PTerm a, PTerm b);
  static FNode mk_card_lt(PTerm a, PTerm b);
  static FNode mk_card_ge(PTerm a, PTerm b) { return mk_not(mk_card_lt(std::move(a), std::move(b))); }
  static FNode mk_card_le(PTerm a, PTerm b) { return mk_not(mk_card_lt(std::move(b), std::move(a))); }
  static FNode mk_div(long long n, PTerm a);
};

struct Formula {
  std::vector<std::string> vars;  // deterministic table order
  FNode root;

  int var_count() const { return int(vars.size()); }
};

// Translate a syntax-level constraint tree; leafVar maps Role / Indiv /
// ConceptV leaves to table indices (throws for leaves it cannot place).
using LeafResolver = std::function<int(const SetTerm&)>;
FNode translate_atom(const CAtomPtr& atom, const LeafResolver& leafVar);
std::string render(const Formula& f);

// Variables occurring in a formula node.
std::set<int> formula_vars(const FNode& n);

// ---- regions and solutions ----

struct Region {
  std::vector<bool> signs;  // over the full variable table

  bool operator==(const Region& o) const { return signs == o.signs; }
  bool operator<(const Region& o) const { return signs < o.signs; }
};

std::string render_region(const Formula& f, const Region& r);

struct Solution {
  int nvars = 0;
  std::vector<std::pair<Region, long long>> counts;  // non-empty regions, ordered

  long long universe_size() const;
  // Elements 0..universe-1 grouped by region, in counts order.
  std::vector<std::vector<int>> materialize() const;
  // Per-variable element sets of the materialization.
  std::vector<std::set<int>> var_sets() const;
};

// ---- evaluation ----

struct Assignment {
  long long universeSize = 0;        // elements are 0..universeSize-1
  std::vector<std::set<int>> sets;   // one per variable
};

// Truth under an explicit substitution; throws std::invalid_argument when an
// assigned set is not a subset of the universe.
bool eval_formula(const Formula& f, const Assignment& sigma);

// ---- solving ----

enum class Verdict { Sat, Unsat, ResourceExceeded };

struct SolverConfig {
  long long maxRegions = 4096;
  long long maxNodes = 100000;
  long long maxIlpNodes = 3000;
  long long sparseMultiplier = 4;
};

struct SolveResult {
  Verdict verdict = Verdict::Unsat;
  std::optional<Solution> solution;
};

SolveResult solve(const Formula& f, const SolverConfig& cfg = {});

// Solution constrained to be non-empty on mustNonEmpty and empty on mustEmpty.
SolveResult solve_with_support(const Formula& f, const std::vector<Region>& mustNonEmpty,
                               const std::vector<Region>& mustEmpty,
                               const SolverConfig& cfg = {});

// Solution whose non-empty regions are exactly the given support.
SolveResult solve_exact_support(const Formula& f, const std::vector<Region>& support,
                                const SolverConfig& cfg = {});

// Sound upper bound on the number of non-empty regions needed by some
// solution of a satisfiable formula.  min(total regions, d * (4 + #card
// atoms * (2 + bitlen(max constant)))) with configurable multiplier d and the
// total-region-count fallback.
long long sparse_bound(const Formula& f, const SolverConfig& cfg = {});

// ---- flat region decomposition (audit / debug surface) ----

struct VennSystem {
  std::vector<Region> regions;    // lexicographic over the full table
  std::vector<int> forcedEmpty;   // region indices killed by top-level positive set atoms

  struct Node {
    enum K { True, False, And, Or, Not, Lin, Div } k = True;
    std::vector<Node> kids;
    std::vector<std::pair<long long, int>> terms;  // coeff * v_region
    long long rhs = 0;
    Rel rel = Rel::Ge;      // Lin: sum(terms) rel rhs
    long long divisor = 0;  // Div: divisor | sum(terms) + rhs
  };
  Node root;
};

// Eager decomposition over all 2^n regions; throws ResourceLimit via verdict
// semantics: regions beyond cfg.maxRegions raise std::length_error.
VennSystem venn_decompose(const Formula& f, const SolverConfig& cfg = {});

}  // namespace carddl::qfbapa
