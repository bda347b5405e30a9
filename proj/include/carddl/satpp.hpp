#pragma once

#include "carddl/ast.hpp"
#include "carddl/config.hpp"
#include "carddl/interpretation.hpp"
#include "carddl/qfbapa.hpp"

// Concept satisfiability for globally evaluated constraint expressions via
// the type-based reduction to QFBAPA, plus finite-model extraction from
// solutions.

namespace carddl::satpp {

// All subdescriptions of E and their negations: breadth-first over the
// written structure, each entry immediately followed by its complement,
// double negations collapsed.
struct Closure {
  std::vector<ConceptPtr> members;  // size 2 * pairs()
  std::vector<int> pairOf;          // member -> pair
  std::vector<int> pairPos;         // pair -> member index of the non-negated form
  std::vector<int> pairNeg;         // pair -> member index of the negated form

  int pairs() const { return int(pairPos.size()); }
  int find(const ConceptPtr& c) const;  // -1 when absent
};

Closure build_closure(const ConceptPtr& E);
// seeds in order, then breadth-first; used by the consistency engine where
// the closure ranges over every concept in a knowledge base
Closure build_closure_multi(const std::vector<ConceptPtr>& seeds);
std::vector<ConceptPtr> closure_ME(const ConceptPtr& E);

// Sign assignment over closure pairs; bit = the pair's positive form is in.
struct TypeSet {
  std::vector<bool> bits;

  bool operator==(const TypeSet& o) const { return bits == o.bits; }
};

// Whether the type contains a given closure member (by member index).
bool type_contains(const Closure& cl, const TypeSet& t, int member);

struct SatResult {
  qfbapa::Verdict verdict = qfbapa::Verdict::Unsat;
  std::optional<qfbapa::Solution> solution;
  std::optional<Interpretation> model;
};

class Reduction {
 public:
  explicit Reduction(ConceptPtr E, RunConfig cfg = {});

  const ConceptPtr& goal() const { return goal_; }
  const Closure& closure() const { return cl_; }
  const std::vector<std::string>& roles() const { return roles_; }

  // Exactly the sign assignments satisfying the type conditions, generated
  // by propagation over the boolean structure (free bits are concept names
  // and constraint expressions; conjunctions and disjunctions are derived).
  const std::vector<TypeSet>& types() const { return types_; }
  std::vector<int> types_containing(const ConceptPtr& c) const;

  // Successor/global constraints of one type, over a standalone table
  // (closure member variables followed by this type's role variables).
  qfbapa::Formula psi(int typeIdx) const;
  // Boolean-structure equations over the closure member variables.
  qfbapa::Formula beta() const;
  // |X_E| >= 1 /\ beta /\ per-type (empty \/ psi_t), over the full table.
  qfbapa::Formula delta() const;

  SatResult sat() const;
  Interpretation extract_model(const qfbapa::Solution& sol) const;

 private:
  ConceptPtr goal_;
  RunConfig cfg_;
  Closure cl_;
  std::vector<std::string> roles_;
  std::vector<TypeSet> types_;
  std::vector<int> typeOrder_;  // goal-containing types first

  qfbapa::FNode psi_node(int typeIdx, int roleVarBase) const;
  qfbapa::STerm type_term(const TypeSet& t) const;
  int member_var(const ConceptPtr& c) const;
};

// Convenience wrappers matching the operation names.
std::vector<TypeSet> types_of(const ConceptPtr& E, const RunConfig& cfg = {});
qfbapa::Formula delta(const ConceptPtr& E, const RunConfig& cfg = {});
SatResult sat(const ConceptPtr& E, const RunConfig& cfg = {});

}  // namespace carddl::satpp
