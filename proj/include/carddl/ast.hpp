#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Core ASTs: concept descriptions, set terms, Presburger expressions,
// constraint atoms, and knowledge bases.  All nodes are immutable after
// construction and shared freely via shared_ptr<const ...>.

namespace carddl {

struct Concept;
struct SetTerm;
struct PAExpr;
struct CAtom;

using ConceptPtr = std::shared_ptr<const Concept>;
using SetTermPtr = std::shared_ptr<const SetTerm>;
using PAExprPtr = std::shared_ptr<const PAExpr>;
using CAtomPtr = std::shared_ptr<const CAtom>;

// Reserved concept name backing the top/bottom sugar.
inline const std::string kReservedTopName = "__T";

enum class CK { Name, And, Or, Not, Constr, Succ };

struct Concept {
  CK kind;
  std::string name;              // Name
  std::vector<ConceptPtr> kids;  // And/Or: >= 2, Not: exactly 1
  CAtomPtr constr;               // Constr (sat) / Succ (succ)
};

enum class SK { Empty, Universe, Role, ConceptV, Indiv, Union, Inter, Complement };

struct SetTerm {
  SK kind;
  std::string name;              // Role / Indiv
  ConceptPtr concept_;           // ConceptV (always Name/Constr/Succ, see mk_concept_set)
  std::vector<SetTermPtr> kids;  // Union/Inter: 2, Complement: 1
};

enum class PK { IntConst, Card, Sum, ScalarMul };

struct PAExpr {
  PK kind;
  long long value = 0;          // IntConst; ScalarMul multiplier
  SetTermPtr set;               // Card
  std::vector<PAExprPtr> kids;  // Sum: 2, ScalarMul: 1
};

enum class AK { And, Or, Not, SetEq, SetSub, CardEq, CardLt, Divides };

struct CAtom {
  AK kind;
  std::vector<CAtomPtr> kids;  // And/Or: >= 2, Not: 1
  SetTermPtr s, t;             // SetEq / SetSub
  PAExprPtr k, l;              // CardEq / CardLt; Divides uses l only
  long long divisor = 0;       // Divides
};

// ---- constructors ----

ConceptPtr mk_name(std::string name);
// And/Or flatten nested nodes of the same kind eagerly.
ConceptPtr mk_and(std::vector<ConceptPtr> kids);
ConceptPtr mk_or(std::vector<ConceptPtr> kids);
// Double negation collapses eagerly.
ConceptPtr mk_not(ConceptPtr c);
ConceptPtr mk_constr(CAtomPtr c);
ConceptPtr mk_succ(CAtomPtr c);
ConceptPtr mk_top();
ConceptPtr mk_bottom();
bool is_top(const ConceptPtr& c);
bool is_bottom(const ConceptPtr& c);

SetTermPtr st_empty();
SetTermPtr st_universe();
SetTermPtr st_role(std::string role);
SetTermPtr st_indiv(std::string ind);
// Boolean concept structure is canonicalized into set operations so that
// ConceptV leaves are always Name/Constr/Succ nodes.
SetTermPtr mk_concept_set(ConceptPtr c);
// Inverse reading of a role-free set term as a concept (union -> or, ...).
ConceptPtr concept_of_set(const SetTermPtr& s);
SetTermPtr st_union(SetTermPtr a, SetTermPtr b);
SetTermPtr st_inter(SetTermPtr a, SetTermPtr b);
SetTermPtr st_complement(SetTermPtr a);

PAExprPtr pa_const(long long v);
PAExprPtr pa_card(SetTermPtr s);
PAExprPtr pa_sum(PAExprPtr a, PAExprPtr b);
PAExprPtr pa_mul(long long n, PAExprPtr a);

CAtomPtr ca_and(std::vector<CAtomPtr> kids);
CAtomPtr ca_or(std::vector<CAtomPtr> kids);
CAtomPtr ca_not(CAtomPtr a);  // collapses double negation
CAtomPtr ca_set_eq(SetTermPtr s, SetTermPtr t);
CAtomPtr ca_set_sub(SetTermPtr s, SetTermPtr t);
CAtomPtr ca_card_eq(PAExprPtr k, PAExprPtr l);
CAtomPtr ca_card_lt(PAExprPtr k, PAExprPtr l);
// sugar, desugared exactly as the parser does
CAtomPtr ca_card_le(PAExprPtr k, PAExprPtr l);  // not (l < k)
CAtomPtr ca_card_ge(PAExprPtr k, PAExprPtr l);  // not (k < l)
CAtomPtr ca_card_gt(PAExprPtr k, PAExprPtr l);  // l < k
CAtomPtr ca_divides(long long n, PAExprPtr l);

// ---- rendering / structural identity ----

std::string render(const ConceptPtr& c);
std::string render(const SetTermPtr& s);
std::string render(const PAExprPtr& p);
std::string render(const CAtomPtr& a);

inline bool equal(const ConceptPtr& a, const ConceptPtr& b) { return render(a) == render(b); }
inline bool equal(const CAtomPtr& a, const CAtomPtr& b) { return render(a) == render(b); }

// True if the concept contains no Constr nodes (pure ALCSCC), resp. no Succ
// nodes (pure ALCSCC++).
bool has_constr(const ConceptPtr& c);
bool has_succ(const ConceptPtr& c);

// Nesting depth of sat/succ expressions (names have depth 0).
int constraint_depth(const ConceptPtr& c);

// ---- knowledge bases ----

struct ConceptAssertion {
  ConceptPtr c;
  std::string indiv;
};

struct RoleAssertion {
  std::string role, from, to;
  // Negated role assertions never come from the parser; they are produced
  // internally when spoiler KBs are merged in for query entailment.
  bool negated = false;
};

struct ConceptInclusion {
  ConceptPtr lhs, rhs;
};

// N_1|C_1| + ... + N_k|C_k| + M <= N_{k+1}|C_{k+1}| + ...
struct SemiRestrictedConstraint {
  std::vector<std::pair<long long, ConceptPtr>> lhs;
  long long offset = 0;  // M >= 0
  std::vector<std::pair<long long, ConceptPtr>> rhs;
};

// Positive boolean combination over constraint indices.
struct ErcNode {
  enum class K { Leaf, And, Or } kind = K::Leaf;
  int leaf = -1;
  std::vector<ErcNode> kids;
};

struct KnowledgeBase {
  std::vector<ConceptAssertion> conceptAssertions;
  std::vector<RoleAssertion> roleAssertions;
  std::vector<ConceptInclusion> tbox;
  std::vector<SemiRestrictedConstraint> ercConstraints;
  std::optional<ErcNode> erc;  // references ercConstraints
  CAtomPtr ec;                 // ECBox: boolean combo of cardinality atoms over concept sets
  ConceptPtr goal;             // satisfiability target, optional
};

struct Signature {
  std::set<std::string> concepts, roles, individuals;
};

Signature signature_of(const KnowledgeBase& kb);
void collect_names(const ConceptPtr& c, Signature& sig);
void collect_names(const CAtomPtr& a, Signature& sig);

// Name-category conventions: concepts start with an upper-case letter or '_',
// roles and individuals with a lower-case letter.  Throws std::runtime_error
// on a clash (an identifier used in incompatible positions).
void validate_kb(const KnowledgeBase& kb);

std::string render_kb(const KnowledgeBase& kb);

// ---- conjunctive queries ----

struct RoleAtom {
  std::string role, x, y;
};
struct ConceptAtom {
  std::string concept_, x;  // concept names only
};

struct ConjunctiveQuery {
  std::vector<std::string> vars;  // sorted, deduplicated
  std::vector<RoleAtom> roleAtoms;
  std::vector<ConceptAtom> conceptAtoms;

  int atom_count() const { return int(roleAtoms.size() + conceptAtoms.size()); }
};

std::string render_query(const ConjunctiveQuery& q);

}  // namespace carddl
