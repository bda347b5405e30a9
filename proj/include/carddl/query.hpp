#pragma once

#include <map>
#include <optional>

#include "carddl/ast.hpp"
#include "carddl/config.hpp"
#include "carddl/interpretation.hpp"

// Conjunctive query entailment via fork rewritings, splittings, rolled-up
// concepts and super-spoiler enumeration reduced to consistency checks.

namespace carddl::query {

struct Splitting {
  std::vector<std::string> R, T;
  std::vector<std::vector<std::string>> S;  // tree-shaped subqueries
  std::vector<std::string> roots;           // root variable of each S_i
  std::vector<std::string> mu;              // S_i -> variable in R
  std::map<std::string, std::string> nu;    // R variable -> individual
};

struct SpoilerClause {
  enum class K { TreeKill, ConceptDenial, RoleDenial, AttachDenial } kind = K::TreeKill;
  ConceptPtr concept_;           // TreeKill: rolled tree; AttachDenial: attachment concept
  std::string indiv;             // denials
  std::string role, from, to;    // RoleDenial

  std::string key() const;
};

struct Spoiler {
  std::vector<SpoilerClause> clauses;  // sorted by key

  std::string key() const;
};

// Rewritings obtained by identifying the two parents of a shared child.
std::vector<std::pair<ConjunctiveQuery, std::pair<std::string, std::string>>> fork_eliminations(
    const ConjunctiveQuery& q);
// Closure of {q} under fork elimination, canonical up to variable renaming.
std::vector<ConjunctiveQuery> fork_rewritings(const ConjunctiveQuery& q, long long cap = 20000);
ConjunctiveQuery maximal_fork_rewriting(const ConjunctiveQuery& q);
// Canonical form up to variable renaming (used for confluence checks).
std::string canonical_query(const ConjunctiveQuery& q);

std::vector<Splitting> splittings(const ConjunctiveQuery& q, const KnowledgeBase& kb);

// Tree-shaped query to a concept whose instances are the match images of the
// root; role-intersection existentials become succ cardinality atoms.
ConceptPtr roll_up(const ConjunctiveQuery& qTree, const std::string& root);

// Minimal clause sets spoiling every (fork rewriting, splitting) pair.
std::vector<Spoiler> super_spoilers(const ConjunctiveQuery& q, const KnowledgeBase& kb,
                                    long long cap = 20000);

enum class Entailment { Entailed, NotEntailed, ResourceExceeded };

struct EntailResult {
  Entailment verdict = Entailment::Entailed;
  std::optional<Spoiler> spoiler;            // witness for NotEntailed
  std::optional<Interpretation> countermodel;  // satisfies kb, admits no match
};

EntailResult entails(const KnowledgeBase& kb, const ConjunctiveQuery& q,
                     const RunConfig& cfg = {});

}  // namespace carddl::query
