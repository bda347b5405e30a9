#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "carddl/ast.hpp"

namespace carddl {

// Explicit finite interpretation.  Elements are 0..size-1 with stable string
// labels used by the JSON format.
struct Interpretation {
  std::vector<std::string> labels;
  std::map<std::string, std::set<int>> concepts;
  std::map<std::string, std::set<std::pair<int, int>>> roles;
  std::map<std::string, int> individuals;

  int size() const { return int(labels.size()); }

  const std::set<int>& concept_ext(const std::string& name) const;
  std::set<int> role_succ(const std::string& role, int d) const;
};

// Throws std::invalid_argument if the interpretation breaks its invariants
// (empty domain, extensions outside the domain, dangling individuals).
void validate_interpretation(const Interpretation& I);

// All role successors of d.
std::set<int> ars(const Interpretation& I, int d);

// Unified evaluator: sat(...) constraints are evaluated globally, succ(...)
// constraints over the element's role successors.
std::set<int> eval_concept(const Interpretation& I, const ConceptPtr& c);
// Dialect-checked variants.
std::set<int> eval_pp(const Interpretation& I, const ConceptPtr& c);   // rejects succ
std::set<int> eval_scc(const Interpretation& I, const ConceptPtr& c);  // rejects sat

struct SatisfactionReport {
  bool satisfied = true;
  std::vector<std::string> violations;
};

SatisfactionReport satisfies(const Interpretation& I, const KnowledgeBase& kb);

// Backtracking match search; nullopt when no match exists.
std::optional<std::map<std::string, int>> cq_match(const Interpretation& I,
                                                   const ConjunctiveQuery& q);

}  // namespace carddl
