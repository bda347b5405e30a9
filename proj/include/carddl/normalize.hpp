#pragma once

#include <map>

#include "carddl/ast.hpp"

namespace carddl {

struct NormalizeResult {
  KnowledgeBase kb;
  // fresh name -> the original (fully unfolded) concept it abbreviates
  std::map<std::string, ConceptPtr> nameMap;
};

// Equisatisfiable rewriting: every TBox concept ends up with sat/succ
// nesting depth <= 1 and every ABox / ERCBox concept becomes a concept name.
// Fresh names are defined by concept inclusions in both directions.
NormalizeResult normalize_kb(const KnowledgeBase& kb);

}  // namespace carddl
