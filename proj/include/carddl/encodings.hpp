#pragma once

#include "carddl/ast.hpp"

namespace carddl {

// Constraint-expression encodings of features ALCSCC lacks.  Conjoining the
// returned concept to a satisfiable goal forces the stated property in every
// model.

// |A| = 1
ConceptPtr encode_nominal(const std::string& conceptName);
// u is interpreted as the universal relation
ConceptPtr encode_universal_role(const std::string& u);
// rc is interpreted as the complement of r
ConceptPtr encode_role_negation(const std::string& r, const std::string& rc);
// t is interpreted as the intersection of r and s
ConceptPtr encode_role_conjunction(const std::string& t, const std::string& r,
                                   const std::string& s);

// ECBox as a boolean combination of globally evaluated constraint expressions.
ConceptPtr ecbox_to_concept(const CAtomPtr& ec);

// Rewrite succ expressions into globally evaluated constraints: concept set
// variables C become C ∩ (r_1 ∪ ... ∪ r_n) and the universe becomes the role
// union, for the given role signature.
ConceptPtr scc_to_pp(const ConceptPtr& c, const std::vector<std::string>& roles);

}  // namespace carddl
