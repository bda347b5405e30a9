#pragma once

#include <string>

#include "carddl/interpretation.hpp"

namespace carddl {

// {"domain":[labels], "concepts":{name:[labels]}, "roles":{name:[[a,b],...]},
// "individuals":{name:label}} — keys sorted, ids in domain order, pairs
// lexicographic; byte-stable for goldens.
std::string model_to_json(const Interpretation& I);
Interpretation model_from_json(const std::string& text);

}  // namespace carddl
