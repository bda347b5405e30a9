#pragma once

#include <functional>
#include <optional>

#include "carddl/ast.hpp"
#include "carddl/interpretation.hpp"

namespace carddl {

struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleLimits {
  long long maxSteps = 200'000'000;
};

// Enumerates every model of kb with |domain| <= maxSize, domain sizes
// ascending, then concept extensions, individual maps and role
// configurations in lexicographic order.  The visitor returns false to stop
// early.  extra widens the signature (names the KB itself does not mention).
// Throws ResourceLimitError when the step budget is exhausted, so an
// uninterrupted return means the enumeration was complete.
void for_each_model(const KnowledgeBase& kb, int maxSize,
                    const std::function<bool(const Interpretation&)>& visit,
                    const Signature& extra = {}, OracleLimits lim = {});

std::optional<Interpretation> first_model(const KnowledgeBase& kb, int maxSize,
                                          const Signature& extra = {}, OracleLimits lim = {});
bool no_model(const KnowledgeBase& kb, int maxSize, const Signature& extra = {},
              OracleLimits lim = {});
long long count_models(const KnowledgeBase& kb, int maxSize, long long cap,
                       const Signature& extra = {}, OracleLimits lim = {});

}  // namespace carddl
