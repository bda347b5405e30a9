#pragma once

#include <map>
#include <optional>

#include "carddl/interpretation.hpp"
#include "carddl/oracle.hpp"

// Model transformations used to turn arbitrary finite models into locally
// acyclic ones: forward-unraveling (depth-bounded), k-loosening (unraveling
// with suffix blocking), S-duplication, and the cardinality repair that
// restores an ERCBox after loosening.

namespace carddl {

struct TransformLimits {
  long long maxElements = 200000;
};

// Interpretation whose elements are sequences over a base interpretation.
struct Unraveling {
  Interpretation I;
  std::vector<std::vector<int>> seqs;  // element -> base-element sequence

  int first(int e) const { return seqs.at(e).front(); }
  int last(int e) const { return seqs.at(e).back(); }
};

// Paths of length <= depth: named pairs keep their original edges, other
// edges extend a sequence by one base successor; concept membership is taken
// from the last element.
Unraveling unravel(const Interpretation& base, int depth, TransformLimits lim = {});

// Lazy unraveling with blocking: a sequence is k-blocked by a proper prefix
// at distance > k sharing its length-k suffix; minimally blocked sequences
// are identified with their (shortest) blocker.  Always finite.
Unraveling k_loosening(const Interpretation& base, int k, TransformLimits lim = {});

// Adds copies of elements with identical membership and outgoing edges.
Interpretation s_duplicate(const Interpretation& I,
                           const std::vector<std::pair<int, long long>>& S);

// Per-type element counts, a type being the membership bit vector over the
// given concept names.
std::map<std::vector<bool>, long long> type_counts(const Interpretation& I,
                                                   const std::vector<std::string>& conceptNames);

// Duplication plan that scales the base model's type counts by
// (1 + |domain of loose|) and tops each realized type up to the scaled count.
std::vector<std::pair<int, long long>> repair_ercbox(
    const Interpretation& loose, const std::vector<std::string>& conceptNames,
    const std::map<std::vector<bool>, long long>& baseCounts);

// Length of the shortest role cycle through some unnamed element.
std::optional<int> girth(const Interpretation& I);

// Forward-neighbourhood bisimilarity of d in I and e in J.
bool fb_bisimilar(const Interpretation& I, int d, const Interpretation& J, int e);

}  // namespace carddl
