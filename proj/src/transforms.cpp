#include "carddl/transforms.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace carddl {

namespace {

std::set<int> named_elements(const Interpretation& I) {
  std::set<int> out;
  for (auto& [name, d] : I.individuals) out.insert(d);
  return out;
}

std::string seq_label(const Interpretation& base, const std::vector<int>& seq) {
  std::string s;
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i) s += ".";
    s += base.labels[seq[i]];
  }
  return s;
}

// roles labelling the base edge (a, b)
std::vector<std::string> edge_roles(const Interpretation& base, int a, int b) {
  std::vector<std::string> out;
  for (auto& [r, rel] : base.roles)
    if (rel.count({a, b})) out.push_back(r);
  return out;
}

struct Builder {
  const Interpretation& base;
  TransformLimits lim;
  Unraveling out;
  std::set<int> named;

  Builder(const Interpretation& b, TransformLimits l) : base(b), lim(l), named(named_elements(b)) {
    validate_interpretation(base);
  }

  int add_element(const std::vector<int>& seq) {
    if (static_cast<long long>(out.I.size()) >= lim.maxElements)
      throw ResourceLimitError("unraveling element cap exceeded");
    int id = out.I.size();
    out.I.labels.push_back(seq_label(base, seq));
    out.seqs.push_back(seq);
    int last = seq.back();
    for (auto& [name, ext] : base.concepts)
      if (ext.count(last)) out.I.concepts[name].insert(id);
    return id;
  }

  void init_roots() {
    for (auto& [name, ext] : base.concepts) out.I.concepts[name];
    for (auto& [name, rel] : base.roles) out.I.roles[name];
    for (int d = 0; d < base.size(); ++d) add_element({d});
    for (auto& [name, d] : base.individuals) out.I.individuals[name] = d;
    // original edges between named elements survive verbatim
    for (auto& [r, rel] : base.roles)
      for (auto& [a, b] : rel)
        if (named.count(a) && named.count(b)) out.I.roles[r].insert({a, b});
  }

  bool skip_child(const std::vector<int>& seq, int d) const {
    // sequences must not start with two named elements
    return seq.size() == 1 && named.count(seq[0]) && named.count(d);
  }
};

}  // namespace

Unraveling unravel(const Interpretation& base, int depth, TransformLimits lim) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  Builder b(base, lim);
  b.init_roots();
  std::deque<int> queue;
  for (int i = 0; i < b.out.I.size(); ++i) queue.push_back(i);
  while (!queue.empty()) {
    int w = queue.front();
    queue.pop_front();
    const std::vector<int> seq = b.out.seqs[w];
    if (int(seq.size()) >= depth) continue;
    int last = seq.back();
    for (int d = 0; d < base.size(); ++d) {
      auto roles = edge_roles(base, last, d);
      if (roles.empty() || b.skip_child(seq, d)) continue;
      std::vector<int> child = seq;
      child.push_back(d);
      int u = b.add_element(child);
      for (auto& r : roles) b.out.I.roles[r].insert({w, u});
      queue.push_back(u);
    }
  }
  return std::move(b.out);
}

namespace {

std::vector<int> suffix_k(const std::vector<int>& seq, int k) {
  if (int(seq.size()) <= k) return seq;
  return std::vector<int>(seq.end() - k, seq.end());
}

}  // namespace

Unraveling k_loosening(const Interpretation& base, int k, TransformLimits lim) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  Builder b(base, lim);
  b.init_roots();
  // parent chain to find blockers: parent[root] = -1
  std::vector<int> parent(b.out.I.size(), -1);
  std::deque<int> queue;
  for (int i = 0; i < b.out.I.size(); ++i) queue.push_back(i);
  while (!queue.empty()) {
    int w = queue.front();
    queue.pop_front();
    const std::vector<int> seq = b.out.seqs[w];
    int last = seq.back();
    for (int d = 0; d < base.size(); ++d) {
      auto roles = edge_roles(base, last, d);
      if (roles.empty() || b.skip_child(seq, d)) continue;
      std::vector<int> child = seq;
      child.push_back(d);
      // blocked by the shortest prefix at distance > k with equal k-suffix
      int blocker = -1;
      auto childSuf = suffix_k(child, k);
      for (int anc = w; anc >= 0; anc = parent[anc]) {
        if (int(child.size() - b.out.seqs[anc].size()) > k &&
            suffix_k(b.out.seqs[anc], k) == childSuf)
          blocker = anc;  // ancestors iterate long-to-short; keep the shortest
      }
      if (blocker >= 0) {
        for (auto& r : roles) b.out.I.roles[r].insert({w, blocker});
      } else {
        int u = b.add_element(child);
        parent.push_back(w);
        for (auto& r : roles) b.out.I.roles[r].insert({w, u});
        queue.push_back(u);
      }
    }
  }
  return std::move(b.out);
}

Interpretation s_duplicate(const Interpretation& I,
                           const std::vector<std::pair<int, long long>>& S) {
  validate_interpretation(I);
  Interpretation out = I;
  for (auto& [v, count] : S) {
    if (v < 0 || v >= I.size()) throw std::invalid_argument("duplicated element not in domain");
    if (count < 0) throw std::invalid_argument("copy count must be non-negative");
    for (long long i = 1; i <= count; ++i) {
      int id = out.size();
      out.labels.push_back(I.labels[v] + "_cpy" + std::to_string(i));
      for (auto& [name, ext] : I.concepts)
        if (ext.count(v)) out.concepts[name].insert(id);
      for (auto& [r, rel] : I.roles)
        for (auto& [a, bb] : rel)
          if (a == v) out.roles[r].insert({id, bb});
    }
  }
  return out;
}

std::map<std::vector<bool>, long long> type_counts(const Interpretation& I,
                                                   const std::vector<std::string>& conceptNames) {
  std::map<std::vector<bool>, long long> out;
  for (int d = 0; d < I.size(); ++d) {
    std::vector<bool> bits;
    bits.reserve(conceptNames.size());
    for (auto& c : conceptNames) bits.push_back(I.concept_ext(c).count(d) > 0);
    ++out[bits];
  }
  return out;
}

std::vector<std::pair<int, long long>> repair_ercbox(
    const Interpretation& loose, const std::vector<std::string>& conceptNames,
    const std::map<std::vector<bool>, long long>& baseCounts) {
  validate_interpretation(loose);
  auto looseCounts = type_counts(loose, conceptNames);
  const long long scale = 1 + loose.size();
  std::vector<std::pair<int, long long>> S;
  for (auto& [type, baseCount] : baseCounts) {
    if (baseCount <= 0) continue;
    long long target = scale * baseCount;
    auto it = looseCounts.find(type);
    if (it == looseCounts.end())
      throw std::invalid_argument("a required type is unrealized in the loosened model");
    // first element of that type is the duplication witness
    int witness = -1;
    for (int d = 0; d < loose.size() && witness < 0; ++d) {
      bool match = true;
      for (size_t c = 0; c < conceptNames.size() && match; ++c)
        if ((loose.concept_ext(conceptNames[c]).count(d) > 0) != type[c]) match = false;
      if (match) witness = d;
    }
    long long missing = target - it->second;
    if (missing > 0) S.emplace_back(witness, missing);
  }
  return S;
}

std::optional<int> girth(const Interpretation& I) {
  validate_interpretation(I);
  int n = I.size();
  std::vector<std::vector<int>> adj(n);
  for (auto& [r, rel] : I.roles)
    for (auto& [a, b] : rel) adj[a].push_back(b);
  auto named = named_elements(I);
  std::optional<int> best;
  for (int v = 0; v < n; ++v) {
    if (named.count(v)) continue;
    // shortest directed path from v back to v
    std::vector<int> dist(n, -1);
    std::deque<int> queue;
    for (int s : adj[v]) {
      if (s == v) {
        if (!best || 1 < *best) best = 1;
        continue;
      }
      if (dist[s] < 0) {
        dist[s] = 1;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      for (int y : adj[x]) {
        if (y == v) {
          int len = dist[x] + 1;
          if (!best || len < *best) best = len;
          continue;
        }
        if (dist[y] < 0) {
          dist[y] = dist[x] + 1;
          queue.push_back(y);
        }
      }
    }
  }
  return best;
}

namespace {

// signature of a successor: concept memberships plus the roles connecting it
// to the root
std::string succ_signature(const Interpretation& I, int root, int s) {
  std::string sig;
  for (auto& [name, ext] : I.concepts)
    if (ext.count(s)) sig += name + ";";
  sig += "|";
  for (auto& [r, rel] : I.roles)
    if (rel.count({root, s})) sig += r + ";";
  return sig;
}

}  // namespace

bool fb_bisimilar(const Interpretation& I, int d, const Interpretation& J, int e) {
  validate_interpretation(I);
  validate_interpretation(J);
  if (d < 0 || d >= I.size() || e < 0 || e >= J.size())
    throw std::invalid_argument("element out of range");
  // roots carry the same concept names
  std::set<std::string> names;
  for (auto& [n, ext] : I.concepts) names.insert(n);
  for (auto& [n, ext] : J.concepts) names.insert(n);
  for (auto& n : names)
    if ((I.concept_ext(n).count(d) > 0) != (J.concept_ext(n).count(e) > 0)) return false;
  // successor multisets match by signature
  std::map<std::string, int> sigCount;
  for (int s : ars(I, d)) ++sigCount[succ_signature(I, d, s)];
  for (int s : ars(J, e)) --sigCount[succ_signature(J, e, s)];
  for (auto& [sig, c] : sigCount)
    if (c != 0) return false;
  return true;
}

}  // namespace carddl
