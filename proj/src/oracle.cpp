#include "carddl/oracle.hpp"

#include <algorithm>
#include <bit>
#include <map>

#include "carddl/linear.hpp"

// Two enumeration strategies.  When every concept in the KB has succ-depth
// <= 1 (and no sat expressions), an element's constraints depend only on the
// concept extensions and its own outgoing edges, so role configurations are
// enumerated per element and combined as a cross product.  Otherwise a full
// enumeration over all role relations runs with tight size caps.

namespace carddl {

namespace {

struct Names {
  std::vector<std::string> concepts, roles, inds;
  std::map<std::string, int> conceptIdx, roleIdx;
};

Names gather(const KnowledgeBase& kb, const Signature& extra) {
  Signature sig = signature_of(kb);
  sig.concepts.insert(extra.concepts.begin(), extra.concepts.end());
  sig.roles.insert(extra.roles.begin(), extra.roles.end());
  sig.individuals.insert(extra.individuals.begin(), extra.individuals.end());
  Names n;
  n.concepts.assign(sig.concepts.begin(), sig.concepts.end());
  n.roles.assign(sig.roles.begin(), sig.roles.end());
  n.inds.assign(sig.individuals.begin(), sig.individuals.end());
  for (size_t i = 0; i < n.concepts.size(); ++i) n.conceptIdx[n.concepts[i]] = int(i);
  for (size_t i = 0; i < n.roles.size(); ++i) n.roleIdx[n.roles[i]] = int(i);
  return n;
}

bool name_only(const ConceptPtr& c) { return c->kind == CK::Name; }

bool factorable(const KnowledgeBase& kb) {
  auto ok = [](const ConceptPtr& c) { return !has_constr(c) && constraint_depth(c) <= 1; };
  for (auto& ci : kb.tbox)
    if (!ok(ci.lhs) || !ok(ci.rhs)) return false;
  for (auto& a : kb.conceptAssertions)
    if (!ok(a.c)) return false;
  for (auto& c : kb.ercConstraints) {
    for (auto& [n, cc] : c.lhs)
      if (!name_only(cc)) return false;
    for (auto& [n, cc] : c.rhs)
      if (!name_only(cc)) return false;
  }
  if (kb.ec) return false;  // rare; handled by the full path
  return true;
}

struct Budget {
  long long left;
  void spend(long long units = 1) {
    left -= units;
    if (left < 0) throw ResourceLimitError("model enumeration budget exhausted");
  }
};

// ---- micro evaluator for succ-depth-1 concepts over bitmask models ----

struct Micro {
  const Names& names;
  int n;
  const std::vector<uint32_t>& typeBits;     // per element: concept membership mask
  std::vector<uint32_t> extMask;             // per concept: element mask

  Micro(const Names& nm, int n_, const std::vector<uint32_t>& tb) : names(nm), n(n_), typeBits(tb) {
    extMask.assign(names.concepts.size(), 0);
    for (int e = 0; e < n; ++e)
      for (size_t c = 0; c < names.concepts.size(); ++c)
        if (typeBits[e] >> c & 1) extMask[c] |= 1u << e;
  }

  uint32_t succ_of(uint64_t cfg, int role) const {
    return uint32_t(cfg >> (role * n)) & ((1u << n) - 1);
  }

  uint32_t set_eval(const SetTermPtr& s, uint64_t cfg, uint32_t univ) const {
    switch (s->kind) {
      case SK::Empty:
        return 0;
      case SK::Universe:
        return univ;
      case SK::Role:
        return succ_of(cfg, names.roleIdx.at(s->name));
      case SK::ConceptV:
        return extMask[names.conceptIdx.at(s->concept_->name)] & univ;
      case SK::Indiv:
        throw std::invalid_argument("individual variable in a concept constraint");
      case SK::Union:
        return set_eval(s->kids[0], cfg, univ) | set_eval(s->kids[1], cfg, univ);
      case SK::Inter:
        return set_eval(s->kids[0], cfg, univ) & set_eval(s->kids[1], cfg, univ);
      case SK::Complement:
        return univ & ~set_eval(s->kids[0], cfg, univ);
    }
    throw std::logic_error("unreachable");
  }

  long long pa_eval(const PAExprPtr& p, uint64_t cfg, uint32_t univ) const {
    switch (p->kind) {
      case PK::IntConst:
        return p->value;
      case PK::Card:
        return std::popcount(set_eval(p->set, cfg, univ));
      case PK::Sum:
        return pa_eval(p->kids[0], cfg, univ) + pa_eval(p->kids[1], cfg, univ);
      case PK::ScalarMul:
        return p->value * pa_eval(p->kids[0], cfg, univ);
    }
    throw std::logic_error("unreachable");
  }

  bool atom_eval(const CAtomPtr& a, uint64_t cfg, uint32_t univ) const {
    switch (a->kind) {
      case AK::And:
        for (auto& k : a->kids)
          if (!atom_eval(k, cfg, univ)) return false;
        return true;
      case AK::Or:
        for (auto& k : a->kids)
          if (atom_eval(k, cfg, univ)) return true;
        return false;
      case AK::Not:
        return !atom_eval(a->kids[0], cfg, univ);
      case AK::SetEq:
        return set_eval(a->s, cfg, univ) == set_eval(a->t, cfg, univ);
      case AK::SetSub:
        return (set_eval(a->s, cfg, univ) & ~set_eval(a->t, cfg, univ)) == 0;
      case AK::CardEq:
        return pa_eval(a->k, cfg, univ) == pa_eval(a->l, cfg, univ);
      case AK::CardLt:
        return pa_eval(a->k, cfg, univ) < pa_eval(a->l, cfg, univ);
      case AK::Divides:
        return pa_eval(a->l, cfg, univ) % a->divisor == 0;
    }
    throw std::logic_error("unreachable");
  }

  // membership of element e under outgoing configuration cfg
  bool holds(const ConceptPtr& c, int e, uint64_t cfg) const {
    switch (c->kind) {
      case CK::Name:
        return typeBits[e] >> names.conceptIdx.at(c->name) & 1;
      case CK::And:
        for (auto& k : c->kids)
          if (!holds(k, e, cfg)) return false;
        return true;
      case CK::Or:
        for (auto& k : c->kids)
          if (holds(k, e, cfg)) return true;
        return false;
      case CK::Not:
        return !holds(c->kids[0], e, cfg);
      case CK::Succ: {
        uint32_t univ = 0;
        for (size_t r = 0; r < names.roles.size(); ++r) univ |= succ_of(cfg, int(r));
        return atom_eval(c->constr, cfg, univ);
      }
      case CK::Constr:
        throw std::logic_error("sat expression on the factored oracle path");
    }
    throw std::logic_error("unreachable");
  }
};

bool erc_ok(const KnowledgeBase& kb, const Names& names, const std::vector<uint32_t>& extMask) {
  if (!kb.erc) return true;
  auto count = [&](const std::vector<std::pair<long long, ConceptPtr>>& terms) {
    long long acc = 0;
    for (auto& [n, c] : terms) acc += n * std::popcount(extMask[names.conceptIdx.at(c->name)]);
    return acc;
  };
  std::function<bool(const ErcNode&)> ev = [&](const ErcNode& node) -> bool {
    switch (node.kind) {
      case ErcNode::K::Leaf: {
        const auto& c = kb.ercConstraints[node.leaf];
        return count(c.lhs) + c.offset <= count(c.rhs);
      }
      case ErcNode::K::And:
        for (auto& k : node.kids)
          if (!ev(k)) return false;
        return true;
      case ErcNode::K::Or:
        for (auto& k : node.kids)
          if (ev(k)) return true;
        return false;
    }
    throw std::logic_error("unreachable");
  };
  return ev(*kb.erc);
}

Interpretation assemble(const Names& names, int n, const std::vector<uint32_t>& typeBits,
                        const std::vector<int>& indMap, const std::vector<uint64_t>& cfgs) {
  Interpretation I;
  for (int e = 0; e < n; ++e) I.labels.push_back("e" + std::to_string(e));
  for (size_t c = 0; c < names.concepts.size(); ++c) {
    auto& ext = I.concepts[names.concepts[c]];
    for (int e = 0; e < n; ++e)
      if (typeBits[e] >> c & 1) ext.insert(e);
  }
  for (size_t r = 0; r < names.roles.size(); ++r) {
    auto& rel = I.roles[names.roles[r]];
    for (int e = 0; e < n; ++e) {
      uint32_t succ = uint32_t(cfgs[e] >> (r * n)) & ((1u << n) - 1);
      for (int t = 0; t < n; ++t)
        if (succ >> t & 1) rel.insert({e, t});
    }
  }
  for (size_t i = 0; i < names.inds.size(); ++i) I.individuals[names.inds[i]] = indMap[i];
  return I;
}

bool factored_enumerate(const KnowledgeBase& kb, const Names& names, int maxSize, Budget& budget,
                        const std::function<bool(const Interpretation&)>& visit) {
  const int m = int(names.concepts.size());
  const int nr = int(names.roles.size());
  for (int n = 1; n <= maxSize; ++n) {
    if (n > 6 || n * nr > 24 || n * m > 24)
      throw ResourceLimitError("factored enumeration size cap exceeded");
    const uint64_t extTotal = 1ull << (n * m);
    const uint64_t cfgTotal = 1ull << (n * nr);
    std::vector<uint32_t> typeBits(n, 0);
    for (uint64_t extCode = 0; extCode < extTotal; ++extCode) {
      budget.spend();
      // element 0 owns the most significant bits: lexicographic in
      // (typeBits[0], typeBits[1], ...)
      for (int e = 0; e < n; ++e)
        typeBits[e] = uint32_t(extCode >> ((n - 1 - e) * m)) & ((1u << m) - 1);
      Micro micro(names, n, typeBits);
      if (!erc_ok(kb, names, micro.extMask)) continue;

      // per-type feasible configurations for elements without assertions
      std::map<uint32_t, std::vector<uint64_t>> plainCfg;
      auto plain_configs = [&](uint32_t tb) -> const std::vector<uint64_t>& {
        auto it = plainCfg.find(tb);
        if (it != plainCfg.end()) return it->second;
        std::vector<uint64_t> out;
        int e = -1;
        for (int i = 0; i < n; ++i)
          if (typeBits[i] == tb) e = i;
        for (uint64_t cfg = 0; cfg < cfgTotal; ++cfg) {
          budget.spend();
          bool ok = true;
          for (auto& ci : kb.tbox)
            if (micro.holds(ci.lhs, e, cfg) && !micro.holds(ci.rhs, e, cfg)) {
              ok = false;
              break;
            }
          if (ok) out.push_back(cfg);
        }
        return plainCfg.emplace(tb, std::move(out)).first->second;
      };

      const int ni = int(names.inds.size());
      std::vector<int> indMap(ni, 0);
      while (true) {
        budget.spend();
        // forced edges per element from role assertions
        std::vector<uint64_t> forced(n, 0), forbidden(n, 0);
        bool mapOk = true;
        std::map<std::string, int> indOf;
        for (int i = 0; i < ni; ++i) indOf[names.inds[i]] = indMap[i];
        for (auto& ra : kb.roleAssertions) {
          int a = indOf.at(ra.from), b = indOf.at(ra.to);
          uint64_t bit = 1ull << (names.roleIdx.at(ra.role) * n + b);
          (ra.negated ? forbidden : forced)[a] |= bit;
        }
        for (int e = 0; e < n && mapOk; ++e)
          if (forced[e] & forbidden[e]) mapOk = false;
        if (mapOk) {
          // which elements carry assertions?
          std::vector<std::vector<const ConceptPtr*>> asserted(n);
          for (auto& ca : kb.conceptAssertions) asserted[indOf.at(ca.indiv)].push_back(&ca.c);
          std::vector<const std::vector<uint64_t>*> lists(n);
          std::vector<std::vector<uint64_t>> special(n);
          bool feasible = true;
          for (int e = 0; e < n && feasible; ++e) {
            if (asserted[e].empty() && !forced[e] && !forbidden[e]) {
              lists[e] = &plain_configs(typeBits[e]);
            } else {
              for (uint64_t cfg = 0; cfg < cfgTotal; ++cfg) {
                budget.spend();
                if ((cfg & forced[e]) != forced[e] || (cfg & forbidden[e])) continue;
                bool ok = true;
                for (auto& ci : kb.tbox)
                  if (micro.holds(ci.lhs, e, cfg) && !micro.holds(ci.rhs, e, cfg)) {
                    ok = false;
                    break;
                  }
                for (auto* c : asserted[e])
                  if (ok && !micro.holds(*c, e, cfg)) ok = false;
                if (ok) special[e].push_back(cfg);
              }
              lists[e] = &special[e];
            }
            if (lists[e]->empty()) feasible = false;
          }
          if (feasible) {
            // odometer over per-element configuration lists
            std::vector<size_t> pick(n, 0);
            while (true) {
              budget.spend();
              std::vector<uint64_t> cfgs(n);
              for (int e = 0; e < n; ++e) cfgs[e] = (*lists[e])[pick[e]];
              Interpretation I = assemble(names, n, typeBits, indMap, cfgs);
              if (!visit(I)) return false;
              int e = n - 1;
              while (e >= 0 && ++pick[e] == lists[e]->size()) pick[e--] = 0;
              if (e < 0) break;
            }
          }
        }
        int i = ni - 1;
        while (i >= 0 && ++indMap[i] == n) indMap[i--] = 0;
        if (i < 0) break;
      }
    }
  }
  return true;
}

bool full_enumerate(const KnowledgeBase& kb, const Names& names, int maxSize, Budget& budget,
                    const std::function<bool(const Interpretation&)>& visit) {
  const int m = int(names.concepts.size());
  const int nr = int(names.roles.size());
  for (int n = 1; n <= maxSize; ++n) {
    if (n * m > 16 || n * n * nr > 18)
      throw ResourceLimitError("full enumeration size cap exceeded");
    const uint64_t extTotal = 1ull << (n * m);
    const uint64_t relTotal = 1ull << (n * n * nr);
    const int ni = int(names.inds.size());
    std::vector<uint32_t> typeBits(n);
    for (uint64_t extCode = 0; extCode < extTotal; ++extCode) {
      for (int e = 0; e < n; ++e)
        typeBits[e] = uint32_t(extCode >> ((n - 1 - e) * m)) & ((1u << m) - 1);
      for (uint64_t rel = 0; rel < relTotal; ++rel) {
        std::vector<int> indMap(ni, 0);
        while (true) {
          budget.spend(4);
          Interpretation I;
          for (int e = 0; e < n; ++e) I.labels.push_back("e" + std::to_string(e));
          for (int c = 0; c < m; ++c) {
            auto& ext = I.concepts[names.concepts[c]];
            for (int e = 0; e < n; ++e)
              if (typeBits[e] >> c & 1) ext.insert(e);
          }
          for (int r = 0; r < nr; ++r) {
            auto& rr = I.roles[names.roles[r]];
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b)
                if (rel >> (uint64_t(r) * n * n + uint64_t(a) * n + b) & 1) rr.insert({a, b});
          }
          for (int i = 0; i < ni; ++i) I.individuals[names.inds[i]] = indMap[i];
          if (satisfies(I, kb).satisfied) {
            if (!visit(I)) return false;
          }
          int i = ni - 1;
          while (i >= 0 && ++indMap[i] == n) indMap[i--] = 0;
          if (i < 0) break;
        }
      }
    }
  }
  return true;
}

}  // namespace

void for_each_model(const KnowledgeBase& kb, int maxSize,
                    const std::function<bool(const Interpretation&)>& visit,
                    const Signature& extra, OracleLimits lim) {
  if (maxSize < 1) throw std::invalid_argument("maxSize must be >= 1");
  Names names = gather(kb, extra);
  Budget budget{lim.maxSteps};
  if (factorable(kb))
    factored_enumerate(kb, names, maxSize, budget, visit);
  else
    full_enumerate(kb, names, maxSize, budget, visit);
}

std::optional<Interpretation> first_model(const KnowledgeBase& kb, int maxSize,
                                          const Signature& extra, OracleLimits lim) {
  std::optional<Interpretation> out;
  for_each_model(
      kb, maxSize,
      [&](const Interpretation& I) {
        out = I;
        return false;
      },
      extra, lim);
  return out;
}

bool no_model(const KnowledgeBase& kb, int maxSize, const Signature& extra, OracleLimits lim) {
  return !first_model(kb, maxSize, extra, lim).has_value();
}

long long count_models(const KnowledgeBase& kb, int maxSize, long long cap, const Signature& extra,
                       OracleLimits lim) {
  long long count = 0;
  for_each_model(
      kb, maxSize,
      [&](const Interpretation&) {
        ++count;
        return count < cap;
      },
      extra, lim);
  return count;
}

}  // namespace carddl
