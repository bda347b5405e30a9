#include "carddl/interpretation.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "carddl/linear.hpp"

namespace carddl {

const std::set<int>& Interpretation::concept_ext(const std::string& name) const {
  static const std::set<int> empty;
  auto it = concepts.find(name);
  return it == concepts.end() ? empty : it->second;
}

std::set<int> Interpretation::role_succ(const std::string& role, int d) const {
  std::set<int> out;
  auto it = roles.find(role);
  if (it == roles.end()) return out;
  for (auto& [a, b] : it->second)
    if (a == d) out.insert(b);
  return out;
}

void validate_interpretation(const Interpretation& I) {
  if (I.labels.empty()) throw std::invalid_argument("interpretation domain must be non-empty");
  int n = I.size();
  for (auto& [name, ext] : I.concepts)
    for (int d : ext)
      if (d < 0 || d >= n) throw std::invalid_argument("concept extension outside domain");
  for (auto& [name, rel] : I.roles)
    for (auto& [a, b] : rel)
      if (a < 0 || a >= n || b < 0 || b >= n)
        throw std::invalid_argument("role pair outside domain");
  for (auto& [name, d] : I.individuals)
    if (d < 0 || d >= n) throw std::invalid_argument("individual outside domain");
}

std::set<int> ars(const Interpretation& I, int d) {
  if (d < 0 || d >= I.size()) throw std::invalid_argument("unknown element");
  std::set<int> out;
  for (auto& [r, rel] : I.roles)
    for (auto& [a, b] : rel)
      if (a == d) out.insert(b);
  return out;
}

namespace {

struct Evaluator {
  const Interpretation& I;
  std::map<std::string, std::set<int>> cache;  // render(concept) -> extension
  std::set<int> domain;

  explicit Evaluator(const Interpretation& I_) : I(I_) {
    for (int i = 0; i < I.size(); ++i) domain.insert(i);
  }

  const std::set<int>& ext(const ConceptPtr& c) {
    std::string key = render(c);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::set<int> out;
    switch (c->kind) {
      case CK::Name:
        out = I.concept_ext(c->name);
        break;
      case CK::And: {
        out = ext(c->kids[0]);
        for (size_t i = 1; i < c->kids.size(); ++i) {
          const auto& k = ext(c->kids[i]);
          std::set<int> tmp;
          for (int d : out)
            if (k.count(d)) tmp.insert(d);
          out = std::move(tmp);
        }
        break;
      }
      case CK::Or: {
        out = ext(c->kids[0]);
        for (size_t i = 1; i < c->kids.size(); ++i) {
          const auto& k = ext(c->kids[i]);
          out.insert(k.begin(), k.end());
        }
        break;
      }
      case CK::Not: {
        const auto& k = ext(c->kids[0]);
        for (int d : domain)
          if (!k.count(d)) out.insert(d);
        break;
      }
      case CK::Constr:
      case CK::Succ: {
        bool local = c->kind == CK::Succ;
        for (int d : domain)
          if (atom_holds(c->constr, d, local)) out.insert(d);
        break;
      }
    }
    return cache.emplace(std::move(key), std::move(out)).first->second;
  }

  std::set<int> set_eval(const SetTermPtr& s, int d, bool local, const std::set<int>& univ) {
    switch (s->kind) {
      case SK::Empty:
        return {};
      case SK::Universe:
        return univ;
      case SK::Role:
        return I.role_succ(s->name, d);
      case SK::Indiv:
        throw std::invalid_argument("individual set variables cannot be evaluated on concepts");
      case SK::ConceptV: {
        std::set<int> e = ext(s->concept_);
        if (!local) return e;
        std::set<int> out;
        for (int x : e)
          if (univ.count(x)) out.insert(x);
        return out;
      }
      case SK::Union: {
        auto a = set_eval(s->kids[0], d, local, univ);
        auto b = set_eval(s->kids[1], d, local, univ);
        a.insert(b.begin(), b.end());
        return a;
      }
      case SK::Inter: {
        auto a = set_eval(s->kids[0], d, local, univ);
        auto b = set_eval(s->kids[1], d, local, univ);
        std::set<int> out;
        for (int x : a)
          if (b.count(x)) out.insert(x);
        return out;
      }
      case SK::Complement: {
        auto a = set_eval(s->kids[0], d, local, univ);
        std::set<int> out;
        for (int x : univ)
          if (!a.count(x)) out.insert(x);
        return out;
      }
    }
    throw std::logic_error("unreachable");
  }

  Int pa_eval(const PAExprPtr& p, int d, bool local, const std::set<int>& univ) {
    switch (p->kind) {
      case PK::IntConst:
        return Int(p->value);
      case PK::Card:
        return Int(set_eval(p->set, d, local, univ).size());
      case PK::Sum:
        return pa_eval(p->kids[0], d, local, univ) + pa_eval(p->kids[1], d, local, univ);
      case PK::ScalarMul:
        return Int(p->value) * pa_eval(p->kids[0], d, local, univ);
    }
    throw std::logic_error("unreachable");
  }

  bool atom_eval(const CAtomPtr& a, int d, bool local, const std::set<int>& univ) {
    switch (a->kind) {
      case AK::And:
        for (auto& k : a->kids)
          if (!atom_eval(k, d, local, univ)) return false;
        return true;
      case AK::Or:
        for (auto& k : a->kids)
          if (atom_eval(k, d, local, univ)) return true;
        return false;
      case AK::Not:
        return !atom_eval(a->kids[0], d, local, univ);
      case AK::SetEq:
        return set_eval(a->s, d, local, univ) == set_eval(a->t, d, local, univ);
      case AK::SetSub: {
        auto x = set_eval(a->s, d, local, univ);
        auto y = set_eval(a->t, d, local, univ);
        return std::includes(y.begin(), y.end(), x.begin(), x.end());
      }
      case AK::CardEq:
        return pa_eval(a->k, d, local, univ) == pa_eval(a->l, d, local, univ);
      case AK::CardLt:
        return pa_eval(a->k, d, local, univ) < pa_eval(a->l, d, local, univ);
      case AK::Divides:
        return pa_eval(a->l, d, local, univ) % a->divisor == 0;
    }
    throw std::logic_error("unreachable");
  }

  bool atom_holds(const CAtomPtr& a, int d, bool local) {
    std::set<int> univ = local ? ars(I, d) : domain;
    return atom_eval(a, d, local, univ);
  }
};

}  // namespace

std::set<int> eval_concept(const Interpretation& I, const ConceptPtr& c) {
  validate_interpretation(I);
  Evaluator ev(I);
  return ev.ext(c);
}

std::set<int> eval_pp(const Interpretation& I, const ConceptPtr& c) {
  if (has_succ(c)) throw std::invalid_argument("succ expression in an ALCSCC++ evaluation");
  return eval_concept(I, c);
}

std::set<int> eval_scc(const Interpretation& I, const ConceptPtr& c) {
  if (has_constr(c)) throw std::invalid_argument("sat expression in an ALCSCC evaluation");
  return eval_concept(I, c);
}

namespace {

Int erc_side(Evaluator& ev, const std::vector<std::pair<long long, ConceptPtr>>& terms) {
  Int acc = 0;
  for (auto& [n, c] : terms) acc += Int(n) * Int(ev.ext(c).size());
  return acc;
}

bool erc_holds(Evaluator& ev, const KnowledgeBase& kb, const ErcNode& n) {
  switch (n.kind) {
    case ErcNode::K::Leaf: {
      const auto& c = kb.ercConstraints[n.leaf];
      Int lhs = erc_side(ev, c.lhs) + c.offset;
      Int rhs = erc_side(ev, c.rhs);
      return lhs <= rhs;
    }
    case ErcNode::K::And:
      for (auto& k : n.kids)
        if (!erc_holds(ev, kb, k)) return false;
      return true;
    case ErcNode::K::Or:
      for (auto& k : n.kids)
        if (erc_holds(ev, kb, k)) return true;
      return false;
  }
  throw std::logic_error("unreachable");
}

std::string erc_text(const KnowledgeBase& kb, const ErcNode& n) {
  KnowledgeBase tmp;
  tmp.ercConstraints = kb.ercConstraints;
  tmp.erc = n;
  std::string s = render_kb(tmp);
  // strip "erc: " prefix and trailing newline
  return s.substr(5, s.size() - 6);
}

}  // namespace

SatisfactionReport satisfies(const Interpretation& I, const KnowledgeBase& kb) {
  validate_interpretation(I);
  SatisfactionReport rep;
  Evaluator ev(I);
  auto violate = [&](const std::string& what) {
    rep.satisfied = false;
    rep.violations.push_back(what);
  };
  for (auto& ci : kb.tbox) {
    const auto& l = ev.ext(ci.lhs);
    const auto& r = ev.ext(ci.rhs);
    if (!std::includes(r.begin(), r.end(), l.begin(), l.end()))
      violate("tbox: " + render(ci.lhs) + " <= " + render(ci.rhs));
  }
  for (auto& a : kb.conceptAssertions) {
    auto it = I.individuals.find(a.indiv);
    if (it == I.individuals.end()) {
      violate("abox: individual " + a.indiv + " not interpreted");
      continue;
    }
    if (!ev.ext(a.c).count(it->second)) violate("abox: " + render(a.c) + "(" + a.indiv + ")");
  }
  for (auto& r : kb.roleAssertions) {
    auto ia = I.individuals.find(r.from);
    auto ib = I.individuals.find(r.to);
    if (ia == I.individuals.end() || ib == I.individuals.end()) {
      violate("abox: individual in " + r.role + "(" + r.from + ", " + r.to + ") not interpreted");
      continue;
    }
    bool has = false;
    auto rel = I.roles.find(r.role);
    if (rel != I.roles.end()) has = rel->second.count({ia->second, ib->second}) > 0;
    if (has == r.negated)
      violate("abox: " + std::string(r.negated ? "not " : "") + r.role + "(" + r.from + ", " +
              r.to + ")");
  }
  if (kb.erc && !erc_holds(ev, kb, *kb.erc)) violate("erc: " + erc_text(kb, *kb.erc));
  if (kb.ec) {
    // ECBox atoms are global; evaluate at an arbitrary element
    if (!ev.atom_holds(kb.ec, 0, false)) violate("ec: " + render(kb.ec));
  }
  if (kb.goal && ev.ext(kb.goal).empty()) violate("goal: " + render(kb.goal) + " has no instance");
  return rep;
}

std::optional<std::map<std::string, int>> cq_match(const Interpretation& I,
                                                   const ConjunctiveQuery& q) {
  validate_interpretation(I);
  int n = I.size();
  // candidate sets per variable from concept atoms
  std::map<std::string, std::vector<int>> cand;
  for (auto& v : q.vars) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    cand[v] = std::move(all);
  }
  for (auto& a : q.conceptAtoms) {
    const auto& ext = I.concept_ext(a.concept_);
    auto& c = cand[a.x];
    std::vector<int> keep;
    for (int d : c)
      if (ext.count(d)) keep.push_back(d);
    c = std::move(keep);
  }
  // order variables most-constrained first for a smaller search tree
  std::vector<std::string> order = q.vars;
  std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    if (cand[a].size() != cand[b].size()) return cand[a].size() < cand[b].size();
    return a < b;
  });
  std::map<std::string, int> asg;
  std::function<bool(size_t)> rec = [&](size_t i) -> bool {
    if (i == order.size()) return true;
    const std::string& v = order[i];
    for (int d : cand[v]) {
      asg[v] = d;
      bool ok = true;
      for (auto& a : q.roleAtoms) {
        auto ix = asg.find(a.x);
        auto iy = asg.find(a.y);
        if (ix == asg.end() || iy == asg.end()) continue;
        auto rel = I.roles.find(a.role);
        if (rel == I.roles.end() || !rel->second.count({ix->second, iy->second})) {
          ok = false;
          break;
        }
      }
      if (ok && rec(i + 1)) return true;
      asg.erase(v);
    }
    return false;
  };
  if (rec(0)) return asg;
  return std::nullopt;
}

}  // namespace carddl
