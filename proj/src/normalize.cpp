#include "carddl/normalize.hpp"

namespace carddl {

namespace {

ConceptPtr substitute(const ConceptPtr& c, const std::map<std::string, ConceptPtr>& defs);

SetTermPtr substitute_set(const SetTermPtr& s, const std::map<std::string, ConceptPtr>& defs) {
  switch (s->kind) {
    case SK::Empty:
    case SK::Universe:
    case SK::Role:
    case SK::Indiv:
      return s;
    case SK::ConceptV:
      return mk_concept_set(substitute(s->concept_, defs));
    case SK::Union:
      return st_union(substitute_set(s->kids[0], defs), substitute_set(s->kids[1], defs));
    case SK::Inter:
      return st_inter(substitute_set(s->kids[0], defs), substitute_set(s->kids[1], defs));
    case SK::Complement:
      return st_complement(substitute_set(s->kids[0], defs));
  }
  throw std::logic_error("unreachable");
}

PAExprPtr substitute_pa(const PAExprPtr& p, const std::map<std::string, ConceptPtr>& defs) {
  switch (p->kind) {
    case PK::IntConst:
      return p;
    case PK::Card:
      return pa_card(substitute_set(p->set, defs));
    case PK::Sum:
      return pa_sum(substitute_pa(p->kids[0], defs), substitute_pa(p->kids[1], defs));
    case PK::ScalarMul:
      return pa_mul(p->value, substitute_pa(p->kids[0], defs));
  }
  throw std::logic_error("unreachable");
}

CAtomPtr substitute_atom(const CAtomPtr& a, const std::map<std::string, ConceptPtr>& defs) {
  switch (a->kind) {
    case AK::And: {
      std::vector<CAtomPtr> kids;
      for (auto& k : a->kids) kids.push_back(substitute_atom(k, defs));
      return ca_and(std::move(kids));
    }
    case AK::Or: {
      std::vector<CAtomPtr> kids;
      for (auto& k : a->kids) kids.push_back(substitute_atom(k, defs));
      return ca_or(std::move(kids));
    }
    case AK::Not:
      return ca_not(substitute_atom(a->kids[0], defs));
    case AK::SetEq:
      return ca_set_eq(substitute_set(a->s, defs), substitute_set(a->t, defs));
    case AK::SetSub:
      return ca_set_sub(substitute_set(a->s, defs), substitute_set(a->t, defs));
    case AK::CardEq:
      return ca_card_eq(substitute_pa(a->k, defs), substitute_pa(a->l, defs));
    case AK::CardLt:
      return ca_card_lt(substitute_pa(a->k, defs), substitute_pa(a->l, defs));
    case AK::Divides:
      return ca_divides(a->divisor, substitute_pa(a->l, defs));
  }
  throw std::logic_error("unreachable");
}

ConceptPtr substitute(const ConceptPtr& c, const std::map<std::string, ConceptPtr>& defs) {
  switch (c->kind) {
    case CK::Name: {
      auto it = defs.find(c->name);
      return it == defs.end() ? c : it->second;
    }
    case CK::And: {
      std::vector<ConceptPtr> kids;
      for (auto& k : c->kids) kids.push_back(substitute(k, defs));
      return mk_and(std::move(kids));
    }
    case CK::Or: {
      std::vector<ConceptPtr> kids;
      for (auto& k : c->kids) kids.push_back(substitute(k, defs));
      return mk_or(std::move(kids));
    }
    case CK::Not:
      return mk_not(substitute(c->kids[0], defs));
    case CK::Constr:
      return mk_constr(substitute_atom(c->constr, defs));
    case CK::Succ:
      return mk_succ(substitute_atom(c->constr, defs));
  }
  throw std::logic_error("unreachable");
}

struct Normalizer {
  KnowledgeBase out;
  std::map<std::string, std::string> freshByKey;  // render(concept) -> fresh name
  std::map<std::string, ConceptPtr> nameMap;
  int counter = 0;

  std::string fresh_name() { return "_N" + std::to_string(counter++); }

  // c has depth <= 1 already; returns a name standing for it
  ConceptPtr define(const ConceptPtr& c) {
    if (c->kind == CK::Name) return c;
    std::string key = render(c);
    auto it = freshByKey.find(key);
    if (it != freshByKey.end()) return mk_name(it->second);
    std::string n = fresh_name();
    freshByKey[key] = n;
    nameMap[n] = substitute(c, nameMap);  // unfold earlier fresh names
    auto nm = mk_name(n);
    out.tbox.push_back({nm, c});
    out.tbox.push_back({c, nm});
    return nm;
  }

  SetTermPtr flatten_set(const SetTermPtr& s) {
    switch (s->kind) {
      case SK::Empty:
      case SK::Universe:
      case SK::Role:
      case SK::Indiv:
        return s;
      case SK::ConceptV: {
        ConceptPtr inner = flatten(s->concept_);
        if (constraint_depth(inner) > 0) inner = define(inner);
        return mk_concept_set(inner);
      }
      case SK::Union:
        return st_union(flatten_set(s->kids[0]), flatten_set(s->kids[1]));
      case SK::Inter:
        return st_inter(flatten_set(s->kids[0]), flatten_set(s->kids[1]));
      case SK::Complement:
        return st_complement(flatten_set(s->kids[0]));
    }
    throw std::logic_error("unreachable");
  }

  PAExprPtr flatten_pa(const PAExprPtr& p) {
    switch (p->kind) {
      case PK::IntConst:
        return p;
      case PK::Card:
        return pa_card(flatten_set(p->set));
      case PK::Sum:
        return pa_sum(flatten_pa(p->kids[0]), flatten_pa(p->kids[1]));
      case PK::ScalarMul:
        return pa_mul(p->value, flatten_pa(p->kids[0]));
    }
    throw std::logic_error("unreachable");
  }

  CAtomPtr flatten_atom(const CAtomPtr& a) {
    switch (a->kind) {
      case AK::And: {
        std::vector<CAtomPtr> kids;
        for (auto& k : a->kids) kids.push_back(flatten_atom(k));
        return ca_and(std::move(kids));
      }
      case AK::Or: {
        std::vector<CAtomPtr> kids;
        for (auto& k : a->kids) kids.push_back(flatten_atom(k));
        return ca_or(std::move(kids));
      }
      case AK::Not:
        return ca_not(flatten_atom(a->kids[0]));
      case AK::SetEq:
        return ca_set_eq(flatten_set(a->s), flatten_set(a->t));
      case AK::SetSub:
        return ca_set_sub(flatten_set(a->s), flatten_set(a->t));
      case AK::CardEq:
        return ca_card_eq(flatten_pa(a->k), flatten_pa(a->l));
      case AK::CardLt:
        return ca_card_lt(flatten_pa(a->k), flatten_pa(a->l));
      case AK::Divides:
        return ca_divides(a->divisor, flatten_pa(a->l));
    }
    throw std::logic_error("unreachable");
  }

  // depth-<=1 transform: inner constraint expressions get fresh names
  ConceptPtr flatten(const ConceptPtr& c) {
    switch (c->kind) {
      case CK::Name:
        return c;
      case CK::And: {
        std::vector<ConceptPtr> kids;
        for (auto& k : c->kids) kids.push_back(flatten(k));
        return mk_and(std::move(kids));
      }
      case CK::Or: {
        std::vector<ConceptPtr> kids;
        for (auto& k : c->kids) kids.push_back(flatten(k));
        return mk_or(std::move(kids));
      }
      case CK::Not:
        return mk_not(flatten(c->kids[0]));
      case CK::Constr:
        return mk_constr(flatten_atom(c->constr));
      case CK::Succ:
        return mk_succ(flatten_atom(c->constr));
    }
    throw std::logic_error("unreachable");
  }

  // ABox / ERCBox concepts become names
  ConceptPtr atomize(const ConceptPtr& c) {
    ConceptPtr f = flatten(c);
    return f->kind == CK::Name ? f : define(f);
  }
};

}  // namespace

NormalizeResult normalize_kb(const KnowledgeBase& kb) {
  Normalizer nz;
  for (auto& ci : kb.tbox) nz.out.tbox.push_back({nz.flatten(ci.lhs), nz.flatten(ci.rhs)});
  for (auto& a : kb.conceptAssertions) nz.out.conceptAssertions.push_back({nz.atomize(a.c), a.indiv});
  nz.out.roleAssertions = kb.roleAssertions;
  for (auto& c : kb.ercConstraints) {
    SemiRestrictedConstraint nc;
    nc.offset = c.offset;
    for (auto& [n, cc] : c.lhs) nc.lhs.emplace_back(n, nz.atomize(cc));
    for (auto& [n, cc] : c.rhs) nc.rhs.emplace_back(n, nz.atomize(cc));
    nz.out.ercConstraints.push_back(std::move(nc));
  }
  nz.out.erc = kb.erc;
  nz.out.ec = kb.ec;
  nz.out.goal = kb.goal;
  return {std::move(nz.out), std::move(nz.nameMap)};
}

}  // namespace carddl
