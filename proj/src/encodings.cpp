#include "carddl/encodings.hpp"

namespace carddl {

ConceptPtr encode_nominal(const std::string& conceptName) {
  return mk_constr(ca_card_eq(pa_card(mk_concept_set(mk_name(conceptName))), pa_const(1)));
}

ConceptPtr encode_universal_role(const std::string& u) {
  auto inner = mk_constr(ca_set_eq(st_role(u), st_universe()));
  return mk_constr(ca_set_sub(mk_concept_set(mk_top()), mk_concept_set(inner)));
}

ConceptPtr encode_role_negation(const std::string& r, const std::string& rc) {
  auto disjoint = mk_constr(ca_set_sub(st_inter(st_role(r), st_role(rc)), st_empty()));
  auto cover = mk_constr(ca_card_eq(pa_sum(pa_card(st_role(r)), pa_card(st_role(rc))),
                                    pa_card(st_universe())));
  auto top = mk_concept_set(mk_top());
  return mk_and({mk_constr(ca_set_sub(top, mk_concept_set(disjoint))),
                 mk_constr(ca_set_sub(top, mk_concept_set(cover)))});
}

ConceptPtr encode_role_conjunction(const std::string& t, const std::string& r,
                                   const std::string& s) {
  auto inner = mk_constr(ca_set_eq(st_role(t), st_inter(st_role(r), st_role(s))));
  return mk_constr(ca_set_sub(mk_concept_set(mk_top()), mk_concept_set(inner)));
}

namespace {

void check_concepts_only(const SetTermPtr& s) {
  switch (s->kind) {
    case SK::Empty:
    case SK::Universe:
    case SK::ConceptV:
      break;
    case SK::Role:
      throw std::invalid_argument("ECBoxes may not mention roles");
    case SK::Indiv:
      throw std::invalid_argument("ECBoxes may not mention individuals");
    case SK::Union:
    case SK::Inter:
    case SK::Complement:
      for (auto& k : s->kids) check_concepts_only(k);
      break;
  }
}

void check_atom(const CAtomPtr& a) {
  for (auto& k : a->kids) check_atom(k);
  auto scan_pa = [](const PAExprPtr& p, auto&& self) -> void {
    if (p->set) check_concepts_only(p->set);
    for (auto& k : p->kids) self(k, self);
  };
  if (a->s) check_concepts_only(a->s);
  if (a->t) check_concepts_only(a->t);
  if (a->k) scan_pa(a->k, scan_pa);
  if (a->l) scan_pa(a->l, scan_pa);
}

}  // namespace

ConceptPtr ecbox_to_concept(const CAtomPtr& ec) {
  switch (ec->kind) {
    case AK::And: {
      std::vector<ConceptPtr> kids;
      for (auto& k : ec->kids) kids.push_back(ecbox_to_concept(k));
      return mk_and(std::move(kids));
    }
    case AK::Or: {
      std::vector<ConceptPtr> kids;
      for (auto& k : ec->kids) kids.push_back(ecbox_to_concept(k));
      return mk_or(std::move(kids));
    }
    case AK::Not: {
      const CAtomPtr& kid = ec->kids[0];
      if (kid->kind == AK::And || kid->kind == AK::Or)
        return mk_not(ecbox_to_concept(kid));
      check_atom(kid);
      return mk_constr(ca_not(kid));  // negated atoms stay inside the constraint
    }
    default:
      check_atom(ec);
      return mk_constr(ec);
  }
}

namespace {

SetTermPtr role_union(const std::vector<std::string>& roles) {
  if (roles.empty()) return st_empty();
  SetTermPtr acc = st_role(roles[0]);
  for (size_t i = 1; i < roles.size(); ++i) acc = st_union(acc, st_role(roles[i]));
  return acc;
}

SetTermPtr localize_set(const SetTermPtr& s, const std::vector<std::string>& roles);

SetTermPtr localize_concept_leaf(const ConceptPtr& c, const std::vector<std::string>& roles) {
  ConceptPtr rewritten = scc_to_pp(c, roles);
  return st_inter(mk_concept_set(rewritten), role_union(roles));
}

SetTermPtr localize_set(const SetTermPtr& s, const std::vector<std::string>& roles) {
  switch (s->kind) {
    case SK::Empty:
      return s;
    case SK::Universe:
      return role_union(roles);
    case SK::Role:
      return s;
    case SK::Indiv:
      throw std::invalid_argument("individuals cannot occur inside concepts");
    case SK::ConceptV:
      return localize_concept_leaf(s->concept_, roles);
    case SK::Union:
      return st_union(localize_set(s->kids[0], roles), localize_set(s->kids[1], roles));
    case SK::Inter:
      return st_inter(localize_set(s->kids[0], roles), localize_set(s->kids[1], roles));
    case SK::Complement:
      return st_complement(localize_set(s->kids[0], roles));
  }
  throw std::logic_error("unreachable");
}

PAExprPtr localize_pa(const PAExprPtr& p, const std::vector<std::string>& roles) {
  switch (p->kind) {
    case PK::IntConst:
      return p;
    case PK::Card:
      return pa_card(localize_set(p->set, roles));
    case PK::Sum:
      return pa_sum(localize_pa(p->kids[0], roles), localize_pa(p->kids[1], roles));
    case PK::ScalarMul:
      return pa_mul(p->value, localize_pa(p->kids[0], roles));
  }
  throw std::logic_error("unreachable");
}

CAtomPtr localize_atom(const CAtomPtr& a, const std::vector<std::string>& roles) {
  switch (a->kind) {
    case AK::And: {
      std::vector<CAtomPtr> kids;
      for (auto& k : a->kids) kids.push_back(localize_atom(k, roles));
      return ca_and(std::move(kids));
    }
    case AK::Or: {
      std::vector<CAtomPtr> kids;
      for (auto& k : a->kids) kids.push_back(localize_atom(k, roles));
      return ca_or(std::move(kids));
    }
    case AK::Not:
      return ca_not(localize_atom(a->kids[0], roles));
    case AK::SetEq:
      return ca_set_eq(localize_set(a->s, roles), localize_set(a->t, roles));
    case AK::SetSub:
      return ca_set_sub(localize_set(a->s, roles), localize_set(a->t, roles));
    case AK::CardEq:
      return ca_card_eq(localize_pa(a->k, roles), localize_pa(a->l, roles));
    case AK::CardLt:
      return ca_card_lt(localize_pa(a->k, roles), localize_pa(a->l, roles));
    case AK::Divides:
      return ca_divides(a->divisor, localize_pa(a->l, roles));
  }
  throw std::logic_error("unreachable");
}

// rewrite ConceptV leaves of globally evaluated constraints recursively
SetTermPtr global_set(const SetTermPtr& s, const std::vector<std::string>& roles);

PAExprPtr global_pa(const PAExprPtr& p, const std::vector<std::string>& roles) {
  switch (p->kind) {
    case PK::IntConst:
      return p;
    case PK::Card:
      return pa_card(global_set(p->set, roles));
    case PK::Sum:
      return pa_sum(global_pa(p->kids[0], roles), global_pa(p->kids[1], roles));
    case PK::ScalarMul:
      return pa_mul(p->value, global_pa(p->kids[0], roles));
  }
  throw std::logic_error("unreachable");
}

CAtomPtr global_atom(const CAtomPtr& a, const std::vector<std::string>& roles) {
  switch (a->kind) {
    case AK::And: {
      std::vector<CAtomPtr> kids;
      for (auto& k : a->kids) kids.push_back(global_atom(k, roles));
      return ca_and(std::move(kids));
    }
    case AK::Or: {
      std::vector<CAtomPtr> kids;
      for (auto& k : a->kids) kids.push_back(global_atom(k, roles));
      return ca_or(std::move(kids));
    }
    case AK::Not:
      return ca_not(global_atom(a->kids[0], roles));
    case AK::SetEq:
      return ca_set_eq(global_set(a->s, roles), global_set(a->t, roles));
    case AK::SetSub:
      return ca_set_sub(global_set(a->s, roles), global_set(a->t, roles));
    case AK::CardEq:
      return ca_card_eq(global_pa(a->k, roles), global_pa(a->l, roles));
    case AK::CardLt:
      return ca_card_lt(global_pa(a->k, roles), global_pa(a->l, roles));
    case AK::Divides:
      return ca_divides(a->divisor, global_pa(a->l, roles));
  }
  throw std::logic_error("unreachable");
}

SetTermPtr global_set(const SetTermPtr& s, const std::vector<std::string>& roles) {
  switch (s->kind) {
    case SK::Empty:
    case SK::Universe:
    case SK::Role:
      return s;
    case SK::Indiv:
      throw std::invalid_argument("individuals cannot occur inside concepts");
    case SK::ConceptV:
      return mk_concept_set(scc_to_pp(s->concept_, roles));
    case SK::Union:
      return st_union(global_set(s->kids[0], roles), global_set(s->kids[1], roles));
    case SK::Inter:
      return st_inter(global_set(s->kids[0], roles), global_set(s->kids[1], roles));
    case SK::Complement:
      return st_complement(global_set(s->kids[0], roles));
  }
  throw std::logic_error("unreachable");
}

}  // namespace

ConceptPtr scc_to_pp(const ConceptPtr& c, const std::vector<std::string>& roles) {
  switch (c->kind) {
    case CK::Name:
      return c;
    case CK::And: {
      std::vector<ConceptPtr> kids;
      for (auto& k : c->kids) kids.push_back(scc_to_pp(k, roles));
      return mk_and(std::move(kids));
    }
    case CK::Or: {
      std::vector<ConceptPtr> kids;
      for (auto& k : c->kids) kids.push_back(scc_to_pp(k, roles));
      return mk_or(std::move(kids));
    }
    case CK::Not:
      return mk_not(scc_to_pp(c->kids[0], roles));
    case CK::Constr:
      return mk_constr(global_atom(c->constr, roles));
    case CK::Succ:
      return mk_constr(localize_atom(c->constr, roles));
  }
  throw std::logic_error("unreachable");
}

}  // namespace carddl
