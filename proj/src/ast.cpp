#include "carddl/ast.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace carddl {

// ---- concept constructors ----

ConceptPtr mk_name(std::string name) {
  auto c = std::make_shared<Concept>();
  c->kind = CK::Name;
  c->name = std::move(name);
  return c;
}

static ConceptPtr mk_nary(CK kind, std::vector<ConceptPtr> kids) {
  if (kids.empty()) throw std::invalid_argument("empty n-ary concept");
  if (kids.size() == 1) return kids[0];
  std::vector<ConceptPtr> flat;
  for (auto& k : kids) {
    if (k->kind == kind)
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    else
      flat.push_back(k);
  }
  auto c = std::make_shared<Concept>();
  c->kind = kind;
  c->kids = std::move(flat);
  return c;
}

ConceptPtr mk_and(std::vector<ConceptPtr> kids) { return mk_nary(CK::And, std::move(kids)); }
ConceptPtr mk_or(std::vector<ConceptPtr> kids) { return mk_nary(CK::Or, std::move(kids)); }

ConceptPtr mk_not(ConceptPtr c) {
  if (c->kind == CK::Not) return c->kids[0];
  auto n = std::make_shared<Concept>();
  n->kind = CK::Not;
  n->kids = {std::move(c)};
  return n;
}

ConceptPtr mk_constr(CAtomPtr a) {
  auto c = std::make_shared<Concept>();
  c->kind = CK::Constr;
  c->constr = std::move(a);
  return c;
}

ConceptPtr mk_succ(CAtomPtr a) {
  auto c = std::make_shared<Concept>();
  c->kind = CK::Succ;
  c->constr = std::move(a);
  return c;
}

ConceptPtr mk_top() {
  auto t = mk_name(kReservedTopName);
  return mk_or({t, mk_not(t)});
}

ConceptPtr mk_bottom() {
  auto t = mk_name(kReservedTopName);
  return mk_and({t, mk_not(t)});
}

static bool is_reserved_pair(const ConceptPtr& c, CK kind) {
  if (c->kind != kind || c->kids.size() != 2) return false;
  const auto& a = c->kids[0];
  const auto& b = c->kids[1];
  return a->kind == CK::Name && a->name == kReservedTopName && b->kind == CK::Not &&
         b->kids[0]->kind == CK::Name && b->kids[0]->name == kReservedTopName;
}

bool is_top(const ConceptPtr& c) { return is_reserved_pair(c, CK::Or); }
bool is_bottom(const ConceptPtr& c) { return is_reserved_pair(c, CK::And); }

// ---- set terms ----

SetTermPtr st_empty() {
  auto s = std::make_shared<SetTerm>();
  s->kind = SK::Empty;
  return s;
}

SetTermPtr st_universe() {
  auto s = std::make_shared<SetTerm>();
  s->kind = SK::Universe;
  return s;
}

SetTermPtr st_role(std::string role) {
  auto s = std::make_shared<SetTerm>();
  s->kind = SK::Role;
  s->name = std::move(role);
  return s;
}

SetTermPtr st_indiv(std::string ind) {
  auto s = std::make_shared<SetTerm>();
  s->kind = SK::Indiv;
  s->name = std::move(ind);
  return s;
}

SetTermPtr st_union(SetTermPtr a, SetTermPtr b) {
  auto s = std::make_shared<SetTerm>();
  s->kind = SK::Union;
  s->kids = {std::move(a), std::move(b)};
  return s;
}

SetTermPtr st_inter(SetTermPtr a, SetTermPtr b) {
  auto s = std::make_shared<SetTerm>();
  s->kind = SK::Inter;
  s->kids = {std::move(a), std::move(b)};
  return s;
}

SetTermPtr st_complement(SetTermPtr a) {
  auto s = std::make_shared<SetTerm>();
  s->kind = SK::Complement;
  s->kids = {std::move(a)};
  return s;
}

SetTermPtr mk_concept_set(ConceptPtr c) {
  if (is_top(c)) return st_universe();
  if (is_bottom(c)) return st_empty();
  switch (c->kind) {
    case CK::And: {
      SetTermPtr acc = mk_concept_set(c->kids[0]);
      for (size_t i = 1; i < c->kids.size(); ++i) acc = st_inter(acc, mk_concept_set(c->kids[i]));
      return acc;
    }
    case CK::Or: {
      SetTermPtr acc = mk_concept_set(c->kids[0]);
      for (size_t i = 1; i < c->kids.size(); ++i) acc = st_union(acc, mk_concept_set(c->kids[i]));
      return acc;
    }
    case CK::Not:
      return st_complement(mk_concept_set(c->kids[0]));
    default: {
      auto s = std::make_shared<SetTerm>();
      s->kind = SK::ConceptV;
      s->concept_ = std::move(c);
      return s;
    }
  }
}

ConceptPtr concept_of_set(const SetTermPtr& s) {
  switch (s->kind) {
    case SK::Empty:
      return mk_bottom();
    case SK::Universe:
      return mk_top();
    case SK::ConceptV:
      return s->concept_;
    case SK::Role:
      throw std::invalid_argument("role '" + s->name + "' cannot appear in a concept position");
    case SK::Indiv:
      throw std::invalid_argument("individual '" + s->name + "' cannot appear in a concept position");
    case SK::Union:
      return mk_or({concept_of_set(s->kids[0]), concept_of_set(s->kids[1])});
    case SK::Inter:
      return mk_and({concept_of_set(s->kids[0]), concept_of_set(s->kids[1])});
    case SK::Complement:
      return mk_not(concept_of_set(s->kids[0]));
  }
  throw std::logic_error("unreachable");
}

// ---- PA expressions ----

PAExprPtr pa_const(long long v) {
  auto p = std::make_shared<PAExpr>();
  p->kind = PK::IntConst;
  p->value = v;
  return p;
}

PAExprPtr pa_card(SetTermPtr s) {
  auto p = std::make_shared<PAExpr>();
  p->kind = PK::Card;
  p->set = std::move(s);
  return p;
}

PAExprPtr pa_sum(PAExprPtr a, PAExprPtr b) {
  auto p = std::make_shared<PAExpr>();
  p->kind = PK::Sum;
  p->kids = {std::move(a), std::move(b)};
  return p;
}

PAExprPtr pa_mul(long long n, PAExprPtr a) {
  auto p = std::make_shared<PAExpr>();
  p->kind = PK::ScalarMul;
  p->value = n;
  p->kids = {std::move(a)};
  return p;
}

// ---- constraint atoms ----

static CAtomPtr ca_nary(AK kind, std::vector<CAtomPtr> kids) {
  if (kids.empty()) throw std::invalid_argument("empty n-ary constraint");
  if (kids.size() == 1) return kids[0];
  auto a = std::make_shared<CAtom>();
  a->kind = kind;
  a->kids = std::move(kids);
  return a;
}

CAtomPtr ca_and(std::vector<CAtomPtr> kids) { return ca_nary(AK::And, std::move(kids)); }
CAtomPtr ca_or(std::vector<CAtomPtr> kids) { return ca_nary(AK::Or, std::move(kids)); }

CAtomPtr ca_not(CAtomPtr a) {
  if (a->kind == AK::Not) return a->kids[0];
  auto n = std::make_shared<CAtom>();
  n->kind = AK::Not;
  n->kids = {std::move(a)};
  return n;
}

CAtomPtr ca_set_eq(SetTermPtr s, SetTermPtr t) {
  auto a = std::make_shared<CAtom>();
  a->kind = AK::SetEq;
  a->s = std::move(s);
  a->t = std::move(t);
  return a;
}

CAtomPtr ca_set_sub(SetTermPtr s, SetTermPtr t) {
  auto a = std::make_shared<CAtom>();
  a->kind = AK::SetSub;
  a->s = std::move(s);
  a->t = std::move(t);
  return a;
}

CAtomPtr ca_card_eq(PAExprPtr k, PAExprPtr l) {
  auto a = std::make_shared<CAtom>();
  a->kind = AK::CardEq;
  a->k = std::move(k);
  a->l = std::move(l);
  return a;
}

CAtomPtr ca_card_lt(PAExprPtr k, PAExprPtr l) {
  auto a = std::make_shared<CAtom>();
  a->kind = AK::CardLt;
  a->k = std::move(k);
  a->l = std::move(l);
  return a;
}

CAtomPtr ca_card_le(PAExprPtr k, PAExprPtr l) { return ca_not(ca_card_lt(std::move(l), std::move(k))); }
CAtomPtr ca_card_ge(PAExprPtr k, PAExprPtr l) { return ca_not(ca_card_lt(std::move(k), std::move(l))); }
CAtomPtr ca_card_gt(PAExprPtr k, PAExprPtr l) { return ca_card_lt(std::move(l), std::move(k)); }

CAtomPtr ca_divides(long long n, PAExprPtr l) {
  if (n <= 0) throw std::invalid_argument("div divisor must be a positive constant");
  auto a = std::make_shared<CAtom>();
  a->kind = AK::Divides;
  a->divisor = n;
  a->l = std::move(l);
  return a;
}

// ---- rendering ----
// Canonical ASCII forms; the parser accepts exactly what these produce.

static void rend(const ConceptPtr& c, std::ostream& os, int prec);
static void rend(const SetTermPtr& s, std::ostream& os, int prec);
static void rend(const PAExprPtr& p, std::ostream& os);
static void rend(const CAtomPtr& a, std::ostream& os, int prec);

// concept precedence: or=0, and=1, not=2, atom=3
static void rend(const ConceptPtr& c, std::ostream& os, int prec) {
  if (is_top(c)) {
    os << "top";
    return;
  }
  if (is_bottom(c)) {
    os << "bottom";
    return;
  }
  switch (c->kind) {
    case CK::Name:
      os << c->name;
      break;
    case CK::Or: {
      if (prec > 0) os << "(";
      for (size_t i = 0; i < c->kids.size(); ++i) {
        if (i) os << " or ";
        rend(c->kids[i], os, 1);
      }
      if (prec > 0) os << ")";
      break;
    }
    case CK::And: {
      if (prec > 1) os << "(";
      for (size_t i = 0; i < c->kids.size(); ++i) {
        if (i) os << " and ";
        rend(c->kids[i], os, 2);
      }
      if (prec > 1) os << ")";
      break;
    }
    case CK::Not:
      os << "not ";
      rend(c->kids[0], os, 3);
      break;
    case CK::Constr:
      os << "sat(";
      rend(c->constr, os, 0);
      os << ")";
      break;
    case CK::Succ:
      os << "succ(";
      rend(c->constr, os, 0);
      os << ")";
      break;
  }
}

// set precedence: union=0, inter=1, atom=2
static void rend(const SetTermPtr& s, std::ostream& os, int prec) {
  switch (s->kind) {
    case SK::Empty:
      os << "empty";
      break;
    case SK::Universe:
      os << "univ";
      break;
    case SK::Role:
    case SK::Indiv:
      os << s->name;
      break;
    case SK::ConceptV:
      rend(s->concept_, os, 3);
      break;
    case SK::Union: {
      if (prec > 0) os << "(";
      rend(s->kids[0], os, 0);
      os << " union ";
      rend(s->kids[1], os, 1);
      if (prec > 0) os << ")";
      break;
    }
    case SK::Inter: {
      if (prec > 1) os << "(";
      rend(s->kids[0], os, 1);
      os << " inter ";
      rend(s->kids[1], os, 2);
      if (prec > 1) os << ")";
      break;
    }
    case SK::Complement:
      os << "comp(";
      rend(s->kids[0], os, 0);
      os << ")";
      break;
  }
}

static void rend(const PAExprPtr& p, std::ostream& os) {
  switch (p->kind) {
    case PK::IntConst:
      os << p->value;
      break;
    case PK::Card:
      os << "card(";
      rend(p->set, os, 0);
      os << ")";
      break;
    case PK::Sum:
      rend(p->kids[0], os);
      os << " + ";
      rend(p->kids[1], os);
      break;
    case PK::ScalarMul: {
      os << p->value << " * ";
      bool paren = p->kids[0]->kind == PK::Sum;
      if (paren) os << "(";
      rend(p->kids[0], os);
      if (paren) os << ")";
      break;
    }
  }
}

// constraint precedence: or=0, and=1, not=2/atom
static void rend(const CAtomPtr& a, std::ostream& os, int prec) {
  switch (a->kind) {
    case AK::Or: {
      if (prec > 0) os << "(";
      for (size_t i = 0; i < a->kids.size(); ++i) {
        if (i) os << " or ";
        rend(a->kids[i], os, 1);
      }
      if (prec > 0) os << ")";
      break;
    }
    case AK::And: {
      if (prec > 1) os << "(";
      for (size_t i = 0; i < a->kids.size(); ++i) {
        if (i) os << " and ";
        rend(a->kids[i], os, 2);
      }
      if (prec > 1) os << ")";
      break;
    }
    case AK::Not:
      os << "not ";
      if (a->kids[0]->kind == AK::And || a->kids[0]->kind == AK::Or) {
        os << "(";
        rend(a->kids[0], os, 0);
        os << ")";
      } else {
        rend(a->kids[0], os, 2);
      }
      break;
    case AK::SetEq:
      rend(a->s, os, 0);
      os << " = ";
      rend(a->t, os, 0);
      break;
    case AK::SetSub:
      rend(a->s, os, 0);
      os << " <= ";
      rend(a->t, os, 0);
      break;
    case AK::CardEq:
      rend(a->k, os);
      os << " = ";
      rend(a->l, os);
      break;
    case AK::CardLt:
      rend(a->k, os);
      os << " < ";
      rend(a->l, os);
      break;
    case AK::Divides:
      os << "div(" << a->divisor << ", ";
      rend(a->l, os);
      os << ")";
      break;
  }
}

std::string render(const ConceptPtr& c) {
  std::ostringstream os;
  rend(c, os, 0);
  return os.str();
}

std::string render(const SetTermPtr& s) {
  std::ostringstream os;
  rend(s, os, 0);
  return os.str();
}

std::string render(const PAExprPtr& p) {
  std::ostringstream os;
  rend(p, os);
  return os.str();
}

std::string render(const CAtomPtr& a) {
  std::ostringstream os;
  rend(a, os, 0);
  return os.str();
}

// ---- structural predicates ----

static void walk_sets(const CAtomPtr& a, const std::function<void(const SetTermPtr&)>& f);

static void walk_sets(const SetTermPtr& s, const std::function<void(const SetTermPtr&)>& f) {
  f(s);
  for (auto& k : s->kids) walk_sets(k, f);
}

static void walk_sets(const PAExprPtr& p, const std::function<void(const SetTermPtr&)>& f) {
  if (p->set) walk_sets(p->set, f);
  for (auto& k : p->kids) walk_sets(k, f);
}

static void walk_sets(const CAtomPtr& a, const std::function<void(const SetTermPtr&)>& f) {
  for (auto& k : a->kids) walk_sets(k, f);
  if (a->s) walk_sets(a->s, f);
  if (a->t) walk_sets(a->t, f);
  if (a->k) walk_sets(a->k, f);
  if (a->l) walk_sets(a->l, f);
}

static bool contains_kind(const ConceptPtr& c, CK kind) {
  if (c->kind == kind) return true;
  for (auto& k : c->kids)
    if (contains_kind(k, kind)) return true;
  if (c->constr) {
    bool found = false;
    walk_sets(c->constr, [&](const SetTermPtr& s) {
      if (s->kind == SK::ConceptV && contains_kind(s->concept_, kind)) found = true;
    });
    if (found) return true;
  }
  return false;
}

bool has_constr(const ConceptPtr& c) { return contains_kind(c, CK::Constr); }
bool has_succ(const ConceptPtr& c) { return contains_kind(c, CK::Succ); }

int constraint_depth(const ConceptPtr& c) {
  switch (c->kind) {
    case CK::Name:
      return 0;
    case CK::And:
    case CK::Or:
    case CK::Not: {
      int d = 0;
      for (auto& k : c->kids) d = std::max(d, constraint_depth(k));
      return d;
    }
    case CK::Constr:
    case CK::Succ: {
      int inner = 0;
      walk_sets(c->constr, [&](const SetTermPtr& s) {
        if (s->kind == SK::ConceptV) inner = std::max(inner, constraint_depth(s->concept_));
      });
      return 1 + inner;
    }
  }
  return 0;
}

// ---- knowledge bases ----

void collect_names(const ConceptPtr& c, Signature& sig) {
  switch (c->kind) {
    case CK::Name:
      sig.concepts.insert(c->name);
      break;
    case CK::And:
    case CK::Or:
    case CK::Not:
      for (auto& k : c->kids) collect_names(k, sig);
      break;
    case CK::Constr:
    case CK::Succ:
      collect_names(c->constr, sig);
      break;
  }
}

void collect_names(const CAtomPtr& a, Signature& sig) {
  walk_sets(a, [&](const SetTermPtr& s) {
    if (s->kind == SK::Role) sig.roles.insert(s->name);
    if (s->kind == SK::Indiv) sig.individuals.insert(s->name);
    if (s->kind == SK::ConceptV) collect_names(s->concept_, sig);
  });
}

Signature signature_of(const KnowledgeBase& kb) {
  Signature sig;
  for (auto& a : kb.conceptAssertions) {
    collect_names(a.c, sig);
    sig.individuals.insert(a.indiv);
  }
  for (auto& r : kb.roleAssertions) {
    sig.roles.insert(r.role);
    sig.individuals.insert(r.from);
    sig.individuals.insert(r.to);
  }
  for (auto& ci : kb.tbox) {
    collect_names(ci.lhs, sig);
    collect_names(ci.rhs, sig);
  }
  for (auto& c : kb.ercConstraints) {
    for (auto& [n, cc] : c.lhs) collect_names(cc, sig);
    for (auto& [n, cc] : c.rhs) collect_names(cc, sig);
  }
  if (kb.ec) collect_names(kb.ec, sig);
  if (kb.goal) collect_names(kb.goal, sig);
  return sig;
}

void validate_kb(const KnowledgeBase& kb) {
  Signature sig = signature_of(kb);
  for (auto& r : sig.roles) {
    if (sig.concepts.count(r)) throw std::runtime_error("name used as both role and concept: " + r);
    if (sig.individuals.count(r))
      throw std::runtime_error("name used as both role and individual: " + r);
  }
  for (auto& c : sig.concepts)
    if (sig.individuals.count(c))
      throw std::runtime_error("name used as both concept and individual: " + c);
  if (kb.erc) {
    // positivity is structural for ErcNode; check leaf references
    std::function<void(const ErcNode&)> chk = [&](const ErcNode& n) {
      if (n.kind == ErcNode::K::Leaf) {
        if (n.leaf < 0 || n.leaf >= int(kb.ercConstraints.size()))
          throw std::runtime_error("erc leaf out of range");
      } else {
        for (auto& k : n.kids) chk(k);
      }
    };
    chk(*kb.erc);
    for (auto& c : kb.ercConstraints)
      if (c.offset < 0) throw std::runtime_error("erc offset must be non-negative");
  }
}

static std::string render_lin(const std::vector<std::pair<long long, ConceptPtr>>& terms,
                              long long offset, bool withOffset) {
  std::ostringstream os;
  bool first = true;
  for (auto& [n, c] : terms) {
    if (!first) os << " + ";
    first = false;
    if (n != 1) os << n << " * ";
    os << "card(" << render(mk_concept_set(c)) << ")";
  }
  if (withOffset && offset != 0) {
    if (!first) os << " + ";
    os << offset;
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

static void render_erc(const KnowledgeBase& kb, const ErcNode& n, std::ostream& os, int prec) {
  switch (n.kind) {
    case ErcNode::K::Leaf: {
      const auto& c = kb.ercConstraints[n.leaf];
      os << "(" << render_lin(c.lhs, c.offset, true) << " <= " << render_lin(c.rhs, 0, false)
         << ")";
      break;
    }
    case ErcNode::K::Or: {
      if (prec > 0) os << "(";
      for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << " or ";
        render_erc(kb, n.kids[i], os, 1);
      }
      if (prec > 0) os << ")";
      break;
    }
    case ErcNode::K::And: {
      if (prec > 1) os << "(";
      for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << " and ";
        render_erc(kb, n.kids[i], os, 2);
      }
      if (prec > 1) os << ")";
      break;
    }
  }
}

std::string render_kb(const KnowledgeBase& kb) {
  std::ostringstream os;
  for (auto& ci : kb.tbox) os << "tbox: " << render(ci.lhs) << " <= " << render(ci.rhs) << "\n";
  for (auto& a : kb.conceptAssertions) os << "abox: " << render(a.c) << "(" << a.indiv << ")\n";
  for (auto& r : kb.roleAssertions) {
    if (r.negated) throw std::runtime_error("negated role assertions have no surface syntax");
    os << "abox: " << r.role << "(" << r.from << ", " << r.to << ")\n";
  }
  if (kb.erc) {
    os << "erc: ";
    render_erc(kb, *kb.erc, os, 0);
    os << "\n";
  }
  if (kb.ec) os << "ec: " << render(kb.ec) << "\n";
  if (kb.goal) os << "goal: " << render(kb.goal) << "\n";
  return os.str();
}

std::string render_query(const ConjunctiveQuery& q) {
  std::ostringstream os;
  os << "q :- ";
  bool first = true;
  for (auto& a : q.roleAtoms) {
    if (!first) os << ", ";
    first = false;
    os << a.role << "(" << a.x << ", " << a.y << ")";
  }
  for (auto& a : q.conceptAtoms) {
    if (!first) os << ", ";
    first = false;
    os << a.concept_ << "(" << a.x << ")";
  }
  return os.str();
}

}  // namespace carddl
