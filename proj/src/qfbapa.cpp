#include "carddl/qfbapa.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace carddl::qfbapa {

// ---- builders ----

STerm STerm::mk_var(int v) {
  STerm s;
  s.k = Var;
  s.var = v;
  return s;
}
STerm STerm::mk_univ() {
  STerm s;
  s.k = Univ;
  return s;
}
STerm STerm::mk_union(STerm a, STerm b) {
  STerm s;
  s.k = Union;
  s.kids = {std::move(a), std::move(b)};
  return s;
}
STerm STerm::mk_inter(STerm a, STerm b) {
  STerm s;
  s.k = Inter;
  s.kids = {std::move(a), std::move(b)};
  return s;
}
STerm STerm::mk_compl(STerm a) {
  STerm s;
  s.k = Compl;
  s.kids = {std::move(a)};
  return s;
}

PTerm PTerm::mk_const(long long v) {
  PTerm p;
  p.k = Const;
  p.c = v;
  return p;
}
PTerm PTerm::mk_card(STerm s) {
  PTerm p;
  p.k = Card;
  p.s = std::move(s);
  return p;
}
PTerm PTerm::mk_sum(PTerm a, PTerm b) {
  PTerm p;
  p.k = Sum;
  p.kids = {std::move(a), std::move(b)};
  return p;
}
PTerm PTerm::mk_mul(long long n, PTerm a) {
  PTerm p;
  p.k = Mul;
  p.c = n;
  p.kids = {std::move(a)};
  return p;
}

FNode FNode::mk_and(std::vector<FNode> kids) {
  if (kids.empty()) return mk_true();
  if (kids.size() == 1) return kids[0];
  FNode n;
  n.k = And;
  n.kids = std::move(kids);
  return n;
}
FNode FNode::mk_or(std::vector<FNode> kids) {
  if (kids.empty()) throw std::invalid_argument("empty disjunction");
  if (kids.size() == 1) return kids[0];
  FNode n;
  n.k = Or;
  n.kids = std::move(kids);
  return n;
}
FNode FNode::mk_not(FNode a) {
  if (a.k == Not) return a.kids[0];
  FNode n;
  n.k = Not;
  n.kids = {std::move(a)};
  return n;
}
FNode FNode::mk_set_eq(STerm s, STerm t) {
  FNode n;
  n.k = SetEq;
  n.s = std::move(s);
  n.t = std::move(t);
  return n;
}
FNode FNode::mk_set_sub(STerm s, STerm t) {
  FNode n;
  n.k = SetSub;
  n.s = std::move(s);
  n.t = std::move(t);
  return n;
}
FNode FNode::mk_card_eq(PTerm a, PTerm b) {
  FNode n;
  n.k = CardEq;
  n.a = std::move(a);
  n.b = std::move(b);
  return n;
}
FNode FNode::mk_card_lt(PTerm a, PTerm b) {
  FNode n;
  n.k = CardLt;
  n.a = std::move(a);
  n.b = std::move(b);
  return n;
}
FNode FNode::mk_div(long long n_, PTerm a) {
  if (n_ <= 0) throw std::invalid_argument("divisor must be positive");
  FNode n;
  n.k = Div;
  n.n = n_;
  n.a = std::move(a);
  return n;
}

// ---- translation from syntax trees ----

static STerm tr_set(const SetTermPtr& s, const LeafResolver& leafVar) {
  switch (s->kind) {
    case SK::Empty:
      return STerm::mk_empty();
    case SK::Universe:
      return STerm::mk_univ();
    case SK::Role:
    case SK::Indiv:
    case SK::ConceptV:
      return STerm::mk_var(leafVar(*s));
    case SK::Union:
      return STerm::mk_union(tr_set(s->kids[0], leafVar), tr_set(s->kids[1], leafVar));
    case SK::Inter:
      return STerm::mk_inter(tr_set(s->kids[0], leafVar), tr_set(s->kids[1], leafVar));
    case SK::Complement:
      return STerm::mk_compl(tr_set(s->kids[0], leafVar));
  }
  throw std::logic_error("unreachable");
}

static PTerm tr_pa(const PAExprPtr& p, const LeafResolver& leafVar) {
  switch (p->kind) {
    case PK::IntConst:
      return PTerm::mk_const(p->value);
    case PK::Card:
      return PTerm::mk_card(tr_set(p->set, leafVar));
    case PK::Sum:
      return PTerm::mk_sum(tr_pa(p->kids[0], leafVar), tr_pa(p->kids[1], leafVar));
    case PK::ScalarMul:
      return PTerm::mk_mul(p->value, tr_pa(p->kids[0], leafVar));
  }
  throw std::logic_error("unreachable");
}

FNode translate_atom(const CAtomPtr& atom, const LeafResolver& leafVar) {
  switch (atom->kind) {
    case AK::And: {
      std::vector<FNode> kids;
      for (auto& k : atom->kids) kids.push_back(translate_atom(k, leafVar));
      return FNode::mk_and(std::move(kids));
    }
    case AK::Or: {
      std::vector<FNode> kids;
      for (auto& k : atom->kids) kids.push_back(translate_atom(k, leafVar));
      return FNode::mk_or(std::move(kids));
    }
    case AK::Not:
      return FNode::mk_not(translate_atom(atom->kids[0], leafVar));
    case AK::SetEq:
      return FNode::mk_set_eq(tr_set(atom->s, leafVar), tr_set(atom->t, leafVar));
    case AK::SetSub:
      return FNode::mk_set_sub(tr_set(atom->s, leafVar), tr_set(atom->t, leafVar));
    case AK::CardEq:
      return FNode::mk_card_eq(tr_pa(atom->k, leafVar), tr_pa(atom->l, leafVar));
    case AK::CardLt:
      return FNode::mk_card_lt(tr_pa(atom->k, leafVar), tr_pa(atom->l, leafVar));
    case AK::Divides:
      return FNode::mk_div(atom->divisor, tr_pa(atom->l, leafVar));
  }
  throw std::logic_error("unreachable");
}

// ---- rendering ----

static void rend_set(const STerm& s, const Formula& f, std::ostream& os, int prec) {
  switch (s.k) {
    case STerm::Var:
      os << f.vars[s.var];
      break;
    case STerm::Empty:
      os << "empty";
      break;
    case STerm::Univ:
      os << "univ";
      break;
    case STerm::Union:
      if (prec > 0) os << "(";
      rend_set(s.kids[0], f, os, 0);
      os << " union ";
      rend_set(s.kids[1], f, os, 1);
      if (prec > 0) os << ")";
      break;
    case STerm::Inter:
      if (prec > 1) os << "(";
      rend_set(s.kids[0], f, os, 1);
      os << " inter ";
      rend_set(s.kids[1], f, os, 2);
      if (prec > 1) os << ")";
      break;
    case STerm::Compl:
      os << "comp(";
      rend_set(s.kids[0], f, os, 0);
      os << ")";
      break;
  }
}

static void rend_pa(const PTerm& p, const Formula& f, std::ostream& os) {
  switch (p.k) {
    case PTerm::Const:
      os << p.c;
      break;
    case PTerm::Card:
      os << "card(";
      rend_set(p.s, f, os, 0);
      os << ")";
      break;
    case PTerm::Sum:
      rend_pa(p.kids[0], f, os);
      os << " + ";
      rend_pa(p.kids[1], f, os);
      break;
    case PTerm::Mul:
      os << p.c << " * ";
      if (p.kids[0].k == PTerm::Sum) {
        os << "(";
        rend_pa(p.kids[0], f, os);
        os << ")";
      } else {
        rend_pa(p.kids[0], f, os);
      }
      break;
  }
}

static void rend_node(const FNode& n, const Formula& f, std::ostream& os, int prec) {
  switch (n.k) {
    case FNode::True:
      os << "true";
      break;
    case FNode::Or:
      if (prec > 0) os << "(";
      for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << " or ";
        rend_node(n.kids[i], f, os, 1);
      }
      if (prec > 0) os << ")";
      break;
    case FNode::And:
      if (prec > 1) os << "(";
      for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << " and ";
        rend_node(n.kids[i], f, os, 2);
      }
      if (prec > 1) os << ")";
      break;
    case FNode::Not:
      os << "not ";
      if (n.kids[0].k == FNode::And || n.kids[0].k == FNode::Or) {
        os << "(";
        rend_node(n.kids[0], f, os, 0);
        os << ")";
      } else {
        rend_node(n.kids[0], f, os, 2);
      }
      break;
    case FNode::SetEq:
      rend_set(n.s, f, os, 0);
      os << " = ";
      rend_set(n.t, f, os, 0);
      break;
    case FNode::SetSub:
      rend_set(n.s, f, os, 0);
      os << " <= ";
      rend_set(n.t, f, os, 0);
      break;
    case FNode::CardEq:
      rend_pa(n.a, f, os);
      os << " = ";
      rend_pa(n.b, f, os);
      break;
    case FNode::CardLt:
      rend_pa(n.a, f, os);
      os << " < ";
      rend_pa(n.b, f, os);
      break;
    case FNode::Div:
      os << "div(" << n.n << ", ";
      rend_pa(n.a, f, os);
      os << ")";
      break;
    case FNode::DivRem:
      os << "mod(" << n.n << ", " << n.r << ", ";
      rend_pa(n.a, f, os);
      os << ")";
      break;
  }
}

std::string render(const Formula& f) {
  std::ostringstream os;
  rend_node(f.root, f, os, 0);
  return os.str();
}

std::string render_region(const Formula& f, const Region& r) {
  std::ostringstream os;
  for (size_t i = 0; i < r.signs.size(); ++i) {
    if (i) os << " ";
    os << (r.signs[i] ? "" : "~") << f.vars[i];
  }
  return os.str();
}

// ---- solutions ----

long long Solution::universe_size() const {
  long long u = 0;
  for (auto& [r, c] : counts) u += c;
  return u;
}

std::vector<std::vector<int>> Solution::materialize() const {
  std::vector<std::vector<int>> out;
  int id = 0;
  for (auto& [r, c] : counts) {
    std::vector<int> elems;
    for (long long i = 0; i < c; ++i) elems.push_back(id++);
    out.push_back(std::move(elems));
  }
  return out;
}

std::vector<std::set<int>> Solution::var_sets() const {
  std::vector<std::set<int>> sets(nvars);
  auto mat = materialize();
  for (size_t ri = 0; ri < counts.size(); ++ri)
    for (int v = 0; v < nvars; ++v)
      if (counts[ri].first.signs[v]) sets[v].insert(mat[ri].begin(), mat[ri].end());
  return sets;
}

// ---- evaluation under explicit substitutions ----

namespace {

std::set<int> eval_set(const STerm& s, const Assignment& sig, const std::set<int>& univ) {
  switch (s.k) {
    case STerm::Var:
      return sig.sets[s.var];
    case STerm::Empty:
      return {};
    case STerm::Univ:
      return univ;
    case STerm::Union: {
      auto a = eval_set(s.kids[0], sig, univ);
      auto b = eval_set(s.kids[1], sig, univ);
      a.insert(b.begin(), b.end());
      return a;
    }
    case STerm::Inter: {
      auto a = eval_set(s.kids[0], sig, univ);
      auto b = eval_set(s.kids[1], sig, univ);
      std::set<int> out;
      for (int x : a)
        if (b.count(x)) out.insert(x);
      return out;
    }
    case STerm::Compl: {
      auto a = eval_set(s.kids[0], sig, univ);
      std::set<int> out;
      for (int x : univ)
        if (!a.count(x)) out.insert(x);
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

Int eval_pa(const PTerm& p, const Assignment& sig, const std::set<int>& univ) {
  switch (p.k) {
    case PTerm::Const:
      return Int(p.c);
    case PTerm::Card:
      return Int(eval_set(p.s, sig, univ).size());
    case PTerm::Sum:
      return eval_pa(p.kids[0], sig, univ) + eval_pa(p.kids[1], sig, univ);
    case PTerm::Mul:
      return Int(p.c) * eval_pa(p.kids[0], sig, univ);
  }
  throw std::logic_error("unreachable");
}

bool eval_node(const FNode& n, const Assignment& sig, const std::set<int>& univ) {
  switch (n.k) {
    case FNode::True:
      return true;
    case FNode::And:
      for (auto& k : n.kids)
        if (!eval_node(k, sig, univ)) return false;
      return true;
    case FNode::Or:
      for (auto& k : n.kids)
        if (eval_node(k, sig, univ)) return true;
      return false;
    case FNode::Not:
      return !eval_node(n.kids[0], sig, univ);
    case FNode::SetEq:
      return eval_set(n.s, sig, univ) == eval_set(n.t, sig, univ);
    case FNode::SetSub: {
      auto a = eval_set(n.s, sig, univ);
      auto b = eval_set(n.t, sig, univ);
      return std::includes(b.begin(), b.end(), a.begin(), a.end());
    }
    case FNode::CardEq:
      return eval_pa(n.a, sig, univ) == eval_pa(n.b, sig, univ);
    case FNode::CardLt:
      return eval_pa(n.a, sig, univ) < eval_pa(n.b, sig, univ);
    case FNode::Div:
      return eval_pa(n.a, sig, univ) % n.n == 0;
    case FNode::DivRem:
      return (eval_pa(n.a, sig, univ) - n.r) % n.n == 0;
  }
  throw std::logic_error("unreachable");
}

}  // namespace

bool eval_formula(const Formula& f, const Assignment& sig) {
  if (int(sig.sets.size()) != f.var_count())
    throw std::invalid_argument("assignment arity mismatch");
  std::set<int> univ;
  for (int i = 0; i < sig.universeSize; ++i) univ.insert(i);
  for (auto& s : sig.sets)
    for (int x : s)
      if (!univ.count(x)) throw std::invalid_argument("assigned set is not a subset of U");
  return eval_node(f.root, sig, univ);
}

// ---- region predicates ----

namespace {

bool region_in(const STerm& s, const std::vector<bool>& signs) {
  switch (s.k) {
    case STerm::Var:
      return signs[s.var];
    case STerm::Empty:
      return false;
    case STerm::Univ:
      return true;
    case STerm::Union:
      return region_in(s.kids[0], signs) || region_in(s.kids[1], signs);
    case STerm::Inter:
      return region_in(s.kids[0], signs) && region_in(s.kids[1], signs);
    case STerm::Compl:
      return !region_in(s.kids[0], signs);
  }
  throw std::logic_error("unreachable");
}

// three-valued over partial sign vectors (-1 unknown)
int region_in3(const STerm& s, const std::vector<int>& signs) {
  switch (s.k) {
    case STerm::Var:
      return signs[s.var];
    case STerm::Empty:
      return 0;
    case STerm::Univ:
      return 1;
    case STerm::Union: {
      int a = region_in3(s.kids[0], signs);
      if (a == 1) return 1;
      int b = region_in3(s.kids[1], signs);
      if (b == 1) return 1;
      return (a == 0 && b == 0) ? 0 : -1;
    }
    case STerm::Inter: {
      int a = region_in3(s.kids[0], signs);
      if (a == 0) return 0;
      int b = region_in3(s.kids[1], signs);
      if (b == 0) return 0;
      return (a == 1 && b == 1) ? 1 : -1;
    }
    case STerm::Compl: {
      int a = region_in3(s.kids[0], signs);
      return a < 0 ? -1 : 1 - a;
    }
  }
  throw std::logic_error("unreachable");
}

void collect_vars(const STerm& s, std::set<int>& out) {
  if (s.k == STerm::Var) out.insert(s.var);
  for (auto& k : s.kids) collect_vars(k, out);
}
void collect_vars(const PTerm& p, std::set<int>& out) {
  if (p.k == PTerm::Card) collect_vars(p.s, out);
  for (auto& k : p.kids) collect_vars(k, out);
}
void collect_vars(const FNode& n, std::set<int>& out) {
  for (auto& k : n.kids) collect_vars(k, out);
  if (n.k == FNode::SetEq || n.k == FNode::SetSub) {
    collect_vars(n.s, out);
    collect_vars(n.t, out);
  }
  if (n.k == FNode::CardEq || n.k == FNode::CardLt) {
    collect_vars(n.a, out);
    collect_vars(n.b, out);
  }
  if (n.k == FNode::Div || n.k == FNode::DivRem) collect_vars(n.a, out);
}

}  // namespace

std::set<int> formula_vars(const FNode& n) {
  std::set<int> out;
  collect_vars(n, out);
  return out;
}

namespace {

// ---- preprocessing: NNF with negative equality/divisibility rewritten ----

FNode prep(const FNode& n, bool pos) {
  switch (n.k) {
    case FNode::True:
      // false is encoded as 0 < 0
      return pos ? FNode::mk_true()
                 : FNode::mk_card_lt(PTerm::mk_const(0), PTerm::mk_const(0));
    case FNode::And: {
      std::vector<FNode> kids;
      for (auto& k : n.kids) kids.push_back(prep(k, pos));
      return pos ? FNode::mk_and(std::move(kids)) : FNode::mk_or(std::move(kids));
    }
    case FNode::Or: {
      std::vector<FNode> kids;
      for (auto& k : n.kids) kids.push_back(prep(k, pos));
      return pos ? FNode::mk_or(std::move(kids)) : FNode::mk_and(std::move(kids));
    }
    case FNode::Not:
      return prep(n.kids[0], !pos);
    case FNode::SetEq:
    case FNode::SetSub:
    case FNode::CardLt:
      return pos ? n : FNode::mk_not(n);
    case FNode::CardEq:
      if (pos) return n;
      return FNode::mk_or({FNode::mk_card_lt(n.a, n.b), FNode::mk_card_lt(n.b, n.a)});
    case FNode::Div: {
      if (pos) return n;
      std::vector<FNode> kids;
      for (long long r = 1; r < n.n; ++r) {
        FNode d;
        d.k = FNode::DivRem;
        d.n = n.n;
        d.r = r;
        d.a = n.a;
        kids.push_back(std::move(d));
      }
      if (kids.empty())  // n == 1 divides everything; negation is false
        return FNode::mk_card_lt(PTerm::mk_const(0), PTerm::mk_const(0));
      return FNode::mk_or(std::move(kids));
    }
    case FNode::DivRem: {
      if (pos) return n;
      std::vector<FNode> kids;
      FNode d0;
      d0.k = FNode::Div;
      d0.n = n.n;
      d0.a = n.a;
      kids.push_back(std::move(d0));
      for (long long r = 1; r < n.n; ++r) {
        if (r == n.r) continue;
        FNode d;
        d.k = FNode::DivRem;
        d.n = n.n;
        d.r = r;
        d.a = n.a;
        kids.push_back(std::move(d));
      }
      return FNode::mk_or(std::move(kids));
    }
  }
  throw std::logic_error("unreachable");
}

// ---- the DPLL-style solver ----

struct Lit {
  const FNode* atom = nullptr;  // SetEq/SetSub/CardEq/CardLt/Div/DivRem
  bool pos = true;
};

struct ResourceHit {};

struct Theory {
  // regions over occurring variables, completed with negative signs
  std::vector<Region> regions;
  LinProblem lp;      // region vars then divisibility aux var pairs
  int nRegions = 0;
  bool trivialUnsat = false;
};

struct Solver {
  const Formula& f;
  SolverConfig cfg;
  long long nodes = 0;
  long long ilpNodes = 0;
  bool resource = false;
  std::optional<Solution> found;

  Solver(const Formula& f_, const SolverConfig& c) : f(f_), cfg(c) {}

  // Accumulate (coeff per region, constant) for a PA term.
  void lin_pa(const PTerm& p, const std::vector<Region>& regions, Int mult,
              std::vector<Int>& coeffs, Int& cst) {
    switch (p.k) {
      case PTerm::Const:
        cst += mult * p.c;
        return;
      case PTerm::Card:
        for (size_t i = 0; i < regions.size(); ++i)
          if (region_in(p.s, regions[i].signs)) coeffs[i] += mult;
        return;
      case PTerm::Sum:
        lin_pa(p.kids[0], regions, mult, coeffs, cst);
        lin_pa(p.kids[1], regions, mult, coeffs, cst);
        return;
      case PTerm::Mul:
        lin_pa(p.kids[0], regions, mult * p.c, coeffs, cst);
        return;
    }
  }

  // gcd-tighten and append a row; returns false when the row is trivially
  // unsatisfiable.
  bool add_row(LinProblem& lp, std::vector<Int> a, Rel rel, Int rhs) {
    Int g = 0;
    bool any = false;
    for (auto& x : a) {
      if (x != 0) {
        g = gcd(g, abs(x));
        any = true;
      }
    }
    if (!any) {
      bool ok = rel == Rel::Eq ? rhs == 0 : (rel == Rel::Le ? rhs >= 0 : rhs <= 0);
      return ok;
    }
    if (g > 1) {
      if (rel == Rel::Eq && rhs % g != 0) return false;
      for (auto& x : a) x /= g;
      if (rel == Rel::Eq)
        rhs /= g;
      else if (rel == Rel::Le)
        rhs = rhs >= 0 ? Int(rhs / g) : Int(-((-rhs + g - 1) / g));  // floor
      else
        rhs = rhs >= 0 ? Int((rhs + g - 1) / g) : Int(-((-rhs) / g));  // ceil
    }
    lp.add(std::move(a), rel, std::move(rhs));
    return true;
  }

  // Build regions and the linear problem for a set of asserted literals.
  Theory build_theory(const std::vector<Lit>& lits) {
    Theory th;
    std::set<int> occ;
    std::vector<const FNode*> posSetAtoms;
    for (auto& l : lits) {
      collect_vars(*l.atom, occ);
      if (l.pos && (l.atom->k == FNode::SetEq || l.atom->k == FNode::SetSub))
        posSetAtoms.push_back(l.atom);
    }
    std::vector<int> occv(occ.begin(), occ.end());

    // lazy region enumeration with three-valued pruning
    std::vector<int> signs(f.var_count(), -1);
    // variables not occurring default to negative
    for (int v = 0; v < f.var_count(); ++v)
      if (!occ.count(v)) signs[v] = 0;

    std::function<void(size_t)> rec = [&](size_t i) {
      for (auto* a : posSetAtoms) {
        int sIn = region_in3(a->s, signs);
        int tIn = region_in3(a->t, signs);
        if (a->k == FNode::SetSub && sIn == 1 && tIn == 0) return;
        if (a->k == FNode::SetEq && ((sIn == 1 && tIn == 0) || (sIn == 0 && tIn == 1))) return;
      }
      if (i == occv.size()) {
        if (static_cast<long long>(th.regions.size()) >= cfg.maxRegions) throw ResourceHit{};
        Region r;
        r.signs.resize(f.var_count());
        for (int v = 0; v < f.var_count(); ++v) r.signs[v] = signs[v] == 1;
        th.regions.push_back(std::move(r));
        return;
      }
      signs[occv[i]] = 0;
      rec(i + 1);
      signs[occv[i]] = 1;
      rec(i + 1);
      signs[occv[i]] = -1;
    };
    rec(0);

    th.nRegions = int(th.regions.size());
    int nAux = 0;
    for (auto& l : lits)
      if (l.atom->k == FNode::Div || l.atom->k == FNode::DivRem) ++nAux;
    th.lp.nvars = th.nRegions + 2 * nAux;

    int aux = th.nRegions;
    auto zero = [&]() { return std::vector<Int>(th.lp.nvars, Int(0)); };
    for (auto& l : lits) {
      const FNode& n = *l.atom;
      switch (n.k) {
        case FNode::SetEq:
        case FNode::SetSub: {
          if (l.pos) break;  // enforced by region pruning
          auto row = zero();
          bool nonEmptyPossible = false;
          for (int i = 0; i < th.nRegions; ++i) {
            bool sIn = region_in(n.s, th.regions[i].signs);
            bool tIn = region_in(n.t, th.regions[i].signs);
            bool inDiff = n.k == FNode::SetSub ? (sIn && !tIn) : (sIn != tIn);
            if (inDiff) {
              row[i] = 1;
              nonEmptyPossible = true;
            }
          }
          if (!nonEmptyPossible) {
            th.trivialUnsat = true;
            return th;
          }
          if (!add_row(th.lp, std::move(row), Rel::Ge, 1)) {
            th.trivialUnsat = true;
            return th;
          }
          break;
        }
        case FNode::CardEq:
        case FNode::CardLt: {
          std::vector<Int> coeffs(th.lp.nvars, Int(0));
          Int cst = 0;
          lin_pa(n.a, th.regions, 1, coeffs, cst);
          lin_pa(n.b, th.regions, -1, coeffs, cst);
          // sum(coeffs) + cst REL 0
          bool ok;
          if (n.k == FNode::CardEq) {
            if (!l.pos) throw std::logic_error("negated CardEq after prep");
            ok = add_row(th.lp, std::move(coeffs), Rel::Eq, -cst);
          } else if (l.pos) {
            // a < b  <=>  a - b <= -1 (integers)
            ok = add_row(th.lp, std::move(coeffs), Rel::Le, -cst - 1);
          } else {
            // a >= b
            ok = add_row(th.lp, std::move(coeffs), Rel::Ge, -cst);
          }
          if (!ok) {
            th.trivialUnsat = true;
            return th;
          }
          break;
        }
        case FNode::Div:
        case FNode::DivRem: {
          if (!l.pos) throw std::logic_error("negated divisibility after prep");
          std::vector<Int> coeffs(th.lp.nvars, Int(0));
          Int cst = 0;
          lin_pa(n.a, th.regions, 1, coeffs, cst);
          coeffs[aux] = -n.n;
          coeffs[aux + 1] = n.n;
          aux += 2;
          Int rhs = (n.k == FNode::DivRem ? Int(n.r) : Int(0)) - cst;
          if (!add_row(th.lp, std::move(coeffs), Rel::Eq, std::move(rhs))) {
            th.trivialUnsat = true;
            return th;
          }
          break;
        }
        default:
          throw std::logic_error("non-literal in trail");
      }
    }
    return th;
  }

  bool rational_consistent(const std::vector<Lit>& lits) {
    Theory th = build_theory(lits);
    if (th.trivialUnsat) return false;
    return lp_feasible(th.lp).has_value();
  }

  // Unit-pivot Gaussian elimination over the equality rows, with gcd
  // infeasibility checks.  Eliminated variables are recorded as integer
  // expressions over the survivors so witnesses can be reconstructed; their
  // non-negativity stays behind as an inequality row.
  struct Eliminated {
    int var;
    Int rhs;                // x_var = rhs - sum coeff_j x_j
    std::vector<Int> row;   // coefficients over all variables (var's is 0)
  };

  // returns false on detected integer infeasibility
  bool int_preprocess(LinProblem& lp, std::vector<Eliminated>& elim) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (size_t i = 0; i < lp.rows.size(); ++i) {
        LinRow& r = lp.rows[i];
        Int g = 0;
        for (auto& x : r.a) g = gcd(g, abs(x));
        if (g == 0) {
          bool ok = r.rel == Rel::Eq ? r.rhs == 0 : (r.rel == Rel::Le ? r.rhs >= 0 : r.rhs <= 0);
          if (!ok) return false;
          lp.rows.erase(lp.rows.begin() + i);
          progress = true;
          break;
        }
        if (r.rel != Rel::Eq) continue;
        if (g > 1) {
          if (r.rhs % g != 0) return false;
          for (auto& x : r.a) x /= g;
          r.rhs /= g;
        }
        int pivot = -1;
        for (int j = 0; j < lp.nvars && pivot < 0; ++j)
          if (abs(r.a[j]) == 1) pivot = j;
        if (pivot < 0) continue;
        // normalize so the pivot coefficient is +1
        if (r.a[pivot] < 0) {
          for (auto& x : r.a) x = -x;
          r.rhs = -r.rhs;
        }
        Eliminated e;
        e.var = pivot;
        e.rhs = r.rhs;
        e.row = r.a;
        e.row[pivot] = 0;
        LinRow eq = r;
        lp.rows.erase(lp.rows.begin() + i);
        for (auto& other : lp.rows) {
          Int c = other.a[pivot];
          if (c == 0) continue;
          for (int j = 0; j < lp.nvars; ++j) other.a[j] -= c * eq.a[j];
          other.rhs -= c * eq.rhs;
        }
        // x_pivot >= 0 becomes rhs - sum coeffs >= 0
        LinRow nonneg;
        nonneg.a.assign(lp.nvars, Int(0));
        for (int j = 0; j < lp.nvars; ++j) nonneg.a[j] = e.row[j];
        nonneg.rel = Rel::Le;
        nonneg.rhs = e.rhs;
        lp.rows.push_back(std::move(nonneg));
        elim.push_back(std::move(e));
        progress = true;
        break;
      }
    }
    return true;
  }

  std::optional<std::vector<Int>> ilp_search(const LinProblem& lp) {
    if (++ilpNodes > cfg.maxIlpNodes) throw ResourceHit{};
    auto sol = lp_feasible(lp);
    if (!sol) return std::nullopt;
    int frac = -1;
    for (int i = 0; i < lp.nvars; ++i) {
      if (denominator((*sol)[i]) != 1) {
        frac = i;
        break;
      }
    }
    if (frac < 0) {
      std::vector<Int> out;
      out.reserve(lp.nvars);
      for (auto& x : *sol) out.push_back(numerator(x));
      return out;
    }
    Int lo = numerator((*sol)[frac]) / denominator((*sol)[frac]);  // floor for positive
    // values are >= 0 here, so integer division is floor
    {
      LinProblem down = lp;
      std::vector<Int> row(lp.nvars, Int(0));
      row[frac] = 1;
      down.add(std::move(row), Rel::Le, lo);
      auto r = ilp_search(down);
      if (r) return r;
    }
    {
      LinProblem up = lp;
      std::vector<Int> row(lp.nvars, Int(0));
      row[frac] = 1;
      up.add(std::move(row), Rel::Ge, lo + 1);
      auto r = ilp_search(up);
      if (r) return r;
    }
    return std::nullopt;
  }

  std::optional<std::vector<Int>> ilp(LinProblem lp) {
    std::vector<Eliminated> elim;
    if (!int_preprocess(lp, elim)) return std::nullopt;
    auto r = ilp_search(lp);
    if (!r) return std::nullopt;
    // back-substitute eliminated variables (most recent first)
    for (auto it = elim.rbegin(); it != elim.rend(); ++it) {
      Int v = it->rhs;
      for (int j = 0; j < lp.nvars; ++j) v -= it->row[j] * (*r)[j];
      if (v < 0) throw std::logic_error("eliminated variable reconstructed negative");
      (*r)[it->var] = v;
    }
    return r;
  }

  enum class R { Sat, Unsat, Resource };

  R leaf(const std::vector<Lit>& lits) {
    Theory th = build_theory(lits);
    if (th.trivialUnsat) return R::Unsat;
    std::optional<std::vector<Int>> point;
    try {
      point = ilp(th.lp);
    } catch (ResourceHit&) {
      return R::Resource;
    }
    if (!point) return R::Unsat;
    Solution sol;
    sol.nvars = f.var_count();
    for (int i = 0; i < th.nRegions; ++i) {
      long long c = (*point)[i].convert_to<long long>();
      if (c > 0) sol.counts.emplace_back(th.regions[i], c);
    }
    // the witness must re-evaluate true on the original formula
    Assignment sig;
    sig.universeSize = sol.universe_size();
    auto sets = sol.var_sets();
    sig.sets.assign(sets.begin(), sets.end());
    if (!eval_formula(f, sig)) throw std::logic_error("solver produced a non-model witness");
    found = sol;
    return R::Sat;
  }

  R dfs(std::vector<const FNode*> pending, std::vector<Lit> trail) {
    if (++nodes > cfg.maxNodes) return R::Resource;
    std::vector<const FNode*> deferred;
    while (!pending.empty()) {
      const FNode* n = pending.back();
      pending.pop_back();
      switch (n->k) {
        case FNode::True:
          break;
        case FNode::And:
          for (auto& k : n->kids) pending.push_back(&k);
          break;
        case FNode::Or:
          deferred.push_back(n);
          break;
        case FNode::Not:
          trail.push_back({&n->kids[0], false});
          break;
        default:
          trail.push_back({n, true});
          break;
      }
    }
    try {
      if (!rational_consistent(trail)) return R::Unsat;
    } catch (ResourceHit&) {
      return R::Resource;
    }
    if (deferred.empty()) return leaf(trail);
    const FNode* branch = deferred.back();
    deferred.pop_back();
    bool sawResource = false;
    for (auto& kid : branch->kids) {
      std::vector<const FNode*> next = deferred;
      next.push_back(&kid);
      R r = dfs(std::move(next), trail);
      if (r == R::Sat) return R::Sat;
      if (r == R::Resource) sawResource = true;
    }
    return sawResource ? R::Resource : R::Unsat;
  }
};

}  // namespace

SolveResult solve(const Formula& f, const SolverConfig& cfg) {
  Solver s(f, cfg);
  FNode prepped = prep(f.root, true);
  Solver::R r = s.dfs({&prepped}, {});
  SolveResult out;
  switch (r) {
    case Solver::R::Sat:
      out.verdict = Verdict::Sat;
      out.solution = s.found;
      break;
    case Solver::R::Unsat:
      out.verdict = Verdict::Unsat;
      break;
    case Solver::R::Resource:
      out.verdict = Verdict::ResourceExceeded;
      break;
  }
  return out;
}

namespace {

STerm region_term(const Region& r) {
  STerm acc;
  bool first = true;
  for (size_t v = 0; v < r.signs.size(); ++v) {
    STerm lit = STerm::mk_var(int(v));
    if (!r.signs[v]) lit = STerm::mk_compl(std::move(lit));
    if (first) {
      acc = std::move(lit);
      first = false;
    } else {
      acc = STerm::mk_inter(std::move(acc), std::move(lit));
    }
  }
  if (first) return STerm::mk_univ();  // no variables: the whole universe
  return acc;
}

}  // namespace

SolveResult solve_with_support(const Formula& f, const std::vector<Region>& mustNonEmpty,
                               const std::vector<Region>& mustEmpty, const SolverConfig& cfg) {
  for (auto& r : mustNonEmpty)
    for (auto& e : mustEmpty)
      if (r == e) return {Verdict::Unsat, std::nullopt};
  Formula g = f;
  std::vector<FNode> conj{g.root};
  for (auto& r : mustNonEmpty)
    conj.push_back(FNode::mk_card_ge(PTerm::mk_card(region_term(r)), PTerm::mk_const(1)));
  for (auto& r : mustEmpty)
    conj.push_back(FNode::mk_set_eq(region_term(r), STerm::mk_empty()));
  g.root = FNode::mk_and(std::move(conj));
  return solve(g, cfg);
}

SolveResult solve_exact_support(const Formula& f, const std::vector<Region>& support,
                                const SolverConfig& cfg) {
  Formula g = f;
  std::vector<FNode> conj{g.root};
  STerm uni = STerm::mk_empty();
  bool first = true;
  for (auto& r : support) {
    conj.push_back(FNode::mk_card_ge(PTerm::mk_card(region_term(r)), PTerm::mk_const(1)));
    uni = first ? region_term(r) : STerm::mk_union(std::move(uni), region_term(r));
    first = false;
  }
  conj.push_back(FNode::mk_set_sub(STerm::mk_univ(), std::move(uni)));
  g.root = FNode::mk_and(std::move(conj));
  return solve(g, cfg);
}

namespace {

void count_card_atoms(const FNode& n, long long& atoms, long long& maxConst) {
  for (auto& k : n.kids) count_card_atoms(k, atoms, maxConst);
  auto scanPa = [&](const PTerm& p, auto&& self) -> void {
    if (p.k == PTerm::Const) maxConst = std::max(maxConst, std::abs(p.c));
    if (p.k == PTerm::Mul) maxConst = std::max(maxConst, std::abs(p.c));
    for (auto& k : p.kids) self(k, self);
  };
  if (n.k == FNode::CardEq || n.k == FNode::CardLt) {
    ++atoms;
    scanPa(n.a, scanPa);
    scanPa(n.b, scanPa);
  }
  if (n.k == FNode::Div || n.k == FNode::DivRem) {
    ++atoms;
    maxConst = std::max(maxConst, n.n);
    scanPa(n.a, scanPa);
  }
}

}  // namespace

long long sparse_bound(const Formula& f, const SolverConfig& cfg) {
  long long total = f.var_count() >= 62 ? std::numeric_limits<long long>::max()
                                        : (1LL << f.var_count());
  long long atoms = 0, maxConst = 1;
  count_card_atoms(f.root, atoms, maxConst);
  long long bits = 1;
  while ((1LL << bits) <= maxConst) ++bits;
  long long fancy = cfg.sparseMultiplier * (4 + atoms * (2 + bits));
  return std::max<long long>(1, std::min(total, fancy));
}

namespace {

VennSystem::Node vd_node(const FNode& n, const std::vector<Region>& regions) {
  VennSystem::Node out;
  auto lin = [&](const PTerm& a, const PTerm& b, long long& rhs)
      -> std::vector<std::pair<long long, int>> {
    std::vector<Int> coeffs(regions.size(), Int(0));
    Int cst = 0;
    // reuse the solver's accumulation logic inline
    std::function<void(const PTerm&, Int)> go = [&](const PTerm& p, Int mult) {
      switch (p.k) {
        case PTerm::Const:
          cst += mult * p.c;
          break;
        case PTerm::Card:
          for (size_t i = 0; i < regions.size(); ++i)
            if (region_in(p.s, regions[i].signs)) coeffs[i] += mult;
          break;
        case PTerm::Sum:
          go(p.kids[0], mult);
          go(p.kids[1], mult);
          break;
        case PTerm::Mul:
          go(p.kids[0], mult * p.c);
          break;
      }
    };
    go(a, 1);
    go(b, -1);
    std::vector<std::pair<long long, int>> terms;
    for (size_t i = 0; i < coeffs.size(); ++i)
      if (coeffs[i] != 0) terms.emplace_back(coeffs[i].convert_to<long long>(), int(i));
    rhs = (-cst).convert_to<long long>();
    return terms;
  };
  switch (n.k) {
    case FNode::True:
      out.k = VennSystem::Node::True;
      break;
    case FNode::And:
    case FNode::Or: {
      out.k = n.k == FNode::And ? VennSystem::Node::And : VennSystem::Node::Or;
      for (auto& k : n.kids) out.kids.push_back(vd_node(k, regions));
      break;
    }
    case FNode::Not:
      out.k = VennSystem::Node::Not;
      out.kids.push_back(vd_node(n.kids[0], regions));
      break;
    case FNode::SetEq:
    case FNode::SetSub: {
      out.k = VennSystem::Node::Lin;
      out.rel = Rel::Le;
      out.rhs = 0;
      for (size_t i = 0; i < regions.size(); ++i) {
        bool sIn = region_in(n.s, regions[i].signs);
        bool tIn = region_in(n.t, regions[i].signs);
        bool inDiff = n.k == FNode::SetSub ? (sIn && !tIn) : (sIn != tIn);
        if (inDiff) out.terms.emplace_back(1, int(i));
      }
      break;
    }
    case FNode::CardEq: {
      out.k = VennSystem::Node::Lin;
      out.rel = Rel::Eq;
      out.terms = lin(n.a, n.b, out.rhs);
      break;
    }
    case FNode::CardLt: {
      out.k = VennSystem::Node::Lin;
      out.rel = Rel::Le;
      out.terms = lin(n.a, n.b, out.rhs);
      out.rhs -= 1;  // integer semantics of strict <
      break;
    }
    case FNode::Div:
    case FNode::DivRem: {
      out.k = VennSystem::Node::Div;
      out.divisor = n.n;
      long long rhs = 0;
      out.terms = lin(n.a, PTerm::mk_const(n.k == FNode::DivRem ? n.r : 0), rhs);
      out.rhs = -rhs;  // divisor | sum(terms) + rhs
      break;
    }
  }
  return out;
}

}  // namespace

VennSystem venn_decompose(const Formula& f, const SolverConfig& cfg) {
  VennSystem vs;
  int n = f.var_count();
  if (n >= 62 || (1LL << n) > cfg.maxRegions)
    throw std::length_error("region count exceeds the configured cap");
  for (long long m = 0; m < (1LL << n); ++m) {
    Region r;
    r.signs.resize(n);
    for (int v = 0; v < n; ++v) r.signs[v] = (m >> (n - 1 - v)) & 1;
    vs.regions.push_back(std::move(r));
  }
  std::sort(vs.regions.begin(), vs.regions.end());
  // top-level positive set atoms force emptiness
  std::vector<const FNode*> stack{&f.root};
  std::vector<const FNode*> topSet;
  while (!stack.empty()) {
    const FNode* x = stack.back();
    stack.pop_back();
    if (x->k == FNode::And)
      for (auto& k : x->kids) stack.push_back(&k);
    else if (x->k == FNode::SetEq || x->k == FNode::SetSub)
      topSet.push_back(x);
  }
  for (size_t i = 0; i < vs.regions.size(); ++i) {
    for (auto* a : topSet) {
      bool sIn = region_in(a->s, vs.regions[i].signs);
      bool tIn = region_in(a->t, vs.regions[i].signs);
      bool inDiff = a->k == FNode::SetSub ? (sIn && !tIn) : (sIn != tIn);
      if (inDiff) {
        vs.forcedEmpty.push_back(int(i));
        break;
      }
    }
  }
  vs.root = vd_node(f.root, vs.regions);
  return vs;
}

}  // namespace carddl::qfbapa
