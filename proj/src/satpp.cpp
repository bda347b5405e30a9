#include "carddl/satpp.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "carddl/oracle.hpp"

namespace carddl::satpp {

namespace {

// collect the immediate sub-concepts of a written form: boolean children and
// the concepts used as set variables inside a constraint
void immediate_subs(const ConceptPtr& c, std::vector<ConceptPtr>& out) {
  switch (c->kind) {
    case CK::Name:
      return;
    case CK::And:
    case CK::Or:
    case CK::Not:
      for (auto& k : c->kids) out.push_back(k);
      return;
    case CK::Constr:
    case CK::Succ: {
      std::function<void(const SetTermPtr&)> walkSet = [&](const SetTermPtr& s) {
        if (s->kind == SK::ConceptV) out.push_back(s->concept_);
        for (auto& k : s->kids) walkSet(k);
      };
      std::function<void(const PAExprPtr&)> walkPa = [&](const PAExprPtr& p) {
        if (p->set) walkSet(p->set);
        for (auto& k : p->kids) walkPa(k);
      };
      std::function<void(const CAtomPtr&)> walkAtom = [&](const CAtomPtr& a) {
        for (auto& k : a->kids) walkAtom(k);
        if (a->s) walkSet(a->s);
        if (a->t) walkSet(a->t);
        if (a->k) walkPa(a->k);
        if (a->l) walkPa(a->l);
      };
      walkAtom(c->constr);
      return;
    }
  }
}

ConceptPtr strip_not(const ConceptPtr& c) { return c->kind == CK::Not ? c->kids[0] : c; }

}  // namespace

int Closure::find(const ConceptPtr& c) const {
  std::string key = render(c);
  for (size_t i = 0; i < members.size(); ++i)
    if (render(members[i]) == key) return int(i);
  return -1;
}

Closure build_closure(const ConceptPtr& E) { return build_closure_multi({E}); }

Closure build_closure_multi(const std::vector<ConceptPtr>& seeds) {
  Closure cl;
  std::map<std::string, int> seen;  // render of positive form -> pair index
  std::deque<ConceptPtr> queue(seeds.begin(), seeds.end());
  while (!queue.empty()) {
    ConceptPtr c = queue.front();
    queue.pop_front();
    ConceptPtr pos = strip_not(c);
    std::string key = render(pos);
    if (seen.count(key)) continue;
    int pair = int(cl.pairPos.size());
    seen[key] = pair;
    ConceptPtr neg = mk_not(pos);
    // the encountered form comes first
    ConceptPtr first = c, second = equal(c, pos) ? neg : pos;
    cl.members.push_back(first);
    cl.members.push_back(second);
    cl.pairOf.push_back(pair);
    cl.pairOf.push_back(pair);
    bool firstIsPos = equal(first, pos);
    cl.pairPos.push_back(int(cl.members.size()) - (firstIsPos ? 2 : 1));
    cl.pairNeg.push_back(int(cl.members.size()) - (firstIsPos ? 1 : 2));
    std::vector<ConceptPtr> subs;
    immediate_subs(pos, subs);
    for (auto& s : subs) queue.push_back(s);
  }
  return cl;
}

std::vector<ConceptPtr> closure_ME(const ConceptPtr& E) { return build_closure(E).members; }

bool type_contains(const Closure& cl, const TypeSet& t, int member) {
  int pair = cl.pairOf[member];
  bool pos = cl.pairPos[pair] == member;
  return pos == t.bits[pair];
}

Reduction::Reduction(ConceptPtr E, RunConfig cfg) : goal_(std::move(E)), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (has_succ(goal_))
    throw std::invalid_argument("succ expressions must be rewritten (scc_to_pp) before sat");
  cl_ = build_closure(goal_);
  Signature sig;
  collect_names(goal_, sig);
  if (!sig.individuals.empty())
    throw std::invalid_argument("individuals cannot occur inside concepts");
  roles_.assign(sig.roles.begin(), sig.roles.end());

  // free pairs: names and constraint expressions; derived: and/or
  std::vector<int> freePairs;
  for (int p = 0; p < cl_.pairs(); ++p) {
    CK k = cl_.members[cl_.pairPos[p]]->kind;
    if (k == CK::Name || k == CK::Constr) freePairs.push_back(p);
  }
  if (int(freePairs.size()) >= 62 || (1LL << freePairs.size()) > cfg_.maxTypes)
    throw ResourceLimitError("type count exceeds the configured cap");

  // membership value of an arbitrary member concept under a partial pair
  // assignment; derived pairs evaluate through their boolean structure
  std::function<bool(const ConceptPtr&, const std::vector<int>&)> value =
      [&](const ConceptPtr& c, const std::vector<int>& pairVal) -> bool {
    if (c->kind == CK::Not) return !value(c->kids[0], pairVal);
    if (c->kind == CK::And) {
      for (auto& k : c->kids)
        if (!value(k, pairVal)) return false;
      return true;
    }
    if (c->kind == CK::Or) {
      for (auto& k : c->kids)
        if (value(k, pairVal)) return true;
      return false;
    }
    int idx = cl_.find(c);
    int pair = cl_.pairOf[idx];
    if (pairVal[pair] < 0) throw std::logic_error("pair value requested before assignment");
    return pairVal[pair] == 1;
  };

  const long long total = 1LL << freePairs.size();
  for (long long code = 0; code < total; ++code) {
    std::vector<int> pairVal(cl_.pairs(), -1);
    for (size_t i = 0; i < freePairs.size(); ++i)
      pairVal[freePairs[i]] = (code >> (freePairs.size() - 1 - i)) & 1;
    TypeSet t;
    t.bits.resize(cl_.pairs());
    for (int p = 0; p < cl_.pairs(); ++p) {
      if (pairVal[p] >= 0) {
        t.bits[p] = pairVal[p] == 1;
      } else {
        t.bits[p] = value(cl_.members[cl_.pairPos[p]], pairVal);
        pairVal[p] = t.bits[p] ? 1 : 0;
      }
    }
    types_.push_back(std::move(t));
  }

  // goal-containing types first, each group in enumeration order
  int goalPair = cl_.pairOf[0];
  for (size_t i = 0; i < types_.size(); ++i)
    if (types_[i].bits[goalPair] == (cl_.pairPos[goalPair] == 0)) typeOrder_.push_back(int(i));
  for (size_t i = 0; i < types_.size(); ++i)
    if (!(types_[i].bits[goalPair] == (cl_.pairPos[goalPair] == 0))) typeOrder_.push_back(int(i));
}

std::vector<int> Reduction::types_containing(const ConceptPtr& c) const {
  int idx = cl_.find(c);
  if (idx < 0) throw std::invalid_argument("concept is not in the closure");
  std::vector<int> out;
  for (size_t i = 0; i < types_.size(); ++i)
    if (type_contains(cl_, types_[i], idx)) out.push_back(int(i));
  return out;
}

int Reduction::member_var(const ConceptPtr& c) const {
  int idx = cl_.find(c);
  if (idx < 0) throw std::invalid_argument("set variable is not a subdescription: " + render(c));
  return idx;
}

qfbapa::FNode Reduction::psi_node(int typeIdx, int roleVarBase) const {
  const TypeSet& t = types_[typeIdx];
  qfbapa::LeafResolver leaf = [&](const SetTerm& s) -> int {
    if (s.kind == SK::Role) {
      auto it = std::find(roles_.begin(), roles_.end(), s.name);
      if (it == roles_.end()) throw std::invalid_argument("unknown role " + s.name);
      return roleVarBase + int(it - roles_.begin());
    }
    if (s.kind == SK::ConceptV) return member_var(s.concept_);
    throw std::invalid_argument("individuals cannot occur inside concepts");
  };
  std::vector<qfbapa::FNode> conj;
  for (int p = 0; p < cl_.pairs(); ++p) {
    const ConceptPtr& pos = cl_.members[cl_.pairPos[p]];
    if (pos->kind != CK::Constr) continue;
    qfbapa::FNode atom = qfbapa::translate_atom(pos->constr, leaf);
    conj.push_back(t.bits[p] ? std::move(atom) : qfbapa::FNode::mk_not(std::move(atom)));
  }
  return qfbapa::FNode::mk_and(std::move(conj));
}

static std::string member_var_name(const ConceptPtr& c) { return "X[" + render(c) + "]"; }

qfbapa::Formula Reduction::psi(int typeIdx) const {
  qfbapa::Formula f;
  for (auto& m : cl_.members) f.vars.push_back(member_var_name(m));
  int base = int(f.vars.size());
  for (auto& r : roles_) f.vars.push_back("X[" + r + "^t" + std::to_string(typeIdx) + "]");
  f.root = psi_node(typeIdx, base);
  return f;
}

qfbapa::Formula Reduction::beta() const {
  qfbapa::Formula f;
  for (auto& m : cl_.members) f.vars.push_back(member_var_name(m));
  std::vector<qfbapa::FNode> conj;
  using qfbapa::STerm;
  for (int p = 0; p < cl_.pairs(); ++p)
    conj.push_back(qfbapa::FNode::mk_set_eq(STerm::mk_var(cl_.pairNeg[p]),
                                            STerm::mk_compl(STerm::mk_var(cl_.pairPos[p]))));
  for (size_t i = 0; i < cl_.members.size(); ++i) {
    const ConceptPtr& m = cl_.members[i];
    if (m->kind != CK::And && m->kind != CK::Or) continue;
    STerm acc = STerm::mk_var(member_var(m->kids[0]));
    for (size_t k = 1; k < m->kids.size(); ++k) {
      STerm kid = STerm::mk_var(member_var(m->kids[k]));
      acc = m->kind == CK::And ? STerm::mk_inter(std::move(acc), std::move(kid))
                               : STerm::mk_union(std::move(acc), std::move(kid));
    }
    conj.push_back(qfbapa::FNode::mk_set_eq(STerm::mk_var(int(i)), std::move(acc)));
  }
  f.root = qfbapa::FNode::mk_and(std::move(conj));
  return f;
}

qfbapa::STerm Reduction::type_term(const TypeSet& t) const {
  using qfbapa::STerm;
  STerm acc;
  bool first = true;
  for (int p = 0; p < cl_.pairs(); ++p) {
    STerm v = STerm::mk_var(t.bits[p] ? cl_.pairPos[p] : cl_.pairNeg[p]);
    if (first) {
      acc = std::move(v);
      first = false;
    } else {
      acc = STerm::mk_inter(std::move(acc), std::move(v));
    }
  }
  return acc;
}

qfbapa::Formula Reduction::delta() const {
  using qfbapa::FNode;
  using qfbapa::PTerm;
  using qfbapa::STerm;
  qfbapa::Formula f;
  for (auto& m : cl_.members) f.vars.push_back(member_var_name(m));
  const int base = int(f.vars.size());
  const int nr = int(roles_.size());
  for (size_t t = 0; t < types_.size(); ++t)
    for (auto& r : roles_) f.vars.push_back("X[" + r + "^t" + std::to_string(t) + "]");

  std::vector<FNode> conj;
  conj.push_back(FNode::mk_card_ge(PTerm::mk_card(STerm::mk_var(0)), PTerm::mk_const(1)));
  conj.push_back(beta().root);
  for (int ti : typeOrder_) {
    FNode empty = FNode::mk_card_eq(PTerm::mk_card(type_term(types_[ti])), PTerm::mk_const(0));
    FNode psi = psi_node(ti, base + ti * nr);
    conj.push_back(FNode::mk_or({std::move(empty), std::move(psi)}));
  }
  f.root = FNode::mk_and(std::move(conj));
  return f;
}

SatResult Reduction::sat() const {
  qfbapa::SolverConfig scfg;
  scfg.maxRegions = cfg_.maxVennRegions;
  scfg.maxNodes = cfg_.solverNodes;
  scfg.maxIlpNodes = cfg_.ilpNodes;
  scfg.sparseMultiplier = cfg_.sparseMultiplier;
  qfbapa::SolveResult r = qfbapa::solve(delta(), scfg);
  SatResult out;
  out.verdict = r.verdict;
  out.solution = r.solution;
  if (r.verdict == qfbapa::Verdict::Sat) out.model = extract_model(*r.solution);
  return out;
}

Interpretation Reduction::extract_model(const qfbapa::Solution& sol) const {
  // type of a region from the member-variable signs
  auto typeOf = [&](const qfbapa::Region& r) {
    TypeSet t;
    t.bits.resize(cl_.pairs());
    for (int p = 0; p < cl_.pairs(); ++p) t.bits[p] = r.signs[cl_.pairPos[p]];
    for (size_t i = 0; i < types_.size(); ++i)
      if (types_[i] == t) return int(i);
    throw std::invalid_argument("solution region does not induce a type");
  };

  const int nr = int(roles_.size());
  const int base = int(cl_.members.size());

  std::map<int, long long> typeCount;  // realized type -> element count
  std::vector<int> regionType;
  for (auto& [region, count] : sol.counts) {
    int t = typeOf(region);
    regionType.push_back(t);
    typeCount[t] += count;
  }

  Interpretation I;
  std::map<int, int> typeBase;  // type -> first element id
  for (auto& [t, count] : typeCount) {
    typeBase[t] = I.size();
    for (long long j = 1; j <= count; ++j)
      I.labels.push_back("t" + std::to_string(t) + "_" + std::to_string(j));
  }
  if (I.labels.empty()) throw std::invalid_argument("solution has an empty universe");

  // concept extensions from type membership
  Signature sig;
  collect_names(goal_, sig);
  for (auto& name : sig.concepts) {
    int idx = cl_.find(mk_name(name));
    auto& ext = I.concepts[name];
    if (idx < 0) continue;
    for (auto& [t, count] : typeCount) {
      if (!type_contains(cl_, types_[t], idx)) continue;
      for (long long j = 0; j < count; ++j) ext.insert(typeBase[t] + int(j));
    }
  }
  for (auto& r : roles_) I.roles[r];  // roles exist even when empty

  // bijection from solution elements to domain elements, by region blocks
  std::vector<int> elem;  // solution element id -> domain element
  {
    std::map<int, long long> next;  // type -> next copy offset
    for (size_t ri = 0; ri < sol.counts.size(); ++ri) {
      int t = regionType[ri];
      for (long long i = 0; i < sol.counts[ri].second; ++i)
        elem.push_back(typeBase[t] + int(next[t]++));
    }
  }

  // successors: all copies of a type share the image of sigma(X_r^t)
  for (auto& [t, count] : typeCount) {
    for (int r = 0; r < nr; ++r) {
      int var = base + t * nr + r;
      std::vector<int> targets;
      int solElem = 0;
      for (size_t ri = 0; ri < sol.counts.size(); ++ri) {
        for (long long i = 0; i < sol.counts[ri].second; ++i, ++solElem)
          if (sol.counts[ri].first.signs[var]) targets.push_back(elem[solElem]);
      }
      if (targets.empty()) continue;
      auto& rel = I.roles[roles_[r]];
      for (long long j = 0; j < count; ++j)
        for (int tgt : targets) rel.insert({typeBase[t] + int(j), tgt});
    }
  }

  if (eval_pp(I, goal_).empty())
    throw std::logic_error("extracted model contains no goal element");
  return I;
}

std::vector<TypeSet> types_of(const ConceptPtr& E, const RunConfig& cfg) {
  return Reduction(E, cfg).types();
}

qfbapa::Formula delta(const ConceptPtr& E, const RunConfig& cfg) {
  return Reduction(E, cfg).delta();
}

SatResult sat(const ConceptPtr& E, const RunConfig& cfg) { return Reduction(E, cfg).sat(); }

}  // namespace carddl::satpp
