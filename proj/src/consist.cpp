#include "carddl/consist.hpp"

#include <algorithm>
#include <functional>

#include "carddl/normalize.hpp"
#include "carddl/oracle.hpp"

namespace carddl::consist {

using qfbapa::FNode;
using qfbapa::PTerm;
using qfbapa::Region;
using qfbapa::STerm;
using qfbapa::Verdict;

namespace {

constexpr long long kMaxStepOneCandidates = 65536;

bool is_normalized(const KnowledgeBase& kb) {
  for (auto& a : kb.conceptAssertions)
    if (a.c->kind != CK::Name) return false;
  for (auto& c : kb.ercConstraints) {
    for (auto& [n, cc] : c.lhs)
      if (cc->kind != CK::Name) return false;
    for (auto& [n, cc] : c.rhs)
      if (cc->kind != CK::Name) return false;
  }
  for (auto& ci : kb.tbox)
    if (constraint_depth(ci.lhs) > 1 || constraint_depth(ci.rhs) > 1) return false;
  return true;
}

}  // namespace

std::vector<std::vector<int>> dnf_split(const ErcNode& erc, int constraintCount) {
  if (constraintCount > 16) throw ResourceLimitError("too many ERCBox constraints to split");
  std::function<bool(const ErcNode&, unsigned)> truth = [&](const ErcNode& n, unsigned mask) {
    switch (n.kind) {
      case ErcNode::K::Leaf:
        return (mask >> n.leaf & 1) != 0;
      case ErcNode::K::And:
        for (auto& k : n.kids)
          if (!truth(k, mask)) return false;
        return true;
      case ErcNode::K::Or:
        for (auto& k : n.kids)
          if (truth(k, mask)) return true;
        return false;
    }
    throw std::logic_error("unreachable");
  };
  std::vector<std::vector<int>> out;
  for (unsigned mask = 0; mask < (1u << constraintCount); ++mask) {
    if (!truth(erc, mask)) continue;
    std::vector<int> conj;
    for (int i = 0; i < constraintCount; ++i)
      if (mask >> i & 1) conj.push_back(i);
    out.push_back(std::move(conj));
  }
  return out;
}

Engine::Engine(KnowledgeBase kb, RunConfig cfg) : kb_(std::move(kb)), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (!is_normalized(kb_)) throw std::invalid_argument("the engine requires a normalized KB");
  Signature sig = signature_of(kb_);
  if (sig.individuals.empty()) throw std::invalid_argument("ABox must be non-empty");
  roles_.assign(sig.roles.begin(), sig.roles.end());
  inds_.assign(sig.individuals.begin(), sig.individuals.end());
  conceptNames_.assign(sig.concepts.begin(), sig.concepts.end());

  std::vector<ConceptPtr> seeds;
  for (auto& ci : kb_.tbox) {
    seeds.push_back(ci.lhs);
    seeds.push_back(ci.rhs);
  }
  for (auto& a : kb_.conceptAssertions) seeds.push_back(a.c);
  for (auto& c : kb_.ercConstraints) {
    for (auto& [n, cc] : c.lhs) seeds.push_back(cc);
    for (auto& [n, cc] : c.rhs) seeds.push_back(cc);
  }
  for (auto& n : conceptNames_) seeds.push_back(mk_name(n));
  cl_ = satpp::build_closure_multi(seeds);
  for (auto& m : cl_.members)
    if (has_constr(m)) throw std::invalid_argument("consistency checking is for the succ dialect");

  // free bits: names and successor expressions; conjunctions/disjunctions
  // are derived; individual markers are free
  std::vector<int> freePairs;
  for (int p = 0; p < cl_.pairs(); ++p) {
    CK k = cl_.members[cl_.pairPos[p]]->kind;
    if (k == CK::Name || k == CK::Succ) freePairs.push_back(p);
  }
  const int ni = int(inds_.size());
  if (int(freePairs.size()) + ni >= 62 ||
      (1LL << (freePairs.size() + ni)) > cfg_.maxTypes)
    throw ResourceLimitError("type count exceeds the configured cap");

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
    return pairVal[cl_.pairOf[idx]] == 1;
  };

  const long long total = 1LL << freePairs.size();
  for (long long code = 0; code < total; ++code) {
    std::vector<int> pairVal(cl_.pairs(), -1);
    for (size_t i = 0; i < freePairs.size(); ++i)
      pairVal[freePairs[i]] = (code >> (freePairs.size() - 1 - i)) & 1;
    RAType t;
    t.bits.resize(cl_.pairs());
    for (int p = 0; p < cl_.pairs(); ++p) {
      if (pairVal[p] >= 0)
        t.bits[p] = pairVal[p] == 1;
      else {
        t.bits[p] = value(cl_.members[cl_.pairPos[p]], pairVal);
        pairVal[p] = t.bits[p] ? 1 : 0;
      }
    }
    // the TBox acts as a type filter: C in t implies D in t for C <= D
    bool ok = true;
    for (auto& ci : kb_.tbox)
      if (value(ci.lhs, pairVal) && !value(ci.rhs, pairVal)) {
        ok = false;
        break;
      }
    if (!ok) continue;
    for (long long im = 0; im < (1LL << ni); ++im) {
      RAType ti = t;
      ti.indBits.resize(ni);
      for (int i = 0; i < ni; ++i) ti.indBits[i] = (im >> (ni - 1 - i)) & 1;
      types_.push_back(std::move(ti));
    }
  }
}

int Engine::member_var(const ConceptPtr& c) const {
  int idx = cl_.find(c);
  if (idx < 0) throw std::invalid_argument("set variable is not in the closure: " + render(c));
  return idx;
}

std::vector<std::string> Engine::var_table() const {
  std::vector<std::string> vars;
  for (auto& m : cl_.members) vars.push_back("X[" + render(m) + "]");
  for (auto& b : inds_) vars.push_back("X[" + b + "]");
  for (auto& r : roles_) vars.push_back("X[" + r + "]");
  return vars;
}

bool Engine::type_has_concept(const RAType& t, const ConceptPtr& name) const {
  return satpp::type_contains(cl_, {t.bits}, cl_.find(name));
}

qfbapa::Formula Engine::phi_t_prime(int typeIdx) const {
  const RAType& t = types_[typeIdx];
  qfbapa::Formula f;
  f.vars = var_table();
  qfbapa::LeafResolver leaf = [&](const SetTerm& s) -> int {
    if (s.kind == SK::Role) {
      auto it = std::find(roles_.begin(), roles_.end(), s.name);
      if (it == roles_.end()) throw std::invalid_argument("unknown role " + s.name);
      return role_var(int(it - roles_.begin()));
    }
    if (s.kind == SK::ConceptV) return member_var(s.concept_);
    throw std::invalid_argument("individuals cannot occur inside concepts");
  };
  std::vector<FNode> conj;
  // successor constraints of the type
  for (int p = 0; p < cl_.pairs(); ++p) {
    const ConceptPtr& pos = cl_.members[cl_.pairPos[p]];
    if (pos->kind != CK::Succ) continue;
    FNode atom = qfbapa::translate_atom(pos->constr, leaf);
    conj.push_back(t.bits[p] ? std::move(atom) : FNode::mk_not(std::move(atom)));
  }
  // the universe is exactly the role successors
  STerm cover = STerm::mk_empty();
  for (size_t r = 0; r < roles_.size(); ++r) {
    STerm v = STerm::mk_var(role_var(int(r)));
    cover = r == 0 ? std::move(v) : STerm::mk_union(std::move(cover), std::move(v));
  }
  conj.push_back(FNode::mk_set_eq(std::move(cover), STerm::mk_univ()));
  // at most one successor represents each individual
  for (size_t b = 0; b < inds_.size(); ++b)
    conj.push_back(FNode::mk_card_le(PTerm::mk_card(STerm::mk_var(ind_var(int(b)))),
                                     PTerm::mk_const(1)));
  // role assertions of the individuals this type represents
  for (size_t a = 0; a < inds_.size(); ++a) {
    if (!t.indBits[a]) continue;
    for (auto& ra : kb_.roleAssertions) {
      if (ra.from != inds_[a]) continue;
      int b = int(std::find(inds_.begin(), inds_.end(), ra.to) - inds_.begin());
      int r = int(std::find(roles_.begin(), roles_.end(), ra.role) - roles_.begin());
      PTerm card = PTerm::mk_card(
          STerm::mk_inter(STerm::mk_var(ind_var(b)), STerm::mk_var(role_var(r))));
      conj.push_back(ra.negated ? FNode::mk_card_eq(std::move(card), PTerm::mk_const(0))
                                : FNode::mk_card_ge(std::move(card), PTerm::mk_const(1)));
    }
  }
  f.root = FNode::mk_and(std::move(conj));
  return f;
}

qfbapa::STerm Engine::type_term(const RAType& t) const {
  STerm acc;
  bool first = true;
  auto add = [&](STerm v) {
    acc = first ? std::move(v) : STerm::mk_inter(std::move(acc), std::move(v));
    first = false;
  };
  for (int p = 0; p < cl_.pairs(); ++p)
    add(STerm::mk_var(t.bits[p] ? cl_.pairPos[p] : cl_.pairNeg[p]));
  for (size_t b = 0; b < inds_.size(); ++b) {
    STerm v = STerm::mk_var(ind_var(int(b)));
    add(t.indBits[b] ? std::move(v) : STerm::mk_compl(std::move(v)));
  }
  return acc;
}

bool Engine::realized(const Region& region, const std::vector<int>& aliveTypes) const {
  // the region's induced sign set S_v: pair signs must be coherent
  std::vector<int> pairSign(cl_.pairs(), -1);
  for (int p = 0; p < cl_.pairs(); ++p) {
    bool pos = region.signs[cl_.pairPos[p]];
    bool neg = region.signs[cl_.pairNeg[p]];
    if (pos == neg) return false;  // C and ¬C (or neither): no type matches
    pairSign[p] = pos ? 1 : 0;
  }
  for (int ti : aliveTypes) {
    const RAType& t = types_[ti];
    bool match = true;
    for (int p = 0; p < cl_.pairs() && match; ++p)
      if (t.bits[p] != (pairSign[p] == 1)) match = false;
    for (size_t b = 0; b < inds_.size() && match; ++b)
      if (t.indBits[b] != region.signs[ind_var(int(b))]) match = false;
    if (match) return true;
  }
  return false;
}

qfbapa::SolverConfig Engine::solver_config() const {
  qfbapa::SolverConfig scfg;
  scfg.maxRegions = cfg_.maxVennRegions;
  scfg.maxNodes = cfg_.solverNodes;
  scfg.maxIlpNodes = cfg_.ilpNodes;
  scfg.sparseMultiplier = cfg_.sparseMultiplier;
  return scfg;
}

// Witness search restricted to supports realizable by the given types.  The
// restriction is expressed over the variables that actually occur in phi_t'
// (projected type terms, deduplicated), so the solver's lazy region
// construction stays small; witness regions are then completed to full type
// patterns.
std::optional<AugWitness> Engine::support_witness(int typeIdx,
                                                  const std::vector<int>& alive) const {
  qfbapa::Formula f = phi_t_prime(typeIdx);
  std::set<int> occ = qfbapa::formula_vars(f.root);
  // projected embedding: U ⊆ ⋃ (occurring part of each alive type term)
  std::vector<int> occConcept, occInd;
  for (int v : occ) {
    if (v < int(cl_.members.size()))
      occConcept.push_back(v);
    else if (v < int(cl_.members.size() + inds_.size()))
      occInd.push_back(v);
  }
  std::set<std::string> seenPattern;
  STerm uni;
  bool first = true;
  for (int ti : alive) {
    const RAType& t = types_[ti];
    std::string pattern;
    STerm term;
    bool tfirst = true;
    auto add = [&](int var, bool sign) {
      pattern += sign ? '1' : '0';
      STerm v = STerm::mk_var(var);
      if (!sign) v = STerm::mk_compl(std::move(v));
      term = tfirst ? std::move(v) : STerm::mk_inter(std::move(term), std::move(v));
      tfirst = false;
    };
    for (int v : occConcept) add(v, satpp::type_contains(cl_, {t.bits}, v));
    for (int v : occInd) add(v, t.indBits[v - int(cl_.members.size())]);
    if (seenPattern.count(pattern)) continue;
    seenPattern.insert(pattern);
    if (tfirst) term = STerm::mk_univ();  // no occurring concept/ind variables
    uni = first ? std::move(term) : STerm::mk_union(std::move(uni), std::move(term));
    first = false;
  }
  if (first) uni = STerm::mk_empty();
  f.root = FNode::mk_and({f.root, FNode::mk_set_sub(STerm::mk_univ(), std::move(uni))});

  qfbapa::SolveResult r = qfbapa::solve(f, solver_config());
  if (r.verdict == Verdict::ResourceExceeded)
    throw ResourceLimitError("support witness search hit a solver cap");
  if (r.verdict == Verdict::Unsat) return std::nullopt;

  // complete each witness region to the first alive type matching its
  // occurring signs
  AugWitness w;
  w.type = typeIdx;
  qfbapa::Solution completed;
  completed.nvars = r.solution->nvars;
  for (auto& [region, count] : r.solution->counts) {
    Region full = region;
    int match = -1;
    for (int ti : alive) {
      const RAType& t = types_[ti];
      bool ok = true;
      for (int v : occConcept)
        if (region.signs[v] != satpp::type_contains(cl_, {t.bits}, v)) {
          ok = false;
          break;
        }
      for (size_t i = 0; i < occInd.size() && ok; ++i)
        if (region.signs[occInd[i]] != t.indBits[occInd[i] - int(cl_.members.size())]) ok = false;
      if (ok) {
        match = ti;
        break;
      }
    }
    if (match < 0) throw std::logic_error("witness region escaped the embedding restriction");
    const RAType& t = types_[match];
    for (int p = 0; p < cl_.pairs(); ++p) {
      full.signs[cl_.pairPos[p]] = t.bits[p];
      full.signs[cl_.pairNeg[p]] = !t.bits[p];
    }
    for (size_t b = 0; b < inds_.size(); ++b) full.signs[ind_var(int(b))] = t.indBits[b];
    completed.counts.emplace_back(full, count);
    w.support.push_back(std::move(full));
  }
  w.solution = std::move(completed);
  return w;
}

LinearSystem Engine::build_phi_T(const std::vector<int>& conj,
                                 const std::vector<int>& alive) const {
  LinearSystem sys;
  sys.nvars = int(alive.size());
  for (int ci : conj) {
    const auto& c = kb_.ercConstraints[ci];
    std::vector<Int> row(alive.size(), Int(0));
    for (size_t pos = 0; pos < alive.size(); ++pos) {
      const RAType& t = types_[alive[pos]];
      for (auto& [n, cc] : c.rhs)
        if (type_has_concept(t, cc)) row[pos] += n;
      for (auto& [n, cc] : c.lhs)
        if (type_has_concept(t, cc)) row[pos] -= n;
    }
    sys.add(std::move(row), c.offset);
  }
  return sys;
}

std::optional<EliminationState> Engine::algorithm1(const std::vector<int>& conj,
                                                   std::vector<TraceEntry>* traceOut) const {
  std::vector<TraceEntry> trace;
  auto note = [&](int step, int type, std::string what) {
    trace.push_back({step, type, std::move(what)});
  };
  const int ni = int(inds_.size());

  // condition (b): a type representing b must contain every concept asserted
  // for b
  std::vector<char> condB(types_.size(), 1);
  for (size_t ti = 0; ti < types_.size(); ++ti) {
    for (int b = 0; b < ni && condB[ti]; ++b) {
      if (!types_[ti].indBits[b]) continue;
      for (auto& ca : kb_.conceptAssertions) {
        if (ca.indiv != inds_[b]) continue;
        if (!type_has_concept(types_[ti], ca.c)) {
          condB[ti] = 0;
          break;
        }
      }
    }
  }
  std::vector<std::vector<int>> cand(ni);
  for (int b = 0; b < ni; ++b) {
    for (size_t ti = 0; ti < types_.size(); ++ti)
      if (condB[ti] && types_[ti].indBits[b]) cand[b].push_back(int(ti));
    if (cand[b].empty()) {
      note(1, -1, "no admissible type for individual " + inds_[b]);
      if (traceOut) *traceOut = std::move(trace);
      return std::nullopt;
    }
  }

  // enumerate per-individual choices (lexicographic, consistent)
  std::vector<int> pick(ni, 0);
  long long tried = 0;
  bool sawResource = false;
  while (true) {
    if (++tried > kMaxStepOneCandidates)
      throw ResourceLimitError("step-1 candidate enumeration cap exceeded");
    std::vector<int> chosen(ni);
    for (int b = 0; b < ni; ++b) chosen[b] = cand[b][pick[b]];
    bool consistent_ = true;
    for (int b = 0; b < ni && consistent_; ++b)
      for (int c = 0; c < ni && consistent_; ++c)
        if (types_[chosen[b]].indBits[c] && chosen[c] != chosen[b]) consistent_ = false;

    if (consistent_) {
      // alive set: individual-free admissible types plus the chosen ones
      std::vector<int> alive;
      for (size_t ti = 0; ti < types_.size(); ++ti) {
        bool hasInd = false;
        for (int b = 0; b < ni; ++b)
          if (types_[ti].indBits[b]) hasInd = true;
        if (!hasInd && condB[ti]) alive.push_back(int(ti));
      }
      for (int b = 0; b < ni; ++b)
        if (std::find(alive.begin(), alive.end(), chosen[b]) == alive.end())
          alive.push_back(chosen[b]);
      std::sort(alive.begin(), alive.end());
      note(1, -1, "candidate " + std::to_string(tried));

      bool failed = false;
      std::map<int, AugWitness> witnesses;
      // target types referenced by each type's witness support; a removal
      // only invalidates witnesses that pointed at the removed type
      std::map<int, std::set<int>> supportTargets;
      std::set<int> dirty(alive.begin(), alive.end());
      auto targets_of = [&](const AugWitness& w) {
        std::set<int> ts;
        for (auto& region : w.support)
          for (int s : alive) {
            bool match = true;
            for (int p = 0; p < cl_.pairs() && match; ++p)
              if (region.signs[cl_.pairPos[p]] != types_[s].bits[p]) match = false;
            for (size_t b = 0; b < inds_.size() && match; ++b)
              if (region.signs[ind_var(int(b))] != types_[s].indBits[b]) match = false;
            if (match) {
              ts.insert(s);
              break;
            }
          }
        return ts;
      };
      auto remove_type = [&](int ti) {
        alive.erase(std::find(alive.begin(), alive.end(), ti));
        witnesses.erase(ti);
        supportTargets.erase(ti);
        dirty.erase(ti);
        for (auto& [tj, ts] : supportTargets)
          if (ts.count(ti)) dirty.insert(tj);
        if (std::find(chosen.begin(), chosen.end(), ti) != chosen.end()) failed = true;
      };
      try {
        bool changed = true;
        while (changed && !failed) {
          changed = false;
          // step 2: drop types without a witness over realizable supports
          while (!dirty.empty() && !failed) {
            int ti = *dirty.begin();
            dirty.erase(dirty.begin());
            if (std::find(alive.begin(), alive.end(), ti) == alive.end()) continue;
            auto w = support_witness(ti, alive);
            if (!w) {
              note(2, ti, "no realizable successor configuration");
              remove_type(ti);
              changed = true;
            } else {
              witnesses[ti] = std::move(*w);
              supportTargets[ti] = targets_of(witnesses[ti]);
            }
          }
          if (failed) break;
          // step 3: drop types whose count variable is forced to zero
          LinearSystem phiT = build_phi_T(conj, alive);
          for (size_t pos = 0; pos < alive.size(); ++pos) {
            LinearSystem ext = phiT;
            std::vector<Int> unit(alive.size(), Int(0));
            unit[pos] = 1;
            ext.add(std::move(unit), 1);
            if (!lin_feasible_rational(ext)) {
              int ti = alive[pos];
              note(3, ti, "count variable forced to zero");
              remove_type(ti);
              changed = true;
              break;
            }
          }
        }
      } catch (const ResourceLimitError&) {
        sawResource = true;
        failed = true;
      }
      if (!failed && !alive.empty()) {
        EliminationState st;
        st.alive = alive;
        for (int b = 0; b < ni; ++b)
          st.chosenForInd[b] = chosen[b];
        st.witnesses = std::move(witnesses);
        st.phiT = build_phi_T(conj, alive);
        std::vector<int> all(alive.size());
        for (size_t i = 0; i < alive.size(); ++i) all[i] = int(i);
        auto positive = lin_positive_support(st.phiT, all);
        if (!positive) throw std::logic_error("fixpoint lost linear feasibility");
        st.positiveSolution = std::move(*positive);
        note(1, -1, "success");
        st.trace = trace;
        if (traceOut) *traceOut = std::move(trace);
        return st;
      }
    }

    int b = ni - 1;
    while (b >= 0 && ++pick[b] == int(cand[b].size())) pick[b--] = 0;
    if (b < 0) break;
  }
  if (traceOut) *traceOut = std::move(trace);
  if (sawResource) throw ResourceLimitError("every surviving candidate hit a cap");
  return std::nullopt;
}

Interpretation Engine::extract_model(const EliminationState& state,
                                     const std::vector<int>& conj) const {
  const auto& alive = state.alive;
  long long kMax = 0;
  for (auto& [ti, w] : state.witnesses) kMax = std::max(kMax, w.universe_size());
  const Int N = 1 + kMax;  // the extra copy keeps index 0 reserved for individuals

  std::map<int, long long> cnt;  // type -> element count
  for (size_t pos = 0; pos < alive.size(); ++pos) {
    Int scaled = N * state.positiveSolution[pos];
    if (scaled < 1) throw std::logic_error("scaled count lost positivity");
    cnt[alive[pos]] = scaled.convert_to<long long>();
  }

  Interpretation I;
  std::map<int, int> baseOf;
  for (int ti : alive) {
    baseOf[ti] = I.size();
    for (long long j = 1; j <= cnt[ti]; ++j)
      I.labels.push_back("t" + std::to_string(ti) + "_" + std::to_string(j));
  }
  for (auto& name : conceptNames_) {
    auto& ext = I.concepts[name];
    int idx = cl_.find(mk_name(name));
    for (int ti : alive) {
      if (!satpp::type_contains(cl_, {types_[ti].bits}, idx)) continue;
      for (long long j = 0; j < cnt[ti]; ++j) ext.insert(baseOf[ti] + int(j));
    }
  }
  for (auto& r : roles_) I.roles[r];
  for (size_t b = 0; b < inds_.size(); ++b)
    I.individuals[inds_[b]] = baseOf[state.chosenForInd.at(int(b))];

  auto type_has_individual = [&](int ti) {
    for (bool x : types_[ti].indBits)
      if (x) return true;
    return false;
  };

  // per surviving type: map the witness universe into the domain, then give
  // every copy of the type the same successor image
  for (int ti : alive) {
    const AugWitness& w = state.witnesses.at(ti);
    std::map<int, long long> next;  // target type -> next free copy offset
    std::vector<std::vector<int>> targetsByRole(roles_.size());
    for (auto& [region, count] : w.solution.counts) {
      // unique alive type matching the completed region
      int target = -1;
      for (int s : alive) {
        bool match = true;
        for (int p = 0; p < cl_.pairs() && match; ++p)
          if (region.signs[cl_.pairPos[p]] != types_[s].bits[p]) match = false;
        for (size_t b = 0; b < inds_.size() && match; ++b)
          if (region.signs[ind_var(int(b))] != types_[s].indBits[b]) match = false;
        if (match) {
          target = s;
          break;
        }
      }
      if (target < 0) throw std::logic_error("witness region is not realized at the fixpoint");
      bool indRegion = false;
      for (size_t b = 0; b < inds_.size(); ++b)
        if (region.signs[ind_var(int(b))]) indRegion = true;
      if (indRegion && count != 1)
        throw std::logic_error("individual region with cardinality != 1");
      for (long long i = 0; i < count; ++i) {
        long long offset;
        if (indRegion) {
          offset = 0;  // the chosen representative
        } else {
          // non-individual regions never target an individual type (their
          // marker signs differ), so offset 0 is free here
          offset = next[target]++;
        }
        if (offset >= cnt[target]) throw std::logic_error("copy capacity exhausted");
        int elem = baseOf[target] + int(offset);
        for (size_t r = 0; r < roles_.size(); ++r)
          if (region.signs[role_var(int(r))]) targetsByRole[r].push_back(elem);
      }
    }
    for (size_t r = 0; r < roles_.size(); ++r) {
      if (targetsByRole[r].empty()) continue;
      auto& rel = I.roles[roles_[r]];
      for (long long j = 0; j < cnt[ti]; ++j)
        for (int tgt : targetsByRole[r]) rel.insert({baseOf[ti] + int(j), tgt});
    }
  }
  (void)conj;
  return I;
}

std::vector<AugType> Engine::augmented_types(const std::vector<int>& conj, long long cap) const {
  (void)conj;  // augmented types depend on A and the signature only
  std::vector<AugType> out;
  std::vector<int> all(types_.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = int(i);
  long long tried = 0;
  for (size_t ti = 0; ti < types_.size(); ++ti) {
    qfbapa::Formula phi = phi_t_prime(int(ti));
    long long nt = qfbapa::sparse_bound(phi, solver_config());
    // candidate regions: one per (type, role pattern)
    std::vector<Region> candidates;
    for (int s : all) {
      for (unsigned rm = 0; rm < (1u << roles_.size()); ++rm) {
        Region reg;
        reg.signs.assign(phi.vars.size(), false);
        for (int p = 0; p < cl_.pairs(); ++p) {
          reg.signs[cl_.pairPos[p]] = types_[s].bits[p];
          reg.signs[cl_.pairNeg[p]] = !types_[s].bits[p];
        }
        for (size_t b = 0; b < inds_.size(); ++b)
          reg.signs[ind_var(int(b))] = types_[s].indBits[b];
        for (size_t r = 0; r < roles_.size(); ++r) reg.signs[role_var(int(r))] = (rm >> r) & 1;
        candidates.push_back(std::move(reg));
      }
    }
    long long maxSize = std::min<long long>(nt, candidates.size());
    std::vector<int> subset;
    std::function<void(int, long long)> rec = [&](int from, long long room) {
      if (++tried > cap) throw ResourceLimitError("augmented-type enumeration cap exceeded");
      std::vector<Region> support;
      for (int i : subset) support.push_back(candidates[i]);
      auto r = qfbapa::solve_exact_support(phi, support, solver_config());
      if (r.verdict == Verdict::ResourceExceeded)
        throw ResourceLimitError("augmented-type witness search hit a solver cap");
      if (r.verdict == Verdict::Sat) {
        AugType at;
        at.type = types_[ti];
        at.venn = support;
        at.witness = *r.solution;
        out.push_back(std::move(at));
      }
      if (room == 0) return;
      for (int i = from; i < int(candidates.size()); ++i) {
        subset.push_back(i);
        rec(i + 1, room - 1);
        subset.pop_back();
      }
    };
    rec(0, maxSize);
  }
  return out;
}

ConsistencyResult consistent(const KnowledgeBase& kb, const RunConfig& cfg) {
  cfg.validate();
  if (kb.ec)
    throw std::invalid_argument("ECBoxes are handled through the sat reduction, not consistency");
  NormalizeResult norm = normalize_kb(kb);
  Engine eng(norm.kb, cfg);

  std::vector<std::vector<int>> conjs;
  if (norm.kb.erc)
    conjs = dnf_split(*norm.kb.erc, int(norm.kb.ercConstraints.size()));
  else
    conjs.push_back({});

  ConsistencyResult out;
  bool sawResource = false;
  for (auto& conj : conjs) {
    std::vector<TraceEntry> trace;
    std::optional<EliminationState> st;
    try {
      st = eng.algorithm1(conj, &trace);
    } catch (const ResourceLimitError&) {
      sawResource = true;
      continue;
    }
    out.trace.insert(out.trace.end(), trace.begin(), trace.end());
    if (!st) continue;
    Interpretation model = eng.extract_model(*st, conj);
    // audit: the model satisfies the normalized KB restricted to this
    // conjunct, hence the full positive ERCBox, hence the input
    KnowledgeBase audit = norm.kb;
    if (!conj.empty()) {
      ErcNode node;
      node.kind = ErcNode::K::And;
      for (int ci : conj) {
        ErcNode leaf;
        leaf.kind = ErcNode::K::Leaf;
        leaf.leaf = ci;
        node.kids.push_back(leaf);
      }
      audit.erc = node.kids.size() == 1 ? node.kids[0] : node;
    } else {
      audit.erc.reset();
    }
    auto rep = satisfies(model, audit);
    if (!rep.satisfied)
      throw std::logic_error("extracted model failed its audit: " + rep.violations.front());
    auto repFull = satisfies(model, norm.kb);
    if (!repFull.satisfied)
      throw std::logic_error("extracted model violates the input ERCBox");
    out.verdict = Verdict::Sat;
    out.state = std::move(st);
    out.model = std::move(model);
    return out;
  }
  out.verdict = sawResource ? Verdict::ResourceExceeded : Verdict::Unsat;
  return out;
}

}  // namespace carddl::consist
