#include "carddl/query.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "carddl/consist.hpp"
#include "carddl/normalize.hpp"
#include "carddl/oracle.hpp"
#include "carddl/transforms.hpp"

namespace carddl::query {

namespace {

ConjunctiveQuery rename(const ConjunctiveQuery& q, const std::map<std::string, std::string>& m) {
  auto ren = [&](const std::string& v) {
    auto it = m.find(v);
    return it == m.end() ? v : it->second;
  };
  ConjunctiveQuery out;
  std::set<std::string> vars;
  std::set<std::string> seenRole, seenConcept;
  for (auto& a : q.roleAtoms) {
    RoleAtom r{a.role, ren(a.x), ren(a.y)};
    std::string key = r.role + "(" + r.x + "," + r.y + ")";
    if (seenRole.insert(key).second) out.roleAtoms.push_back(r);
    vars.insert(r.x);
    vars.insert(r.y);
  }
  for (auto& a : q.conceptAtoms) {
    ConceptAtom c{a.concept_, ren(a.x)};
    std::string key = c.concept_ + "(" + c.x + ")";
    if (seenConcept.insert(key).second) out.conceptAtoms.push_back(c);
    vars.insert(c.x);
  }
  out.vars.assign(vars.begin(), vars.end());
  return out;
}

// directed edges (deduplicated pairs) among a subset of variables
std::vector<std::pair<std::string, std::string>> edges_among(
    const ConjunctiveQuery& q, const std::set<std::string>& vars) {
  std::set<std::pair<std::string, std::string>> es;
  for (auto& a : q.roleAtoms)
    if (vars.count(a.x) && vars.count(a.y)) es.insert({a.x, a.y});
  return {es.begin(), es.end()};
}

// connected components (undirected) of the subquery induced by vars
std::vector<std::vector<std::string>> components(const ConjunctiveQuery& q,
                                                 const std::set<std::string>& vars) {
  std::map<std::string, std::vector<std::string>> adj;
  for (auto& v : vars) adj[v];
  for (auto& [x, y] : edges_among(q, vars)) {
    adj[x].push_back(y);
    adj[y].push_back(x);
  }
  std::set<std::string> seen;
  std::vector<std::vector<std::string>> out;
  for (auto& v : vars) {
    if (seen.count(v)) continue;
    std::vector<std::string> comp, stack{v};
    seen.insert(v);
    while (!stack.empty()) {
      std::string x = stack.back();
      stack.pop_back();
      comp.push_back(x);
      for (auto& y : adj[x])
        if (seen.insert(y).second) stack.push_back(y);
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// root of a directed tree over vars, or nullopt when not tree-shaped
std::optional<std::string> tree_root(const ConjunctiveQuery& q,
                                     const std::vector<std::string>& vars) {
  std::set<std::string> vs(vars.begin(), vars.end());
  auto es = edges_among(q, vs);
  if (es.size() != vars.size() - 1) return std::nullopt;
  std::map<std::string, int> indeg;
  for (auto& v : vars) indeg[v] = 0;
  for (auto& [x, y] : es) {
    if (x == y) return std::nullopt;
    ++indeg[y];
  }
  std::string root;
  int roots = 0;
  for (auto& [v, d] : indeg) {
    if (d == 0) {
      root = v;
      ++roots;
    } else if (d != 1) {
      return std::nullopt;
    }
  }
  if (roots != 1) return std::nullopt;
  // connectivity: |E| = |V| - 1 with unique root and indegrees <= 1 implies a
  // forest reachable from the root only if every node is reachable
  std::set<std::string> seen{root};
  std::vector<std::string> stack{root};
  while (!stack.empty()) {
    std::string x = stack.back();
    stack.pop_back();
    for (auto& [a, b] : es)
      if (a == x && seen.insert(b).second) stack.push_back(b);
  }
  if (seen.size() != vars.size()) return std::nullopt;
  return root;
}

ConjunctiveQuery restrict_query(const ConjunctiveQuery& q, const std::vector<std::string>& vars) {
  std::set<std::string> vs(vars.begin(), vars.end());
  ConjunctiveQuery out;
  out.vars = vars;
  for (auto& a : q.roleAtoms)
    if (vs.count(a.x) && vs.count(a.y)) out.roleAtoms.push_back(a);
  for (auto& a : q.conceptAtoms)
    if (vs.count(a.x)) out.conceptAtoms.push_back(a);
  return out;
}

}  // namespace

std::vector<std::pair<ConjunctiveQuery, std::pair<std::string, std::string>>> fork_eliminations(
    const ConjunctiveQuery& q) {
  std::vector<std::pair<ConjunctiveQuery, std::pair<std::string, std::string>>> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& a : q.roleAtoms) {
    for (auto& b : q.roleAtoms) {
      if (a.y != b.y || a.x == b.x) continue;  // two parents of a shared child
      std::string y = std::min(a.x, b.x), z = std::max(a.x, b.x);
      if (!seen.insert({y, z}).second) continue;
      out.emplace_back(rename(q, {{z, y}}), std::make_pair(y, z));
    }
  }
  return out;
}

std::string canonical_query(const ConjunctiveQuery& q) {
  // minimal rendering over all variable bijections into v0..v{n-1}
  std::vector<std::string> vars = q.vars;
  std::sort(vars.begin(), vars.end());
  std::string best;
  do {
    std::map<std::string, std::string> m;
    for (size_t i = 0; i < vars.size(); ++i) m[vars[i]] = "v" + std::to_string(i);
    ConjunctiveQuery r = rename(q, m);
    std::vector<std::string> atoms;
    for (auto& a : r.roleAtoms) atoms.push_back(a.role + "(" + a.x + "," + a.y + ")");
    for (auto& a : r.conceptAtoms) atoms.push_back(a.concept_ + "(" + a.x + ")");
    std::sort(atoms.begin(), atoms.end());
    std::ostringstream os;
    for (auto& s : atoms) os << s << ";";
    std::string key = os.str();
    if (best.empty() || key < best) best = key;
  } while (std::next_permutation(vars.begin(), vars.end()));
  return best;
}

std::vector<ConjunctiveQuery> fork_rewritings(const ConjunctiveQuery& q, long long cap) {
  std::vector<ConjunctiveQuery> out{q};
  std::set<std::string> seen{canonical_query(q)};
  size_t next = 0;
  long long work = 0;
  while (next < out.size()) {
    ConjunctiveQuery cur = out[next++];
    for (auto& [r, merged] : fork_eliminations(cur)) {
      if (++work > cap) throw ResourceLimitError("fork rewriting cap exceeded");
      std::string key = canonical_query(r);
      if (seen.insert(key).second) out.push_back(r);
    }
  }
  return out;
}

ConjunctiveQuery maximal_fork_rewriting(const ConjunctiveQuery& q) {
  ConjunctiveQuery cur = q;
  while (true) {
    auto elims = fork_eliminations(cur);
    if (elims.empty()) return cur;
    cur = elims.front().first;
  }
}

std::vector<Splitting> splittings(const ConjunctiveQuery& q, const KnowledgeBase& kb) {
  Signature sig = signature_of(kb);
  std::vector<std::string> inds(sig.individuals.begin(), sig.individuals.end());
  std::vector<Splitting> out;
  const int n = int(q.vars.size());
  // 0 = R, 1 = T, 2 = S
  std::vector<int> part(n, 0);
  while (true) {
    std::set<std::string> R, T, S;
    for (int i = 0; i < n; ++i)
      (part[i] == 0 ? R : part[i] == 1 ? T : S).insert(q.vars[i]);
    bool ok = true;
    // T components must be tree-shaped
    std::vector<std::vector<std::string>> tComps = components(q, T);
    for (auto& c : tComps)
      if (!tree_root(q, c)) ok = false;
    // S components are the S_i and must be tree-shaped
    std::vector<std::vector<std::string>> sComps = components(q, S);
    std::vector<std::string> roots;
    for (auto& c : sComps) {
      auto r = tree_root(q, c);
      if (!r)
        ok = false;
      else
        roots.push_back(*r);
    }
    // atom side conditions
    if (ok) {
      for (auto& a : q.roleAtoms) {
        bool xR = R.count(a.x), yR = R.count(a.y);
        bool xT = T.count(a.x), yT = T.count(a.y);
        bool xS = S.count(a.x), yS = S.count(a.y);
        if (xR && yR) continue;
        if (xT && yT) continue;  // same component by connectivity
        if (xS && yS) continue;
        if (xR && yS) {
          // y must be the root of its component
          bool isRoot = false;
          for (size_t i = 0; i < sComps.size(); ++i)
            if (std::find(sComps[i].begin(), sComps[i].end(), a.y) != sComps[i].end())
              isRoot = roots[i] == a.y;
          if (!isRoot) ok = false;
          continue;
        }
        ok = false;
      }
    }
    if (ok && !S.empty() && R.empty()) ok = false;  // mu needs a target
    if (ok && !R.empty() && inds.empty()) ok = false;
    if (ok) {
      // mu: for each S_i pick an R-variable with an atom into the root
      std::vector<std::vector<std::string>> muChoices(sComps.size());
      for (size_t i = 0; i < sComps.size(); ++i) {
        std::set<std::string> cand;
        for (auto& a : q.roleAtoms)
          if (R.count(a.x) && a.y == roots[i]) cand.insert(a.x);
        muChoices[i].assign(cand.begin(), cand.end());
        if (muChoices[i].empty()) ok = false;
      }
      if (ok) {
        std::vector<size_t> muPick(sComps.size(), 0);
        while (true) {
          // nu: every function R -> individuals
          std::vector<std::string> rv(R.begin(), R.end());
          std::vector<size_t> nuPick(rv.size(), 0);
          while (true) {
            Splitting sp;
            sp.R = rv;
            sp.T.assign(T.begin(), T.end());
            sp.S = sComps;
            sp.roots = roots;
            for (size_t i = 0; i < sComps.size(); ++i) sp.mu.push_back(muChoices[i][muPick[i]]);
            for (size_t i = 0; i < rv.size(); ++i) sp.nu[rv[i]] = inds[nuPick[i]];
            out.push_back(std::move(sp));
            int i = int(rv.size()) - 1;
            while (i >= 0 && ++nuPick[i] == inds.size()) nuPick[i--] = 0;
            if (i < 0) break;
          }
          int i = int(sComps.size()) - 1;
          while (i >= 0 && ++muPick[i] == muChoices[i].size()) muPick[i--] = 0;
          if (i < 0) break;
        }
      }
    }
    int i = n - 1;
    while (i >= 0 && ++part[i] == 3) part[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

ConceptPtr roll_up(const ConjunctiveQuery& qTree, const std::string& root) {
  auto r = tree_root(qTree, qTree.vars);
  if (!r || *r != root) throw std::invalid_argument("query is not tree-shaped at the given root");
  std::function<ConceptPtr(const std::string&)> build = [&](const std::string& x) -> ConceptPtr {
    std::vector<ConceptPtr> conj;
    std::vector<std::string> names;
    for (auto& a : qTree.conceptAtoms)
      if (a.x == x) names.push_back(a.concept_);
    std::sort(names.begin(), names.end());
    for (auto& nm : names) conj.push_back(mk_name(nm));
    std::set<std::string> kids;
    for (auto& a : qTree.roleAtoms)
      if (a.x == x) kids.insert(a.y);
    for (auto& y : kids) {
      std::set<std::string> roles;
      for (auto& a : qTree.roleAtoms)
        if (a.x == x && a.y == y) roles.insert(a.role);
      SetTermPtr term;
      bool first = true;
      for (auto& role : roles) {
        term = first ? st_role(role) : st_inter(term, st_role(role));
        first = false;
      }
      ConceptPtr child = build(y);
      if (!is_top(child)) term = st_inter(term, mk_concept_set(child));
      conj.push_back(mk_succ(ca_card_ge(pa_card(term), pa_const(1))));
    }
    if (conj.empty()) return mk_top();
    return mk_and(std::move(conj));
  };
  return build(root);
}

std::string SpoilerClause::key() const {
  switch (kind) {
    case K::TreeKill:
      return "T|" + render(concept_);
    case K::ConceptDenial:
      return "C|" + indiv + "|" + render(concept_);
    case K::RoleDenial:
      return "R|" + role + "|" + from + "|" + to;
    case K::AttachDenial:
      return "A|" + indiv + "|" + render(concept_);
  }
  return "";
}

std::string Spoiler::key() const {
  std::string s;
  for (auto& c : clauses) s += c.key() + "&";
  return s;
}

namespace {

// attachment concept for S_i: exists (/\ roles into the root).(rolled subtree)
ConceptPtr attachment_concept(const ConjunctiveQuery& q, const Splitting& sp, size_t i) {
  std::set<std::string> roles;
  for (auto& a : q.roleAtoms)
    if (a.x == sp.mu[i] && a.y == sp.roots[i]) roles.insert(a.role);
  SetTermPtr term;
  bool first = true;
  for (auto& role : roles) {
    term = first ? st_role(role) : st_inter(term, st_role(role));
    first = false;
  }
  ConceptPtr sub = roll_up(restrict_query(q, sp.S[i]), sp.roots[i]);
  if (!is_top(sub)) term = st_inter(term, mk_concept_set(sub));
  return mk_succ(ca_card_ge(pa_card(term), pa_const(1)));
}

std::vector<SpoilerClause> clause_menu(const ConjunctiveQuery& q, const Splitting& sp) {
  std::vector<SpoilerClause> menu;
  std::set<std::string> R(sp.R.begin(), sp.R.end());
  for (auto& comp : components(q, std::set<std::string>(sp.T.begin(), sp.T.end()))) {
    auto root = tree_root(q, comp);
    SpoilerClause c;
    c.kind = SpoilerClause::K::TreeKill;
    c.concept_ = roll_up(restrict_query(q, comp), *root);
    menu.push_back(std::move(c));
  }
  for (auto& a : q.conceptAtoms) {
    if (!R.count(a.x)) continue;
    SpoilerClause c;
    c.kind = SpoilerClause::K::ConceptDenial;
    c.concept_ = mk_name(a.concept_);
    c.indiv = sp.nu.at(a.x);
    menu.push_back(std::move(c));
  }
  for (auto& a : q.roleAtoms) {
    if (!R.count(a.x) || !R.count(a.y)) continue;
    SpoilerClause c;
    c.kind = SpoilerClause::K::RoleDenial;
    c.role = a.role;
    c.from = sp.nu.at(a.x);
    c.to = sp.nu.at(a.y);
    menu.push_back(std::move(c));
  }
  for (size_t i = 0; i < sp.S.size(); ++i) {
    SpoilerClause c;
    c.kind = SpoilerClause::K::AttachDenial;
    c.concept_ = attachment_concept(q, sp, i);
    c.indiv = sp.nu.at(sp.mu[i]);
    menu.push_back(std::move(c));
  }
  return menu;
}

}  // namespace

std::vector<Spoiler> super_spoilers(const ConjunctiveQuery& q, const KnowledgeBase& kb,
                                    long long cap) {
  // clause menus for every (fork rewriting, splitting) pair
  std::map<std::string, SpoilerClause> universe;
  std::vector<std::set<std::string>> menus;
  for (auto& qr : fork_rewritings(q, cap)) {
    for (auto& sp : splittings(qr, kb)) {
      std::set<std::string> menu;
      for (auto& c : clause_menu(qr, sp)) {
        menu.insert(c.key());
        universe.emplace(c.key(), c);
      }
      menus.push_back(std::move(menu));
    }
  }
  // de-duplicate menus; drop menus that are supersets of other menus (their
  // pairs are covered whenever the subset pair is)
  std::sort(menus.begin(), menus.end(),
            [](auto& a, auto& b) { return a.size() < b.size() || (a.size() == b.size() && a < b); });
  std::vector<std::set<std::string>> essential;
  for (auto& m : menus) {
    bool redundant = false;
    for (auto& e : essential)
      if (std::includes(m.begin(), m.end(), e.begin(), e.end())) redundant = true;
    if (!redundant) essential.push_back(m);
  }

  // minimal hitting sets
  std::vector<std::set<std::string>> hits;
  long long work = 0;
  std::set<std::string> chosen;
  std::function<void()> rec = [&]() {
    if (++work > cap) throw ResourceLimitError("super-spoiler enumeration cap exceeded");
    // first menu not hit
    const std::set<std::string>* open = nullptr;
    for (auto& m : essential) {
      bool hit = false;
      for (auto& c : chosen)
        if (m.count(c)) hit = true;
      if (!hit) {
        open = &m;
        break;
      }
    }
    if (!open) {
      hits.push_back(chosen);
      return;
    }
    for (auto& c : *open) {
      chosen.insert(c);
      rec();
      chosen.erase(c);
    }
  };
  rec();

  // keep minimal sets only, deduplicated
  std::sort(hits.begin(), hits.end(),
            [](auto& a, auto& b) { return a.size() < b.size() || (a.size() == b.size() && a < b); });
  std::vector<std::set<std::string>> minimal;
  for (auto& h : hits) {
    bool superset = false;
    for (auto& m : minimal)
      if (std::includes(h.begin(), h.end(), m.begin(), m.end())) superset = true;
    if (!superset && (minimal.empty() || h != minimal.back())) minimal.push_back(h);
  }

  std::vector<Spoiler> out;
  for (auto& h : minimal) {
    Spoiler sp;
    for (auto& key : h) sp.clauses.push_back(universe.at(key));
    std::sort(sp.clauses.begin(), sp.clauses.end(),
              [](const SpoilerClause& a, const SpoilerClause& b) { return a.key() < b.key(); });
    out.push_back(std::move(sp));
  }
  return out;
}

EntailResult entails(const KnowledgeBase& kb, const ConjunctiveQuery& q, const RunConfig& cfg) {
  cfg.validate();
  NormalizeResult norm = normalize_kb(kb);
  Signature sig = signature_of(norm.kb);
  if (sig.individuals.empty())
    throw std::invalid_argument("query entailment requires a non-empty ABox");

  EntailResult out;
  bool sawResource = false;
  for (auto& sp : super_spoilers(q, norm.kb, 20000)) {
    KnowledgeBase kbs = norm.kb;
    for (auto& c : sp.clauses) {
      switch (c.kind) {
        case SpoilerClause::K::TreeKill:
          kbs.tbox.push_back({mk_top(), mk_not(c.concept_)});
          break;
        case SpoilerClause::K::ConceptDenial:
        case SpoilerClause::K::AttachDenial:
          kbs.conceptAssertions.push_back({mk_not(c.concept_), c.indiv});
          break;
        case SpoilerClause::K::RoleDenial:
          kbs.roleAssertions.push_back({c.role, c.from, c.to, true});
          break;
      }
    }
    consist::ConsistencyResult r;
    try {
      r = consist::consistent(kbs, cfg);
    } catch (const ResourceLimitError&) {
      sawResource = true;
      continue;
    }
    if (r.verdict == qfbapa::Verdict::ResourceExceeded) {
      sawResource = true;
      continue;
    }
    if (r.verdict != qfbapa::Verdict::Sat) continue;

    // countermodel: the consistency model, made locally acyclic when it
    // still admits a match
    Interpretation m = *r.model;
    if (cq_match(m, q)) {
      try {
        int k = q.atom_count() + 1;
        Unraveling loose = k_loosening(m, k);
        std::vector<std::string> names(sig.concepts.begin(), sig.concepts.end());
        auto base = type_counts(m, names);
        auto S = repair_ercbox(loose.I, names, base);
        m = s_duplicate(loose.I, S);
      } catch (const ResourceLimitError&) {
        sawResource = true;
        continue;
      }
    }
    if (!satisfies(m, norm.kb).satisfied)
      throw std::logic_error("countermodel lost knowledge-base satisfaction");
    if (!satisfies(m, kb).satisfied)
      throw std::logic_error("countermodel violates the input knowledge base");
    if (cq_match(m, q))
      throw std::logic_error("countermodel still admits a query match");
    out.verdict = Entailment::NotEntailed;
    out.spoiler = sp;
    out.countermodel = std::move(m);
    return out;
  }
  out.verdict = sawResource ? Entailment::ResourceExceeded : Entailment::Entailed;
  return out;
}

}  // namespace carddl::query
