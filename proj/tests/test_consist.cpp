#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "carddl/consist.hpp"
#include "carddl/normalize.hpp"
#include "carddl/oracle.hpp"
#include "carddl/parser.hpp"
#include "testutil.hpp"

using namespace carddl;
using carddl::qfbapa::Verdict;

namespace {

// (A, R) instances inside the fuzz bounds: <= 3 concept names, <= 2 roles,
// <= 2 individuals, coefficients <= 3, offsets <= 2
KnowledgeBase random_ar_kb(testutil::Rng& rng, bool allowSucc = true) {
  std::vector<std::string> names{"A", "B", "C"};
  std::vector<std::string> roles{"r", "s"};
  std::vector<std::string> inds{"a", "b"};
  std::string text;
  int nAssert = testutil::irand(rng, 1, 3);
  for (int i = 0; i < nAssert; ++i)
    text += "abox: " + names[testutil::irand(rng, 0, 2)] + "(" +
            inds[testutil::irand(rng, 0, 1)] + ")\n";
  int nRole = testutil::irand(rng, 0, 2);
  for (int i = 0; i < nRole; ++i)
    text += "abox: " + roles[testutil::irand(rng, 0, 1)] + "(" + inds[testutil::irand(rng, 0, 1)] +
            ", " + inds[testutil::irand(rng, 0, 1)] + ")\n";
  if (allowSucc && testutil::irand(rng, 0, 2) == 0) {
    std::string role = roles[testutil::irand(rng, 0, 1)];
    std::string set =
        testutil::coin(rng) ? role : role + " inter " + names[testutil::irand(rng, 0, 2)];
    std::string rel = testutil::coin(rng) ? ">= 1" : (testutil::coin(rng) ? "= 0" : "<= 2");
    text += "abox: succ(card(" + set + ") " + rel + ")(" + inds[testutil::irand(rng, 0, 1)] +
            ")\n";
  }
  // 1-2 semi-restricted constraints combined positively
  auto lin = [&](bool allowOffset) {
    std::string s;
    int terms = testutil::irand(rng, 1, 2);
    for (int i = 0; i < terms; ++i) {
      if (i) s += " + ";
      int coef = testutil::irand(rng, 1, 3);
      if (coef != 1) s += std::to_string(coef) + " * ";
      s += "card(" + names[testutil::irand(rng, 0, 2)] + ")";
    }
    if (allowOffset && testutil::coin(rng)) s += " + " + std::to_string(testutil::irand(rng, 1, 2));
    return s;
  };
  std::string c1 = lin(true) + " <= " + lin(false);
  if (testutil::irand(rng, 0, 3) == 0) {
    // a self-defeating constraint: lhs dominates rhs with a positive offset
    std::string n = names[testutil::irand(rng, 0, 2)];
    c1 = std::to_string(testutil::irand(rng, 1, 3)) + " * card(" + n + ") + " +
         std::to_string(testutil::irand(rng, 1, 2)) + " <= card(" + n + ")";
  }
  if (testutil::coin(rng)) {
    std::string c2 = lin(true) + " <= " + lin(false);
    text += "erc: (" + c1 + ") " + (testutil::coin(rng) ? "and" : "or") + " (" + c2 + ")\n";
  } else {
    text += "erc: " + c1 + "\n";
  }
  return parse_kb(text);
}

}  // namespace

TEST_CASE("dnf_split enumerates the true valuations") {
  auto kb = parse_kb("erc: card(A) + 1 <= card(B)");
  auto single = consist::dnf_split(*kb.erc, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == std::vector<int>{0});

  auto kb2 = parse_kb("erc: (card(A) + 1 <= card(B)) or (card(B) + 1 <= card(A))");
  auto split = consist::dnf_split(*kb2.erc, 2);
  REQUIRE(split.size() == 3);
  CHECK(split[0] == std::vector<int>{0});
  CHECK(split[1] == std::vector<int>{1});
  CHECK(split[2] == (std::vector<int>{0, 1}));
}

TEST_CASE("dnf_split outputs are jointly equisatisfiable with the positive box") {
  testutil::Rng rng(606);
  for (int iter = 0; iter < 25; ++iter) {
    auto kb = random_ar_kb(rng, false);
    KnowledgeBase base = parse_kb("abox: A(a)");
    base.ercConstraints = kb.ercConstraints;
    base.erc = kb.erc;
    bool whole = !no_model(base, 3);
    bool anyConj = false;
    for (auto& conj : consist::dnf_split(*base.erc, int(base.ercConstraints.size()))) {
      KnowledgeBase restricted = base;
      ErcNode node;
      node.kind = ErcNode::K::And;
      for (int ci : conj) {
        ErcNode leaf;
        leaf.kind = ErcNode::K::Leaf;
        leaf.leaf = ci;
        node.kids.push_back(leaf);
      }
      restricted.erc = node.kids.size() == 1 ? node.kids[0] : node;
      if (!no_model(restricted, 3)) anyConj = true;
    }
    CHECK(whole == anyConj);
  }
}

TEST_CASE("phi_t_prime carries cover, individual bounds and role assertions") {
  auto kb = parse_kb("abox: A(a)\nabox: r(a, b)");
  auto norm = normalize_kb(kb);
  consist::Engine eng(norm.kb);
  REQUIRE(eng.roles() == std::vector<std::string>{"r"});
  REQUIRE(eng.individuals() == (std::vector<std::string>{"a", "b"}));
  int withA = -1, without = -1;
  for (size_t ti = 0; ti < eng.types().size(); ++ti) {
    const auto& t = eng.types()[ti];
    bool hasInd = t.indBits[0] || t.indBits[1];
    if (t.indBits[0] && !t.indBits[1] &&
        satpp::type_contains(eng.closure(), {t.bits}, eng.closure().find(mk_name("A"))))
      withA = int(ti);
    if (!hasInd && without < 0) without = int(ti);
  }
  REQUIRE(withA >= 0);
  REQUIRE(without >= 0);
  std::string fa = qfbapa::render(eng.phi_t_prime(withA));
  CHECK(fa.find("X[r] = univ") != std::string::npos);
  CHECK(fa.find("not 1 < card(X[a])") != std::string::npos);
  CHECK(fa.find("not 1 < card(X[b])") != std::string::npos);
  CHECK(fa.find("not card(X[b] inter X[r]) < 1") != std::string::npos);
  std::string fw = qfbapa::render(eng.phi_t_prime(without));
  CHECK(fw.find("X[r] = univ") != std::string::npos);
  CHECK(fw.find("card(X[b] inter X[r])") == std::string::npos);
}

TEST_CASE("an empty role signature degenerates the cover to the empty set") {
  auto kb = parse_kb("abox: A(a)");
  consist::Engine eng(normalize_kb(kb).kb);
  CHECK(eng.roles().empty());
  CHECK(qfbapa::render(eng.phi_t_prime(0)).find("empty = univ") != std::string::npos);
}

TEST_CASE("realized regions embed into the available types") {
  auto kb = parse_kb("abox: A(a)");
  consist::Engine eng(normalize_kb(kb).kb);
  std::vector<int> all;
  for (size_t i = 0; i < eng.types().size(); ++i) all.push_back(int(i));
  auto f = eng.phi_t_prime(0);
  qfbapa::Region region;
  region.signs.assign(f.vars.size(), false);
  const auto& cl = eng.closure();
  for (int p = 0; p < cl.pairs(); ++p) {
    region.signs[cl.pairPos[p]] = eng.types()[0].bits[p];
    region.signs[cl.pairNeg[p]] = !eng.types()[0].bits[p];
  }
  region.signs[cl.members.size()] = eng.types()[0].indBits[0];
  CHECK(eng.realized(region, all));
  CHECK(!eng.realized(region, {}));
  qfbapa::Region bad = region;
  bad.signs[cl.pairPos[0]] = true;
  bad.signs[cl.pairNeg[0]] = true;
  CHECK(!eng.realized(bad, all));
}

TEST_CASE("augmented types include the empty-support type for a bare assertion") {
  auto kb = parse_kb("abox: A(a)");
  consist::Engine eng(normalize_kb(kb).kb);
  auto ats = eng.augmented_types({}, 5000);
  bool foundEmpty = false;
  const auto& cl = eng.closure();
  int aIdx = cl.find(mk_name("A"));
  for (auto& at : ats) {
    if (!at.venn.empty()) continue;
    if (!at.type.indBits[0]) continue;
    if (satpp::type_contains(cl, {at.type.bits}, aIdx)) foundEmpty = true;
    CHECK(at.witness.counts.empty());
  }
  CHECK(foundEmpty);
  CHECK(ats.size() <= size_t(eng.types().size()) * 4);
}

TEST_CASE("the contradictory offset constraint is inconsistent") {
  auto kb = parse_kb("abox: A(a)\nerc: card(A) + 1 <= card(A)");
  auto r = consist::consistent(kb);
  CHECK(r.verdict == Verdict::Unsat);
  CHECK(no_model(kb, 4));
}

TEST_CASE("a satisfiable offset constraint ships an audited model") {
  auto kb = parse_kb("abox: A(a)\nerc: card(A) + 1 <= card(B)");
  auto r = consist::consistent(kb);
  REQUIRE(r.verdict == Verdict::Sat);
  REQUIRE(r.model.has_value());
  CHECK(satisfies(*r.model, kb).satisfied);
  CHECK(r.model->concepts.at("B").size() >= r.model->concepts.at("A").size() + 1);
  CHECK(!no_model(kb, 3));
}

TEST_CASE("an empty ERCBox is trivially passed") {
  auto kb = parse_kb("abox: A(a)");
  auto r = consist::consistent(kb);
  REQUIRE(r.verdict == Verdict::Sat);
  CHECK(satisfies(*r.model, kb).satisfied);
}

TEST_CASE("role assertions clash with zero-successor demands") {
  auto kb = parse_kb("abox: r(a, b)\nabox: succ(card(r) = 0)(a)");
  auto r = consist::consistent(kb);
  CHECK(r.verdict == Verdict::Unsat);
  CHECK(no_model(kb, 3));
}

TEST_CASE("role assertions are reflected in the extracted model") {
  auto kb = parse_kb("abox: r(a, b)\nabox: A(b)\nabox: succ(card(r inter A) >= 1)(a)");
  auto r = consist::consistent(kb);
  REQUIRE(r.verdict == Verdict::Sat);
  CHECK(satisfies(*r.model, kb).satisfied);
  int ia = r.model->individuals.at("a");
  int ib = r.model->individuals.at("b");
  CHECK(r.model->roles.at("r").count({ia, ib}));
}

TEST_CASE("negated role assertions are honored by extraction") {
  auto kb = parse_kb("abox: A(a)\nabox: B(b)\nabox: succ(card(r) >= 1)(a)");
  kb.roleAssertions.push_back({"r", "a", "b", true});
  auto r = consist::consistent(kb);
  REQUIRE(r.verdict == Verdict::Sat);
  CHECK(satisfies(*r.model, kb).satisfied);
  int ia = r.model->individuals.at("a");
  int ib = r.model->individuals.at("b");
  CHECK(!r.model->roles.at("r").count({ia, ib}));
  CHECK(!ars(*r.model, ia).empty());
}

TEST_CASE("elimination traces record removals") {
  auto kb = parse_kb("abox: A(a)\nerc: card(A) + 1 <= card(A)");
  auto r = consist::consistent(kb);
  CHECK(r.verdict == Verdict::Unsat);
  CHECK(!r.trace.empty());
  bool sawRemoval = false;
  for (auto& t : r.trace)
    if (t.step == 3 || t.step == 2) sawRemoval = true;
  CHECK(sawRemoval);
}

TEST_CASE("fuzzed instances: consistent ships audited models, inconsistent is confirmed") {
  testutil::Rng rng(1717);
  int sat = 0, unsat = 0;
  for (int iter = 0; iter < 40; ++iter) {
    auto kb = random_ar_kb(rng);
    CAPTURE(iter);
    CAPTURE(render_kb(kb));
    consist::ConsistencyResult r = consist::consistent(kb);
    REQUIRE(r.verdict != Verdict::ResourceExceeded);
    if (r.verdict == Verdict::Sat) {
      ++sat;
      CHECK(satisfies(*r.model, kb).satisfied);
    } else {
      ++unsat;
      CHECK(no_model(kb, 4));
    }
  }
  CHECK(sat > 5);
  CHECK(unsat > 5);
}
