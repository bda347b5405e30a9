#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "carddl/parser.hpp"
#include "carddl/transforms.hpp"
#include "testutil.hpp"

using namespace carddl;

namespace {

Interpretation self_loop() {
  Interpretation I;
  I.labels = {"d"};
  I.concepts["A"] = {0};
  I.roles["r"] = {{0, 0}};
  return I;
}

// a KB of observed facts: named memberships/edges plus CIs that happen to
// hold, so I |= kb by construction
KnowledgeBase observed_kb(const Interpretation& I, testutil::Rng& rng) {
  KnowledgeBase kb;
  for (auto& [name, d] : I.individuals) {
    for (auto& [c, ext] : I.concepts)
      if (ext.count(d)) kb.conceptAssertions.push_back({mk_name(c), name});
  }
  for (auto& [r, rel] : I.roles)
    for (auto& [a, b] : rel) {
      std::string na, nb;
      for (auto& [name, d] : I.individuals) {
        if (d == a) na = name;
        if (d == b) nb = name;
      }
      if (!na.empty() && !nb.empty()) kb.roleAssertions.push_back({r, na, nb, false});
    }
  // candidate depth-one CIs, kept when they hold
  std::vector<ConceptPtr> candidates = {
      parse_concept("succ(card(r inter A) >= 1)"),
      parse_concept("succ(card(r) = 0) or succ(card(r) >= 1)"),
      parse_concept("A or not A"),
      parse_concept("succ(card(r) <= 2)"),
      parse_concept("not A or succ(card(univ) >= 1)"),
  };
  for (int k = 0; k < 3; ++k) {
    auto lhs = mk_name(testutil::coin(rng) ? "A" : "B");
    auto rhs = candidates[testutil::irand(rng, 0, int(candidates.size()) - 1)];
    auto lext = eval_concept(I, lhs);
    auto rext = eval_concept(I, rhs);
    if (std::includes(rext.begin(), rext.end(), lext.begin(), lext.end()))
      kb.tbox.push_back({lhs, rhs});
  }
  return kb;
}

}  // namespace

TEST_CASE("a role-free interpretation unravels to itself") {
  Interpretation I;
  I.labels = {"e0", "e1"};
  I.concepts["A"] = {1};
  auto u = unravel(I, 3);
  CHECK(u.I.size() == 2);
  CHECK(u.I.concepts.at("A") == std::set<int>{1});
}

TEST_CASE("a self-loop unravels into a path of the requested depth") {
  auto u = unravel(self_loop(), 3);
  CHECK(u.I.size() == 3);
  CHECK(u.I.roles.at("r").size() == 2);
  for (int e = 0; e < u.I.size(); ++e) CHECK(u.last(e) == 0);
}

TEST_CASE("last is a homomorphism from the unraveling") {
  testutil::Rng rng(2025);
  for (int iter = 0; iter < 25; ++iter) {
    auto I = testutil::random_interpretation(rng, testutil::irand(rng, 1, 4), {"A", "B"},
                                             {"r", "s"}, 35, {"a"});
    auto u = unravel(I, 3);
    for (auto& [name, ext] : u.I.concepts)
      for (int e : ext) CHECK(I.concepts.at(name).count(u.last(e)));
    for (auto& [r, rel] : u.I.roles)
      for (auto& [x, y] : rel) CHECK(I.roles.at(r).count({u.last(x), u.last(y)}));
  }
}

TEST_CASE("interior unraveling elements are bisimilar to their last element") {
  testutil::Rng rng(2026);
  for (int iter = 0; iter < 20; ++iter) {
    auto I = testutil::random_interpretation(rng, testutil::irand(rng, 1, 4), {"A"}, {"r", "s"},
                                             35, {"a"});
    const int depth = 3;
    auto u = unravel(I, depth);
    for (int e = 0; e < u.I.size(); ++e) {
      if (int(u.seqs[e].size()) >= depth) continue;  // truncated leaves differ
      CHECK(fb_bisimilar(u.I, e, I, u.last(e)));
    }
  }
}

TEST_CASE("bisimilarity compares roots and successor signatures") {
  Interpretation I;
  I.labels = {"x", "y"};
  I.concepts["A"] = {0, 1};
  CHECK(fb_bisimilar(I, 0, I, 1));
  Interpretation J = I;
  J.roles["r"] = {{0, 1}};
  CHECK(!fb_bisimilar(J, 0, J, 1));  // differing successor counts
}

TEST_CASE("k-loosening of acyclic interpretations matches the full unraveling") {
  Interpretation I;
  I.labels = {"e0", "e1", "e2"};
  I.roles["r"] = {{0, 1}, {1, 2}};
  I.concepts["A"] = {2};
  auto loose = k_loosening(I, 2);
  auto full = unravel(I, 3);  // depth covers every path
  CHECK(loose.I.size() == full.I.size());
  CHECK(loose.I.roles.at("r").size() == full.I.roles.at("r").size());
  CHECK(girth(loose.I) == std::nullopt);
}

TEST_CASE("an anonymous self-loop loosens into a chain with a long back edge") {
  auto loose = k_loosening(self_loop(), 2);
  auto g = girth(loose.I);
  REQUIRE(g.has_value());
  CHECK(*g >= 2);
  CHECK(loose.I.size() >= 3);
}

TEST_CASE("named-only cycles survive loosening verbatim") {
  Interpretation I;
  I.labels = {"e0", "e1"};
  I.roles["r"] = {{0, 1}, {1, 0}};
  I.individuals["a"] = 0;
  I.individuals["b"] = 1;
  auto loose = k_loosening(I, 3);
  CHECK(loose.I.roles.at("r").count({0, 1}));
  CHECK(loose.I.roles.at("r").count({1, 0}));
  CHECK(girth(loose.I) == std::nullopt);  // the cycle is fully named
}

TEST_CASE("girth basics") {
  Interpretation acyclic;
  acyclic.labels = {"e0", "e1"};
  acyclic.roles["r"] = {{0, 1}};
  CHECK(girth(acyclic) == std::nullopt);
  CHECK(girth(self_loop()) == 1);
}

TEST_CASE("loosening preserves observed ABoxes and TBoxes") {
  testutil::Rng rng(31337);
  for (int iter = 0; iter < 20; ++iter) {
    int size = testutil::irand(rng, 1, 4);
    auto I = testutil::random_interpretation(rng, size, {"A", "B"}, {"r"}, 30,
                                             size >= 2 ? std::vector<std::string>{"a", "b"}
                                                       : std::vector<std::string>{"a"});
    auto kb = observed_kb(I, rng);
    REQUIRE(satisfies(I, kb).satisfied);
    auto loose = k_loosening(I, 2);
    CHECK(satisfies(loose.I, kb).satisfied);
  }
}

TEST_CASE("girth of the k-loosening is at least k") {
  testutil::Rng rng(515);
  for (int iter = 0; iter < 30; ++iter) {
    int k = testutil::irand(rng, 2, 4);
    int maxSize = k == 4 ? 3 : (k == 3 ? 4 : 5);
    auto I = testutil::random_interpretation(rng, testutil::irand(rng, 1, maxSize), {"A"}, {"r"},
                                             40, {"a"});
    auto loose = k_loosening(I, k);
    auto g = girth(loose.I);
    if (g) CHECK(*g >= k);
  }
}

TEST_CASE("s_duplicate copies membership and outgoing edges") {
  auto I = self_loop();
  I.individuals["a"] = 0;
  CHECK(s_duplicate(I, {}).size() == 1);
  auto dup = s_duplicate(I, {{0, 2}});
  CHECK(dup.size() == 3);
  CHECK(dup.concepts.at("A").size() == 3);
  // copies point at the original, which keeps its loop
  CHECK(dup.roles.at("r").count({1, 0}));
  CHECK(dup.roles.at("r").count({2, 0}));
  CHECK(dup.individuals.at("a") == 0);
  CHECK_THROWS_AS(s_duplicate(I, {{5, 1}}), std::invalid_argument);
}

TEST_CASE("duplication preserves query matches in both directions") {
  testutil::Rng rng(616);
  auto q = parse_query("q :- r(x, y), A(y)");
  for (int iter = 0; iter < 25; ++iter) {
    auto I = testutil::random_interpretation(rng, testutil::irand(rng, 1, 4), {"A"}, {"r"}, 30,
                                             {"a"});
    std::vector<std::pair<int, long long>> S;
    S.emplace_back(testutil::irand(rng, 0, I.size() - 1), testutil::irand(rng, 1, 2));
    auto dup = s_duplicate(I, S);
    CHECK(cq_match(I, q).has_value() == cq_match(dup, q).has_value());
  }
}

TEST_CASE("the cardinality repair restores a scaled solution") {
  testutil::Rng rng(717);
  auto kb = parse_kb("abox: A(a)\nerc: card(A) + 1 <= card(B)");
  // a base model of the constraint
  Interpretation I;
  I.labels = {"e0", "e1", "e2"};
  I.concepts["A"] = {0};
  I.concepts["B"] = {1, 2};
  I.roles["r"] = {{0, 1}, {1, 2}, {2, 0}};
  I.individuals["a"] = 0;
  REQUIRE(satisfies(I, kb).satisfied);
  auto loose = k_loosening(I, 2);
  std::vector<std::string> names{"A", "B"};
  auto S = repair_ercbox(loose.I, names, type_counts(I, names));
  auto repaired = s_duplicate(loose.I, S);
  CHECK(satisfies(repaired, kb).satisfied);

  // empty ERCBox: the repair may still top counts up to the scaled solution
  auto S0 = repair_ercbox(I, names, type_counts(I, names));
  auto dup0 = s_duplicate(I, S0);
  CHECK(satisfies(dup0, parse_kb("abox: A(a)")).satisfied);
}
