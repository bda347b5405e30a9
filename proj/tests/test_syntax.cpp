#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "carddl/ast.hpp"
#include "carddl/encodings.hpp"
#include "carddl/normalize.hpp"
#include "carddl/parser.hpp"
#include "carddl/satpp.hpp"
#include "testutil.hpp"

using namespace carddl;

TEST_CASE("parse a CI with a succ expression") {
  auto kb = parse_kb("tbox: A <= succ(card(r inter B) = 2)");
  REQUIRE(kb.tbox.size() == 1);
  CHECK(render(kb.tbox[0].lhs) == "A");
  CHECK(render(kb.tbox[0].rhs) == "succ(card(r inter B) = 2)");
}

TEST_CASE("parse concept and role assertions") {
  auto kb = parse_kb("abox: A(a)\nabox: r(a, b)");
  REQUIRE(kb.conceptAssertions.size() == 1);
  REQUIRE(kb.roleAssertions.size() == 1);
  CHECK(kb.conceptAssertions[0].indiv == "a");
  CHECK(kb.roleAssertions[0].role == "r");
  CHECK(kb.roleAssertions[0].from == "a");
  CHECK(kb.roleAssertions[0].to == "b");
}

TEST_CASE("ERCBoxes must be positive") {
  CHECK_THROWS_WITH_AS(parse_kb("erc: not (card(A) = 1)"),
                       doctest::Contains("ERCBox must be positive"), ParseError);
}

TEST_CASE("semi-restricted shape is enforced") {
  CHECK_NOTHROW(parse_kb("erc: card(A) + 1 <= card(B)"));
  CHECK_NOTHROW(parse_kb("erc: 2 * card(A) <= 3 * card(B) + card(A)"));
  CHECK_THROWS_AS(parse_kb("erc: card(A) <= card(B) + 1"), ParseError);
}

TEST_CASE("duplicate single-occurrence sections are rejected") {
  CHECK_THROWS_WITH_AS(parse_kb("erc: card(A) <= card(B)\nerc: card(B) <= card(A)"),
                       doctest::Contains("duplicate section"), ParseError);
  CHECK_THROWS_AS(parse_kb("goal: A\ngoal: B"), ParseError);
}

TEST_CASE("name category clashes are reported") {
  CHECK_THROWS_AS(parse_kb("abox: A(a)\nabox: a(b, c)"), ParseError);
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse_kb("tbox: A <= and");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.col > 0);
  }
}

TEST_CASE("render/parse round trip") {
  const char* texts[] = {
      "tbox: A <= succ(card(r inter B) = 2)",
      "tbox: not (A or B) <= sat(card(A) >= 4 and not (r <= s))",
      "abox: (A and not B)(a)",
      "erc: (card(A) + 1 <= card(B)) or (2 * card(B) <= card(A))",
      "ec: not (card(A inter B) = 1) and div(3, card(A) + 2)",
      "goal: sat(card(A) = 1) and top or bottom",
      "goal: succ(univ = empty or comp(r union s) <= A)",
  };
  for (auto* t : texts) {
    CAPTURE(t);
    auto kb1 = parse_kb(t);
    std::string r1 = render_kb(kb1);
    auto kb2 = parse_kb(r1);
    CHECK(render_kb(kb2) == r1);  // idempotent on canonical text
  }
}

TEST_CASE("deep goal round trips through canonical text") {
  testutil::Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    // random concepts over two names and one role, depth <= 3
    std::function<ConceptPtr(int)> gen = [&](int depth) -> ConceptPtr {
      if (depth == 0 || testutil::irand(rng, 0, 2) == 0)
        return mk_name(testutil::coin(rng) ? "A" : "B");
      switch (testutil::irand(rng, 0, 3)) {
        case 0:
          return mk_and({gen(depth - 1), gen(depth - 1)});
        case 1:
          return mk_or({gen(depth - 1), gen(depth - 1)});
        case 2:
          return mk_not(gen(depth - 1));
        default:
          return mk_constr(ca_card_ge(pa_card(st_inter(mk_concept_set(gen(depth - 1)),
                                                       st_role("r"))),
                                      pa_const(testutil::irand(rng, 0, 4))));
      }
    };
    auto c = gen(3);
    auto again = parse_concept(render(c));
    CHECK(render(again) == render(c));
  }
}

TEST_CASE("closure of the three-constraint conjunction") {
  // E = sat(|A| >= 4) and sat(A <= r) and sat(|r| <= 3)
  auto E = parse_concept("sat(card(A) >= 4) and sat(A <= r) and sat(card(r) <= 3)");
  auto members = satpp::closure_ME(E);
  REQUIRE(members.size() == 10);
  CHECK(render(members[0]) == render(E));
  CHECK(render(members[1]) == render(mk_not(E)));
  CHECK(render(members[2]) == "sat(not card(A) < 4)");
  CHECK(render(members[4]) == "sat(A <= r)");
  CHECK(render(members[6]) == "sat(not 3 < card(r))");
  CHECK(render(members[8]) == "A");
  CHECK(render(members[9]) == "not A");
}

TEST_CASE("closure of a name and of a negated name") {
  auto a = satpp::closure_ME(mk_name("A"));
  REQUIRE(a.size() == 2);
  CHECK(render(a[0]) == "A");
  CHECK(render(a[1]) == "not A");
  auto na = satpp::closure_ME(mk_not(mk_name("A")));
  REQUIRE(na.size() == 2);
  CHECK(render(na[0]) == "not A");
  CHECK(render(na[1]) == "A");
}

TEST_CASE("closure size is at most twice the subdescription count") {
  testutil::Rng rng(11);
  for (int i = 0; i < 30; ++i) {
    std::function<ConceptPtr(int)> gen = [&](int depth) -> ConceptPtr {
      if (depth == 0) return mk_name(testutil::coin(rng) ? "A" : "B");
      switch (testutil::irand(rng, 0, 2)) {
        case 0:
          return mk_and({gen(depth - 1), gen(depth - 1)});
        case 1:
          return mk_or({gen(depth - 1), gen(depth - 1)});
        default:
          return mk_not(gen(depth - 1));
      }
    };
    auto c = gen(testutil::irand(rng, 1, 3));
    std::function<int(const ConceptPtr&)> nodes = [&](const ConceptPtr& x) {
      int acc = 1;
      for (auto& k : x->kids) acc += nodes(k);
      return acc;
    };
    CHECK(int(satpp::closure_ME(c).size()) <= 2 * nodes(c));
  }
}

TEST_CASE("double negation collapses everywhere") {
  auto c = mk_not(mk_not(mk_name("A")));
  CHECK(render(c) == "A");
  auto atom = ca_not(ca_not(ca_card_eq(pa_const(1), pa_const(1))));
  CHECK(render(atom) == "1 = 1");
}

TEST_CASE("normalization: nested succ gets a fresh name") {
  auto kb = parse_kb("tbox: A <= succ(card(r inter succ(card(s) >= 1)) >= 1)");
  auto norm = normalize_kb(kb);
  // fresh definition contributes two CIs
  REQUIRE(norm.kb.tbox.size() == 3);
  for (auto& ci : norm.kb.tbox) {
    CHECK(constraint_depth(ci.lhs) <= 1);
    CHECK(constraint_depth(ci.rhs) <= 1);
  }
  REQUIRE(norm.nameMap.size() == 1);
  CHECK(render(norm.nameMap.begin()->second) == "succ(not card(s) < 1)");
}

TEST_CASE("normalization: complex assertions become atomic") {
  auto kb = parse_kb("abox: (B and C)(a)");
  auto norm = normalize_kb(kb);
  REQUIRE(norm.kb.conceptAssertions.size() == 1);
  CHECK(norm.kb.conceptAssertions[0].c->kind == CK::Name);
  REQUIRE(norm.kb.tbox.size() == 2);  // both inclusion directions
}

TEST_CASE("normalization is idempotent on normalized KBs") {
  auto kb = parse_kb("tbox: A <= succ(card(r) = 0)\nabox: A(a)\nerc: card(A) + 1 <= card(B)");
  auto norm1 = normalize_kb(kb);
  auto norm2 = normalize_kb(norm1.kb);
  CHECK(norm2.nameMap.empty());
  CHECK(render_kb(norm2.kb) == render_kb(norm1.kb));
}

TEST_CASE("proposition-1 encodings have the documented shape") {
  // the top concept canonicalizes to the universe set term
  CHECK(render(encode_nominal("A")) == "sat(card(A) = 1)");
  CHECK(render(encode_universal_role("u")) == "sat(univ <= sat(u = univ))");
  CHECK(render(encode_role_conjunction("t", "r", "s")) == "sat(univ <= sat(t = r inter s))");
  auto rn = encode_role_negation("r", "rc");
  CHECK(render(rn) ==
        "sat(univ <= sat(r inter rc <= empty)) and sat(univ <= sat(card(r) + card(rc) = "
        "card(univ)))");
}

TEST_CASE("ecbox_to_concept keeps the boolean structure") {
  auto kb = parse_kb("ec: card(A) >= 4");
  CHECK(render(ecbox_to_concept(kb.ec)) == "sat(not card(A) < 4)");
  auto kb2 = parse_kb("ec: card(A) = 1 or not (card(B) = 2)");
  CHECK(render(ecbox_to_concept(kb2.ec)) == "sat(card(A) = 1) or sat(not card(B) = 2)");
}

TEST_CASE("scc_to_pp localizes concepts and the universe") {
  CHECK(render(scc_to_pp(mk_name("A"), {"r"})) == "A");
  auto eprime = parse_concept("succ(A <= r) and succ(card(r) <= 3)");
  auto pp = scc_to_pp(eprime, {"r"});
  CHECK(render(pp) == "sat(A inter r <= r) and sat(not 3 < card(r))");
  auto nested = parse_concept("succ(card(univ) = 2)");
  CHECK(render(scc_to_pp(nested, {"r", "s"})) == "sat(card(r union s) = 2)");
}

TEST_CASE("queries parse and render") {
  auto q = parse_query("q :- r(x, y), B(y)");
  CHECK(q.vars.size() == 2);
  CHECK(q.roleAtoms.size() == 1);
  CHECK(q.conceptAtoms.size() == 1);
  auto q2 = parse_query(render_query(q));
  CHECK(render_query(q2) == render_query(q));
  CHECK_THROWS_AS(parse_query("q :- "), ParseError);
}
