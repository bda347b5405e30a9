#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "carddl/encodings.hpp"
#include "carddl/interpretation.hpp"
#include "carddl/parser.hpp"
#include "carddl/satpp.hpp"
#include "testutil.hpp"

using namespace carddl;
using carddl::qfbapa::Verdict;

namespace {

ConceptPtr example_E() {
  return parse_concept("sat(card(A) >= 4) and sat(A <= r) and sat(card(r) <= 3)");
}

// random globally-constrained concepts: boolean combinations of names and
// depth-one sat() atoms over names and roles
ConceptPtr random_pp_concept(testutil::Rng& rng, int depth) {
  if (depth == 0) return mk_name(testutil::coin(rng) ? "A" : "B");
  switch (testutil::irand(rng, 0, 4)) {
    case 0:
      return mk_and({random_pp_concept(rng, depth - 1), random_pp_concept(rng, depth - 1)});
    case 1:
      return mk_or({random_pp_concept(rng, depth - 1), random_pp_concept(rng, depth - 1)});
    case 2:
      return mk_not(random_pp_concept(rng, depth - 1));
    default: {
      SetTermPtr set;
      switch (testutil::irand(rng, 0, 2)) {
        case 0:
          set = mk_concept_set(mk_name(testutil::coin(rng) ? "A" : "B"));
          break;
        case 1:
          set = st_role(testutil::coin(rng) ? "r" : "s");
          break;
        default:
          set = st_inter(mk_concept_set(mk_name("A")), st_role("r"));
          break;
      }
      auto card = pa_card(set);
      auto c = pa_const(testutil::irand(rng, 0, 4));
      switch (testutil::irand(rng, 0, 2)) {
        case 0:
          return mk_constr(ca_card_ge(card, c));
        case 1:
          return mk_constr(ca_card_lt(card, c));
        default:
          return mk_constr(ca_card_eq(card, c));
      }
    }
  }
}

// Bounded satisfiability oracle for depth-one concepts: an element's
// membership depends only on the concept extensions, the universe size and
// its own successor sets, so all interpretations are covered by one
// element's worth of choices.
bool oracle_pp_satisfiable(const ConceptPtr& E, int maxSize) {
  Signature sig;
  collect_names(E, sig);
  std::vector<std::string> names(sig.concepts.begin(), sig.concepts.end());
  std::vector<std::string> roles(sig.roles.begin(), sig.roles.end());
  const int m = int(names.size());
  const int nr = int(roles.size());
  for (int n = 1; n <= maxSize; ++n) {
    for (uint64_t ext = 0; ext < (1ull << (n * m)); ++ext) {
      // enumerate the candidate element d = 0 with its successor sets; other
      // elements' edges cannot influence d's membership in a depth-one
      // concept, so edge-free companions lose no generality
      for (uint64_t cfg = 0; cfg < (1ull << (n * nr)); ++cfg) {
        Interpretation I;
        for (int e = 0; e < n; ++e) I.labels.push_back("e" + std::to_string(e));
        for (int c = 0; c < m; ++c) {
          auto& cext = I.concepts[names[c]];
          for (int e = 0; e < n; ++e)
            if (ext >> (uint64_t(e) * m + c) & 1) cext.insert(e);
        }
        for (int r = 0; r < nr; ++r) {
          auto& rel = I.roles[roles[r]];
          for (int t = 0; t < n; ++t)
            if (cfg >> (uint64_t(r) * n + t) & 1) rel.insert({0, t});
        }
        if (eval_pp(I, E).count(0)) return true;
      }
    }
  }
  return false;
}

}  // namespace

TEST_CASE("the example closure induces exactly two goal types") {
  satpp::Reduction red(example_E());
  CHECK(red.closure().members.size() == 10);
  CHECK(red.types().size() == 16);
  auto goalTypes = red.types_containing(example_E());
  REQUIRE(goalTypes.size() == 2);
  // both contain the three constraint expressions; they differ on A
  auto aIdx = red.closure().find(mk_name("A"));
  auto c1Idx = red.closure().find(parse_concept("sat(card(A) >= 4)"));
  bool sawA = false, sawNotA = false;
  for (int ti : goalTypes) {
    CHECK(satpp::type_contains(red.closure(), red.types()[ti], c1Idx));
    if (satpp::type_contains(red.closure(), red.types()[ti], aIdx))
      sawA = true;
    else
      sawNotA = true;
  }
  CHECK(sawA);
  CHECK(sawNotA);
}

TEST_CASE("types for a bare name") {
  auto types = satpp::types_of(mk_name("A"));
  REQUIRE(types.size() == 2);
}

TEST_CASE("every generated type passes the closure conditions") {
  testutil::Rng rng(404);
  for (int iter = 0; iter < 25; ++iter) {
    auto E = random_pp_concept(rng, testutil::irand(rng, 1, 2));
    satpp::Reduction red(E);
    const auto& cl = red.closure();
    for (auto& t : red.types()) {
      // condition 1 is structural; re-check 2 and 3 against the members
      for (size_t i = 0; i < cl.members.size(); ++i) {
        const auto& memb = cl.members[i];
        if (memb->kind == CK::And) {
          bool all = true;
          for (auto& k : memb->kids) {
            int ki = cl.find(k);
            all = all && satpp::type_contains(cl, t, ki);
          }
          CHECK(satpp::type_contains(cl, t, int(i)) == all);
        }
        if (memb->kind == CK::Or) {
          bool any = false;
          for (auto& k : memb->kids) {
            int ki = cl.find(k);
            any = any || satpp::type_contains(cl, t, ki);
          }
          CHECK(satpp::type_contains(cl, t, int(i)) == any);
        }
      }
    }
    // distinct types differ somewhere
    for (size_t i = 0; i < red.types().size(); ++i)
      for (size_t j = i + 1; j < red.types().size(); ++j)
        CHECK(!(red.types()[i] == red.types()[j]));
  }
}

TEST_CASE("psi of the goal types matches the displayed formula") {
  satpp::Reduction red(example_E());
  auto goalTypes = red.types_containing(example_E());
  // expected: not |X_A| < 4 and X_A <= X_r^t and not 3 < |X_r^t|
  for (int ti : goalTypes) {
    auto f = red.psi(ti);
    std::string xa = "X[A]";
    std::string xr = "X[r^t" + std::to_string(ti) + "]";
    std::string expected = "not card(" + xa + ") < 4 and " + xa + " <= " + xr +
                           " and not 3 < card(" + xr + ")";
    CHECK(qfbapa::render(f) == expected);
  }
}

TEST_CASE("psi negates the constraints of negated members") {
  auto E = parse_concept("sat(card(A) >= 4)");
  satpp::Reduction red(E);
  for (size_t ti = 0; ti < red.types().size(); ++ti) {
    bool pos = satpp::type_contains(red.closure(), red.types()[ti], 0);
    auto f = red.psi(int(ti));
    if (pos)
      CHECK(qfbapa::render(f) == "not card(X[A]) < 4");
    else  // the double negation collapses eagerly
      CHECK(qfbapa::render(f) == "card(X[A]) < 4");
  }
}

TEST_CASE("a constraint-free type yields the empty conjunction") {
  satpp::Reduction red(mk_name("A"));
  CHECK(qfbapa::render(red.psi(0)) == "true");
}

TEST_CASE("beta has one complement equation per pair plus the and/or structure") {
  auto E = mk_not(mk_name("A"));
  satpp::Reduction redNeg(E);
  CHECK(qfbapa::render(redNeg.beta()) == "X[not A] = comp(X[A])");

  satpp::Reduction red(example_E());
  auto beta = red.beta();
  // structural audit: one complement conjunct per closure pair and one
  // intersection equation for the single conjunction member
  int complements = 0, structural = 0;
  REQUIRE(beta.root.k == qfbapa::FNode::And);
  for (auto& kid : beta.root.kids) {
    REQUIRE(kid.k == qfbapa::FNode::SetEq);
    if (kid.t.k == qfbapa::STerm::Compl)
      ++complements;
    else
      ++structural;
  }
  CHECK(complements == red.closure().pairs());
  CHECK(structural == 1);
}

TEST_CASE("delta is unsatisfiable exactly for the example") {
  auto r = satpp::sat(example_E());
  CHECK(r.verdict == Verdict::Unsat);

  CHECK(satpp::sat(mk_name("A")).verdict == Verdict::Sat);
  CHECK(satpp::sat(mk_and({mk_name("A"), mk_not(mk_name("A"))})).verdict == Verdict::Unsat);
}

TEST_CASE("the succ variant with a global ECBox is satisfiable") {
  auto eprime = parse_concept("succ(A <= r) and succ(card(r) <= 3)");
  auto kbec = parse_kb("ec: card(A) >= 4");
  auto goal = mk_and({scc_to_pp(eprime, {"r"}), ecbox_to_concept(kbec.ec)});
  auto r = satpp::sat(goal);
  REQUIRE(r.verdict == Verdict::Sat);
  REQUIRE(r.model.has_value());
  CHECK(eval_pp(*r.model, goal).size() > 0);
  CHECK(r.model->concepts.at("A").size() >= 4);
}

TEST_CASE("extraction produces the four-element model for the global constraint alone") {
  auto goal = parse_concept("sat(card(A) >= 4)");
  auto r = satpp::sat(goal);
  REQUIRE(r.verdict == Verdict::Sat);
  CHECK(r.model->concepts.at("A").size() >= 4);
  CHECK(eval_pp(*r.model, goal).size() == size_t(r.model->size()));
}

TEST_CASE("a single-type solution gives a one-element model") {
  auto r = satpp::sat(mk_name("A"));
  REQUIRE(r.verdict == Verdict::Sat);
  CHECK(r.model->size() == 1);
  CHECK(r.model->concepts.at("A").count(0));
}

TEST_CASE("extraction feeds a nominal-plus-complement combination") {
  auto goal = mk_and({encode_nominal("A"), mk_not(mk_name("A"))});
  auto r = satpp::sat(goal);
  REQUIRE(r.verdict == Verdict::Sat);
  CHECK(r.model->size() >= 2);
  CHECK(r.model->concepts.at("A").size() == 1);
}

TEST_CASE("sat agrees with the bounded oracle on random concepts") {
  testutil::Rng rng(808);
  int sat = 0, unsat = 0;
  for (int iter = 0; iter < 100; ++iter) {
    auto E = random_pp_concept(rng, testutil::irand(rng, 1, 2));
    if (iter % 7 == 0) E = mk_and({E, mk_not(E)});  // guarantee contradictions
    CAPTURE(render(E));
    auto r = satpp::sat(E);
    REQUIRE(r.verdict != Verdict::ResourceExceeded);
    if (r.verdict == Verdict::Sat) {
      ++sat;
      // soundness: the extracted model contains a goal element
      CHECK(!eval_pp(*r.model, E).empty());
    } else {
      ++unsat;
      // desk-scale completeness: no interpretation of size <= 4 contains a
      // goal element
      CHECK(!oracle_pp_satisfiable(E, 4));
    }
  }
  CHECK(sat > 25);
  CHECK(unsat >= 14);
}

TEST_CASE("type count stays within the exponential resource bound") {
  satpp::Reduction red(example_E());
  CHECK(red.types().size() <= (1ull << (red.closure().members.size() / 2)));
}
