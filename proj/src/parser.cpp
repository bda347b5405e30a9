#include "carddl/parser.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace carddl {

namespace {

struct Tok {
  enum K { Ident, Int, Sym, End } k = End;
  std::string s;
  long long v = 0;
  int line = 0, col = 0;
};

bool is_ident_start(char c) { return std::isalpha(unsigned(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(unsigned(c)) || c == '_' || c == '\''; }

std::vector<Tok> lex(const std::string& text, int lineNo) {
  std::vector<Tok> out;
  size_t i = 0;
  auto col = [&](size_t p) { return int(p) + 1; };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') break;
    if (std::isspace(unsigned(c))) {
      ++i;
      continue;
    }
    if (is_ident_start(c)) {
      size_t j = i;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      out.push_back({Tok::Ident, text.substr(i, j - i), 0, lineNo, col(i)});
      i = j;
      continue;
    }
    if (std::isdigit(unsigned(c)) || (c == '-' && i + 1 < text.size() && std::isdigit(unsigned(text[i + 1])))) {
      size_t j = i + 1;
      while (j < text.size() && std::isdigit(unsigned(text[j]))) ++j;
      Tok t{Tok::Int, text.substr(i, j - i), 0, lineNo, col(i)};
      try {
        t.v = std::stoll(t.s);
      } catch (const std::out_of_range&) {
        throw ParseError(lineNo, col(i), "integer constant out of range");
      }
      out.push_back(t);
      i = j;
      continue;
    }
    auto two = text.substr(i, 2);
    if (two == "<=" || two == ">=" || two == ":-") {
      out.push_back({Tok::Sym, two, 0, lineNo, col(i)});
      i += 2;
      continue;
    }
    if (std::string("()+*=<>,.:").find(c) != std::string::npos) {
      out.push_back({Tok::Sym, std::string(1, c), 0, lineNo, col(i)});
      ++i;
      continue;
    }
    throw ParseError(lineNo, col(i), std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", 0, lineNo, col(text.size())});
  return out;
}

const std::set<std::string> kKeywords = {"and",   "or",  "not",  "sat",  "succ", "inter",
                                         "union", "comp", "empty", "univ", "card", "div",
                                         "top",   "bottom"};

struct Parser {
  std::vector<Tok> toks;
  size_t pos = 0;

  explicit Parser(std::vector<Tok> t) : toks(std::move(t)) {}

  const Tok& peek(int ahead = 0) const {
    size_t p = pos + ahead;
    return p < toks.size() ? toks[p] : toks.back();
  }
  Tok next() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }
  [[noreturn]] void fail(const std::string& msg) const {
    const Tok& t = peek();
    throw ParseError(t.line, t.col, msg + (t.k == Tok::End ? " (at end of statement)"
                                                           : " (got '" + t.s + "')"));
  }
  bool at_sym(const std::string& s) const { return peek().k == Tok::Sym && peek().s == s; }
  bool at_kw(const std::string& s) const { return peek().k == Tok::Ident && peek().s == s; }
  void expect_sym(const std::string& s) {
    if (!at_sym(s)) fail("expected '" + s + "'");
    next();
  }
  bool eat_sym(const std::string& s) {
    if (!at_sym(s)) return false;
    next();
    return true;
  }
  bool eat_kw(const std::string& s) {
    if (!at_kw(s)) return false;
    next();
    return true;
  }
  std::string expect_name(const char* what) {
    if (peek().k != Tok::Ident || kKeywords.count(peek().s)) fail(std::string("expected ") + what);
    return next().s;
  }
  void expect_end() {
    if (peek().k != Tok::End) fail("trailing input");
  }

  static bool is_concept_name(const std::string& s) { return s[0] == '_' || std::isupper(unsigned(s[0])); }

  // ---- concepts ----
  ConceptPtr concept_expr() { return concept_or(); }

  ConceptPtr concept_or() {
    std::vector<ConceptPtr> kids{concept_and()};
    while (eat_kw("or")) kids.push_back(concept_and());
    return kids.size() == 1 ? kids[0] : mk_or(std::move(kids));
  }

  ConceptPtr concept_and() {
    std::vector<ConceptPtr> kids{concept_unary()};
    while (eat_kw("and")) kids.push_back(concept_unary());
    return kids.size() == 1 ? kids[0] : mk_and(std::move(kids));
  }

  ConceptPtr concept_unary() {
    if (eat_kw("not")) return mk_not(concept_unary());
    if (eat_kw("top")) return mk_top();
    if (eat_kw("bottom")) return mk_bottom();
    if (eat_kw("sat")) {
      expect_sym("(");
      auto a = cformula();
      expect_sym(")");
      return mk_constr(a);
    }
    if (eat_kw("succ")) {
      expect_sym("(");
      auto a = cformula();
      expect_sym(")");
      return mk_succ(a);
    }
    if (eat_sym("(")) {
      auto c = concept_or();
      expect_sym(")");
      return c;
    }
    if (peek().k == Tok::Ident && !kKeywords.count(peek().s)) {
      std::string n = next().s;
      if (!is_concept_name(n))
        throw ParseError(peek().line, peek().col,
                         "'" + n + "' is not a concept name (concepts start upper-case)");
      return mk_name(n);
    }
    fail("expected concept");
  }

  // ---- constraint formulas (inside sat/succ) ----
  CAtomPtr cformula() { return c_or(); }

  CAtomPtr c_or() {
    std::vector<CAtomPtr> kids{c_and()};
    while (eat_kw("or")) kids.push_back(c_and());
    return kids.size() == 1 ? kids[0] : ca_or(std::move(kids));
  }

  CAtomPtr c_and() {
    std::vector<CAtomPtr> kids{c_unary()};
    while (eat_kw("and")) kids.push_back(c_unary());
    return kids.size() == 1 ? kids[0] : ca_and(std::move(kids));
  }

  CAtomPtr c_unary() {
    if (eat_kw("not")) return ca_not(c_unary());
    if (at_sym("(")) {
      // could be a parenthesized subformula or a parenthesized set term on
      // the left of a relation; try formula first by scanning for a matching
      // close followed by a relation symbol
      size_t save = pos;
      next();
      int depth = 1;
      size_t j = pos;
      while (j < toks.size() && depth > 0) {
        if (toks[j].k == Tok::Sym && toks[j].s == "(") ++depth;
        if (toks[j].k == Tok::Sym && toks[j].s == ")") --depth;
        ++j;
      }
      bool relFollows = j < toks.size() && toks[j].k == Tok::Sym &&
                        (toks[j].s == "=" || toks[j].s == "<" || toks[j].s == "<=" ||
                         toks[j].s == ">" || toks[j].s == ">=");
      bool opFollows = j < toks.size() && toks[j].k == Tok::Ident &&
                       (toks[j].s == "inter" || toks[j].s == "union");
      pos = save;
      if (!relFollows && !opFollows) {
        next();
        auto a = cformula();
        expect_sym(")");
        return a;
      }
      return atom();
    }
    return atom();
  }

  bool pa_ahead() const {
    const Tok& t = peek();
    return t.k == Tok::Int || (t.k == Tok::Ident && t.s == "card");
  }

  CAtomPtr atom() {
    if (at_kw("div")) {
      next();
      expect_sym("(");
      if (peek().k != Tok::Int) fail("expected divisor constant");
      long long n = next().v;
      if (n <= 0) fail("div divisor must be positive");
      expect_sym(",");
      auto l = pa_expr();
      expect_sym(")");
      return ca_divides(n, l);
    }
    if (pa_ahead()) {
      auto k = pa_expr();
      return card_rel(std::move(k));
    }
    auto s = set_union();
    if (eat_sym("=")) return ca_set_eq(s, set_union());
    if (eat_sym("<=")) return ca_set_sub(s, set_union());
    if (eat_sym(">=")) {
      auto t = set_union();
      return ca_set_sub(t, s);
    }
    fail("expected '=', '<=' or '>=' between set terms");
  }

  CAtomPtr card_rel(PAExprPtr k) {
    if (eat_sym("=")) return ca_card_eq(k, pa_expr());
    if (eat_sym("<")) return ca_card_lt(k, pa_expr());
    if (eat_sym("<=")) return ca_card_le(k, pa_expr());
    if (eat_sym(">")) return ca_card_gt(k, pa_expr());
    if (eat_sym(">=")) return ca_card_ge(k, pa_expr());
    fail("expected comparison after arithmetic expression");
  }

  // ---- PA expressions ----
  PAExprPtr pa_expr() {
    auto e = pa_term();
    while (eat_sym("+")) e = pa_sum(e, pa_term());
    return e;
  }

  PAExprPtr pa_term() {
    if (peek().k == Tok::Int) {
      long long v = next().v;
      if (eat_sym("*")) return pa_mul(v, pa_factor());
      return pa_const(v);
    }
    if (eat_kw("card")) {
      expect_sym("(");
      auto s = set_union();
      expect_sym(")");
      return pa_card(s);
    }
    fail("expected integer or card(...)");
  }

  PAExprPtr pa_factor() {
    if (eat_sym("(")) {
      auto e = pa_expr();
      expect_sym(")");
      return e;
    }
    return pa_term();
  }

  // ---- set terms ----
  SetTermPtr set_union() {
    auto s = set_inter();
    while (eat_kw("union")) s = st_union(s, set_inter());
    return s;
  }

  SetTermPtr set_inter() {
    auto s = set_atom();
    while (eat_kw("inter")) s = st_inter(s, set_atom());
    return s;
  }

  SetTermPtr set_atom() {
    if (eat_kw("empty")) return st_empty();
    if (eat_kw("univ")) return st_universe();
    if (eat_kw("comp")) {
      expect_sym("(");
      auto s = set_union();
      expect_sym(")");
      return st_complement(s);
    }
    if (eat_sym("(")) {
      auto s = set_union();
      expect_sym(")");
      return s;
    }
    if (at_kw("sat") || at_kw("succ") || at_kw("top") || at_kw("bottom"))
      return mk_concept_set(concept_unary());
    if (peek().k == Tok::Ident && !kKeywords.count(peek().s)) {
      std::string n = next().s;
      if (is_concept_name(n)) return mk_concept_set(mk_name(n));
      return st_role(n);
    }
    fail("expected set term");
  }

  // ---- ERCBox formulas ----
  ErcNode erc_or(KnowledgeBase& kb) {
    ErcNode n;
    n.kind = ErcNode::K::Or;
    n.kids.push_back(erc_and(kb));
    while (eat_kw("or")) n.kids.push_back(erc_and(kb));
    if (n.kids.size() == 1) return n.kids[0];
    return n;
  }

  ErcNode erc_and(KnowledgeBase& kb) {
    ErcNode n;
    n.kind = ErcNode::K::And;
    n.kids.push_back(erc_prim(kb));
    while (eat_kw("and")) n.kids.push_back(erc_prim(kb));
    if (n.kids.size() == 1) return n.kids[0];
    return n;
  }

  ErcNode erc_prim(KnowledgeBase& kb) {
    if (at_kw("not")) throw ParseError(peek().line, peek().col, "ERCBox must be positive");
    if (at_sym("(")) {
      // parenthesized subformula vs. a constraint whose sum begins with '('
      // — constraints never start with '(' in our grammar, so recurse.
      next();
      auto n = erc_or(kb);
      expect_sym(")");
      return n;
    }
    SemiRestrictedConstraint c;
    parse_lin_side(c.lhs, &c.offset);
    expect_sym("<=");
    long long rhsConst = 0;
    parse_lin_side(c.rhs, &rhsConst);
    if (rhsConst != 0)
      fail("right-hand side of a semi-restricted constraint cannot carry a constant");
    if (c.offset < 0) fail("semi-restricted offset must be non-negative");
    ErcNode n;
    n.kind = ErcNode::K::Leaf;
    n.leaf = int(kb.ercConstraints.size());
    kb.ercConstraints.push_back(std::move(c));
    return n;
  }

  // concept argument of card(...) in erc/ec sections: set syntax, roles
  // rejected by concept_of_set
  ConceptPtr card_concept() {
    expect_sym("(");
    auto s = set_union();
    expect_sym(")");
    try {
      return concept_of_set(s);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  void parse_lin_side(std::vector<std::pair<long long, ConceptPtr>>& terms, long long* constant) {
    while (true) {
      if (peek().k == Tok::Int) {
        long long v = next().v;
        if (eat_sym("*")) {
          if (!eat_kw("card")) fail("expected card(...) after coefficient");
          terms.emplace_back(v, card_concept());
        } else {
          *constant += v;
        }
      } else if (eat_kw("card")) {
        terms.emplace_back(1, card_concept());
      } else {
        fail("expected card(...) or integer");
      }
      if (!eat_sym("+")) break;
    }
  }

  // ---- ECBox formulas: boolean combos of cardinality atoms over concepts ----
  CAtomPtr ec_or() {
    std::vector<CAtomPtr> kids{ec_and()};
    while (eat_kw("or")) kids.push_back(ec_and());
    return kids.size() == 1 ? kids[0] : ca_or(std::move(kids));
  }

  CAtomPtr ec_and() {
    std::vector<CAtomPtr> kids{ec_unary()};
    while (eat_kw("and")) kids.push_back(ec_unary());
    return kids.size() == 1 ? kids[0] : ca_and(std::move(kids));
  }

  CAtomPtr ec_unary() {
    if (eat_kw("not")) return ca_not(ec_unary());
    if (eat_sym("(")) {
      auto a = ec_or();
      expect_sym(")");
      return a;
    }
    if (at_kw("div")) {
      next();
      expect_sym("(");
      if (peek().k != Tok::Int) fail("expected divisor constant");
      long long n = next().v;
      if (n <= 0) fail("div divisor must be positive");
      expect_sym(",");
      auto l = ec_pa();
      expect_sym(")");
      return ca_divides(n, l);
    }
    auto k = ec_pa();
    if (eat_sym("=")) return ca_card_eq(k, ec_pa());
    if (eat_sym("<")) return ca_card_lt(k, ec_pa());
    if (eat_sym("<=")) return ca_card_le(k, ec_pa());
    if (eat_sym(">")) return ca_card_gt(k, ec_pa());
    if (eat_sym(">=")) return ca_card_ge(k, ec_pa());
    fail("expected comparison in cardinality constraint");
  }

  PAExprPtr ec_pa() {
    auto e = ec_pa_term();
    while (eat_sym("+")) e = pa_sum(e, ec_pa_term());
    return e;
  }

  PAExprPtr ec_pa_term() {
    if (peek().k == Tok::Int) {
      long long v = next().v;
      if (eat_sym("*")) {
        if (eat_sym("(")) {
          auto e = ec_pa();
          expect_sym(")");
          return pa_mul(v, e);
        }
        return pa_mul(v, ec_pa_term());
      }
      return pa_const(v);
    }
    if (eat_kw("card")) {
      return pa_card(mk_concept_set(card_concept()));
    }
    fail("expected integer or card(<concept>)");
  }
};

std::vector<std::pair<int, std::string>> split_lines(const std::string& text) {
  std::vector<std::pair<int, std::string>> lines;
  std::istringstream is(text);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) lines.emplace_back(++n, line);
  return lines;
}

}  // namespace

KnowledgeBase parse_kb(const std::string& text) {
  KnowledgeBase kb;
  bool seenErc = false, seenEc = false, seenGoal = false;
  for (auto& [lineNo, raw] : split_lines(text)) {
    auto toks = lex(raw, lineNo);
    if (toks.front().k == Tok::End) continue;
    Parser p(std::move(toks));
    std::string section;
    if (p.peek().k == Tok::Ident && p.peek(1).k == Tok::Sym && p.peek(1).s == ":") {
      section = p.next().s;
      p.next();
    } else {
      p.fail("expected section prefix (tbox:, abox:, erc:, ec:, goal:)");
    }
    if (section == "tbox") {
      auto lhs = p.concept_expr();
      p.expect_sym("<=");
      auto rhs = p.concept_expr();
      p.expect_end();
      kb.tbox.push_back({lhs, rhs});
    } else if (section == "abox") {
      // role assertion: lower-case name '(' ind ',' ind ')'
      if (p.peek().k == Tok::Ident && !kKeywords.count(p.peek().s) &&
          !Parser::is_concept_name(p.peek().s)) {
        std::string role = p.next().s;
        p.expect_sym("(");
        std::string a = p.expect_name("individual");
        p.expect_sym(",");
        std::string b = p.expect_name("individual");
        p.expect_sym(")");
        p.expect_end();
        if (Parser::is_concept_name(a) || Parser::is_concept_name(b))
          throw ParseError(lineNo, 1, "individuals start lower-case");
        kb.roleAssertions.push_back({role, a, b, false});
      } else {
        auto c = p.concept_expr();
        p.expect_sym("(");
        std::string a = p.expect_name("individual");
        p.expect_sym(")");
        p.expect_end();
        if (Parser::is_concept_name(a)) throw ParseError(lineNo, 1, "individuals start lower-case");
        kb.conceptAssertions.push_back({c, a});
      }
    } else if (section == "erc") {
      if (seenErc) throw ParseError(lineNo, 1, "duplicate section erc:");
      seenErc = true;
      kb.erc = p.erc_or(kb);
      p.expect_end();
    } else if (section == "ec") {
      if (seenEc) throw ParseError(lineNo, 1, "duplicate section ec:");
      seenEc = true;
      kb.ec = p.ec_or();
      p.expect_end();
    } else if (section == "goal") {
      if (seenGoal) throw ParseError(lineNo, 1, "duplicate section goal:");
      seenGoal = true;
      kb.goal = p.concept_expr();
      p.expect_end();
    } else {
      throw ParseError(lineNo, 1, "unknown section '" + section + ":'");
    }
  }
  try {
    validate_kb(kb);
  } catch (const std::runtime_error& e) {
    throw ParseError(0, 0, e.what());
  }
  return kb;
}

ConceptPtr parse_concept(const std::string& text) {
  Parser p(lex(text, 1));
  auto c = p.concept_expr();
  p.expect_end();
  return c;
}

ConjunctiveQuery parse_query(const std::string& text) {
  ConjunctiveQuery q;
  std::set<std::string> vars;
  for (auto& [lineNo, raw] : split_lines(text)) {
    auto toks = lex(raw, lineNo);
    if (toks.front().k == Tok::End) continue;
    if (!q.vars.empty() || !q.roleAtoms.empty() || !q.conceptAtoms.empty())
      throw ParseError(lineNo, 1, "query files hold a single query");
    Parser p(std::move(toks));
    if (!(p.peek().k == Tok::Ident && p.peek().s == "q")) p.fail("queries start with 'q :-'");
    p.next();
    p.expect_sym(":-");
    while (true) {
      std::string name = p.expect_name("atom name");
      p.expect_sym("(");
      std::string x = p.expect_name("variable");
      if (p.eat_sym(",")) {
        std::string y = p.expect_name("variable");
        p.expect_sym(")");
        if (Parser::is_concept_name(name))
          throw ParseError(lineNo, 1, "binary atoms use role names (lower-case)");
        q.roleAtoms.push_back({name, x, y});
        vars.insert(x);
        vars.insert(y);
      } else {
        p.expect_sym(")");
        if (!Parser::is_concept_name(name))
          throw ParseError(lineNo, 1, "unary atoms use concept names (upper-case)");
        q.conceptAtoms.push_back({name, x});
        vars.insert(x);
      }
      if (p.eat_sym(",")) continue;
      p.eat_sym(".");
      p.expect_end();
      break;
    }
  }
  if (vars.empty()) throw ParseError(0, 0, "empty query");
  q.vars.assign(vars.begin(), vars.end());
  return q;
}

}  // namespace carddl
