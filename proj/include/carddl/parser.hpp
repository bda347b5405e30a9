#pragma once

#include <string>

#include "carddl/ast.hpp"

namespace carddl {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line_, int col_, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) +
                           ": " + msg),
        line(line_),
        col(col_) {}
};

// KB files: one statement per line, sections `tbox:` / `abox:` / `erc:` /
// `ec:` / `goal:`, `#` comments.  tbox/abox may repeat; erc/ec/goal are
// single-occurrence.
KnowledgeBase parse_kb(const std::string& text);

// A single concept expression (no section prefix).
ConceptPtr parse_concept(const std::string& text);

// Query files: `q :- r(x,y), B(y), ...` on one line.
ConjunctiveQuery parse_query(const std::string& text);

}  // namespace carddl
