#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vplan/pddl/error.hpp"

namespace vp::pddl {

// A parsed s-expression. Atoms are lowercased; PDDL is case-insensitive.
struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  SourcePos pos;

  bool is_atom() const { return !is_list; }
  bool is_atom(std::string_view text) const { return !is_list && atom == text; }
  // True for a list whose first item is the atom `head`.
  bool has_head(std::string_view head) const;
};

// Reads every top-level expression in `text`. `;` starts a comment that
// runs to end of line. Throws PddlError(syntax) with the offending position.
std::vector<SExpr> read_sexprs(std::string_view text);

}  // namespace vp::pddl
