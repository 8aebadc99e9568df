#include "vplan/pddl/sexpr.hpp"

#include <cctype>

namespace vp::pddl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::syntax: return "syntax";
    case ErrorKind::unsupported_requirement: return "unsupported-requirement";
    case ErrorKind::undeclared_type: return "undeclared-type";
    case ErrorKind::undeclared_predicate: return "undeclared-predicate";
    case ErrorKind::unknown_object: return "unknown-object";
    case ErrorKind::type_mismatch: return "type-mismatch";
    case ErrorKind::arity_mismatch: return "arity-mismatch";
    case ErrorKind::duplicate_definition: return "duplicate-definition";
    case ErrorKind::inapplicable_action: return "inapplicable-action";
    case ErrorKind::unknown_action: return "unknown-action";
  }
  return "unknown";
}

namespace {

std::string format_message(ErrorKind kind, const std::string& message, SourcePos pos) {
  std::string out(to_string(kind));
  if (pos.line > 0) {
    out += " at " + std::to_string(pos.line) + ":" + std::to_string(pos.column);
  }
  out += ": ";
  out += message;
  return out;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_space();
    while (!at_end()) {
      out.push_back(read_one());
      skip_space();
    }
    return out;
  }

 private:
  bool at_end() const { return i_ >= text_.size(); }

  SourcePos here() const { return {line_, col_}; }

  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_space() {
    while (!at_end()) {
      char c = text_[i_];
      if (c == ';') {
        while (!at_end() && text_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read_one() {
    SExpr e;
    e.pos = here();
    char c = text_[i_];
    if (c == ')') throw PddlError(ErrorKind::syntax, "unexpected ')'", e.pos);
    if (c == '(') {
      e.is_list = true;
      advance();
      skip_space();
      while (!at_end() && text_[i_] != ')') {
        e.items.push_back(read_one());
        skip_space();
      }
      if (at_end()) throw PddlError(ErrorKind::syntax, "unterminated list", e.pos);
      advance();
      return e;
    }
    while (!at_end()) {
      char ch = text_[i_];
      if (ch == '(' || ch == ')' || ch == ';' || std::isspace(static_cast<unsigned char>(ch))) break;
      e.atom.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      advance();
    }
    return e;
  }

  std::string_view text_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

PddlError::PddlError(ErrorKind kind, const std::string& message, SourcePos pos)
    : std::runtime_error(format_message(kind, message, pos)), kind_(kind), pos_(pos) {}

bool SExpr::has_head(std::string_view head) const {
  return is_list && !items.empty() && items.front().is_atom(head);
}

std::vector<SExpr> read_sexprs(std::string_view text) { return Reader(text).read_all(); }

}  // namespace vp::pddl
