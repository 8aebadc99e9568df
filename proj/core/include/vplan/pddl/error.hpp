#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vp::pddl {

struct SourcePos {
  int line = 0;
  int column = 0;
};

enum class ErrorKind {
  syntax,
  unsupported_requirement,
  undeclared_type,
  undeclared_predicate,
  unknown_object,
  type_mismatch,
  arity_mismatch,
  duplicate_definition,
  inapplicable_action,
  unknown_action,
};

std::string_view to_string(ErrorKind kind);

class PddlError : public std::runtime_error {
 public:
  PddlError(ErrorKind kind, const std::string& message, SourcePos pos = {});

  ErrorKind kind() const noexcept { return kind_; }
  SourcePos pos() const noexcept { return pos_; }

 private:
  ErrorKind kind_;
  SourcePos pos_;
};

}  // namespace vp::pddl
