#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vplan/pddl/types.hpp"

namespace vp::pddl {

enum class Verdict {
  valid,
  precondition_failure,
  goal_unsatisfied,
  unknown_action,
  arity_type_error,
};

std::string_view to_string(Verdict verdict);

struct ValidationReport {
  Verdict verdict = Verdict::valid;
  std::optional<std::size_t> failing_step;  // zero-based plan index
  std::vector<State> trace;                 // init, then one state per executed step
  std::string detail;

  bool valid() const { return verdict == Verdict::valid; }
  // Structured `key: value` report, one field per line.
  std::string to_text() const;
};

// Simulates `plan` from the initial state and reports the first failure.
// Never throws for plan content; all problems land in the verdict.
ValidationReport validate_plan(const DomainDef& domain, const ProblemDef& problem, const Plan& plan);

}  // namespace vp::pddl
