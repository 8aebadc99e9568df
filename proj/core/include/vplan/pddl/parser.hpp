#pragma once

#include <string>
#include <string_view>

#include "vplan/pddl/error.hpp"
#include "vplan/pddl/types.hpp"

namespace vp::pddl {

// Accepts requirements :strips, :typing and :negative-preconditions. Any
// other requirement is rejected with ErrorKind::unsupported_requirement.
DomainDef parse_domain(std::string_view text);

ProblemDef parse_problem(std::string_view text, const DomainDef& domain);

// VAL-style plan file: one `(name arg ...)` per line, `;` comments.
// Blank lines are ignored; a trailing cost annotation `; cost = ...` is too.
Plan parse_plan(std::string_view text);

std::string to_pddl(const DomainDef& domain);
std::string to_pddl(const ProblemDef& problem);
std::string to_text(const Plan& plan);

}  // namespace vp::pddl
