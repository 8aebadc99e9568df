#pragma once

#include <span>
#include <string>
#include <vector>

#include "vplan/pddl/types.hpp"

namespace vp::pddl {

enum class GroundingMode {
  // Every type-correct binding of every schema.
  all,
  // Drops bindings whose static preconditions (predicates no action
  // changes) are false in the initial state; such actions can never fire.
  static_pruned,
};

// Ground actions ordered by schema name, then lexicographically by
// arguments. Repeated objects within a binding are not filtered.
std::vector<GroundAction> ground(const DomainDef& domain, const ProblemDef& problem,
                                 GroundingMode mode = GroundingMode::all);

// Binds `schema` to `args`. Throws PddlError(arity_mismatch | unknown_object
// | type_mismatch) when the binding is not type-correct.
GroundAction instantiate(const DomainDef& domain, const ProblemDef& problem,
                         const ActionSchema& schema, std::span<const std::string> args);

// Resolves a plan step by schema name. Throws PddlError(unknown_action) for
// an undeclared name, plus the errors of instantiate().
GroundAction resolve(const DomainDef& domain, const ProblemDef& problem, const PlanStep& step);

bool applicable(const State& state, const GroundAction& action);

// (state \ del) ∪ add. Throws PddlError(inapplicable_action).
State apply(const State& state, const GroundAction& action);

// Applies effects without checking preconditions.
State apply_unchecked(const State& state, const GroundAction& action);

}  // namespace vp::pddl
