#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vp::pddl {

inline constexpr std::string_view kRootType = "object";

struct Parameter {
  std::string name;  // without the leading '?'
  std::string type;

  bool operator==(const Parameter&) const = default;
};

// Argument of an atom inside an action schema: either a reference to a
// schema parameter (by index) or a domain constant.
struct Term {
  int param = -1;
  std::string constant;

  bool is_param() const { return param >= 0; }
  bool operator==(const Term&) const = default;
};

struct AtomTemplate {
  std::string predicate;
  std::vector<Term> args;

  bool operator==(const AtomTemplate&) const = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<Parameter> params;

  bool operator==(const PredicateDecl&) const = default;
};

struct TypeDecl {
  std::string name;
  std::string parent;

  bool operator==(const TypeDecl&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<Parameter> params;
  std::vector<AtomTemplate> pre_pos;
  std::vector<AtomTemplate> pre_neg;
  std::vector<AtomTemplate> add;
  std::vector<AtomTemplate> del;

  bool operator==(const ActionSchema&) const = default;
};

struct DomainDef {
  std::string name;
  std::vector<std::string> requirements;
  std::vector<TypeDecl> types;  // declaration order; "object" is implicit
  std::vector<std::pair<std::string, std::string>> constants;  // name, type
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> actions;

  bool operator==(const DomainDef&) const = default;

  const PredicateDecl* find_predicate(std::string_view name) const;
  const ActionSchema* find_action(std::string_view name) const;
  bool has_type(std::string_view type) const;
  // Reflexive: every type is a subtype of itself and of "object".
  bool is_subtype(std::string_view type, std::string_view ancestor) const;
  // Predicates that no action adds or deletes.
  std::vector<std::string> static_predicates() const;
};

// A fully instantiated fact. Ordering is by predicate then arguments, which
// for a fixed predicate arity coincides with ordering of the canonical text.
struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  auto operator<=>(const GroundAtom&) const = default;
  bool operator==(const GroundAtom&) const = default;

  // Canonical form: `(on a b)`, or `(handempty)` for nullary predicates.
  std::string text() const;
};

// Closed-world state: the sorted, duplicate-free set of true atoms.
class State {
 public:
  State() = default;
  explicit State(std::vector<GroundAtom> atoms);

  bool contains(const GroundAtom& atom) const;
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<GroundAtom>& atoms() const { return atoms_; }
  auto begin() const { return atoms_.begin(); }
  auto end() const { return atoms_.end(); }

  // One canonical atom per line, sorted.
  std::string text() const;

  bool operator==(const State&) const = default;

 private:
  std::vector<GroundAtom> atoms_;
};

struct GroundAction {
  std::string name;
  std::vector<std::string> args;
  std::vector<GroundAtom> pre_pos;
  std::vector<GroundAtom> pre_neg;
  std::vector<GroundAtom> add;
  std::vector<GroundAtom> del;

  // `(stack a b)`
  std::string text() const;
  bool operator==(const GroundAction&) const = default;
};

struct ProblemDef {
  std::string name;
  std::string domain_name;
  std::vector<std::pair<std::string, std::string>> objects;  // name, type; declaration order
  State init;
  std::vector<GroundAtom> goal_pos;
  std::vector<GroundAtom> goal_neg;

  bool operator==(const ProblemDef&) const = default;

  std::optional<std::string> object_type(std::string_view name) const;
  // Objects (and domain constants) whose type is `type` or a subtype of it,
  // sorted lexicographically.
  std::vector<std::string> objects_of(const DomainDef& domain, std::string_view type) const;
  bool goal_satisfied(const State& state) const;
};

// A plan step as read from a plan file, before resolution against a domain.
struct PlanStep {
  std::string name;
  std::vector<std::string> args;
  int line = 0;

  std::string text() const;
  bool operator==(const PlanStep&) const = default;
};

using Plan = std::vector<PlanStep>;

}  // namespace vp::pddl
