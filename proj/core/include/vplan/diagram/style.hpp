#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vplan/diagram/schema.hpp"
#include "vplan/pddl/types.hpp"

namespace vp::diagram {

struct TypeStyle {
  Shape shape = Shape::square;
  std::string color = "gray";
  double w = 1, h = 1;  // 0x0 on label-only means "fit the label"
  bool operator==(const TypeStyle&) const = default;
};

// Applies to an object whose fluent atom `pred(obj, ...)` holds. `key` is a
// predicate name, or `pred/value` to match only when the second argument is
// `value`. The badge may use {1}, {2} for the atom's other arguments.
struct StatusStyle {
  std::string key;
  std::string color;  // empty: no override
  std::string badge;  // empty: no badge
  bool operator==(const StatusStyle&) const = default;
};

// Domain-level visual vocabulary: the cached reference every later schema
// follows.
struct StyleMap {
  std::string domain;
  std::map<std::string, TypeStyle> types;
  std::vector<StatusStyle> statuses;  // earlier entries win color conflicts
  std::vector<std::string> legend;

  // Style of `type` or its nearest styled ancestor.
  const TypeStyle* find(const pddl::DomainDef& domain, std::string_view type) const;
  bool operator==(const StyleMap&) const = default;
};

// Text form, one entry per line:
//
//   domain blocksworld
//   type block shape=square color=blue size=1x1
//   status holding color=orange badge=held
//   legend block: blue square
StyleMap parse_style(std::string_view text);
std::string to_text(const StyleMap& style);

// Throws DiagramError(uncovered_type) when a domain type has no style, or
// DiagramError(parse) when a status names an undeclared predicate.
void check_style(const StyleMap& style, const pddl::DomainDef& domain);

// Built-in style for the six corpus domains; other domains get a generic
// palette cycle over their types.
StyleMap default_style(const pddl::DomainDef& domain);

// One spec per problem object, placed by per-domain rules: blocksworld
// stacks on a table row, parking curbs as columns with two slots, tetris
// and floortile as grids, elevator floors as rows with lifts as columns,
// barman containers on a table row below the hands. Objects a rule does not
// place go on an extras row at the top. Throws DiagramError(uncovered_type).
DiagramSchema schema_from_state(const pddl::State& state, const StyleMap& style, const pddl::DomainDef& domain,
                                const pddl::ProblemDef& problem);

// Reads a StyleMap back out of a schema drawn for `state`: each type takes
// its most common shape, color and size, and a status predicate whose
// holders all share a non-base color becomes a color override. Entries the
// schema does not show are kept from `fallback`.
StyleMap style_from_schema(const DiagramSchema& schema, const pddl::State& state, const pddl::DomainDef& domain,
                           const pddl::ProblemDef& problem, const StyleMap& fallback);

// Declared objects followed by domain constants.
std::vector<std::string> object_ids(const pddl::DomainDef& domain, const pddl::ProblemDef& problem);

}  // namespace vp::diagram
