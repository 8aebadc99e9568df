#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vp::diagram {

class DiagramError : public std::runtime_error {
 public:
  enum class Kind { parse, cyclic_relation, dangling_relation, uncovered_type, empty_candidates };
  DiagramError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

enum class Shape { circle, square, rectangle, line, triangle, label_only };

std::string_view to_string(Shape shape);
std::optional<Shape> parse_shape(std::string_view text);

struct PaletteColor {
  std::string_view name;
  std::string_view hex;
};

// The twelve named colors schemas may use.
const std::array<PaletteColor, 12>& palette();
std::optional<std::string_view> color_hex(std::string_view name);

enum class Relation { above, below, left_of, right_of, inside };

std::string_view to_string(Relation relation);

struct Position {
  // Absolute anchor (lower-left corner, y up) when `target` is empty.
  double x = 0, y = 0;
  Relation relation = Relation::above;
  std::string target;
  double gap = 0;

  bool relative() const { return !target.empty(); }
  static Position at(double x, double y) { return {x, y, Relation::above, {}, 0}; }
  static Position rel(Relation r, std::string target, double gap = 0) { return {0, 0, r, std::move(target), gap}; }
  bool operator==(const Position&) const = default;
};

struct ObjectSpec {
  std::string id;
  Shape shape = Shape::square;
  std::string color = "gray";
  double w = 1, h = 1;
  Position pos;
  std::string status;
  std::string label;

  bool operator==(const ObjectSpec&) const = default;
};

struct DiagramSchema {
  std::string title;
  double width = 10, height = 10;
  std::vector<ObjectSpec> objects;

  const ObjectSpec* find(std::string_view id) const;
  bool operator==(const DiagramSchema&) const = default;
};

// Line format, one statement per line:
//
//   title <text>
//   canvas <w>x<h>
//   object <id> shape=<s> color=<c> size=<w>x<h> pos=<spec> status=<t> label=<l>
//
// where <spec> is `x,y` or `above(<id>,<gap>)`, `below(...)`, `left-of(...)`,
// `right-of(...)`, `inside(<id>)`. status and label are optional and run to
// the next key. Blank lines and `#` comments are ignored.
DiagramSchema parse_schema(std::string_view text);
std::string to_text(const DiagramSchema& schema);
std::string to_text(const ObjectSpec& spec);
std::string to_text(const Position& pos);

// Rounds to three decimals and drops trailing zeros: 2, 0.5, -1.25.
std::string format_number(double v);

struct Box {
  double x = 0, y = 0, w = 0, h = 0;
  bool operator==(const Box&) const = default;
};

// Resolves relations in dependency order. Throws DiagramError
// (dangling_relation, cyclic_relation).
std::map<std::string, Box> layout(const DiagramSchema& schema);

struct Violation {
  enum class Kind {
    missing_object,
    unknown_object,
    duplicate_id,
    overlap,
    dangling_relation,
    cyclic_relation,
    palette_violation,
    bad_size,
    out_of_canvas,
  };
  Kind kind;
  std::vector<std::string> ids;
  std::string detail;

  std::string text() const;
};

std::string_view to_string(Violation::Kind kind);

// Empty when the schema passes. Pairs where one object is nested inside the
// other through `inside` relations never count as overlapping; touching
// edges are fine.
std::vector<Violation> check_schema(const DiagramSchema& schema, const std::vector<std::string>& expected_ids);

// Number of relation links between each object and an absolute anchor,
// summed. Throws like layout().
int relation_hops(const DiagramSchema& schema);

// Returns a best-first permutation of candidate indices.
using SchemaScorer = std::function<std::vector<std::size_t>(const std::vector<DiagramSchema>&)>;

// Checks that `scorer` returned a permutation. Throws DiagramError
// (empty_candidates) on an empty list.
std::vector<std::size_t> rank_schemas(const std::vector<DiagramSchema>& candidates, const SchemaScorer& scorer);

// Fewest violations, then fewest relation hops, then candidate index.
std::vector<std::size_t> oracle_schema_order(const std::vector<DiagramSchema>& candidates,
                                             const std::vector<std::string>& expected_ids);

}  // namespace vp::diagram
