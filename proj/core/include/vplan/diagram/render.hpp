#pragma once

#include <map>
#include <string>
#include <string_view>

#include "vplan/diagram/schema.hpp"

namespace vp::diagram {

struct RenderedDiagram {
  std::string svg;
  std::map<std::string, Box> boxes;  // canvas units, y up
  std::string source_code;           // plotting code when rendered through the sandbox
};

inline constexpr double kPixelsPerUnit = 40.0;

// Deterministic SVG: fixed header, one group per object in schema order,
// numbers with three decimals. Label widths come from a built-in metric
// table, so output never depends on installed fonts.
RenderedDiagram render(const DiagramSchema& schema);

// Advance width of `text` in em units.
double text_width_em(std::string_view text);

// A matplotlib program that draws the resolved layout and saves it to
// diagram.png. Used as reference code on the sandbox path.
std::string matplotlib_code(const DiagramSchema& schema);

// `id x y w h` per line, sorted by id.
std::string layout_table(const std::map<std::string, Box>& boxes);

}  // namespace vp::diagram
