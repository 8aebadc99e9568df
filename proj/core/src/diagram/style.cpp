#include "vplan/diagram/style.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "vplan/diagram/render.hpp"

namespace vp::diagram {

namespace {

constexpr double kMargin = 0.5;

struct Placement {
  Position pos;
  std::optional<std::pair<double, double>> size;
  std::string color;
  std::string status;
  bool placed = true;
};

using Placements = std::map<std::string, Placement>;

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void style_error(int line, const std::string& message) {
  throw DiagramError(DiagramError::Kind::parse, "style line " + std::to_string(line) + ": " + message);
}

std::map<std::string, std::string> key_values(std::istringstream& in, int line) {
  std::map<std::string, std::string> out;
  std::string token, current;
  while (in >> token) {
    auto eq = token.find('=');
    if (eq != std::string::npos) {
      current = token.substr(0, eq);
      out[current] = token.substr(eq + 1);
    } else if (!current.empty()) {
      out[current] += " " + token;
    } else {
      style_error(line, "unexpected '" + token + "'");
    }
  }
  return out;
}

std::pair<double, double> parse_size(const std::string& s, int line) {
  auto x = s.find('x');
  double w = 0, h = 0;
  bool ok = x != std::string::npos;
  if (ok) {
    auto r1 = std::from_chars(s.data(), s.data() + x, w);
    auto r2 = std::from_chars(s.data() + x + 1, s.data() + s.size(), h);
    ok = r1.ec == std::errc() && r2.ec == std::errc() && r1.ptr == s.data() + x && r2.ptr == s.data() + s.size();
  }
  if (!ok) style_error(line, "bad size '" + s + "'");
  return {w, h};
}

std::optional<std::string> type_of(const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                                   const std::string& id) {
  if (auto t = problem.object_type(id)) return t;
  for (const auto& [name, type] : domain.constants) {
    if (name == id) return type;
  }
  return std::nullopt;
}

// Objects of `type` (or subtypes) in declaration order.
std::vector<std::string> declared(const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                                  std::string_view type) {
  std::vector<std::string> out;
  for (const auto& id : object_ids(domain, problem)) {
    auto t = type_of(domain, problem, id);
    if (t && domain.is_subtype(*t, type)) out.push_back(id);
  }
  return out;
}

// The last two unsigned integers in a name: "f2-3f" -> (2, 3).
std::optional<std::pair<int, int>> grid_coords(const std::string& name) {
  std::vector<int> nums;
  for (std::size_t i = 0; i < name.size();) {
    if (std::isdigit(static_cast<unsigned char>(name[i]))) {
      std::size_t j = i;
      while (j < name.size() && std::isdigit(static_cast<unsigned char>(name[j]))) ++j;
      nums.push_back(std::stoi(name.substr(i, j - i)));
      i = j;
    } else {
      ++i;
    }
  }
  if (nums.size() < 2) return std::nullopt;
  return std::make_pair(nums[nums.size() - 2], nums.back());
}

std::optional<int> trailing_number(const std::string& name) {
  std::size_t j = name.size();
  while (j > 0 && std::isdigit(static_cast<unsigned char>(name[j - 1]))) --j;
  if (j == name.size()) return std::nullopt;
  return std::stoi(name.substr(j));
}

std::vector<const pddl::GroundAtom*> atoms_of(const pddl::State& state, std::string_view pred) {
  std::vector<const pddl::GroundAtom*> out;
  for (const auto& a : state) {
    if (a.predicate == pred) out.push_back(&a);
  }
  return out;
}

Placements blocksworld_rule(const pddl::State& state, const pddl::DomainDef& domain, const pddl::ProblemDef& problem) {
  Placements out;
  auto blocks = declared(domain, problem, "block");
  std::map<std::string, std::string> below;
  for (const auto* a : atoms_of(state, "on")) below.emplace(a->args[0], a->args[1]);
  std::set<std::string> held;
  for (const auto* a : atoms_of(state, "holding")) held.insert(a->args[0]);
  const double top = kMargin + static_cast<double>(blocks.size()) + 0.5;
  int hand_slot = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (held.count(b)) {
      out[b].pos = Position::at(kMargin + 1.5 * static_cast<double>(blocks.size() + hand_slot++), top);
    } else if (below.count(b)) {
      out[b].pos = Position::rel(Relation::above, below[b]);
    } else {
      out[b].pos = Position::at(kMargin + 1.5 * static_cast<double>(i), kMargin);
    }
  }
  return out;
}

Placements parking_rule(const pddl::State& state, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                        const StyleMap& style) {
  Placements out;
  auto curbs = declared(domain, problem, "curb");
  const TypeStyle* curb_style = style.find(domain, "curb");
  const double curb_w = curb_style ? curb_style->w : 2.0;
  const double curb_h = curb_style ? curb_style->h : 0.3;
  std::map<std::string, double> curb_x;
  for (std::size_t i = 0; i < curbs.size(); ++i) {
    double x = kMargin + (curb_w + 0.4) * static_cast<double>(i);
    curb_x[curbs[i]] = x;
    out[curbs[i]].pos = Position::at(x, kMargin);
  }
  for (const auto* a : atoms_of(state, "at-curb-num")) {
    if (curb_x.count(a->args[1])) out[a->args[0]].pos = Position::at(curb_x[a->args[1]] + 0.1, kMargin + curb_h + 0.1);
  }
  for (const auto* a : atoms_of(state, "behind-car")) {
    out[a->args[0]].pos = Position::rel(Relation::right_of, a->args[1], 0.2);
  }
  return out;
}

Placements grid_rule(const pddl::State& state, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                     const StyleMap& style, std::string_view cell_type) {
  Placements out;
  for (const auto& cell : declared(domain, problem, cell_type)) {
    if (auto rc = grid_coords(cell)) {
      out[cell].pos = Position::at(kMargin + rc->second, kMargin + rc->first);
    }
  }
  auto place_piece = [&](const std::string& piece, const std::vector<std::string>& cells, const std::string& anchor) {
    if (!out.count(anchor)) return;
    out[piece].pos = Position::rel(Relation::inside, anchor);
    auto t = type_of(domain, problem, piece);
    const TypeStyle* ts = t ? style.find(domain, *t) : nullptr;
    for (const auto& c : cells) {
      if (!out.count(c)) continue;
      if (ts) out[c].color = ts->color;
      out[c].status = piece;
    }
  };
  for (const auto* a : atoms_of(state, "at_square")) place_piece(a->args[0], {a->args[1]}, a->args[1]);
  for (const auto* a : atoms_of(state, "at_two")) place_piece(a->args[0], {a->args[1], a->args[2]}, a->args[1]);
  for (const auto* a : atoms_of(state, "at_l")) {
    place_piece(a->args[0], {a->args[1], a->args[2], a->args[3]}, a->args[2]);
  }
  for (const auto* a : atoms_of(state, "robot-at")) {
    if (out.count(a->args[1])) out[a->args[0]].pos = Position::rel(Relation::inside, a->args[1]);
  }
  // Color objects go to the extras row, drawn in their own color.
  for (const auto& c : declared(domain, problem, "color")) {
    out[c].placed = false;
    if (color_hex(c)) out[c].color = c;
  }
  return out;
}

Placements elevator_rule(const pddl::State& state, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                         const StyleMap& style) {
  Placements out;
  std::map<std::string, double> floor_y;
  for (const auto& c : declared(domain, problem, "count")) {
    if (auto k = trailing_number(c)) floor_y[c] = kMargin + 1.2 * *k;
  }
  std::map<std::string, int> waiting;
  int most_waiting = 0;
  for (const auto* a : atoms_of(state, "passenger-at")) {
    most_waiting = std::max(most_waiting, ++waiting[a->args[1]]);
  }
  const double wait_w = std::max(1.5, 0.5 * most_waiting + 0.3);
  auto lifts = declared(domain, problem, "elevator");
  const auto riders = declared(domain, problem, "passenger").size();
  const double lift_pitch = 1.6 + 0.45 * static_cast<double>(riders);
  const double width = wait_w + lift_pitch * static_cast<double>(lifts.size());
  for (const auto& [c, y] : floor_y) {
    out[c].pos = Position::at(kMargin, y);
    out[c].size = std::make_pair(width, 0.05);
  }
  std::map<std::string, int> slot;
  for (const auto* a : atoms_of(state, "passenger-at")) {
    if (!floor_y.count(a->args[1])) continue;
    int k = slot[a->args[1]]++;
    out[a->args[0]].pos = Position::at(kMargin + 0.5 * k, floor_y[a->args[1]] + 0.2);
  }
  std::map<std::string, double> lift_x;
  for (std::size_t j = 0; j < lifts.size(); ++j) lift_x[lifts[j]] = kMargin + wait_w + lift_pitch * static_cast<double>(j);
  for (const auto* a : atoms_of(state, "lift-at")) {
    if (floor_y.count(a->args[1])) out[a->args[0]].pos = Position::at(lift_x[a->args[0]], floor_y[a->args[1]] + 0.1);
  }
  std::map<std::string, std::string> last_in;
  for (const auto* a : atoms_of(state, "boarded")) {
    const std::string& lift = a->args[1];
    if (!out.count(lift)) continue;
    auto it = last_in.find(lift);
    out[a->args[0]].pos = Position::rel(Relation::right_of, it == last_in.end() ? lift : it->second, 0.05);
    last_in[lift] = a->args[0];
  }
  (void)style;
  return out;
}

Placements barman_rule(const pddl::State& state, const pddl::DomainDef& domain, const pddl::ProblemDef& problem) {
  Placements out;
  auto containers = declared(domain, problem, "container");
  auto hands = declared(domain, problem, "hand");
  std::set<std::string> held;
  for (const auto* a : atoms_of(state, "holding")) {
    held.insert(a->args[1]);
    out[a->args[1]].pos = Position::rel(Relation::below, a->args[0], 0.2);
  }
  for (std::size_t i = 0; i < containers.size(); ++i) {
    if (!held.count(containers[i])) out[containers[i]].pos = Position::at(kMargin + 1.3 * static_cast<double>(i), kMargin);
  }
  for (std::size_t j = 0; j < hands.size(); ++j) {
    out[hands[j]].pos = Position::at(kMargin + 2.0 * static_cast<double>(j), kMargin + 3.2);
  }
  return out;
}

std::string expand_badge(const std::string& badge, const pddl::GroundAtom& atom) {
  std::string out;
  for (std::size_t i = 0; i < badge.size(); ++i) {
    if (badge[i] == '{' && i + 2 < badge.size() && badge[i + 2] == '}' && std::isdigit(static_cast<unsigned char>(badge[i + 1]))) {
      std::size_t k = static_cast<std::size_t>(badge[i + 1] - '0');
      if (k < atom.args.size()) out += atom.args[k];
      i += 2;
    } else {
      out += badge[i];
    }
  }
  return out;
}

bool status_matches(const StatusStyle& s, const pddl::GroundAtom& a) {
  auto slash = s.key.find('/');
  if (slash == std::string::npos) return a.predicate == s.key;
  return a.predicate == s.key.substr(0, slash) && a.args.size() >= 2 && a.args[1] == s.key.substr(slash + 1);
}

std::string shape_word(Shape s) {
  std::string w(to_string(s));
  return w == "label-only" ? "label" : w;
}

void add_legend(StyleMap& style) {
  style.legend.clear();
  for (const auto& [type, ts] : style.types) style.legend.push_back(type + ": " + ts.color + " " + shape_word(ts.shape));
  for (const auto& s : style.statuses) {
    if (!s.color.empty()) style.legend.push_back(s.key + ": " + s.color);
  }
}

}  // namespace

const TypeStyle* StyleMap::find(const pddl::DomainDef& domain, std::string_view type) const {
  std::string cur(type);
  for (std::size_t guard = 0; guard <= domain.types.size() + 1; ++guard) {
    auto it = types.find(cur);
    if (it != types.end()) return &it->second;
    if (cur == pddl::kRootType) return nullptr;
    auto decl = std::find_if(domain.types.begin(), domain.types.end(), [&](const auto& t) { return t.name == cur; });
    cur = decl == domain.types.end() ? std::string(pddl::kRootType) : decl->parent;
  }
  return nullptr;
}

std::vector<std::string> object_ids(const pddl::DomainDef& domain, const pddl::ProblemDef& problem) {
  std::vector<std::string> out;
  for (const auto& [name, type] : problem.objects) out.push_back(name);
  for (const auto& [name, type] : domain.constants) {
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  return out;
}

StyleMap parse_style(std::string_view text) {
  StyleMap style;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    std::istringstream ls(s);
    std::string head;
    ls >> head;
    if (head == "domain") {
      ls >> style.domain;
    } else if (head == "type") {
      std::string name;
      if (!(ls >> name)) style_error(line, "type without name");
      auto kv = key_values(ls, line);
      TypeStyle ts;
      auto shape = parse_shape(kv["shape"]);
      if (!shape) style_error(line, "unknown shape '" + kv["shape"] + "'");
      ts.shape = *shape;
      ts.color = kv["color"];
      if (!color_hex(ts.color)) style_error(line, "color '" + ts.color + "' is not in the palette");
      std::tie(ts.w, ts.h) = parse_size(kv.count("size") ? kv["size"] : "", line);
      style.types[name] = ts;
    } else if (head == "status") {
      StatusStyle st;
      if (!(ls >> st.key)) style_error(line, "status without key");
      auto kv = key_values(ls, line);
      st.color = kv["color"];
      st.badge = kv["badge"];
      if (!st.color.empty() && !color_hex(st.color)) style_error(line, "color '" + st.color + "' is not in the palette");
      style.statuses.push_back(st);
    } else if (head == "legend") {
      style.legend.push_back(trim(s.substr(6)));
    } else {
      style_error(line, "unknown entry '" + head + "'");
    }
  }
  return style;
}

std::string to_text(const StyleMap& style) {
  std::string out = "domain " + style.domain + "\n";
  for (const auto& [name, ts] : style.types) {
    out += "type " + name + " shape=" + std::string(to_string(ts.shape)) + " color=" + ts.color +
           " size=" + format_number(ts.w) + "x" + format_number(ts.h) + "\n";
  }
  for (const auto& s : style.statuses) {
    out += "status " + s.key;
    if (!s.color.empty()) out += " color=" + s.color;
    if (!s.badge.empty()) out += " badge=" + s.badge;
    out += "\n";
  }
  for (const auto& l : style.legend) out += "legend " + l + "\n";
  return out;
}

void check_style(const StyleMap& style, const pddl::DomainDef& domain) {
  std::vector<std::string> types{std::string(pddl::kRootType)};
  for (const auto& t : domain.types) types.push_back(t.name);
  for (const auto& t : types) {
    // "object" needs a style only when nothing narrower covers the objects.
    if (t == pddl::kRootType && !domain.types.empty()) continue;
    if (!style.find(domain, t)) {
      throw DiagramError(DiagramError::Kind::uncovered_type, "no style for type '" + t + "'");
    }
  }
  for (const auto& s : style.statuses) {
    std::string pred = s.key.substr(0, s.key.find('/'));
    if (!domain.find_predicate(pred)) {
      throw DiagramError(DiagramError::Kind::parse, "status '" + s.key + "' names an undeclared predicate");
    }
  }
}

StyleMap default_style(const pddl::DomainDef& domain) {
  StyleMap s;
  s.domain = domain.name;
  auto type = [&](const std::string& name, Shape shape, const std::string& color, double w, double h) {
    s.types[name] = {shape, color, w, h};
  };
  auto status = [&](const std::string& key, const std::string& color, const std::string& badge) {
    s.statuses.push_back({key, color, badge});
  };
  if (domain.name == "blocksworld") {
    type("block", Shape::square, "blue", 1, 1);
    status("holding", "orange", "held");
  } else if (domain.name == "parking") {
    type("car", Shape::rectangle, "red", 0.8, 0.6);
    type("curb", Shape::rectangle, "gray", 2.0, 0.3);
    status("behind-car", "orange", "double-parked");
  } else if (domain.name == "tetris") {
    type("position", Shape::square, "white", 1, 1);
    type("piece", Shape::circle, "gray", 0.4, 0.4);
    type("one_square", Shape::circle, "red", 0.4, 0.4);
    type("two_straight", Shape::circle, "green", 0.4, 0.4);
    type("right_l", Shape::circle, "purple", 0.4, 0.4);
  } else if (domain.name == "floortile") {
    type("tile", Shape::square, "gray", 1, 1);
    type("robot", Shape::circle, "red", 0.5, 0.5);
    type("color", Shape::square, "gray", 0.5, 0.5);
    status("painted/white", "white", "");
    status("painted/black", "black", "");
    status("painted", "", "painted {1}");
    status("robot-has", "", "has {1}");
  } else if (domain.name == "elevator") {
    type("count", Shape::line, "gray", 1, 0.05);
    type("elevator", Shape::rectangle, "teal", 1.2, 0.9);
    type("slow-elevator", Shape::rectangle, "teal", 1.2, 0.9);
    type("fast-elevator", Shape::rectangle, "purple", 1.2, 0.9);
    type("passenger", Shape::circle, "orange", 0.4, 0.4);
    status("boarded", "green", "");
    status("passengers", "", "load {1}");
  } else if (domain.name == "barman") {
    type("hand", Shape::rectangle, "brown", 1.6, 0.4);
    type("container", Shape::rectangle, "blue", 0.6, 0.9);
    type("shot", Shape::rectangle, "blue", 0.6, 0.9);
    type("shaker", Shape::rectangle, "purple", 0.9, 1.3);
    type("level", Shape::label_only, "black", 0, 0);
    type("beverage", Shape::label_only, "black", 0, 0);
    type("ingredient", Shape::label_only, "green", 0, 0);
    type("cocktail", Shape::label_only, "red", 0, 0);
    type("dispenser", Shape::label_only, "gray", 0, 0);
    status("contains", "", "{1}");
    status("clean", "", "clean");
    status("shaked", "orange", "shaken");
    status("shaker-level", "", "level {1}");
    status("holding", "", "holds {1}");
  } else {
    static constexpr std::string_view kCycle[] = {"blue", "red", "green", "orange", "purple", "teal", "pink", "brown", "yellow"};
    std::vector<std::string> names{std::string(pddl::kRootType)};
    for (const auto& t : domain.types) names.push_back(t.name);
    for (std::size_t i = 0; i < names.size(); ++i) {
      type(names[i], Shape::square, std::string(kCycle[i % std::size(kCycle)]), 1, 1);
    }
  }
  add_legend(s);
  return s;
}

DiagramSchema schema_from_state(const pddl::State& state, const StyleMap& style, const pddl::DomainDef& domain,
                                const pddl::ProblemDef& problem) {
  Placements placed;
  if (domain.name == "blocksworld") placed = blocksworld_rule(state, domain, problem);
  else if (domain.name == "parking") placed = parking_rule(state, domain, problem, style);
  else if (domain.name == "tetris") placed = grid_rule(state, domain, problem, style, "position");
  else if (domain.name == "floortile") placed = grid_rule(state, domain, problem, style, "tile");
  else if (domain.name == "elevator") placed = elevator_rule(state, domain, problem, style);
  else if (domain.name == "barman") placed = barman_rule(state, domain, problem);

  DiagramSchema schema;
  schema.title = problem.name;
  std::vector<std::string> extras;
  for (const auto& id : object_ids(domain, problem)) {
    auto type = type_of(domain, problem, id);
    const TypeStyle* ts = type ? style.find(domain, *type) : nullptr;
    if (!ts) throw DiagramError(DiagramError::Kind::uncovered_type, "no style for the type of '" + id + "'");
    ObjectSpec o;
    o.id = id;
    o.label = id;
    o.shape = ts->shape;
    o.color = ts->color;
    o.w = ts->w;
    o.h = ts->h;
    if (o.shape == Shape::label_only && o.w == 0 && o.h == 0) {
      o.w = text_width_em(id) * 14.0 / kPixelsPerUnit;
      o.h = 0.4;
    }
    std::vector<std::string> badges;
    bool colored = false;
    for (const auto& st : style.statuses) {
      for (const auto& a : state) {
        if (a.args.empty() || a.args[0] != id || !status_matches(st, a)) continue;
        if (!st.color.empty() && !colored) {
          o.color = st.color;
          colored = true;
        }
        if (!st.badge.empty()) badges.push_back(expand_badge(st.badge, a));
      }
    }
    auto p = placed.find(id);
    if (p != placed.end()) {
      o.pos = p->second.pos;
      if (p->second.size) std::tie(o.w, o.h) = *p->second.size;
      if (!p->second.color.empty() && !colored) o.color = p->second.color;
      if (!p->second.status.empty()) badges.insert(badges.begin(), p->second.status);
    }
    if (p == placed.end() || !p->second.placed) extras.push_back(id);
    for (std::size_t i = 0; i < badges.size(); ++i) o.status += (i ? ", " : "") + badges[i];
    schema.objects.push_back(std::move(o));
  }

  // Extras row above everything placed so far.
  double top = kMargin;
  double right = 8.0;
  if (extras.size() < schema.objects.size()) {
    DiagramSchema placed_only = schema;
    std::erase_if(placed_only.objects, [&](const ObjectSpec& o) {
      return std::find(extras.begin(), extras.end(), o.id) != extras.end();
    });
    for (const auto& [id, b] : layout(placed_only)) {
      top = std::max(top, b.y + b.h + 0.6);
      right = std::max(right, b.x + b.w);
    }
  }
  double x = kMargin, row_h = 0;
  for (auto& o : schema.objects) {
    if (std::find(extras.begin(), extras.end(), o.id) == extras.end()) continue;
    if (x > kMargin && x + o.w > right) {
      x = kMargin;
      top += row_h + 0.6;
      row_h = 0;
    }
    o.pos = Position::at(x, top);
    x += o.w + 0.4;
    row_h = std::max(row_h, o.h);
  }

  double w = 1, h = 1;
  for (const auto& [id, b] : layout(schema)) {
    w = std::max(w, b.x + b.w + kMargin);
    h = std::max(h, b.y + b.h + kMargin + 0.3);
  }
  schema.width = std::ceil(w * 2) / 2;
  schema.height = std::ceil(h * 2) / 2;
  return schema;
}

StyleMap style_from_schema(const DiagramSchema& schema, const pddl::State& state, const pddl::DomainDef& domain,
                           const pddl::ProblemDef& problem, const StyleMap& fallback) {
  StyleMap out = fallback;
  out.domain = domain.name;
  // Most common look per exact type; ties go to the first seen.
  std::map<std::string, std::vector<std::pair<TypeStyle, int>>> seen;
  for (const auto& o : schema.objects) {
    auto type = type_of(domain, problem, o.id);
    if (!type) continue;
    TypeStyle ts{o.shape, o.color, o.w, o.h};
    if (o.shape == Shape::label_only) ts.w = ts.h = 0;
    auto& list = seen[*type];
    auto it = std::find_if(list.begin(), list.end(), [&](const auto& e) { return e.first == ts; });
    if (it == list.end()) list.emplace_back(ts, 1);
    else ++it->second;
  }
  for (const auto& [type, list] : seen) {
    auto best = list.begin();
    for (auto it = list.begin(); it != list.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    out.types[type] = best->first;
  }
  // Status colors: every holder of the predicate shares one non-base color.
  auto statics = domain.static_predicates();
  std::map<std::string, std::set<std::string>> holders;
  for (const auto& a : state) {
    if (a.args.empty() || std::find(statics.begin(), statics.end(), a.predicate) != statics.end()) continue;
    holders[a.predicate].insert(a.args[0]);
  }
  for (const auto& [pred, ids] : holders) {
    std::set<std::string> colors;
    bool differs = true;
    for (const auto& id : ids) {
      const ObjectSpec* o = schema.find(id);
      auto type = type_of(domain, problem, id);
      const TypeStyle* base = type ? out.find(domain, *type) : nullptr;
      if (!o || !base) {
        differs = false;
        break;
      }
      colors.insert(o->color);
      differs = differs && o->color != base->color;
    }
    if (!differs || colors.size() != 1) continue;
    auto it = std::find_if(out.statuses.begin(), out.statuses.end(), [&](const auto& s) { return s.key == pred; });
    if (it != out.statuses.end()) it->color = *colors.begin();
    else out.statuses.push_back({pred, *colors.begin(), ""});
  }
  add_legend(out);
  return out;
}

}  // namespace vp::diagram
