#include "vplan/diagram/schema.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace vp::diagram {

namespace {

constexpr std::array<PaletteColor, 12> kPalette = {{
    {"white", "#ffffff"},
    {"black", "#000000"},
    {"gray", "#9e9e9e"},
    {"red", "#e53935"},
    {"orange", "#fb8c00"},
    {"yellow", "#fdd835"},
    {"green", "#43a047"},
    {"teal", "#00897b"},
    {"blue", "#1e88e5"},
    {"purple", "#8e24aa"},
    {"pink", "#f06292"},
    {"brown", "#795548"},
}};

constexpr double kEps = 1e-9;

[[noreturn]] void parse_error(int line, const std::string& message) {
  throw DiagramError(DiagramError::Kind::parse, "schema line " + std::to_string(line) + ": " + message);
}

std::optional<double> to_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::pair<double, double> parse_pair(std::string_view s, char sep, int line, const char* what) {
  auto at = s.find(sep);
  if (at == std::string_view::npos) parse_error(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  auto a = to_double(s.substr(0, at));
  auto b = to_double(s.substr(at + 1));
  if (!a || !b) parse_error(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  return {*a, *b};
}

Position parse_position(std::string_view s, int line) {
  auto open = s.find('(');
  if (open == std::string_view::npos) {
    auto [x, y] = parse_pair(s, ',', line, "position");
    return Position::at(x, y);
  }
  if (s.back() != ')') parse_error(line, "bad position '" + std::string(s) + "'");
  std::string_view name = s.substr(0, open);
  std::string_view inner = s.substr(open + 1, s.size() - open - 2);
  Relation r;
  if (name == "above") r = Relation::above;
  else if (name == "below") r = Relation::below;
  else if (name == "left-of") r = Relation::left_of;
  else if (name == "right-of") r = Relation::right_of;
  else if (name == "inside") r = Relation::inside;
  else parse_error(line, "unknown relation '" + std::string(name) + "'");
  auto comma = inner.find(',');
  std::string target = trim(inner.substr(0, comma));
  if (target.empty()) parse_error(line, "relation without target");
  double gap = 0;
  if (comma != std::string_view::npos) {
    auto g = to_double(trim(inner.substr(comma + 1)));
    if (!g) parse_error(line, "bad gap in '" + std::string(s) + "'");
    gap = *g;
  }
  return Position::rel(r, std::move(target), gap);
}

ObjectSpec parse_object(const std::string& rest, int line) {
  std::istringstream in(rest);
  ObjectSpec spec;
  if (!(in >> spec.id)) parse_error(line, "object without id");
  static const std::set<std::string> keys = {"shape", "color", "size", "pos", "status", "label"};
  std::map<std::string, std::string> fields;
  std::string current, token;
  while (in >> token) {
    auto eq = token.find('=');
    if (eq != std::string::npos && keys.count(token.substr(0, eq))) {
      current = token.substr(0, eq);
      if (fields.count(current)) parse_error(line, "repeated key '" + current + "'");
      fields[current] = token.substr(eq + 1);
    } else if (!current.empty()) {
      fields[current] += " " + token;
    } else {
      parse_error(line, "unexpected '" + token + "'");
    }
  }
  for (const char* k : {"shape", "color", "size", "pos"}) {
    if (!fields.count(k)) parse_error(line, std::string("object '") + spec.id + "' lacks " + k + "=");
  }
  auto shape = parse_shape(fields["shape"]);
  if (!shape) parse_error(line, "unknown shape '" + fields["shape"] + "'");
  spec.shape = *shape;
  spec.color = fields["color"];
  std::tie(spec.w, spec.h) = parse_pair(fields["size"], 'x', line, "size");
  spec.pos = parse_position(fields["pos"], line);
  spec.status = fields.count("status") ? fields["status"] : "";
  spec.label = fields.count("label") ? fields["label"] : "";
  return spec;
}

std::string one_line(const std::string& s) {
  std::string out = s;
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

class Resolver {
 public:
  explicit Resolver(const DiagramSchema& schema) : schema_(schema) {
    for (std::size_t i = 0; i < schema.objects.size(); ++i) index_.emplace(schema.objects[i].id, i);
  }

  std::map<std::string, Box> run() {
    std::vector<int> state(schema_.objects.size(), 0);
    std::vector<Box> boxes(schema_.objects.size());
    std::vector<int> hops(schema_.objects.size(), 0);
    for (std::size_t i = 0; i < schema_.objects.size(); ++i) resolve(i, state, boxes, hops);
    std::map<std::string, Box> out;
    for (const auto& [id, i] : index_) out.emplace(id, boxes[i]);
    hop_total_ = std::accumulate(hops.begin(), hops.end(), 0);
    return out;
  }

  int hop_total() const { return hop_total_; }

 private:
  void resolve(std::size_t i, std::vector<int>& state, std::vector<Box>& boxes, std::vector<int>& hops) {
    if (state[i] == 2) return;
    const ObjectSpec& o = schema_.objects[i];
    if (state[i] == 1) {
      std::string path = o.id;
      for (const ObjectSpec* cur = schema_.find(o.pos.target); cur; cur = schema_.find(cur->pos.target)) {
        path += " -> " + cur->id;
        if (cur->id == o.id || path.size() > 4096) break;
      }
      throw DiagramError(DiagramError::Kind::cyclic_relation, "relation cycle: " + path);
    }
    state[i] = 1;
    Box b{0, 0, o.w, o.h};
    if (!o.pos.relative()) {
      b.x = o.pos.x;
      b.y = o.pos.y;
    } else {
      auto it = index_.find(o.pos.target);
      if (it == index_.end()) {
        throw DiagramError(DiagramError::Kind::dangling_relation,
                           "'" + o.id + "' refers to unknown object '" + o.pos.target + "'");
      }
      resolve(it->second, state, boxes, hops);
      const Box& t = boxes[it->second];
      hops[i] = hops[it->second] + 1;
      const double g = o.pos.gap;
      switch (o.pos.relation) {
        case Relation::above: b.x = t.x + (t.w - b.w) / 2; b.y = t.y + t.h + g; break;
        case Relation::below: b.x = t.x + (t.w - b.w) / 2; b.y = t.y - g - b.h; break;
        case Relation::left_of: b.x = t.x - g - b.w; b.y = t.y + (t.h - b.h) / 2; break;
        case Relation::right_of: b.x = t.x + t.w + g; b.y = t.y + (t.h - b.h) / 2; break;
        case Relation::inside: b.x = t.x + (t.w - b.w) / 2; b.y = t.y + (t.h - b.h) / 2; break;
      }
    }
    boxes[i] = b;
    state[i] = 2;
  }

  const DiagramSchema& schema_;
  std::map<std::string, std::size_t> index_;
  int hop_total_ = 0;
};

// True when a is nested in b (or b in a) through inside relations.
bool nested(const DiagramSchema& schema, const ObjectSpec& a, const ObjectSpec& b) {
  auto chain_contains = [&](const ObjectSpec& from, const std::string& id) {
    const ObjectSpec* cur = &from;
    for (std::size_t steps = 0; steps <= schema.objects.size(); ++steps) {
      if (!cur->pos.relative() || cur->pos.relation != Relation::inside) return false;
      if (cur->pos.target == id) return true;
      cur = schema.find(cur->pos.target);
      if (!cur) return false;
    }
    return false;
  };
  return chain_contains(a, b.id) || chain_contains(b, a.id);
}

}  // namespace

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::circle: return "circle";
    case Shape::square: return "square";
    case Shape::rectangle: return "rectangle";
    case Shape::line: return "line";
    case Shape::triangle: return "triangle";
    case Shape::label_only: return "label-only";
  }
  return "square";
}

std::optional<Shape> parse_shape(std::string_view text) {
  for (Shape s : {Shape::circle, Shape::square, Shape::rectangle, Shape::line, Shape::triangle, Shape::label_only}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

const std::array<PaletteColor, 12>& palette() { return kPalette; }

std::optional<std::string_view> color_hex(std::string_view name) {
  for (const auto& c : kPalette) {
    if (c.name == name) return c.hex;
  }
  return std::nullopt;
}

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::above: return "above";
    case Relation::below: return "below";
    case Relation::left_of: return "left-of";
    case Relation::right_of: return "right-of";
    case Relation::inside: return "inside";
  }
  return "above";
}

const ObjectSpec* DiagramSchema::find(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", std::fabs(v) < 0.0005 ? 0.0 : v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

std::string to_text(const Position& pos) {
  if (!pos.relative()) return format_number(pos.x) + "," + format_number(pos.y);
  std::string s = std::string(to_string(pos.relation)) + "(" + pos.target;
  if (pos.relation != Relation::inside || pos.gap != 0) s += "," + format_number(pos.gap);
  return s + ")";
}

std::string to_text(const ObjectSpec& o) {
  std::string s = "object " + o.id + " shape=" + std::string(to_string(o.shape)) + " color=" + o.color +
                  " size=" + format_number(o.w) + "x" + format_number(o.h) + " pos=" + to_text(o.pos);
  if (!o.status.empty()) s += " status=" + one_line(o.status);
  if (!o.label.empty()) s += " label=" + one_line(o.label);
  return s;
}

std::string to_text(const DiagramSchema& schema) {
  std::string s;
  if (!schema.title.empty()) s += "title " + one_line(schema.title) + "\n";
  s += "canvas " + format_number(schema.width) + "x" + format_number(schema.height) + "\n";
  for (const auto& o : schema.objects) s += to_text(o) + "\n";
  return s;
}

DiagramSchema parse_schema(std::string_view text) {
  DiagramSchema schema;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  bool saw_canvas = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    auto space = s.find(' ');
    std::string head = s.substr(0, space);
    std::string rest = space == std::string::npos ? "" : trim(s.substr(space + 1));
    if (head == "title") {
      schema.title = rest;
    } else if (head == "canvas") {
      std::tie(schema.width, schema.height) = parse_pair(rest, 'x', line, "canvas");
      if (schema.width <= 0 || schema.height <= 0) parse_error(line, "canvas must be positive");
      saw_canvas = true;
    } else if (head == "object") {
      schema.objects.push_back(parse_object(rest, line));
    } else {
      parse_error(line, "unknown statement '" + head + "'");
    }
  }
  if (!saw_canvas && !schema.objects.empty()) parse_error(line, "missing canvas statement");
  return schema;
}

std::map<std::string, Box> layout(const DiagramSchema& schema) { return Resolver(schema).run(); }

int relation_hops(const DiagramSchema& schema) {
  Resolver r(schema);
  r.run();
  return r.hop_total();
}

std::string_view to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::missing_object: return "missing-object";
    case Violation::Kind::unknown_object: return "unknown-object";
    case Violation::Kind::duplicate_id: return "duplicate-id";
    case Violation::Kind::overlap: return "overlap";
    case Violation::Kind::dangling_relation: return "dangling-relation";
    case Violation::Kind::cyclic_relation: return "cyclic-relation";
    case Violation::Kind::palette_violation: return "palette-violation";
    case Violation::Kind::bad_size: return "bad-size";
    case Violation::Kind::out_of_canvas: return "out-of-canvas";
  }
  return "unknown";
}

std::string Violation::text() const {
  std::string s(to_string(kind));
  for (const auto& id : ids) s += " " + id;
  if (!detail.empty()) s += ": " + detail;
  return s;
}

std::vector<Violation> check_schema(const DiagramSchema& schema, const std::vector<std::string>& expected_ids) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (const auto& o : schema.objects) {
    if (!ids.insert(o.id).second) out.push_back({K::duplicate_id, {o.id}, "declared more than once"});
  }
  std::set<std::string> expected(expected_ids.begin(), expected_ids.end());
  for (const auto& e : expected_ids) {
    if (!ids.count(e)) out.push_back({K::missing_object, {e}, "not drawn"});
  }
  bool dangling = false;
  for (const auto& o : schema.objects) {
    if (!expected.count(o.id)) out.push_back({K::unknown_object, {o.id}, "not an object of the state"});
    if (!color_hex(o.color)) out.push_back({K::palette_violation, {o.id}, "color '" + o.color + "' is not in the palette"});
    bool size_ok = o.shape == Shape::label_only ? (o.w >= 0 && o.h >= 0) : (o.w > 0 && o.h > 0);
    if (!size_ok) out.push_back({K::bad_size, {o.id}, "size " + format_number(o.w) + "x" + format_number(o.h)});
    if (o.pos.relative() && !ids.count(o.pos.target)) {
      out.push_back({K::dangling_relation, {o.id}, "refers to unknown object '" + o.pos.target + "'"});
      dangling = true;
    }
  }
  if (dangling) return out;

  std::map<std::string, Box> boxes;
  try {
    boxes = layout(schema);
  } catch (const DiagramError& e) {
    out.push_back({K::cyclic_relation, {}, e.what()});
    return out;
  }
  for (const auto& o : schema.objects) {
    const Box& b = boxes.at(o.id);
    if (b.x < -kEps || b.y < -kEps || b.x + b.w > schema.width + kEps || b.y + b.h > schema.height + kEps) {
      out.push_back({K::out_of_canvas, {o.id}, "extends past the canvas"});
    }
  }
  for (std::size_t i = 0; i < schema.objects.size(); ++i) {
    const auto& a = schema.objects[i];
    if (a.shape == Shape::label_only) continue;
    for (std::size_t j = i + 1; j < schema.objects.size(); ++j) {
      const auto& b = schema.objects[j];
      if (b.shape == Shape::label_only || a.id == b.id) continue;
      const Box& p = boxes.at(a.id);
      const Box& q = boxes.at(b.id);
      double ix = std::min(p.x + p.w, q.x + q.w) - std::max(p.x, q.x);
      double iy = std::min(p.y + p.h, q.y + q.h) - std::max(p.y, q.y);
      if (ix > kEps && iy > kEps && !nested(schema, a, b)) out.push_back({K::overlap, {a.id, b.id}, ""});
    }
  }
  return out;
}

std::vector<std::size_t> rank_schemas(const std::vector<DiagramSchema>& candidates, const SchemaScorer& scorer) {
  if (candidates.empty()) throw DiagramError(DiagramError::Kind::empty_candidates, "no schemas to rank");
  auto order = scorer(candidates);
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> expect(candidates.size());
  std::iota(expect.begin(), expect.end(), 0);
  if (sorted != expect) throw std::invalid_argument("schema ranking is not a permutation of the candidates");
  return order;
}

std::vector<std::size_t> oracle_schema_order(const std::vector<DiagramSchema>& candidates,
                                             const std::vector<std::string>& expected_ids) {
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  for (const auto& c : candidates) {
    std::size_t violations = check_schema(c, expected_ids).size();
    std::size_t hops = std::numeric_limits<std::size_t>::max();
    try {
      hops = static_cast<std::size_t>(relation_hops(c));
    } catch (const DiagramError&) {
    }
    keys.emplace_back(violations, hops);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}

}  // namespace vp::diagram
