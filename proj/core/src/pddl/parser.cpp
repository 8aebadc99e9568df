#include "vplan/pddl/parser.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "vplan/pddl/sexpr.hpp"

namespace vp::pddl {

namespace {

const std::set<std::string, std::less<>> kSupportedRequirements = {
    ":strips", ":typing", ":negative-preconditions"};

const std::set<std::string, std::less<>> kUnsupportedConnectives = {
    "or", "imply", "forall", "exists", "when", "=", "increase", "decrease", "assign",
    "scale-up", "scale-down", "either", "at", "over"};

[[noreturn]] void fail(ErrorKind kind, const std::string& msg, const SExpr& at) {
  throw PddlError(kind, msg, at.pos);
}

const std::string& expect_atom(const SExpr& e, std::string_view what) {
  if (!e.is_atom() || e.atom.empty()) fail(ErrorKind::syntax, "expected " + std::string(what), e);
  return e.atom;
}

const SExpr& expect_list(const SExpr& e, std::string_view what) {
  if (!e.is_list) fail(ErrorKind::syntax, "expected " + std::string(what), e);
  return e;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || s.front() == '?' || s.front() == ':') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
  });
}

// Parses `a b - t c d - u e` into (name, type) pairs; untyped names get
// "object". `either` types are rejected.
std::vector<std::pair<std::string, std::string>> parse_typed_list(
    const std::vector<SExpr>& items, std::size_t from, bool variables) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> pending;
  for (std::size_t i = from; i < items.size(); ++i) {
    const SExpr& e = items[i];
    if (e.is_list) {
      if (e.has_head("either")) fail(ErrorKind::unsupported_requirement, "'either' types are not supported", e);
      fail(ErrorKind::syntax, "unexpected list in typed list", e);
    }
    if (e.atom == "-") {
      if (i + 1 >= items.size()) fail(ErrorKind::syntax, "missing type after '-'", e);
      const SExpr& t = items[++i];
      if (t.is_list && t.has_head("either"))
        fail(ErrorKind::unsupported_requirement, "'either' types are not supported", t);
      const std::string& type = expect_atom(t, "type name");
      if (pending.empty()) fail(ErrorKind::syntax, "'-' without preceding names", e);
      for (auto& n : pending) out.emplace_back(std::move(n), type);
      pending.clear();
      continue;
    }
    std::string name = e.atom;
    if (variables) {
      if (name.size() < 2 || name.front() != '?') fail(ErrorKind::syntax, "expected variable, got '" + name + "'", e);
      name.erase(0, 1);
    } else if (!is_identifier(name)) {
      fail(ErrorKind::syntax, "invalid name '" + name + "'", e);
    }
    pending.push_back(std::move(name));
  }
  for (auto& n : pending) out.emplace_back(std::move(n), std::string(kRootType));
  return out;
}

void check_requirements(const SExpr& section) {
  for (std::size_t i = 1; i < section.items.size(); ++i) {
    const std::string& r = expect_atom(section.items[i], "requirement flag");
    if (!kSupportedRequirements.count(r)) {
      fail(ErrorKind::unsupported_requirement, "requirement " + r + " is not supported", section.items[i]);
    }
  }
}

struct SchemaScope {
  const DomainDef& domain;
  const std::vector<Parameter>& params;
};

AtomTemplate parse_atom_template(const SExpr& e, const SchemaScope& scope) {
  expect_list(e, "atom");
  if (e.items.empty()) fail(ErrorKind::syntax, "empty atom", e);
  const std::string& head = expect_atom(e.items[0], "predicate name");
  if (kUnsupportedConnectives.count(head))
    fail(ErrorKind::unsupported_requirement, "'" + head + "' is outside the supported STRIPS subset", e);
  const PredicateDecl* pred = scope.domain.find_predicate(head);
  if (!pred) fail(ErrorKind::undeclared_predicate, "predicate '" + head + "' is not declared", e);
  if (pred->params.size() + 1 != e.items.size()) {
    fail(ErrorKind::arity_mismatch, "predicate '" + head + "' expects " + std::to_string(pred->params.size()) +
                                        " arguments", e);
  }
  AtomTemplate atom{head, {}};
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const std::string& a = expect_atom(e.items[i], "argument");
    const std::string& want = pred->params[i - 1].type;
    Term term;
    std::string have;
    if (a.front() == '?') {
      std::string var = a.substr(1);
      auto it = std::find_if(scope.params.begin(), scope.params.end(),
                             [&](const Parameter& p) { return p.name == var; });
      if (it == scope.params.end()) fail(ErrorKind::syntax, "undeclared variable '" + a + "'", e.items[i]);
      term.param = static_cast<int>(it - scope.params.begin());
      have = it->type;
    } else {
      auto it = std::find_if(scope.domain.constants.begin(), scope.domain.constants.end(),
                             [&](const auto& c) { return c.first == a; });
      if (it == scope.domain.constants.end())
        fail(ErrorKind::unknown_object, "unknown constant '" + a + "'", e.items[i]);
      term.constant = a;
      have = it->second;
    }
    if (!scope.domain.is_subtype(have, want)) {
      fail(ErrorKind::type_mismatch, "argument " + a + " of type " + have + " does not fit " + want + " in '" + head + "'",
           e.items[i]);
    }
    atom.args.push_back(std::move(term));
  }
  return atom;
}

// Collects a conjunction of literals into positive and negative lists.
template <typename AtomParser>
void parse_literals(const SExpr& e, std::vector<AtomTemplate>& pos, std::vector<AtomTemplate>& neg,
                    const AtomParser& parse_atom) {
  if (e.is_atom()) fail(ErrorKind::syntax, "expected a condition, got '" + e.atom + "'", e);
  if (e.items.empty()) return;
  if (e.has_head("and")) {
    for (std::size_t i = 1; i < e.items.size(); ++i) parse_literals(e.items[i], pos, neg, parse_atom);
    return;
  }
  if (e.has_head("not")) {
    if (e.items.size() != 2) fail(ErrorKind::syntax, "'not' takes exactly one atom", e);
    const SExpr& inner = e.items[1];
    if (inner.has_head("and") || inner.has_head("not"))
      fail(ErrorKind::unsupported_requirement, "only atoms may be negated", inner);
    neg.push_back(parse_atom(inner));
    return;
  }
  pos.push_back(parse_atom(e));
}

ActionSchema parse_action(const SExpr& e, const DomainDef& domain) {
  if (e.items.size() < 2) fail(ErrorKind::syntax, "action without a name", e);
  ActionSchema a;
  a.name = expect_atom(e.items[1], "action name");
  if (!is_identifier(a.name)) fail(ErrorKind::syntax, "invalid action name '" + a.name + "'", e.items[1]);
  const SExpr* pre = nullptr;
  const SExpr* eff = nullptr;
  for (std::size_t i = 2; i < e.items.size(); i += 2) {
    const std::string& key = expect_atom(e.items[i], "action keyword");
    if (i + 1 >= e.items.size()) fail(ErrorKind::syntax, "missing value for " + key, e.items[i]);
    const SExpr& val = e.items[i + 1];
    if (key == ":parameters") {
      for (auto& [n, t] : parse_typed_list(expect_list(val, "parameter list").items, 0, true)) {
        if (!domain.has_type(t)) fail(ErrorKind::undeclared_type, "type '" + t + "' is not declared", val);
        if (std::any_of(a.params.begin(), a.params.end(), [&](const Parameter& p) { return p.name == n; }))
          fail(ErrorKind::duplicate_definition, "parameter ?" + n + " declared twice in " + a.name, val);
        a.params.push_back({n, t});
      }
    } else if (key == ":precondition") {
      pre = &val;
    } else if (key == ":effect") {
      eff = &val;
    } else {
      fail(ErrorKind::unsupported_requirement, "action keyword " + key + " is not supported", e.items[i]);
    }
  }
  SchemaScope scope{domain, a.params};
  auto atom_parser = [&](const SExpr& x) { return parse_atom_template(x, scope); };
  if (pre) parse_literals(*pre, a.pre_pos, a.pre_neg, atom_parser);
  if (eff) parse_literals(*eff, a.add, a.del, atom_parser);
  for (const auto& d : a.del) {
    if (std::find(a.add.begin(), a.add.end(), d) != a.add.end())
      fail(ErrorKind::duplicate_definition, "action " + a.name + " both adds and deletes '" + d.predicate + "'", e);
  }
  return a;
}

const SExpr& single_define(std::string_view text, std::string_view what) {
  static thread_local std::vector<SExpr> storage;
  storage = read_sexprs(text);
  if (storage.empty()) throw PddlError(ErrorKind::syntax, "empty " + std::string(what) + " text", {1, 1});
  if (storage.size() != 1) fail(ErrorKind::syntax, "expected a single (define ...) form", storage[1]);
  const SExpr& root = storage.front();
  if (!root.has_head("define")) fail(ErrorKind::syntax, "expected (define ...)", root);
  if (root.items.size() < 2 || !root.items[1].has_head(what) || root.items[1].items.size() != 2)
    fail(ErrorKind::syntax, "expected (" + std::string(what) + " <name>)", root);
  return root;
}

GroundAtom parse_ground_atom(const SExpr& e, const DomainDef& domain, const ProblemDef& problem) {
  expect_list(e, "ground atom");
  if (e.items.empty()) fail(ErrorKind::syntax, "empty atom", e);
  const std::string& head = expect_atom(e.items[0], "predicate name");
  if (kUnsupportedConnectives.count(head))
    fail(ErrorKind::unsupported_requirement, "'" + head + "' is outside the supported STRIPS subset", e);
  const PredicateDecl* pred = domain.find_predicate(head);
  if (!pred) fail(ErrorKind::undeclared_predicate, "predicate '" + head + "' is not declared", e);
  if (pred->params.size() + 1 != e.items.size())
    fail(ErrorKind::arity_mismatch, "predicate '" + head + "' expects " + std::to_string(pred->params.size()) + " arguments", e);
  GroundAtom atom{head, {}};
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const std::string& a = expect_atom(e.items[i], "object name");
    std::optional<std::string> type = problem.object_type(a);
    if (!type) {
      auto it = std::find_if(domain.constants.begin(), domain.constants.end(),
                             [&](const auto& c) { return c.first == a; });
      if (it != domain.constants.end()) type = it->second;
    }
    if (!type) fail(ErrorKind::unknown_object, "object '" + a + "' is not declared", e.items[i]);
    if (!domain.is_subtype(*type, pred->params[i - 1].type))
      fail(ErrorKind::type_mismatch, "object " + a + " of type " + *type + " does not fit " + pred->params[i - 1].type,
           e.items[i]);
    atom.args.push_back(a);
  }
  return atom;
}

void append_typed(std::string& out, const std::vector<std::pair<std::string, std::string>>& items,
                  bool variables) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ' ';
    if (variables) out += '?';
    out += items[i].first;
    bool last_of_run = i + 1 == items.size() || items[i + 1].second != items[i].second;
    if (last_of_run) out += " - " + items[i].second;
  }
}

std::string template_text(const AtomTemplate& t, const std::vector<Parameter>& params) {
  std::string out = "(" + t.predicate;
  for (const auto& a : t.args) {
    out += ' ';
    out += a.is_param() ? "?" + params[static_cast<std::size_t>(a.param)].name : a.constant;
  }
  return out + ")";
}

std::string conjunction(const std::vector<AtomTemplate>& pos, const std::vector<AtomTemplate>& neg,
                        const std::vector<Parameter>& params) {
  std::vector<std::string> parts;
  for (const auto& t : pos) parts.push_back(template_text(t, params));
  for (const auto& t : neg) parts.push_back("(not " + template_text(t, params) + ")");
  if (parts.empty()) return "()";
  if (parts.size() == 1) return parts.front();
  std::string out = "(and";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

}  // namespace

DomainDef parse_domain(std::string_view text) {
  const SExpr& root = single_define(text, "domain");
  DomainDef d;
  d.name = expect_atom(root.items[1].items[1], "domain name");
  std::set<std::string> seen_sections;
  // Sections are processed in dependency order regardless of file order.
  const SExpr* types = nullptr;
  const SExpr* constants = nullptr;
  const SExpr* predicates = nullptr;
  std::vector<const SExpr*> actions;
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& s = expect_list(root.items[i], "domain section");
    if (s.items.empty()) fail(ErrorKind::syntax, "empty section", s);
    const std::string& key = expect_atom(s.items[0], "section keyword");
    if (key != ":action" && !seen_sections.insert(key).second)
      fail(ErrorKind::duplicate_definition, "section " + key + " appears twice", s);
    if (key == ":requirements") {
      check_requirements(s);
      for (std::size_t j = 1; j < s.items.size(); ++j) d.requirements.push_back(s.items[j].atom);
    } else if (key == ":types") {
      types = &s;
    } else if (key == ":constants") {
      constants = &s;
    } else if (key == ":predicates") {
      predicates = &s;
    } else if (key == ":action") {
      actions.push_back(&s);
    } else {
      fail(ErrorKind::unsupported_requirement, "section " + key + " is not supported", s);
    }
  }
  if (types) {
    for (auto& [n, parent] : parse_typed_list(types->items, 1, false)) {
      if (n == kRootType) continue;
      if (d.has_type(n)) fail(ErrorKind::duplicate_definition, "type '" + n + "' declared twice", *types);
      d.types.push_back({n, parent});
    }
    // IPC files often use a parent type without declaring it.
    std::vector<TypeDecl> implicit;
    for (const auto& t : d.types) {
      if (!d.has_type(t.parent) &&
          std::none_of(implicit.begin(), implicit.end(), [&](const TypeDecl& x) { return x.name == t.parent; }))
        implicit.push_back({t.parent, std::string(kRootType)});
    }
    d.types.insert(d.types.end(), implicit.begin(), implicit.end());
  }
  if (constants) {
    for (auto& [n, t] : parse_typed_list(constants->items, 1, false)) {
      if (!d.has_type(t)) fail(ErrorKind::undeclared_type, "type '" + t + "' is not declared", *constants);
      d.constants.emplace_back(n, t);
    }
  }
  if (predicates) {
    for (std::size_t i = 1; i < predicates->items.size(); ++i) {
      const SExpr& p = expect_list(predicates->items[i], "predicate declaration");
      if (p.items.empty()) fail(ErrorKind::syntax, "empty predicate declaration", p);
      PredicateDecl decl;
      decl.name = expect_atom(p.items[0], "predicate name");
      if (!is_identifier(decl.name)) fail(ErrorKind::syntax, "invalid predicate name '" + decl.name + "'", p);
      if (d.find_predicate(decl.name))
        fail(ErrorKind::duplicate_definition, "predicate '" + decl.name + "' declared twice", p);
      for (auto& [n, t] : parse_typed_list(p.items, 1, true)) {
        if (!d.has_type(t)) fail(ErrorKind::undeclared_type, "type '" + t + "' is not declared", p);
        decl.params.push_back({n, t});
      }
      d.predicates.push_back(std::move(decl));
    }
  }
  for (const SExpr* a : actions) {
    ActionSchema schema = parse_action(*a, d);
    if (d.find_action(schema.name))
      fail(ErrorKind::duplicate_definition, "action '" + schema.name + "' declared twice", *a);
    d.actions.push_back(std::move(schema));
  }
  return d;
}

ProblemDef parse_problem(std::string_view text, const DomainDef& domain) {
  const SExpr& root = single_define(text, "problem");
  ProblemDef p;
  p.name = expect_atom(root.items[1].items[1], "problem name");
  const SExpr* objects = nullptr;
  const SExpr* init = nullptr;
  const SExpr* goal = nullptr;
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& s = expect_list(root.items[i], "problem section");
    if (s.items.empty()) fail(ErrorKind::syntax, "empty section", s);
    const std::string& key = expect_atom(s.items[0], "section keyword");
    if (key == ":domain") {
      if (s.items.size() != 2) fail(ErrorKind::syntax, "(:domain <name>) expected", s);
      p.domain_name = expect_atom(s.items[1], "domain name");
      if (p.domain_name != domain.name)
        fail(ErrorKind::syntax, "problem targets domain '" + p.domain_name + "', not '" + domain.name + "'", s);
    } else if (key == ":requirements") {
      check_requirements(s);
    } else if (key == ":objects") {
      objects = &s;
    } else if (key == ":init") {
      init = &s;
    } else if (key == ":goal") {
      goal = &s;
    } else {
      fail(ErrorKind::unsupported_requirement, "section " + key + " is not supported", s);
    }
  }
  if (p.domain_name.empty()) fail(ErrorKind::syntax, "missing (:domain ...)", root);
  if (objects) {
    for (auto& [n, t] : parse_typed_list(objects->items, 1, false)) {
      if (!domain.has_type(t)) fail(ErrorKind::undeclared_type, "type '" + t + "' is not declared", *objects);
      if (p.object_type(n)) fail(ErrorKind::duplicate_definition, "object '" + n + "' declared twice", *objects);
      p.objects.emplace_back(n, t);
    }
  }
  std::vector<GroundAtom> init_atoms;
  if (init) {
    for (std::size_t i = 1; i < init->items.size(); ++i) {
      init_atoms.push_back(parse_ground_atom(init->items[i], domain, p));
    }
  }
  p.init = State(std::move(init_atoms));
  if (!goal) fail(ErrorKind::syntax, "missing (:goal ...)", root);
  if (goal->items.size() != 2) fail(ErrorKind::syntax, "(:goal <condition>) expected", *goal);
  auto ground_parser = [&](const SExpr& x) { return parse_ground_atom(x, domain, p); };
  struct Collect {
    std::vector<GroundAtom> pos, neg;
  } c;
  std::function<void(const SExpr&)> walk = [&](const SExpr& e) {
    if (e.is_atom()) fail(ErrorKind::syntax, "expected a goal condition", e);
    if (e.items.empty()) return;
    if (e.has_head("and")) {
      for (std::size_t i = 1; i < e.items.size(); ++i) walk(e.items[i]);
    } else if (e.has_head("not")) {
      if (e.items.size() != 2) fail(ErrorKind::syntax, "'not' takes exactly one atom", e);
      c.neg.push_back(ground_parser(e.items[1]));
    } else {
      c.pos.push_back(ground_parser(e));
    }
  };
  walk(goal->items[1]);
  std::sort(c.pos.begin(), c.pos.end());
  c.pos.erase(std::unique(c.pos.begin(), c.pos.end()), c.pos.end());
  std::sort(c.neg.begin(), c.neg.end());
  c.neg.erase(std::unique(c.neg.begin(), c.neg.end()), c.neg.end());
  for (const auto& g : c.pos) {
    if (std::binary_search(c.neg.begin(), c.neg.end(), g))
      fail(ErrorKind::duplicate_definition, "goal requires both " + g.text() + " and its negation", *goal);
  }
  p.goal_pos = std::move(c.pos);
  p.goal_neg = std::move(c.neg);
  return p;
}

Plan parse_plan(std::string_view text) {
  Plan plan;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (auto c = line.find(';'); c != std::string_view::npos) line = line.substr(0, c);
    // Tolerate VAL-style "0: (action ...)" step prefixes.
    if (auto colon = line.find(':'); colon != std::string_view::npos && line.find('(') != std::string_view::npos &&
                                      colon < line.find('(')) {
      line = line.substr(colon + 1);
    }
    auto items = read_sexprs(line);
    if (items.empty()) continue;
    if (items.size() != 1) {
      throw PddlError(ErrorKind::syntax, "expected one action per line", {line_no, items[1].pos.column});
    }
    const SExpr& e = items.front();
    if (!e.is_list || e.items.empty()) {
      throw PddlError(ErrorKind::syntax, "expected (name arg ...)", {line_no, e.pos.column});
    }
    PlanStep step;
    step.line = line_no;
    for (std::size_t i = 0; i < e.items.size(); ++i) {
      if (e.items[i].is_list) throw PddlError(ErrorKind::syntax, "nested list in plan step", {line_no, e.items[i].pos.column});
      (i == 0 ? step.name : step.args.emplace_back()) = e.items[i].atom;
    }
    plan.push_back(std::move(step));
    if (end == text.size()) break;
  }
  return plan;
}

std::string to_pddl(const DomainDef& d) {
  std::string out = "(define (domain " + d.name + ")\n";
  if (!d.requirements.empty()) {
    out += "  (:requirements";
    for (const auto& r : d.requirements) out += " " + r;
    out += ")\n";
  }
  if (!d.types.empty()) {
    out += "  (:types ";
    std::vector<std::pair<std::string, std::string>> items;
    for (const auto& t : d.types) items.emplace_back(t.name, t.parent);
    append_typed(out, items, false);
    out += ")\n";
  }
  if (!d.constants.empty()) {
    out += "  (:constants ";
    append_typed(out, d.constants, false);
    out += ")\n";
  }
  out += "  (:predicates";
  for (const auto& p : d.predicates) {
    out += "\n    (" + p.name;
    if (!p.params.empty()) {
      out += ' ';
      std::vector<std::pair<std::string, std::string>> items;
      for (const auto& q : p.params) items.emplace_back(q.name, q.type);
      append_typed(out, items, true);
    }
    out += ")";
  }
  out += ")\n";
  for (const auto& a : d.actions) {
    out += "  (:action " + a.name + "\n    :parameters (";
    std::vector<std::pair<std::string, std::string>> items;
    for (const auto& q : a.params) items.emplace_back(q.name, q.type);
    append_typed(out, items, true);
    out += ")\n    :precondition " + conjunction(a.pre_pos, a.pre_neg, a.params);
    out += "\n    :effect " + conjunction(a.add, a.del, a.params) + ")\n";
  }
  out += ")\n";
  return out;
}

std::string to_pddl(const ProblemDef& p) {
  std::string out = "(define (problem " + p.name + ")\n  (:domain " + p.domain_name + ")\n  (:objects";
  for (std::size_t i = 0; i < p.objects.size(); ++i) {
    bool run_start = i == 0 || p.objects[i - 1].second != p.objects[i].second;
    if (run_start) out += "\n    ";
    else out += ' ';
    out += p.objects[i].first;
    bool run_end = i + 1 == p.objects.size() || p.objects[i + 1].second != p.objects[i].second;
    if (run_end) out += " - " + p.objects[i].second;
  }
  out += ")\n  (:init";
  for (const auto& a : p.init) out += "\n    " + a.text();
  out += ")\n  (:goal (and";
  for (const auto& g : p.goal_pos) out += "\n    " + g.text();
  for (const auto& g : p.goal_neg) out += "\n    (not " + g.text() + ")";
  out += ")))\n";
  return out;
}

std::string to_text(const Plan& plan) {
  std::string out;
  for (const auto& s : plan) out += s.text() + "\n";
  return out;
}

}  // namespace vp::pddl
