#include "vplan/pddl/types.hpp"

#include <algorithm>
#include <set>

namespace vp::pddl {

namespace {

std::string paren_text(const std::string& head, const std::vector<std::string>& args) {
  std::string out = "(" + head;
  for (const auto& a : args) {
    out += ' ';
    out += a;
  }
  out += ')';
  return out;
}

}  // namespace

const PredicateDecl* DomainDef::find_predicate(std::string_view n) const {
  for (const auto& p : predicates) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

const ActionSchema* DomainDef::find_action(std::string_view n) const {
  for (const auto& a : actions) {
    if (a.name == n) return &a;
  }
  return nullptr;
}

bool DomainDef::has_type(std::string_view type) const {
  if (type == kRootType) return true;
  return std::any_of(types.begin(), types.end(), [&](const TypeDecl& t) { return t.name == type; });
}

bool DomainDef::is_subtype(std::string_view type, std::string_view ancestor) const {
  if (ancestor == kRootType) return true;
  std::string_view cur = type;
  // Bounded walk guards against a malformed cyclic hierarchy.
  for (std::size_t steps = 0; steps <= types.size(); ++steps) {
    if (cur == ancestor) return true;
    auto it = std::find_if(types.begin(), types.end(), [&](const TypeDecl& t) { return t.name == cur; });
    if (it == types.end()) return false;
    cur = it->parent;
  }
  return false;
}

std::vector<std::string> DomainDef::static_predicates() const {
  std::set<std::string> fluent;
  for (const auto& a : actions) {
    for (const auto& t : a.add) fluent.insert(t.predicate);
    for (const auto& t : a.del) fluent.insert(t.predicate);
  }
  std::vector<std::string> out;
  for (const auto& p : predicates) {
    if (!fluent.count(p.name)) out.push_back(p.name);
  }
  return out;
}

std::string GroundAtom::text() const { return paren_text(predicate, args); }

State::State(std::vector<GroundAtom> atoms) : atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end());
  atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

bool State::contains(const GroundAtom& atom) const {
  return std::binary_search(atoms_.begin(), atoms_.end(), atom);
}

std::string State::text() const {
  std::string out;
  for (const auto& a : atoms_) {
    out += a.text();
    out += '\n';
  }
  return out;
}

std::string GroundAction::text() const { return paren_text(name, args); }

std::string PlanStep::text() const { return paren_text(name, args); }

std::optional<std::string> ProblemDef::object_type(std::string_view n) const {
  for (const auto& [name, type] : objects) {
    if (name == n) return type;
  }
  return std::nullopt;
}

std::vector<std::string> ProblemDef::objects_of(const DomainDef& domain, std::string_view type) const {
  std::vector<std::string> out;
  for (const auto& [name, t] : objects) {
    if (domain.is_subtype(t, type)) out.push_back(name);
  }
  for (const auto& [name, t] : domain.constants) {
    if (domain.is_subtype(t, type)) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool ProblemDef::goal_satisfied(const State& state) const {
  for (const auto& g : goal_pos) {
    if (!state.contains(g)) return false;
  }
  for (const auto& g : goal_neg) {
    if (state.contains(g)) return false;
  }
  return true;
}

}  // namespace vp::pddl
