#include "vplan/pddl/semantics.hpp"

#include <algorithm>
#include <set>

#include "vplan/pddl/error.hpp"

namespace vp::pddl {

namespace {

GroundAtom bind_atom(const AtomTemplate& t, std::span<const std::string> args) {
  GroundAtom atom{t.predicate, {}};
  atom.args.reserve(t.args.size());
  for (const auto& term : t.args) {
    atom.args.push_back(term.is_param() ? args[static_cast<std::size_t>(term.param)] : term.constant);
  }
  return atom;
}

std::vector<GroundAtom> bind_all(const std::vector<AtomTemplate>& ts, std::span<const std::string> args) {
  std::vector<GroundAtom> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(bind_atom(t, args));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GroundAction make_ground(const ActionSchema& schema, std::span<const std::string> args) {
  GroundAction g;
  g.name = schema.name;
  g.args.assign(args.begin(), args.end());
  g.pre_pos = bind_all(schema.pre_pos, args);
  g.pre_neg = bind_all(schema.pre_neg, args);
  g.add = bind_all(schema.add, args);
  g.del = bind_all(schema.del, args);
  return g;
}

int max_param(const AtomTemplate& t) {
  int m = -1;
  for (const auto& a : t.args) m = std::max(m, a.param);
  return m;
}

class Binder {
 public:
  Binder(const ActionSchema& schema, std::vector<std::vector<std::string>> domains,
         const std::set<std::string>& statics, const State* init, std::vector<GroundAction>& out)
      : schema_(schema), domains_(std::move(domains)), init_(init), out_(out) {
    checks_.resize(schema.params.size());
    if (init_) {
      for (const auto& t : schema.pre_pos) {
        if (!statics.count(t.predicate)) continue;
        int m = max_param(t);
        if (m >= 0) checks_[static_cast<std::size_t>(m)].push_back({&t, true});
      }
      for (const auto& t : schema.pre_neg) {
        if (!statics.count(t.predicate)) continue;
        int m = max_param(t);
        if (m >= 0) checks_[static_cast<std::size_t>(m)].push_back({&t, false});
      }
      // Parameter-free static preconditions decide the whole schema.
      std::vector<std::string> none;
      for (const auto& t : schema.pre_pos) {
        if (statics.count(t.predicate) && max_param(t) < 0 && !init_->contains(bind_atom(t, none))) dead_ = true;
      }
      for (const auto& t : schema.pre_neg) {
        if (statics.count(t.predicate) && max_param(t) < 0 && init_->contains(bind_atom(t, none))) dead_ = true;
      }
    }
    args_.resize(schema.params.size());
  }

  void run() {
    if (!dead_) recurse(0);
  }

 private:
  struct Check {
    const AtomTemplate* atom;
    bool positive;
  };

  void recurse(std::size_t i) {
    if (i == args_.size()) {
      out_.push_back(make_ground(schema_, args_));
      return;
    }
    for (const auto& obj : domains_[i]) {
      args_[i] = obj;
      bool ok = true;
      for (const auto& c : checks_[i]) {
        if (init_->contains(bind_atom(*c.atom, args_)) != c.positive) {
          ok = false;
          break;
        }
      }
      if (ok) recurse(i + 1);
    }
  }

  const ActionSchema& schema_;
  std::vector<std::vector<std::string>> domains_;
  const State* init_;
  std::vector<GroundAction>& out_;
  std::vector<std::vector<Check>> checks_;
  std::vector<std::string> args_;
  bool dead_ = false;
};

}  // namespace

std::vector<GroundAction> ground(const DomainDef& domain, const ProblemDef& problem, GroundingMode mode) {
  std::vector<const ActionSchema*> schemas;
  for (const auto& a : domain.actions) schemas.push_back(&a);
  std::sort(schemas.begin(), schemas.end(),
            [](const ActionSchema* x, const ActionSchema* y) { return x->name < y->name; });
  std::set<std::string> statics;
  if (mode == GroundingMode::static_pruned) {
    for (auto& s : domain.static_predicates()) statics.insert(std::move(s));
  }
  std::vector<GroundAction> out;
  for (const ActionSchema* schema : schemas) {
    std::vector<std::vector<std::string>> domains;
    for (const auto& p : schema->params) domains.push_back(problem.objects_of(domain, p.type));
    Binder(*schema, std::move(domains), statics,
           mode == GroundingMode::static_pruned ? &problem.init : nullptr, out)
        .run();
  }
  return out;
}

GroundAction instantiate(const DomainDef& domain, const ProblemDef& problem, const ActionSchema& schema,
                         std::span<const std::string> args) {
  if (args.size() != schema.params.size()) {
    throw PddlError(ErrorKind::arity_mismatch, "action '" + schema.name + "' takes " +
                                                   std::to_string(schema.params.size()) + " arguments, got " +
                                                   std::to_string(args.size()));
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::optional<std::string> type = problem.object_type(args[i]);
    if (!type) {
      auto it = std::find_if(domain.constants.begin(), domain.constants.end(),
                             [&](const auto& c) { return c.first == args[i]; });
      if (it != domain.constants.end()) type = it->second;
    }
    if (!type) throw PddlError(ErrorKind::unknown_object, "object '" + args[i] + "' is not declared");
    if (!domain.is_subtype(*type, schema.params[i].type)) {
      throw PddlError(ErrorKind::type_mismatch, "argument " + std::to_string(i + 1) + " of '" + schema.name +
                                                    "' must be a " + schema.params[i].type + ", '" + args[i] +
                                                    "' is a " + *type);
    }
  }
  return make_ground(schema, args);
}

GroundAction resolve(const DomainDef& domain, const ProblemDef& problem, const PlanStep& step) {
  const ActionSchema* schema = domain.find_action(step.name);
  if (!schema) throw PddlError(ErrorKind::unknown_action, "action '" + step.name + "' is not defined");
  return instantiate(domain, problem, *schema, step.args);
}

bool applicable(const State& state, const GroundAction& action) {
  for (const auto& a : action.pre_pos) {
    if (!state.contains(a)) return false;
  }
  for (const auto& a : action.pre_neg) {
    if (state.contains(a)) return false;
  }
  return true;
}

State apply(const State& state, const GroundAction& action) {
  if (!applicable(state, action)) {
    throw PddlError(ErrorKind::inapplicable_action, action.text() + " is not applicable");
  }
  return apply_unchecked(state, action);
}

State apply_unchecked(const State& state, const GroundAction& action) {
  std::vector<GroundAtom> next;
  next.reserve(state.size() + action.add.size());
  // Both sides are sorted, so a merge keeps this linear.
  std::set_difference(state.begin(), state.end(), action.del.begin(), action.del.end(), std::back_inserter(next));
  std::vector<GroundAtom> merged;
  merged.reserve(next.size() + action.add.size());
  std::set_union(next.begin(), next.end(), action.add.begin(), action.add.end(), std::back_inserter(merged));
  return State(std::move(merged));
}

}  // namespace vp::pddl
