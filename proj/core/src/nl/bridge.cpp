#include "vplan/nl/bridge.hpp"

#include <algorithm>
#include <mutex>
#include <optional>
#include <sstream>

#include "vplan/pddl/error.hpp"
#include "vplan/pddl/parser.hpp"
#include "vplan/pddl/semantics.hpp"
#include "vplan/proposer/templates.hpp"
#include "vplan/resources.hpp"

namespace vp::nl {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(std::move(w));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Element {
  bool slot = false;
  bool bare = false;
  std::size_t index = 0;
  std::string word;
};

std::vector<Element> compile(std::string_view pattern) {
  std::vector<Element> out;
  for (const auto& w : words(pattern)) {
    bool braces = w.size() >= 3 && w.front() == '{' && w.back() == '}';
    bool brackets = w.size() >= 3 && w.front() == '[' && w.back() == ']';
    if (braces || brackets) {
      std::string digits = w.substr(1, w.size() - 2);
      if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        out.push_back({true, brackets, static_cast<std::size_t>(std::stoul(digits)), {}});
        continue;
      }
    }
    out.push_back({false, false, 0, w});
  }
  return out;
}

std::optional<std::string> type_of(const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                                   std::string_view object) {
  if (auto t = problem.object_type(object)) return t;
  for (const auto& [name, type] : domain.constants) {
    if (name == object) return type;
  }
  return std::nullopt;
}

std::string noun_for(const pddl::DomainDef& domain, const PhraseTable& table, std::string type) {
  for (std::size_t guard = 0; guard <= domain.types.size() + 1; ++guard) {
    if (const std::string* n = table.noun(type)) return *n;
    auto it = std::find_if(domain.types.begin(), domain.types.end(), [&](const auto& t) { return t.name == type; });
    if (it == domain.types.end()) break;
    type = it->parent;
  }
  throw NlError(NlError::Kind::uncovered_symbol, "no noun for type '" + type + "'");
}

std::string mention(const pddl::DomainDef& domain, const pddl::ProblemDef& problem, const PhraseTable& table,
                    const std::string& object) {
  auto type = type_of(domain, problem, object);
  if (!type) throw NlError(NlError::Kind::uncovered_symbol, "unknown object '" + object + "'");
  return noun_for(domain, table, *type) + " " + object;
}

std::string expand(std::string_view pattern, std::span<const std::string> args, const pddl::DomainDef& domain,
                   const pddl::ProblemDef* problem, const PhraseTable& table,
                   const std::vector<pddl::Parameter>* params = nullptr) {
  std::string out;
  for (const auto& e : compile(pattern)) {
    if (!out.empty()) out += ' ';
    if (!e.slot) {
      out += e.word;
      continue;
    }
    if (e.index >= args.size()) throw NlError(NlError::Kind::bad_table, "slot out of range in '" + std::string(pattern) + "'");
    if (e.bare) {
      out += args[e.index];
    } else if (params) {
      // Schema text: the parameter's declared type names the noun.
      out += noun_for(domain, table, (*params)[e.index].type) + " " + args[e.index];
    } else {
      out += mention(domain, *problem, table, args[e.index]);
    }
  }
  return out;
}

// Matches `tokens` against a compiled pattern; a {i} slot takes an optional
// noun phrase followed by a declared object name.
class Matcher {
 public:
  Matcher(const std::vector<Element>& pattern, const std::vector<std::string>& tokens,
          const std::vector<std::vector<std::string>>& nouns, const pddl::DomainDef& domain,
          const pddl::ProblemDef& problem)
      : pattern_(pattern), tokens_(tokens), nouns_(nouns), domain_(domain), problem_(problem) {}

  std::optional<std::vector<std::string>> run(std::size_t arity) {
    bound_.assign(arity, {});
    if (!step(0, 0)) return std::nullopt;
    if (std::any_of(bound_.begin(), bound_.end(), [](const std::string& s) { return s.empty(); })) return std::nullopt;
    return bound_;
  }

 private:
  bool bind_and_continue(std::size_t ei, std::size_t ti) {
    const Element& e = pattern_[ei];
    const std::string& id = tokens_[ti];
    if (!type_of(domain_, problem_, id)) return false;
    if (e.index >= bound_.size()) return false;
    std::string saved = bound_[e.index];
    if (!saved.empty() && saved != id) return false;
    bound_[e.index] = id;
    if (step(ei + 1, ti + 1)) return true;
    bound_[e.index] = saved;
    return false;
  }

  bool step(std::size_t ei, std::size_t ti) {
    if (ei == pattern_.size()) return ti == tokens_.size();
    if (ti >= tokens_.size()) return false;
    const Element& e = pattern_[ei];
    if (!e.slot) return tokens_[ti] == e.word && step(ei + 1, ti + 1);
    if (!e.bare) {
      for (const auto& noun : nouns_) {
        if (ti + noun.size() >= tokens_.size()) continue;
        if (!std::equal(noun.begin(), noun.end(), tokens_.begin() + static_cast<std::ptrdiff_t>(ti))) continue;
        if (bind_and_continue(ei, ti + noun.size())) return true;
      }
    }
    return bind_and_continue(ei, ti);
  }

  const std::vector<Element>& pattern_;
  const std::vector<std::string>& tokens_;
  const std::vector<std::vector<std::string>>& nouns_;
  const pddl::DomainDef& domain_;
  const pddl::ProblemDef& problem_;
  std::vector<std::string> bound_;
};

std::vector<std::vector<std::string>> noun_words(const pddl::DomainDef& domain, const PhraseTable& table) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> types{std::string(pddl::kRootType)};
  for (const auto& t : domain.types) types.push_back(t.name);
  for (const auto& t : types) {
    if (const std::string* n = table.noun(t)) out.push_back(words(*n));
  }
  // Longer nouns first so "slow elevator" wins over "elevator".
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

std::vector<std::string> sentence_tokens(std::string_view text) {
  std::string s = lower(trim(text));
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return words(s);
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

bool is_static(const std::vector<std::string>& statics, const std::string& p) {
  return std::find(statics.begin(), statics.end(), p) != statics.end();
}

std::string load_fixture(const std::string& path) {
  auto text = resources::find(path);
  if (!text) throw NlError(NlError::Kind::bad_table, "missing fixture " + path);
  return std::string(*text);
}

}  // namespace

PhraseTable PhraseTable::parse(std::string_view text) {
  PhraseTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto colon = s.find(':');
    auto space = s.find(' ');
    if (colon == std::string::npos || space == std::string::npos || space > colon) {
      throw NlError(NlError::Kind::bad_table, "phrase table line " + std::to_string(line_no) + ": expected '<kind> <name>: <pattern>'");
    }
    std::string kind = s.substr(0, space);
    std::string name = trim(s.substr(space + 1, colon - space - 1));
    std::string pattern = lower(trim(s.substr(colon + 1)));
    auto* target = kind == "type" ? &t.nouns_ : kind == "pred" ? &t.predicates_ : kind == "action" ? &t.actions_ : nullptr;
    if (!target) throw NlError(NlError::Kind::bad_table, "phrase table line " + std::to_string(line_no) + ": unknown kind '" + kind + "'");
    if (!target->emplace(name, pattern).second)
      throw NlError(NlError::Kind::bad_table, "phrase table line " + std::to_string(line_no) + ": duplicate entry '" + name + "'");
  }
  return t;
}

const PhraseTable& PhraseTable::for_domain(std::string_view domain_name) {
  static std::mutex mutex;
  static std::map<std::string, PhraseTable, std::less<>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(domain_name);
  if (it != cache.end()) return it->second;
  auto text = resources::find("domains/" + std::string(domain_name) + "/phrases.txt");
  if (!text) throw NlError(NlError::Kind::bad_table, "no phrase table for domain '" + std::string(domain_name) + "'");
  return cache.emplace(std::string(domain_name), parse(*text)).first->second;
}

const std::string* PhraseTable::noun(std::string_view type) const {
  auto it = nouns_.find(type);
  return it == nouns_.end() ? nullptr : &it->second;
}

const std::string* PhraseTable::predicate(std::string_view name) const {
  auto it = predicates_.find(name);
  return it == predicates_.end() ? nullptr : &it->second;
}

const std::string* PhraseTable::action(std::string_view name) const {
  auto it = actions_.find(name);
  return it == actions_.end() ? nullptr : &it->second;
}

void check_coverage(const pddl::DomainDef& domain, const PhraseTable& table) {
  for (const auto& t : domain.types) noun_for(domain, table, t.name);
  for (const auto& p : domain.predicates) {
    if (!table.predicate(p.name)) throw NlError(NlError::Kind::uncovered_symbol, "no pattern for predicate '" + p.name + "'");
  }
  for (const auto& a : domain.actions) {
    if (!table.action(a.name)) throw NlError(NlError::Kind::uncovered_symbol, "no pattern for action '" + a.name + "'");
  }
}

std::string domain_to_nl(const pddl::DomainDef& domain, const PhraseTable& table) {
  check_coverage(domain, table);
  std::string out = "Domain " + domain.name + ".\n";
  if (!domain.types.empty()) {
    out += "Object kinds:";
    for (std::size_t i = 0; i < domain.types.size(); ++i) {
      out += (i ? ", " : " ") + noun_for(domain, table, domain.types[i].name);
    }
    out += ".\n";
  }
  for (const auto& a : domain.actions) {
    std::vector<std::string> vars;
    for (const auto& p : a.params) vars.push_back("?" + p.name);
    auto render = [&](const pddl::AtomTemplate& t) {
      std::vector<std::string> args;
      std::vector<pddl::Parameter> params;
      for (const auto& term : t.args) {
        if (term.is_param()) {
          args.push_back(vars[static_cast<std::size_t>(term.param)]);
          params.push_back(a.params[static_cast<std::size_t>(term.param)]);
        } else {
          args.push_back(term.constant);
          params.push_back({term.constant, *type_of(domain, {}, term.constant)});
        }
      }
      const auto* pred = domain.find_predicate(t.predicate);
      for (std::size_t i = 0; i < params.size(); ++i) params[i].type = pred->params[i].type;
      return expand(*table.predicate(t.predicate), args, domain, nullptr, table, &params);
    };
    auto list = [&](const std::vector<pddl::AtomTemplate>& pos, const std::vector<pddl::AtomTemplate>& neg,
                    const char* negation) {
      std::vector<std::string> parts;
      for (const auto& t : pos) parts.push_back(render(t));
      for (const auto& t : neg) parts.push_back(negation + render(t));
      if (parts.empty()) return std::string("none");
      std::string s;
      for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "; " : "") + parts[i];
      return s;
    };
    out += "\nAction: " + capitalize(expand(*table.action(a.name), vars, domain, nullptr, table, &a.params)) + ".\n";
    out += "Requires: " + list(a.pre_pos, a.pre_neg, "it is not the case that ") + ".\n";
    out += "Afterwards: " + list(a.add, {}, "") + ".\n";
    out += "No longer true: " + list(a.del, {}, "") + ".\n";
  }
  return out;
}

std::string fact_to_nl(const pddl::GroundAtom& atom, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                       const PhraseTable& table) {
  const std::string* pattern = table.predicate(atom.predicate);
  if (!pattern) throw NlError(NlError::Kind::uncovered_symbol, "no pattern for predicate '" + atom.predicate + "'");
  return expand(*pattern, atom.args, domain, &problem, table);
}

pddl::GroundAtom fact_from_nl(std::string_view sentence, const pddl::DomainDef& domain,
                              const pddl::ProblemDef& problem, const PhraseTable& table) {
  auto tokens = sentence_tokens(sentence);
  auto nouns = noun_words(domain, table);
  for (const auto& p : domain.predicates) {
    const std::string* pattern = table.predicate(p.name);
    if (!pattern) continue;
    auto compiled = compile(*pattern);
    auto args = Matcher(compiled, tokens, nouns, domain, problem).run(p.params.size());
    if (!args) continue;
    bool typed = true;
    for (std::size_t i = 0; i < args->size(); ++i) {
      typed = typed && domain.is_subtype(*type_of(domain, problem, (*args)[i]), p.params[i].type);
    }
    if (typed) return {p.name, *args};
  }
  throw NlError(NlError::Kind::unresolvable_fact, "cannot read fact: " + std::string(sentence));
}

std::string state_to_nl(const pddl::State& state, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                        const PhraseTable& table) {
  auto statics = domain.static_predicates();
  std::string out;
  for (const auto& a : state) {
    if (is_static(statics, a.predicate)) continue;
    out += fact_to_nl(a, domain, problem, table) + ".\n";
  }
  return out;
}

pddl::State state_from_nl(std::string_view text, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                          const PhraseTable& table) {
  auto statics = domain.static_predicates();
  std::vector<pddl::GroundAtom> atoms;
  for (const auto& a : problem.init) {
    if (is_static(statics, a.predicate)) atoms.push_back(a);
  }
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto atom = fact_from_nl(line, domain, problem, table);
    if (!is_static(statics, atom.predicate)) atoms.push_back(std::move(atom));
  }
  return pddl::State(std::move(atoms));
}

std::string instance_to_nl(const pddl::DomainDef& domain, const pddl::ProblemDef& problem, const PhraseTable& table) {
  check_coverage(domain, table);
  auto statics = domain.static_predicates();
  std::vector<std::string> objects;
  for (const auto& [name, type] : problem.objects) objects.push_back(noun_for(domain, table, type) + " " + name);
  std::string out = "Problem " + problem.name + " in domain " + domain.name + ".\n";
  out += "Objects: ";
  for (std::size_t i = 0; i < objects.size(); ++i) out += (i ? ", " : "") + objects[i];
  out += objects.empty() ? "none.\n" : ".\n";

  std::string fixed, initial;
  for (const auto& a : problem.init) {
    std::string line = fact_to_nl(a, domain, problem, table) + ".\n";
    (is_static(statics, a.predicate) ? fixed : initial) += line;
  }
  if (!fixed.empty()) out += "\nFixed facts:\n" + fixed;
  out += "\nInitial state:\n" + (initial.empty() ? std::string("Nothing holds.\n") : initial);
  out += "\nGoal:\n";
  if (problem.goal_pos.empty() && problem.goal_neg.empty()) {
    out += "The goal is trivially satisfied.\n";
  } else {
    for (const auto& g : problem.goal_pos) out += fact_to_nl(g, domain, problem, table) + ".\n";
    for (const auto& g : problem.goal_neg) out += "It is not the case that " + fact_to_nl(g, domain, problem, table) + ".\n";
  }
  return out;
}

std::string action_to_nl(std::string_view name, std::span<const std::string> args, const pddl::DomainDef& domain,
                         const pddl::ProblemDef& problem, const PhraseTable& table) {
  const std::string* pattern = table.action(name);
  if (!pattern) throw NlError(NlError::Kind::uncovered_symbol, "no pattern for action '" + std::string(name) + "'");
  return expand(*pattern, args, domain, &problem, table);
}

pddl::PlanStep action_from_nl(std::string_view text, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                              const PhraseTable& table) {
  auto tokens = sentence_tokens(text);
  auto nouns = noun_words(domain, table);
  for (const auto& a : domain.actions) {
    const std::string* pattern = table.action(a.name);
    if (!pattern) continue;
    auto compiled = compile(*pattern);
    auto args = Matcher(compiled, tokens, nouns, domain, problem).run(a.params.size());
    if (!args) continue;
    try {
      pddl::instantiate(domain, problem, a, *args);
    } catch (const pddl::PddlError&) {
      continue;
    }
    return {a.name, *args, 0};
  }
  throw NlError(NlError::Kind::unresolvable_action, "cannot resolve action: " + std::string(text));
}

std::string canonical_action_text(std::string_view text) {
  auto tokens = sentence_tokens(text);
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
  return out;
}

std::string plan_to_pddl(std::span<const std::string> action_texts, const pddl::DomainDef& domain,
                         const pddl::ProblemDef& problem, const PhraseTable& table) {
  pddl::Plan plan;
  for (const auto& t : action_texts) plan.push_back(action_from_nl(t, domain, problem, table));
  return pddl::to_text(plan);
}

std::string domain_to_nl(const pddl::DomainDef& domain, const proposer::ModelFn& model) {
  // Five shots: every corpus domain except the one being translated.
  std::string shots;
  int count = 0;
  for (auto path : resources::list("prompts/fewshot/domain-")) {
    std::string id(path.substr(std::string_view("prompts/fewshot/domain-").size()));
    id = id.substr(0, id.find('.'));
    if (id == domain.name || count == 5) continue;
    auto pddl_text = resources::find("domains/" + id + "/domain.pddl");
    if (!pddl_text) continue;
    shots += "Example domain:\n\n" + std::string(*pddl_text) + "\nTranslation:\n\n" + load_fixture(std::string(path)) + "\n";
    ++count;
  }
  const auto& tmpl = proposer::TemplateSet::builtin().get("nl_domain");
  return model(tmpl.render({{"examples", shots}, {"domain_pddl", pddl::to_pddl(domain)}}), 0.0);
}

std::string instance_to_nl(const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                           const proposer::ModelFn& model) {
  const auto& tmpl = proposer::TemplateSet::builtin().get("nl_instance");
  return model(tmpl.render({{"example", load_fixture("prompts/fewshot/instance.txt")},
                            {"domain_pddl", pddl::to_pddl(domain)},
                            {"problem_pddl", pddl::to_pddl(problem)}}),
               0.0);
}

std::string plan_to_pddl(std::span<const std::string> action_texts, const pddl::DomainDef& domain,
                         const pddl::ProblemDef& problem, const proposer::ModelFn& model) {
  std::string actions;
  for (const auto& t : action_texts) actions += t + "\n";
  const auto& tmpl = proposer::TemplateSet::builtin().get("nl_plan");
  std::string reply = model(tmpl.render({{"example", load_fixture("prompts/fewshot/plan.txt")},
                                         {"domain_pddl", pddl::to_pddl(domain)},
                                         {"problem_pddl", pddl::to_pddl(problem)},
                                         {"actions", actions}}),
                            0.0);
  try {
    pddl::Plan plan = pddl::parse_plan(reply);
    for (const auto& step : plan) pddl::resolve(domain, problem, step);
    return pddl::to_text(plan);
  } catch (const pddl::PddlError& e) {
    throw NlError(NlError::Kind::model_output, std::string("model plan does not parse: ") + e.what());
  }
}

}  // namespace vp::nl
