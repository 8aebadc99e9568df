#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vplan/pddl/types.hpp"
#include "vplan/proposer/chat.hpp"

namespace vp::nl {

class NlError : public std::runtime_error {
 public:
  enum class Kind { uncovered_symbol, unresolvable_action, unresolvable_fact, bad_table, model_output };
  NlError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

enum class Mode { template_, prompt };

// Sentence patterns for one domain, read from `domains/<id>/phrases.txt`:
//
//   type block: block
//   pred on: {0} is on {1}
//   action stack: stack {0} on top of {1}
//
// A slot {i} renders as "<type noun> <identifier>", e.g. "block b1".
class PhraseTable {
 public:
  static PhraseTable parse(std::string_view text);
  // Embedded table of a corpus domain. Throws NlError(bad_table) if absent.
  static const PhraseTable& for_domain(std::string_view domain_name);

  const std::string* noun(std::string_view type) const;
  const std::string* predicate(std::string_view name) const;
  const std::string* action(std::string_view name) const;
  const std::map<std::string, std::string, std::less<>>& actions() const { return actions_; }

 private:
  std::map<std::string, std::string, std::less<>> nouns_, predicates_, actions_;
};

// Throws NlError(uncovered_symbol) if the table misses a type, predicate or
// action of the domain.
void check_coverage(const pddl::DomainDef& domain, const PhraseTable& table);

std::string domain_to_nl(const pddl::DomainDef& domain, const PhraseTable& table);
std::string instance_to_nl(const pddl::DomainDef& domain, const pddl::ProblemDef& problem, const PhraseTable& table);

// Prompt mode: few-shot prompt assembled from the shipped fixtures, answered
// by `model`; the reply is returned verbatim.
std::string domain_to_nl(const pddl::DomainDef& domain, const proposer::ModelFn& model);
std::string instance_to_nl(const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                           const proposer::ModelFn& model);

std::string fact_to_nl(const pddl::GroundAtom& atom, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                       const PhraseTable& table);
pddl::GroundAtom fact_from_nl(std::string_view sentence, const pddl::DomainDef& domain,
                              const pddl::ProblemDef& problem, const PhraseTable& table);

// One sentence per fluent fact, sorted by canonical atom; static facts are
// stated once in the instance text and omitted here.
std::string state_to_nl(const pddl::State& state, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                        const PhraseTable& table);
// Inverse of state_to_nl; the problem's static facts are added back.
pddl::State state_from_nl(std::string_view text, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                          const PhraseTable& table);

std::string action_to_nl(std::string_view name, std::span<const std::string> args, const pddl::DomainDef& domain,
                         const pddl::ProblemDef& problem, const PhraseTable& table);
// Throws NlError(unresolvable_action).
pddl::PlanStep action_from_nl(std::string_view text, const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                              const PhraseTable& table);

// Lowercased, whitespace-collapsed, trailing period removed.
std::string canonical_action_text(std::string_view text);

// Template mode: inverts each action text; returns VAL-style plan text.
std::string plan_to_pddl(std::span<const std::string> action_texts, const pddl::DomainDef& domain,
                         const pddl::ProblemDef& problem, const PhraseTable& table);
// Prompt mode: one-shot prompt with the shipped plan exemplar; the reply must
// parse as a plan whose steps resolve against the problem, else
// NlError(model_output).
std::string plan_to_pddl(std::span<const std::string> action_texts, const pddl::DomainDef& domain,
                         const pddl::ProblemDef& problem, const proposer::ModelFn& model);

}  // namespace vp::nl
