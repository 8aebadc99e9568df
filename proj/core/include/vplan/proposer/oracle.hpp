#pragma once

#include <memory>

#include "vplan/nl/bridge.hpp"
#include "vplan/pddl/types.hpp"
#include "vplan/proposer/proposer.hpp"
#include "vplan/sim/fault.hpp"
#include "vplan/sim/search.hpp"
#include "vplan/sim/task.hpp"

namespace vp::proposer {

// Simulator-backed proposer for one problem. Answers come from the
// compiled task and a goal-distance oracle; the fault model corrupts them
// at seeded, reproducible points.
class OracleProposer : public Proposer {
 public:
  OracleProposer(pddl::DomainDef domain, pddl::ProblemDef problem, sim::FaultModel faults = {},
                 sim::OracleOptions options = {});
  // Shares a distance oracle built elsewhere for the same problem.
  OracleProposer(std::shared_ptr<const sim::DistanceOracle> oracle, sim::FaultModel faults = {});

  const pddl::DomainDef& domain() const { return task().domain(); }
  const pddl::ProblemDef& problem() const { return task().problem(); }
  const sim::Task& task() const { return oracle_->task(); }
  const nl::PhraseTable& phrases() const { return *phrases_; }
  const sim::DistanceOracle& oracle() const { return *oracle_; }
  const sim::FaultModel& faults() const { return faults_; }

  // Sample i of the bootstrap: the default style with its colors rotated
  // by i through the palette.
  std::string propose_domain_schema(const CallTag& tag, const std::string& domain_nl,
                                    const std::string& state_text) override;
  // Fewest violations, then fewest relation hops, then index.
  std::vector<std::size_t> rank_diagrams(const CallTag& tag, const std::string& domain_nl,
                                         const std::vector<diagram::DiagramSchema>& candidates) override;

  // Successors ordered by goal distance (ties by grounding order), perturbed
  // by ranking noise, then rotated by the sample index. An invalid-action
  // fault swaps in an inapplicable action with its would-be result.
  ActionProposal propose_action(const CallTag& tag, const NodeBundle& node, const NodeBundle& goal,
                                const std::vector<std::string>& tried_actions) override;
  std::string make_schema(const CallTag& tag, const std::string& state_text, const std::string& action_text,
                          const diagram::StyleMap& style) override;
  std::string make_code(const CallTag& tag, const std::string& schema_text, const std::string& reference_code) override;
  // Compares object ids and relation facts against the schema drawn from
  // the described state.
  Verdict reflect_schema(const CallTag& tag, const std::string& schema_text, const std::string& state_text,
                         const std::string& action_text) override;
  Verdict verify_local(const CallTag& tag, const NodeBundle& parent, const NodeBundle& child,
                       const std::string& action_text) override;
  // Replays the path from the initial state; rejects it when the last step
  // neither lowers the goal distance nor avoids revisiting a state.
  Verdict verify_global(const CallTag& tag, const std::vector<std::string>& path, const NodeBundle& initial,
                        const NodeBundle& goal) override;
  bool check_goal(const CallTag& tag, const NodeBundle& node, const NodeBundle& goal) override;
  // Ascending goal distance, ties by node id, then one pass of seeded
  // adjacent swaps.
  std::vector<std::size_t> rank_states(const CallTag& tag, const std::vector<NodeBundle>& candidates,
                                       const NodeBundle& goal) override;

  // Template-mode text of a state of this problem.
  std::string state_text(const pddl::State& state) const;
  // Throws ProposerError(bad_input) when the text does not describe a state.
  pddl::State parse_state(std::string_view text) const;

 private:
  std::optional<int> distance(const pddl::State& state) const;
  void shuffle_adjacent(std::vector<std::size_t>& order, std::uint64_t key) const;

  std::shared_ptr<const sim::DistanceOracle> oracle_;
  const nl::PhraseTable* phrases_;
  sim::FaultModel faults_;
};

}  // namespace vp::proposer
