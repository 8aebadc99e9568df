#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vplan/diagram/render.hpp"
#include "vplan/diagram/schema.hpp"
#include "vplan/diagram/style.hpp"
#include "vplan/pddl/types.hpp"
#include "vplan/proposer/proposer.hpp"

namespace vp::search {

class SearchError : public std::runtime_error {
 public:
  enum class Kind { all_candidates_invalid, schema_failure, bad_config };
  SearchError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

enum class NodeStatus { candidate, validated, invalid, exhausted, goal };

std::string_view to_string(NodeStatus status);

struct SearchNode {
  std::uint64_t id = 0;
  int depth = 0;
  std::optional<std::uint64_t> parent;
  std::optional<std::string> action;  // from the parent
  std::string state_text;
  std::optional<diagram::DiagramSchema> schema;
  diagram::RenderedDiagram diagram;
  NodeStatus status = NodeStatus::candidate;
  std::uint32_t sample_index = 0;
  std::vector<std::string> notes;  // verdicts and failures, in order
  int rank = -1;                   // position in its depth's ranking
  bool frontier = false;
  int expansions = 0;
};

struct Ablations {
  bool no_diagram = false;
  bool no_schema = false;
  bool code_as_context = false;
  bool no_beam = false;
  bool no_backtrack = false;
};

struct SearchConfig {
  int n = 4;  // children sampled per parent
  int k = 4;  // beam width
  int B = 2;  // backtrack attempts per depth
  int max_states = 450;
  int max_depth = 100;
  int schema_retries = 3;
  int code_retries = 3;
  int workers = 1;
  Ablations ablations;
  std::uint64_t seed = 0;
  std::string run_dir;  // empty: nothing written

  // Budgets for the simpler Blocksworld instances: 120 states, depth 28.
  static SearchConfig simple();
  // Throws SearchError(bad_config).
  void validate() const;
};

// Everything the engine needs to know about one problem, as text.
struct Instance {
  std::string name;
  std::string domain_nl;
  std::string instance_nl;
  std::string init_text;
  std::string goal_text;         // full goal, including negated facts
  std::string goal_schema_text;  // the positive goal facts, drawn as a state
  std::vector<std::string> object_ids;
};

// Template-mode texts for a PDDL problem.
Instance make_instance(const pddl::DomainDef& domain, const pddl::ProblemDef& problem);

// One expansion round: which parents were expanded and how many children
// they created.
struct RoundTrace {
  int depth = 0;  // of the parents
  std::vector<std::uint64_t> parents;
  std::vector<std::uint64_t> children;
  bool after_backtrack = false;
};

struct DepthInfo {
  int attempts = 0;
  std::vector<std::uint64_t> frontier;
  std::vector<std::uint64_t> invalidated;
  bool dead = false;
};

using DepthLedger = std::map<int, DepthInfo>;

struct SearchStats {
  int states_generated = 0;
  int max_depth_reached = 0;
  int backtracks = 0;
  proposer::CallCounts calls;
};

struct SearchResult {
  enum class Outcome { solved, incomplete };
  Outcome outcome = Outcome::incomplete;
  std::vector<std::string> plan;
  std::vector<std::uint64_t> goal_chain;
  SearchStats stats;
  std::string reason;  // why an incomplete run stopped
  std::vector<SearchNode> nodes;
  std::vector<RoundTrace> rounds;
  DepthLedger ledger;
};

std::string_view to_string(SearchResult::Outcome outcome);

// Step 1: the domain's reference style. Returns the cached style when
// `cache_path` exists; otherwise proposes m schemas for `state_text`, keeps
// those that pass check_schema (one regeneration round if none do), ranks
// them, reads a style back from the winner and writes the cache. Throws
// SearchError(all_candidates_invalid).
diagram::StyleMap bootstrap_domain_diagram(const std::string& domain_nl, const std::string& state_text,
                                           const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                                           proposer::Proposer& proposer, int m_schemas, const std::string& cache_path);

struct Endpoints {
  SearchNode root;
  SearchNode goal;
};

// Step 2: root and goal nodes with checked schemas and diagrams. Throws
// SearchError(schema_failure) after config.schema_retries regenerations.
Endpoints init_endpoints(const Instance& instance, const diagram::StyleMap& style, proposer::Proposer& proposer,
                         const SearchConfig& config);

// A child as produced by the pipeline, before it gets a node id.
struct ChildDraft {
  SearchNode node;  // id unset
  bool is_goal = false;
};

// Step 3 for one parent: up to n samples, stopping after `max_children`
// created children or at the first goal child. A proposal repeating an
// accepted sibling (from `accepted`, or earlier in this call) is skipped
// without counting. Sample indices continue from earlier expansions of the
// same parent, so a re-expansion draws fresh samples.
std::vector<ChildDraft> expand_node(const SearchNode& parent, const std::vector<std::string>& parent_path,
                                    const Endpoints& endpoints, const Instance& instance,
                                    const diagram::StyleMap& style, proposer::Proposer& proposer,
                                    const SearchConfig& config, int max_children,
                                    const std::vector<std::string>& accepted = {});

// Step 4: ranks `children` (validated nodes of one depth) and returns the
// new frontier, best first. Sets each child's rank.
std::vector<std::uint64_t> beam_step(std::vector<SearchNode*> children, const SearchNode& goal,
                                     proposer::Proposer& proposer, const SearchConfig& config);

// Step 5: the next frontier after a failed depth, or empty when no ancestor
// is left. Any non-invalid node at the chosen depth may be picked, expanded
// or not; unexpanded ones go first, then by rank. `nodes` is indexed by node
// id.
std::vector<std::uint64_t> backtrack(DepthLedger& ledger, std::vector<SearchNode>& nodes, int failed_depth,
                                     const SearchConfig& config);

// Steps 2-7. Writes the run directory when config.run_dir is set.
SearchResult run_search(const Instance& instance, const SearchConfig& config, proposer::Proposer& proposer,
                        const diagram::StyleMap& style);

}  // namespace vp::search
