#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vplan/diagram/schema.hpp"
#include "vplan/diagram/style.hpp"

namespace vp::proposer {

class ProposerError : public std::runtime_error {
 public:
  enum class Kind { timeout, http_status, malformed_envelope, transport, unparseable_output, bad_input, empty_candidates };
  ProposerError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(ProposerError::Kind kind);

// What the engine knows about one search node.
struct NodeBundle {
  std::uint64_t id = 0;
  std::string state_text;
  std::optional<diagram::DiagramSchema> schema;
  std::string diagram_svg;   // empty when diagrams are off
  std::string source_code;   // code-as-context runs send this instead of the image
  std::vector<std::string> action_path;
};

// Identifies a call for fault streams and transcripts.
struct CallTag {
  std::uint64_t node = 0;
  std::uint32_t sample = 0;
  std::uint32_t attempt = 0;
};

struct ActionProposal {
  std::string action_text;
  std::string next_state_text;
  std::string rationale;
};

struct Verdict {
  bool pass = true;
  std::string critique;

  static Verdict ok() { return {true, {}}; }
  static Verdict fail(std::string why) { return {false, why.empty() ? "rejected" : std::move(why)}; }
};

// Per-kind call counts, e.g. {"propose_action": 12}.
using CallCounts = std::map<std::string, std::uint64_t, std::less<>>;

// Every model duty of the pipeline. Implementations must tolerate
// concurrent calls.
class Proposer {
 public:
  virtual ~Proposer() = default;

  // Domain reference bootstrap: one candidate schema for a sample state.
  virtual std::string propose_domain_schema(const CallTag& tag, const std::string& domain_nl,
                                            const std::string& state_text) = 0;
  // Best-first permutation of schema candidates.
  virtual std::vector<std::size_t> rank_diagrams(const CallTag& tag, const std::string& domain_nl,
                                                 const std::vector<diagram::DiagramSchema>& candidates) = 0;

  virtual ActionProposal propose_action(const CallTag& tag, const NodeBundle& node, const NodeBundle& goal,
                                        const std::vector<std::string>& tried_actions) = 0;
  // Schema text for the state; the reference style fixes the look.
  virtual std::string make_schema(const CallTag& tag, const std::string& state_text, const std::string& action_text,
                                  const diagram::StyleMap& style) = 0;
  // Plotting program for the code-generation path.
  virtual std::string make_code(const CallTag& tag, const std::string& schema_text, const std::string& reference_code) = 0;
  virtual Verdict reflect_schema(const CallTag& tag, const std::string& schema_text, const std::string& state_text,
                                 const std::string& action_text) = 0;
  virtual Verdict verify_local(const CallTag& tag, const NodeBundle& parent, const NodeBundle& child,
                               const std::string& action_text) = 0;
  virtual Verdict verify_global(const CallTag& tag, const std::vector<std::string>& path, const NodeBundle& initial,
                                const NodeBundle& goal) = 0;
  virtual bool check_goal(const CallTag& tag, const NodeBundle& node, const NodeBundle& goal) = 0;
  // Best-first permutation. Throws ProposerError(empty_candidates).
  virtual std::vector<std::size_t> rank_states(const CallTag& tag, const std::vector<NodeBundle>& candidates,
                                               const NodeBundle& goal) = 0;

  CallCounts counts() const;

 protected:
  void count(std::string_view kind);

 private:
  mutable std::mutex counts_mutex_;
  CallCounts counts_;
};

// Reply parsing shared by the live backend and its tests.
namespace reply {

// `ACTION:`, `NEXT_STATE:` (multi-line) and `RATIONALE:` fields.
std::optional<ActionProposal> parse_proposal(std::string_view text);
// `VERDICT: PASS|FAIL` and `CRITIQUE: ...`.
std::optional<Verdict> parse_verdict(std::string_view text);
// `GOAL: YES|NO`.
std::optional<bool> parse_goal(std::string_view text);
// `RANKING: 2, 0, 1`; nullopt unless it is a permutation of [0, n).
std::optional<std::vector<std::size_t>> parse_ranking(std::string_view text, std::size_t n);
// Drops Markdown code fences and surrounding prose lines that are not
// schema statements.
std::string strip_fences(std::string_view text);

}  // namespace reply

}  // namespace vp::proposer
