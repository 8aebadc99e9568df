#pragma once

#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "vplan/proposer/chat.hpp"
#include "vplan/proposer/proposer.hpp"
#include "vplan/proposer/templates.hpp"

namespace vp::proposer {

struct ProposerConfig {
  std::string endpoint;  // base URL or full chat-completions URL
  std::string api_key;
  std::string model;
  std::vector<double> temperatures{0.0, 0.3, 0.7, 1.0};  // by sample index
  double timeout_s = 60;
  int max_retries = 3;
  int backoff_ms = 500;  // doubled per retry
  int max_in_flight = 4;
  std::string template_set = "v1";
  std::string transcript_dir;  // empty: no transcripts

  // Throws std::invalid_argument on a negative temperature, an empty
  // schedule, or non-positive limits.
  void validate() const;
};

// OpenAI-style request body for `turns`. Images become base64 data URLs.
std::string chat_request_json(const std::vector<ChatTurn>& turns, double temperature, const std::string& model);
// The first choice's message text. Throws ProposerError(malformed_envelope).
std::string chat_response_text(const std::string& body);

// One chat-completions call with retries on timeouts, connection errors,
// 429 and 5xx. Throws ProposerError(timeout | http_status | transport |
// malformed_envelope) once retries run out.
std::string call_model(const std::vector<ChatTurn>& turns, double temperature, const ProposerConfig& config);

// call_model behind a max-in-flight gate, logging each exchange as
// `<log_dir>/NNNN.request.json` and `NNNN.response.json`.
class HttpModel {
 public:
  explicit HttpModel(ProposerConfig config, std::string log_dir = {});
  std::string operator()(const std::vector<ChatTurn>& turns, double temperature);
  // Callable view; the HttpModel must outlive it.
  ModelFn fn();

 private:
  ProposerConfig config_;
  std::string log_dir_;
  std::mutex mutex_;
  std::condition_variable slots_;
  int in_flight_ = 0;
  std::uint64_t sequence_ = 0;
};

// Prompt-driven proposer. Replies that do not parse are re-requested up to
// config.max_retries times before ProposerError(unparseable_output).
class LiveProposer : public Proposer {
 public:
  LiveProposer(ProposerConfig config, const TemplateSet& templates, ModelFn model, std::string domain_nl);

  std::string propose_domain_schema(const CallTag& tag, const std::string& domain_nl,
                                    const std::string& state_text) override;
  std::vector<std::size_t> rank_diagrams(const CallTag& tag, const std::string& domain_nl,
                                         const std::vector<diagram::DiagramSchema>& candidates) override;
  ActionProposal propose_action(const CallTag& tag, const NodeBundle& node, const NodeBundle& goal,
                                const std::vector<std::string>& tried_actions) override;
  std::string make_schema(const CallTag& tag, const std::string& state_text, const std::string& action_text,
                          const diagram::StyleMap& style) override;
  std::string make_code(const CallTag& tag, const std::string& schema_text, const std::string& reference_code) override;
  Verdict reflect_schema(const CallTag& tag, const std::string& schema_text, const std::string& state_text,
                         const std::string& action_text) override;
  Verdict verify_local(const CallTag& tag, const NodeBundle& parent, const NodeBundle& child,
                       const std::string& action_text) override;
  Verdict verify_global(const CallTag& tag, const std::vector<std::string>& path, const NodeBundle& initial,
                        const NodeBundle& goal) override;
  bool check_goal(const CallTag& tag, const NodeBundle& node, const NodeBundle& goal) override;
  std::vector<std::size_t> rank_states(const CallTag& tag, const std::vector<NodeBundle>& candidates,
                                       const NodeBundle& goal) override;

 private:
  template <typename T, typename Parse>
  T ask(const CallTag& tag, std::string_view kind, const TemplateVars& vars, double temperature, Parse parse);
  void transcript(const CallTag& tag, std::string_view kind, const std::vector<ChatTurn>& turns,
                  const std::string& reply);

  ProposerConfig config_;
  const TemplateSet* templates_;
  ModelFn model_;
  std::string domain_nl_;
  std::mutex transcript_mutex_;
  std::map<std::uint64_t, int> transcript_seq_;
};

// The statement grammar as shown to models.
const std::string& schema_format_help();

}  // namespace vp::proposer
