#include "vplan/proposer/live.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "vplan/diagram/render.hpp"

namespace vp::proposer {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("endpoint needs a scheme: '" + url + "'");
  auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  const std::string tail = "/chat/completions";
  if (e.path.empty()) e.path = "/v1" + tail;
  else if (e.path.size() < tail.size() || e.path.compare(e.path.size() - tail.size(), tail.size(), tail) != 0)
    e.path += tail;
  return e;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

json turns_for_log(const std::vector<ChatTurn>& turns) {
  json out = json::array();
  for (const auto& t : turns) {
    json parts = json::array();
    for (const auto& p : t.parts) {
      if (p.kind == ContentPart::Kind::text) parts.push_back(p.text);
      else parts.push_back("[image " + p.mime_type + ", " + std::to_string(p.data.size()) + " bytes]");
    }
    out.push_back({{"role", std::string(to_string(t.role))}, {"parts", parts}});
  }
  return out;
}

std::string numbered(const std::vector<std::string>& items) {
  if (items.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += std::to_string(i + 1) + ". " + items[i] + "\n";
  out.pop_back();
  return out;
}

TemplateValue diagram_value(const NodeBundle& node) {
  if (!node.diagram_svg.empty()) return TemplateValue::image(node.diagram_svg, "image/svg+xml");
  return TemplateValue(node.source_code);
}

std::string code_block(std::string_view text) {
  auto open = text.find("```");
  if (open == std::string_view::npos) return std::string(text);
  auto body = text.find('\n', open);
  auto close = body == std::string_view::npos ? body : text.find("```", body);
  if (close == std::string_view::npos) return std::string(text);
  return std::string(text.substr(body + 1, close - body - 1));
}

}  // namespace

void ProposerConfig::validate() const {
  if (temperatures.empty()) throw std::invalid_argument("temperature schedule is empty");
  for (double t : temperatures) {
    if (t < 0) throw std::invalid_argument("temperatures must be non-negative");
  }
  if (timeout_s <= 0) throw std::invalid_argument("timeout must be positive");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be non-negative");
  if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be at least 1");
}

std::string chat_request_json(const std::vector<ChatTurn>& turns, double temperature, const std::string& model) {
  check_turns(turns);
  json messages = json::array();
  for (const auto& t : turns) {
    json content = json::array();
    for (const auto& p : t.parts) {
      if (p.kind == ContentPart::Kind::text) {
        content.push_back({{"type", "text"}, {"text", p.text}});
      } else {
        std::string url = "data:" + p.mime_type + ";base64," + httplib::detail::base64_encode(p.data);
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
      }
    }
    messages.push_back({{"role", std::string(to_string(t.role))}, {"content", content}});
  }
  json body = {{"model", model}, {"temperature", temperature}, {"messages", messages}};
  return body.dump();
}

std::string chat_response_text(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ProposerError(ProposerError::Kind::malformed_envelope, "response is not JSON");
  try {
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string out;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") out += part.at("text").get<std::string>();
    }
    return out;
  } catch (const json::exception& e) {
    throw ProposerError(ProposerError::Kind::malformed_envelope, std::string("unexpected response shape: ") + e.what());
  }
}

std::string call_model(const std::vector<ChatTurn>& turns, double temperature, const ProposerConfig& config) {
  config.validate();
  Endpoint ep = split_endpoint(config.endpoint);
  const std::string body = chat_request_json(turns, temperature, config.model);
  httplib::Headers headers;
  if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

  auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(config.timeout_s));
  std::optional<ProposerError> last;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(config.backoff_ms) << (attempt - 1)));
    }
    httplib::Client client(ep.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto start = std::chrono::steady_clock::now();
    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) {
      double waited = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      bool timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                       (res.error() == httplib::Error::Read && waited >= 0.9 * config.timeout_s);
      last = ProposerError(timed_out ? ProposerError::Kind::timeout : ProposerError::Kind::transport,
                           (timed_out ? "timed out after " + std::to_string(config.timeout_s) + " s: "
                                      : std::string("request failed: ")) +
                               httplib::to_string(res.error()));
      continue;
    }
    if (res->status == 200) return chat_response_text(res->body);
    last = ProposerError(ProposerError::Kind::http_status,
                         "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    if (res->status != 429 && res->status < 500) break;
  }
  throw *last;
}

HttpModel::HttpModel(ProposerConfig config, std::string log_dir) : config_(std::move(config)), log_dir_(std::move(log_dir)) {
  config_.validate();
}

std::string HttpModel::operator()(const std::vector<ChatTurn>& turns, double temperature) {
  std::uint64_t seq;
  {
    std::unique_lock lock(mutex_);
    slots_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
    ++in_flight_;
    seq = ++sequence_;
  }
  struct Release {
    HttpModel* self;
    ~Release() {
      {
        std::lock_guard lock(self->mutex_);
        --self->in_flight_;
      }
      self->slots_.notify_one();
    }
  } release{this};

  char name[32];
  std::snprintf(name, sizeof name, "%04llu", static_cast<unsigned long long>(seq));
  std::filesystem::path base = std::filesystem::path(log_dir_) / name;
  if (!log_dir_.empty()) {
    json req = {{"temperature", temperature}, {"model", config_.model}, {"turns", turns_for_log(turns)}};
    write_file(base.string() + ".request.json", req.dump(2) + "\n");
  }
  try {
    std::string reply = call_model(turns, temperature, config_);
    if (!log_dir_.empty()) write_file(base.string() + ".response.json", json({{"content", reply}}).dump(2) + "\n");
    return reply;
  } catch (const ProposerError& e) {
    if (!log_dir_.empty()) {
      write_file(base.string() + ".response.json",
                 json({{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}).dump(2) + "\n");
    }
    throw;
  }
}

ModelFn HttpModel::fn() {
  return [this](const std::vector<ChatTurn>& turns, double temperature) { return (*this)(turns, temperature); };
}

const std::string& schema_format_help() {
  static const std::string text = [] {
    std::string colors;
    for (const auto& c : diagram::palette()) colors += (colors.empty() ? "" : ", ") + std::string(c.name);
    return "title <text>\n"
           "canvas <width>x<height>\n"
           "object <id> shape=<circle|square|rectangle|line|triangle|label-only> color=<color> size=<w>x<h> "
           "pos=<x>,<y> status=<text> label=<text>\n\n"
           "Coordinates are canvas units with y pointing up; pos=<x>,<y> is the lower-left corner. pos may instead be "
           "above(<id>,<gap>), below(<id>,<gap>), left-of(<id>,<gap>), right-of(<id>,<gap>) or inside(<id>). "
           "status and label are optional. Colors: " +
           colors + ".";
  }();
  return text;
}

LiveProposer::LiveProposer(ProposerConfig config, const TemplateSet& templates, ModelFn model, std::string domain_nl)
    : config_(std::move(config)), templates_(&templates), model_(std::move(model)), domain_nl_(std::move(domain_nl)) {
  config_.validate();
  for (const auto& n : TemplateSet::required_names()) templates_->get(n);
}

void LiveProposer::transcript(const CallTag& tag, std::string_view kind, const std::vector<ChatTurn>& turns,
                              const std::string& reply) {
  if (config_.transcript_dir.empty()) return;
  int seq;
  {
    std::lock_guard lock(transcript_mutex_);
    seq = ++transcript_seq_[tag.node];
  }
  char name[64];
  std::snprintf(name, sizeof name, "%03d_%.*s.json", seq, static_cast<int>(kind.size()), kind.data());
  json j = {{"kind", std::string(kind)}, {"sample", tag.sample}, {"attempt", tag.attempt},
            {"request", turns_for_log(turns)}, {"reply", reply}};
  write_file(std::filesystem::path(config_.transcript_dir) / ("state_" + std::to_string(tag.node)) / "attempts" / name,
             j.dump(2) + "\n");
}

template <typename T, typename Parse>
T LiveProposer::ask(const CallTag& tag, std::string_view kind, const TemplateVars& vars, double temperature,
                    Parse parse) {
  count(kind);
  auto turns = templates_->get(kind).render(vars);
  std::string reply;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    reply = model_(turns, temperature);
    CallTag t = tag;
    t.attempt = static_cast<std::uint32_t>(attempt);
    transcript(t, kind, turns, reply);
    if (std::optional<T> v = parse(reply)) return std::move(*v);
  }
  throw ProposerError(ProposerError::Kind::unparseable_output,
                      std::string(kind) + ": reply did not follow the format: " + reply.substr(0, 200));
}

std::string LiveProposer::propose_domain_schema(const CallTag& tag, const std::string& domain_nl,
                                                const std::string& state_text) {
  double temp = config_.temperatures[std::min<std::size_t>(tag.sample, config_.temperatures.size() - 1)];
  return ask<std::string>(tag, "domain_diagram",
                          {{"domain_nl", domain_nl}, {"state_text", state_text}, {"schema_format", schema_format_help()}},
                          temp, [](const std::string& r) -> std::optional<std::string> {
                            std::string s = reply::strip_fences(r);
                            if (s.empty()) return std::nullopt;
                            return s;
                          });
}

std::vector<std::size_t> LiveProposer::rank_diagrams(const CallTag& tag, const std::string& domain_nl,
                                                     const std::vector<diagram::DiagramSchema>& candidates) {
  if (candidates.empty()) throw ProposerError(ProposerError::Kind::empty_candidates, "no diagrams to rank");
  if (candidates.size() == 1) return {0};
  std::string list;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    list += "Candidate " + std::to_string(i) + ":\n" + diagram::to_text(candidates[i]) + "\n";
  }
  return ask<std::vector<std::size_t>>(tag, "rank_diagrams", {{"domain_nl", domain_nl}, {"candidates", list}}, 0.0,
                                       [&](const std::string& r) { return reply::parse_ranking(r, candidates.size()); });
}

ActionProposal LiveProposer::propose_action(const CallTag& tag, const NodeBundle& node, const NodeBundle& goal,
                                            const std::vector<std::string>& tried_actions) {
  double temp = config_.temperatures[std::min<std::size_t>(tag.sample, config_.temperatures.size() - 1)];
  TemplateVars vars{{"domain_nl", domain_nl_},
                    {"goal_text", goal.state_text},
                    {"goal_diagram", diagram_value(goal)},
                    {"state_text", node.state_text},
                    {"diagram", diagram_value(node)},
                    {"action_path", numbered(node.action_path)},
                    {"tried_actions", numbered(tried_actions)}};
  return ask<ActionProposal>(tag, "propose_action", vars, temp, reply::parse_proposal);
}

std::string LiveProposer::make_schema(const CallTag& tag, const std::string& state_text, const std::string& action_text,
                                      const diagram::StyleMap& style) {
  TemplateVars vars{{"reference_schema", diagram::to_text(style)},
                    {"state_text", state_text},
                    {"action_text", action_text},
                    {"schema_format", schema_format_help()}};
  return ask<std::string>(tag, "make_schema", vars, 0.0, [](const std::string& r) -> std::optional<std::string> {
    std::string s = reply::strip_fences(r);
    if (s.empty()) return std::nullopt;
    try {
      diagram::parse_schema(s);
    } catch (const diagram::DiagramError&) {
      return std::nullopt;
    }
    return s;
  });
}

std::string LiveProposer::make_code(const CallTag& tag, const std::string& schema_text,
                                    const std::string& reference_code) {
  return ask<std::string>(tag, "make_code", {{"schema_text", schema_text}, {"reference_code", reference_code}}, 0.0,
                          [](const std::string& r) -> std::optional<std::string> {
                            std::string code = code_block(r);
                            if (code.find("savefig") == std::string::npos) return std::nullopt;
                            return code;
                          });
}

Verdict LiveProposer::reflect_schema(const CallTag& tag, const std::string& schema_text, const std::string& state_text,
                                     const std::string& action_text) {
  return ask<Verdict>(tag, "reflect_schema",
                      {{"state_text", state_text}, {"action_text", action_text}, {"schema_text", schema_text}}, 0.0,
                      reply::parse_verdict);
}

Verdict LiveProposer::verify_local(const CallTag& tag, const NodeBundle& parent, const NodeBundle& child,
                                   const std::string& action_text) {
  TemplateVars vars{{"domain_nl", domain_nl_},         {"parent_text", parent.state_text},
                    {"parent_diagram", diagram_value(parent)}, {"child_text", child.state_text},
                    {"child_diagram", diagram_value(child)},   {"action_text", action_text}};
  return ask<Verdict>(tag, "local_check", vars, 0.0, reply::parse_verdict);
}

Verdict LiveProposer::verify_global(const CallTag& tag, const std::vector<std::string>& path,
                                    const NodeBundle& initial, const NodeBundle& goal) {
  TemplateVars vars{{"domain_nl", domain_nl_},
                    {"initial_text", initial.state_text},
                    {"goal_text", goal.state_text},
                    {"action_path", numbered(path)}};
  return ask<Verdict>(tag, "global_check", vars, 0.0, reply::parse_verdict);
}

bool LiveProposer::check_goal(const CallTag& tag, const NodeBundle& node, const NodeBundle& goal) {
  TemplateVars vars{{"state_text", node.state_text},
                    {"diagram", diagram_value(node)},
                    {"goal_text", goal.state_text},
                    {"goal_diagram", diagram_value(goal)}};
  return ask<bool>(tag, "goal_check", vars, 0.0, reply::parse_goal);
}

std::vector<std::size_t> LiveProposer::rank_states(const CallTag& tag, const std::vector<NodeBundle>& candidates,
                                                   const NodeBundle& goal) {
  if (candidates.empty()) throw ProposerError(ProposerError::Kind::empty_candidates, "no states to rank");
  if (candidates.size() == 1) return {0};
  std::string list;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    list += "Candidate " + std::to_string(i) + ":\n" + candidates[i].state_text + "\n";
  }
  TemplateVars vars{{"goal_text", goal.state_text}, {"goal_diagram", diagram_value(goal)}, {"candidates", list}};
  return ask<std::vector<std::size_t>>(tag, "rank_states", vars, 0.0,
                                       [&](const std::string& r) { return reply::parse_ranking(r, candidates.size()); });
}

}  // namespace vp::proposer
