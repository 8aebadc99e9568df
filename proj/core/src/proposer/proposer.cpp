#include "vplan/proposer/proposer.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace vp::proposer {

std::string_view to_string(ProposerError::Kind kind) {
  switch (kind) {
    case ProposerError::Kind::timeout: return "timeout";
    case ProposerError::Kind::http_status: return "http-status";
    case ProposerError::Kind::malformed_envelope: return "malformed-envelope";
    case ProposerError::Kind::transport: return "transport";
    case ProposerError::Kind::unparseable_output: return "unparseable-output";
    case ProposerError::Kind::bad_input: return "bad-input";
    case ProposerError::Kind::empty_candidates: return "empty-candidates";
  }
  return "unknown";
}

CallCounts Proposer::counts() const {
  std::lock_guard lock(counts_mutex_);
  return counts_;
}

void Proposer::count(std::string_view kind) {
  std::lock_guard lock(counts_mutex_);
  auto it = counts_.find(kind);
  if (it == counts_.end()) counts_.emplace(std::string(kind), 1);
  else ++it->second;
}

namespace reply {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n*`");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n*`");
  return std::string(s.substr(b, e - b + 1));
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Value after `KEY:` on a line, tolerating Markdown emphasis around the key.
std::optional<std::string> field(std::string_view line, std::string_view key) {
  std::string t = trim(line);
  std::string u = upper(t);
  if (u.rfind(key, 0) != 0) return std::nullopt;
  std::size_t colon = t.find(':', key.size());
  if (colon == std::string::npos || trim(t.substr(key.size(), colon - key.size())).size() > 0) return std::nullopt;
  return trim(t.substr(colon + 1));
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

std::optional<ActionProposal> parse_proposal(std::string_view text) {
  ActionProposal p;
  bool have_action = false, in_state = false;
  for (const auto& line : lines_of(text)) {
    if (auto v = field(line, "ACTION")) {
      p.action_text = *v;
      have_action = true;
      in_state = false;
    } else if (auto s = field(line, "NEXT_STATE")) {
      in_state = true;
      if (!s->empty()) p.next_state_text += *s + "\n";
    } else if (auto r = field(line, "RATIONALE")) {
      p.rationale = *r;
      in_state = false;
    } else if (in_state) {
      std::string t = trim(line);
      if (!t.empty()) p.next_state_text += t + "\n";
    }
  }
  if (!have_action || p.action_text.empty()) return std::nullopt;
  return p;
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  std::optional<bool> pass;
  std::string critique;
  for (const auto& line : lines_of(text)) {
    if (auto v = field(line, "VERDICT")) {
      std::string u = upper(*v);
      if (u.rfind("PASS", 0) == 0) pass = true;
      else if (u.rfind("FAIL", 0) == 0) pass = false;
    } else if (auto c = field(line, "CRITIQUE")) {
      critique = *c;
    }
  }
  if (!pass) return std::nullopt;
  if (*pass) return Verdict::ok();
  std::string lc = critique;
  for (char& ch : lc) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return Verdict::fail(lc == "none" || lc == "\"none\"" ? "" : critique);
}

std::optional<bool> parse_goal(std::string_view text) {
  for (const auto& line : lines_of(text)) {
    if (auto v = field(line, "GOAL")) {
      std::string u = upper(*v);
      if (u.rfind("YES", 0) == 0) return true;
      if (u.rfind("NO", 0) == 0) return false;
    }
  }
  return std::nullopt;
}

std::optional<std::vector<std::size_t>> parse_ranking(std::string_view text, std::size_t n) {
  for (const auto& line : lines_of(text)) {
    auto v = field(line, "RANKING");
    if (!v) continue;
    std::string list = *v;
    std::replace_if(list.begin(), list.end(), [](char c) { return c == ',' || c == '[' || c == ']' || c == '>'; }, ' ');
    std::istringstream in(list);
    std::vector<std::size_t> out;
    std::string tok;
    while (in >> tok) {
      if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        return std::nullopt;
      out.push_back(std::stoul(tok));
    }
    std::vector<std::size_t> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() != n) return std::nullopt;
    for (std::size_t i = 0; i < n; ++i) {
      if (sorted[i] != i) return std::nullopt;
    }
    return out;
  }
  return std::nullopt;
}

std::string strip_fences(std::string_view text) {
  std::string out;
  for (const auto& line : lines_of(text)) {
    std::string t = trim(line);
    if (t.rfind("object ", 0) == 0 || t.rfind("canvas ", 0) == 0 || t.rfind("title ", 0) == 0) out += t + "\n";
  }
  return out;
}

}  // namespace reply

}  // namespace vp::proposer
