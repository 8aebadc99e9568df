#include "vplan/proposer/chat.hpp"

#include <stdexcept>

namespace vp::proposer {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

ChatTurn ChatTurn::text(Role role, std::string text) {
  ChatTurn t;
  t.role = role;
  t.add_text(std::move(text));
  return t;
}

ChatTurn& ChatTurn::add_text(std::string text) {
  ContentPart p;
  p.kind = ContentPart::Kind::text;
  p.text = std::move(text);
  parts.push_back(std::move(p));
  return *this;
}

ChatTurn& ChatTurn::add_image(std::string data, std::string mime_type) {
  ContentPart p;
  p.kind = ContentPart::Kind::image;
  p.data = std::move(data);
  p.mime_type = std::move(mime_type);
  parts.push_back(std::move(p));
  return *this;
}

std::string ChatTurn::flat_text() const {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '\n';
    out += p.kind == ContentPart::Kind::text ? p.text : "[image]";
  }
  return out;
}

void check_turns(const std::vector<ChatTurn>& turns) {
  for (const auto& t : turns) {
    if (t.parts.empty()) throw std::invalid_argument("chat turn without parts");
    for (const auto& p : t.parts) {
      if (p.kind == ContentPart::Kind::image && t.role != Role::user)
        throw std::invalid_argument("image parts are only allowed on user turns");
    }
  }
}

}  // namespace vp::proposer
