#pragma once

#include <functional>
#include <string>
#include <vector>

namespace vp::proposer {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);

struct ContentPart {
  enum class Kind { text, image };
  Kind kind = Kind::text;
  std::string text;        // text parts
  std::string data;        // raw image bytes
  std::string mime_type;   // e.g. image/svg+xml, image/png
};

struct ChatTurn {
  Role role = Role::user;
  std::vector<ContentPart> parts;

  static ChatTurn text(Role role, std::string text);
  ChatTurn& add_text(std::string text);
  ChatTurn& add_image(std::string data, std::string mime_type);
  // Text parts joined by newlines; images appear as `[image]`.
  std::string flat_text() const;
};

// Throws std::invalid_argument when an image part sits on a non-user turn
// or a turn has no parts.
void check_turns(const std::vector<ChatTurn>& turns);

// Any transport that turns a conversation into one assistant message.
using ModelFn = std::function<std::string(const std::vector<ChatTurn>& turns, double temperature)>;

}  // namespace vp::proposer
