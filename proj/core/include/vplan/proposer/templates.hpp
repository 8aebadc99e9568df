#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vplan/proposer/chat.hpp"

namespace vp::proposer {

struct TemplateValue {
  std::string data;
  bool is_image = false;
  std::string mime_type;

  TemplateValue(std::string text) : data(std::move(text)) {}  // NOLINT: implicit by design
  TemplateValue(const char* text) : data(text) {}              // NOLINT
  static TemplateValue image(std::string bytes, std::string mime_type);
};

using TemplateVars = std::map<std::string, TemplateValue, std::less<>>;

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A prompt file:
//
//   # requires: state_text, diagram
//   ---system
//   You check planning states.
//   ---user
//   {{state_text}}
//   {{image:diagram}}
//
// `{{image:name}}` must stand on its own line inside a user section.
class PromptTemplate {
 public:
  static PromptTemplate parse(std::string name, std::string_view text);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& required() const { return required_; }

  // Throws TemplateError when a required variable is missing.
  std::vector<ChatTurn> render(const TemplateVars& vars) const;

 private:
  struct Section {
    Role role;
    std::string body;
  };
  std::string name_;
  std::vector<std::string> required_;
  std::vector<Section> sections_;
};

class TemplateSet {
 public:
  // Names every set must provide.
  static const std::vector<std::string>& required_names();

  // Loads `prompts/<set_id>/*.tmpl` from the embedded resources or, when
  // `dir` is given, from that directory. Throws TemplateError if a template
  // is missing, malformed, or its placeholders disagree with its
  // `# requires:` line.
  static TemplateSet load(std::string_view set_id);
  static TemplateSet load_dir(const std::string& dir);
  static const TemplateSet& builtin();

  const PromptTemplate& get(std::string_view name) const;
  const std::string& id() const { return id_; }

 private:
  std::string id_;
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace vp::proposer
