#include "vplan/proposer/templates.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "vplan/resources.hpp"

namespace vp::proposer {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Placeholder names in order of appearance, `image:` prefix stripped.
std::set<std::string> placeholders(const std::string& body, const std::string& tmpl) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while ((pos = body.find("{{", pos)) != std::string::npos) {
    std::size_t end = body.find("}}", pos);
    if (end == std::string::npos) throw TemplateError(tmpl + ": unterminated placeholder");
    std::string name = trim(body.substr(pos + 2, end - pos - 2));
    if (name.rfind("image:", 0) == 0) name = trim(name.substr(6));
    if (name.empty()) throw TemplateError(tmpl + ": empty placeholder");
    out.insert(name);
    pos = end + 2;
  }
  return out;
}

}  // namespace

TemplateValue TemplateValue::image(std::string bytes, std::string mime_type) {
  TemplateValue v(std::move(bytes));
  v.is_image = true;
  v.mime_type = std::move(mime_type);
  return v;
}

PromptTemplate PromptTemplate::parse(std::string name, std::string_view text) {
  PromptTemplate t;
  t.name_ = std::move(name);
  std::istringstream in{std::string(text)};
  std::string line;
  bool saw_requires = false;
  while (std::getline(in, line)) {
    if (line.rfind("---", 0) == 0) {
      std::string role = trim(line.substr(3));
      Role r;
      if (role == "system") r = Role::system;
      else if (role == "user") r = Role::user;
      else if (role == "assistant") r = Role::assistant;
      else throw TemplateError(t.name_ + ": unknown section '" + role + "'");
      t.sections_.push_back({r, {}});
      continue;
    }
    if (t.sections_.empty()) {
      if (line.rfind("# requires:", 0) == 0) {
        saw_requires = true;
        std::string list = line.substr(11);
        std::replace(list.begin(), list.end(), ',', ' ');
        std::istringstream names(list);
        std::string n;
        while (names >> n) t.required_.push_back(n);
      } else if (!trim(line).empty() && line[0] != '#') {
        throw TemplateError(t.name_ + ": text before the first section");
      }
      continue;
    }
    t.sections_.back().body += line + "\n";
  }
  if (!saw_requires) throw TemplateError(t.name_ + ": missing '# requires:' line");
  if (t.sections_.empty()) throw TemplateError(t.name_ + ": no sections");
  std::set<std::string> used;
  for (auto& s : t.sections_) {
    while (!s.body.empty() && s.body.back() == '\n') s.body.pop_back();
    for (auto& p : placeholders(s.body, t.name_)) used.insert(p);
    if (s.role != Role::user && s.body.find("{{image:") != std::string::npos)
      throw TemplateError(t.name_ + ": image placeholders belong in user sections");
  }
  std::set<std::string> declared(t.required_.begin(), t.required_.end());
  for (const auto& u : used) {
    if (!declared.count(u)) throw TemplateError(t.name_ + ": placeholder '" + u + "' is not declared");
  }
  for (const auto& d : declared) {
    if (!used.count(d)) throw TemplateError(t.name_ + ": declared placeholder '" + d + "' is never used");
  }
  return t;
}

std::vector<ChatTurn> PromptTemplate::render(const TemplateVars& vars) const {
  for (const auto& r : required_) {
    if (!vars.count(r)) throw TemplateError(name_ + ": missing value for '" + r + "'");
  }
  std::vector<ChatTurn> turns;
  for (const auto& s : sections_) {
    ChatTurn turn;
    turn.role = s.role;
    std::string text;
    auto flush = [&] {
      std::string t = trim(text);
      if (!t.empty()) turn.add_text(t);
      text.clear();
    };
    std::istringstream in(s.body);
    std::string line;
    while (std::getline(in, line)) {
      std::string tl = trim(line);
      if (tl.rfind("{{image:", 0) == 0 && tl.size() > 10 && tl.substr(tl.size() - 2) == "}}") {
        std::string name = trim(tl.substr(8, tl.size() - 10));
        const TemplateValue& v = vars.find(name)->second;
        flush();
        if (v.is_image && !v.data.empty()) {
          turn.add_image(v.data, v.mime_type);
        } else if (!v.data.empty()) {
          // Text stand-in for a diagram, e.g. render source in code-as-context runs.
          turn.add_text(v.data);
        }
        continue;
      }
      std::string expanded;
      std::size_t pos = 0;
      while (true) {
        std::size_t open = line.find("{{", pos);
        if (open == std::string::npos) {
          expanded += line.substr(pos);
          break;
        }
        std::size_t close = line.find("}}", open);
        expanded += line.substr(pos, open - pos);
        std::string name = trim(line.substr(open + 2, close - open - 2));
        if (name.rfind("image:", 0) == 0) throw TemplateError(name_ + ": image placeholder must stand alone on its line");
        expanded += vars.find(name)->second.data;
        pos = close + 2;
      }
      text += expanded + "\n";
    }
    flush();
    if (turn.parts.empty()) turn.add_text("");
    turns.push_back(std::move(turn));
  }
  return turns;
}

const std::vector<std::string>& TemplateSet::required_names() {
  static const std::vector<std::string> names = {
      "domain_diagram", "make_schema",  "make_code",   "reflect_schema", "propose_action",
      "local_check",    "global_check", "goal_check",  "rank_states",    "rank_diagrams",
      "nl_domain",      "nl_instance",  "nl_plan"};
  return names;
}

namespace {

void check_complete(const TemplateSet& set) {
  for (const auto& n : TemplateSet::required_names()) {
    try {
      set.get(n);
    } catch (const TemplateError&) {
      throw TemplateError("template set '" + set.id() + "' lacks '" + n + "'");
    }
  }
}

}  // namespace

TemplateSet TemplateSet::load(std::string_view set_id) {
  TemplateSet set;
  set.id_ = std::string(set_id);
  std::string prefix = "prompts/" + set.id_ + "/";
  for (auto path : resources::list(prefix)) {
    std::string file(path.substr(prefix.size()));
    if (file.size() < 6 || file.substr(file.size() - 5) != ".tmpl") continue;
    std::string name = file.substr(0, file.size() - 5);
    set.templates_.emplace(name, PromptTemplate::parse(name, *resources::find(path)));
  }
  if (set.templates_.empty()) throw TemplateError("unknown template set '" + set.id_ + "'");
  check_complete(set);
  return set;
}

TemplateSet TemplateSet::load_dir(const std::string& dir) {
  TemplateSet set;
  set.id_ = dir;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".tmpl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string name = f.stem().string();
    set.templates_.emplace(name, PromptTemplate::parse(name, ss.str()));
  }
  check_complete(set);
  return set;
}

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = load("v1");
  return set;
}

const PromptTemplate& TemplateSet::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw TemplateError("template '" + std::string(name) + "' not found in set " + id_);
  return it->second;
}

}  // namespace vp::proposer
