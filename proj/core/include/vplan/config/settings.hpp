#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vplan/proposer/live.hpp"
#include "vplan/search/engine.hpp"
#include "vplan/sim/domains.hpp"
#include "vplan/sim/fault.hpp"
#include "vplan/sim/search.hpp"

namespace vp::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeyInfo {
  std::string key;  // dotted, e.g. "search.k"
  std::string type;  // int, uint, real, bool, text, reals
  std::string help;
};

// Every accepted key, sorted.
const std::vector<KeyInfo>& known_keys();

// Merged settings. Later assignments win, so callers apply sources in
// precedence order: defaults, config file, environment, flags.
class Settings {
 public:
  // `key` may be dotted or a bare leaf name when that is unambiguous
  // (`max_states` for `search.max_states`). Throws ConfigError on unknown
  // keys and malformed values.
  void set(std::string_view key, std::string_view value);

  // `key = value` lines; `#` starts a comment. Errors name `origin` and line.
  void load_text(std::string_view text, std::string_view origin = "config");
  void load_file(const std::string& path);
  // VP_ENDPOINT, VP_API_KEY, VP_MODEL.
  void load_env(const std::function<const char*(const char*)>& getenv);

  bool has(std::string_view key) const;
  // Explicit value or the default, as text.
  std::string get(std::string_view key) const;

  // Blocksworld starts from SearchConfig::simple(), other domains from the
  // defaults; explicit search.* keys override either.
  search::SearchConfig search(std::optional<sim::DomainId> domain) const;
  proposer::ProposerConfig proposer() const;
  sim::FaultModel faults() const;
  sim::OracleOptions oracle() const;

  // Every key with its effective value, one `key = value` line each.
  std::string dump() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace vp::config
