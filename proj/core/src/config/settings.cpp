#include "vplan/config/settings.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace vp::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string num(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::string flag(bool b) { return b ? "true" : "false"; }

template <class T>
bool parse_number(std::string_view text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_bool(std::string_view text, bool& out) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0" || text == "no" || text == "off") {
    out = false;
    return true;
  }
  return false;
}

bool parse_reals(std::string_view text, std::vector<double>& out) {
  out.clear();
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    double v = 0;
    if (!parse_number(trim(item), v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

int as_int(const std::string& v) {
  int out = 0;
  parse_number(v, out);
  return out;
}

std::uint64_t as_uint(const std::string& v) {
  std::uint64_t out = 0;
  parse_number(v, out);
  return out;
}

double as_real(const std::string& v) {
  double out = 0;
  parse_number(v, out);
  return out;
}

bool as_bool(const std::string& v) {
  bool out = false;
  parse_bool(v, out);
  return out;
}

std::string default_of(const std::string& key) {
  const search::SearchConfig s;
  const proposer::ProposerConfig p;
  const sim::FaultModel f;
  const sim::OracleOptions o;
  static const std::map<std::string, std::string> table = [&] {
    std::string temps;
    for (double t : p.temperatures) temps += (temps.empty() ? "" : ",") + num(t);
    return std::map<std::string, std::string>{
        {"bench.m_schemas", "3"},
        {"bench.workers", "1"},
        {"faults.global_false_negative_rate", num(f.global_false_negative_rate)},
        {"faults.invalid_action_rate", num(f.invalid_action_rate)},
        {"faults.local_false_negative_rate", num(f.local_false_negative_rate)},
        {"faults.ranking_noise", num(f.ranking_noise)},
        {"faults.seed", std::to_string(f.seed)},
        {"oracle.fallback_cap", std::to_string(o.fallback_cap)},
        {"oracle.fallback_state_limit", std::to_string(o.fallback_state_limit)},
        {"oracle.state_limit", std::to_string(o.state_limit)},
        {"paths.out", "runs"},
        {"proposer.api_key", p.api_key},
        {"proposer.backoff_ms", std::to_string(p.backoff_ms)},
        {"proposer.endpoint", p.endpoint},
        {"proposer.kind", "oracle"},
        {"proposer.max_in_flight", std::to_string(p.max_in_flight)},
        {"proposer.max_retries", std::to_string(p.max_retries)},
        {"proposer.model", p.model},
        {"proposer.temperatures", temps},
        {"proposer.template_set", p.template_set},
        {"proposer.timeout_s", num(p.timeout_s)},
        {"search.B", std::to_string(s.B)},
        {"search.code_as_context", flag(s.ablations.code_as_context)},
        {"search.code_retries", std::to_string(s.code_retries)},
        {"search.k", std::to_string(s.k)},
        {"search.max_depth", std::to_string(s.max_depth)},
        {"search.max_states", std::to_string(s.max_states)},
        {"search.n", std::to_string(s.n)},
        {"search.no_backtrack", flag(s.ablations.no_backtrack)},
        {"search.no_beam", flag(s.ablations.no_beam)},
        {"search.no_diagram", flag(s.ablations.no_diagram)},
        {"search.no_schema", flag(s.ablations.no_schema)},
        {"search.schema_retries", std::to_string(s.schema_retries)},
        {"search.seed", std::to_string(s.seed)},
        {"search.workers", std::to_string(s.workers)},
    };
  }();
  return table.at(key);
}

const KeyInfo* find_key(std::string_view key) {
  for (const auto& k : known_keys())
    if (k.key == key) return &k;
  return nullptr;
}

}  // namespace

const std::vector<KeyInfo>& known_keys() {
  static const std::vector<KeyInfo> keys = [] {
    std::vector<KeyInfo> v{
        {"bench.m_schemas", "int", "bootstrap schema candidates"},
        {"bench.workers", "int", "instances in flight"},
        {"faults.global_false_negative_rate", "real", "oracle: rejects valid goal checks"},
        {"faults.invalid_action_rate", "real", "oracle: proposes inapplicable actions"},
        {"faults.local_false_negative_rate", "real", "oracle: rejects valid transitions"},
        {"faults.ranking_noise", "real", "oracle: ranking perturbation"},
        {"faults.seed", "uint", "oracle fault stream seed"},
        {"oracle.fallback_cap", "int", "bounded search depth for large spaces"},
        {"oracle.fallback_state_limit", "uint", "bounded search state limit"},
        {"oracle.state_limit", "uint", "enumerate reachable states up to this size"},
        {"paths.out", "text", "output directory, relative to the workdir"},
        {"proposer.api_key", "text", "bearer token"},
        {"proposer.backoff_ms", "int", "first retry delay"},
        {"proposer.endpoint", "text", "chat-completions endpoint"},
        {"proposer.kind", "text", "oracle or live"},
        {"proposer.max_in_flight", "int", "concurrent requests"},
        {"proposer.max_retries", "int", "retries per call"},
        {"proposer.model", "text", "model name"},
        {"proposer.temperatures", "reals", "temperature per sample index"},
        {"proposer.template_set", "text", "prompt template set"},
        {"proposer.timeout_s", "real", "request timeout"},
        {"search.B", "int", "backtrack attempts per depth"},
        {"search.code_as_context", "bool", "plotting code instead of images"},
        {"search.code_retries", "int", "plotting code regenerations"},
        {"search.k", "int", "beam width"},
        {"search.max_depth", "int", "depth limit"},
        {"search.max_states", "int", "state budget"},
        {"search.n", "int", "children per parent"},
        {"search.no_backtrack", "bool", "disable backtracking"},
        {"search.no_beam", "bool", "keep every valid child"},
        {"search.no_diagram", "bool", "text states only"},
        {"search.no_schema", "bool", "skip schema reflection"},
        {"search.schema_retries", "int", "schema regenerations"},
        {"search.seed", "uint", "search seed"},
        {"search.workers", "int", "parallel expansions"},
    };
    std::sort(v.begin(), v.end(), [](const KeyInfo& a, const KeyInfo& b) { return a.key < b.key; });
    return v;
  }();
  return keys;
}

void Settings::set(std::string_view raw_key, std::string_view raw_value) {
  std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key.find('.') == std::string::npos) {
    std::vector<std::string> hits;
    for (const auto& k : known_keys())
      if (k.key.substr(k.key.find('.') + 1) == key) hits.push_back(k.key);
    if (hits.size() > 1) {
      std::string list;
      for (const auto& h : hits) list += (list.empty() ? "" : ", ") + h;
      throw ConfigError("ambiguous key '" + key + "': use one of " + list);
    }
    if (hits.size() == 1) key = hits[0];
  }
  const KeyInfo* info = find_key(key);
  if (!info) throw ConfigError("unknown key '" + key + "'");

  bool ok = true;
  if (info->type == "int") {
    int v = 0;
    ok = parse_number(value, v);
  } else if (info->type == "uint") {
    std::uint64_t v = 0;
    ok = parse_number(value, v);
  } else if (info->type == "real") {
    double v = 0;
    ok = parse_number(value, v);
  } else if (info->type == "bool") {
    bool v = false;
    ok = parse_bool(value, v);
  } else if (info->type == "reals") {
    std::vector<double> v;
    ok = parse_reals(value, v);
  }
  if (key == "proposer.kind") ok = value == "oracle" || value == "live";
  if (!ok) throw ConfigError("bad value for " + key + " (" + info->type + "): '" + value + "'");
  values_[key] = value;
}

void Settings::load_text(std::string_view text, std::string_view origin) {
  std::stringstream ss{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void Settings::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

void Settings::load_env(const std::function<const char*(const char*)>& getenv) {
  static const std::pair<const char*, const char*> vars[] = {
      {"VP_ENDPOINT", "proposer.endpoint"}, {"VP_API_KEY", "proposer.api_key"}, {"VP_MODEL", "proposer.model"}};
  for (const auto& [var, key] : vars) {
    const char* v = getenv(var);
    if (v && *v) set(key, v);
  }
}

bool Settings::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::string Settings::get(std::string_view key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  if (!find_key(key)) throw ConfigError("unknown key '" + std::string(key) + "'");
  return default_of(std::string(key));
}

search::SearchConfig Settings::search(std::optional<sim::DomainId> domain) const {
  search::SearchConfig c = domain == sim::DomainId::blocksworld ? search::SearchConfig::simple() : search::SearchConfig{};
  auto i = [&](const char* key, int& field) {
    if (has(key)) field = as_int(get(key));
  };
  auto b = [&](const char* key, bool& field) {
    if (has(key)) field = as_bool(get(key));
  };
  i("search.n", c.n);
  i("search.k", c.k);
  i("search.B", c.B);
  i("search.max_states", c.max_states);
  i("search.max_depth", c.max_depth);
  i("search.schema_retries", c.schema_retries);
  i("search.code_retries", c.code_retries);
  i("search.workers", c.workers);
  if (has("search.seed")) c.seed = as_uint(get("search.seed"));
  b("search.no_diagram", c.ablations.no_diagram);
  b("search.no_schema", c.ablations.no_schema);
  b("search.code_as_context", c.ablations.code_as_context);
  b("search.no_beam", c.ablations.no_beam);
  b("search.no_backtrack", c.ablations.no_backtrack);
  return c;
}

proposer::ProposerConfig Settings::proposer() const {
  proposer::ProposerConfig c;
  c.endpoint = get("proposer.endpoint");
  c.api_key = get("proposer.api_key");
  c.model = get("proposer.model");
  parse_reals(get("proposer.temperatures"), c.temperatures);
  c.timeout_s = as_real(get("proposer.timeout_s"));
  c.max_retries = as_int(get("proposer.max_retries"));
  c.backoff_ms = as_int(get("proposer.backoff_ms"));
  c.max_in_flight = as_int(get("proposer.max_in_flight"));
  c.template_set = get("proposer.template_set");
  return c;
}

sim::FaultModel Settings::faults() const {
  sim::FaultModel f;
  f.invalid_action_rate = as_real(get("faults.invalid_action_rate"));
  f.local_false_negative_rate = as_real(get("faults.local_false_negative_rate"));
  f.global_false_negative_rate = as_real(get("faults.global_false_negative_rate"));
  f.ranking_noise = as_real(get("faults.ranking_noise"));
  f.seed = as_uint(get("faults.seed"));
  return f;
}

sim::OracleOptions Settings::oracle() const {
  sim::OracleOptions o;
  o.state_limit = as_uint(get("oracle.state_limit"));
  o.fallback_cap = as_int(get("oracle.fallback_cap"));
  o.fallback_state_limit = as_uint(get("oracle.fallback_state_limit"));
  return o;
}

std::string Settings::dump() const {
  std::string out;
  for (const auto& k : known_keys()) {
    std::string v = get(k.key);
    if (k.key == "proposer.api_key" && !v.empty()) v = "***";
    out += k.key + " = " + v + "\n";
  }
  return out;
}

}  // namespace vp::config
