#include <map>
#include <string>

#include "doctest.h"
#include "vplan/config/settings.hpp"

using namespace vp;
using config::ConfigError;
using config::Settings;

TEST_CASE("defaults mirror the library structs") {
  Settings s;
  const search::SearchConfig def;
  CHECK(s.get("search.k") == std::to_string(def.k));
  CHECK(s.get("search.max_states") == std::to_string(def.max_states));
  CHECK(s.get("proposer.kind") == "oracle");
  CHECK(s.get("proposer.temperatures") == "0,0.3,0.7,1");
  CHECK(s.proposer().temperatures == proposer::ProposerConfig{}.temperatures);
  CHECK(s.faults().local_false_negative_rate == 0.0);

  const auto simple = search::SearchConfig::simple();
  CHECK(s.search(sim::DomainId::blocksworld).max_states == simple.max_states);
  CHECK(s.search(sim::DomainId::blocksworld).max_depth == simple.max_depth);
  CHECK(s.search(sim::DomainId::parking).max_states == def.max_states);
  CHECK(s.search(std::nullopt).max_states == def.max_states);
}

TEST_CASE("later sources override earlier ones") {
  Settings s;
  s.load_text("# comment\nsearch.k = 2\n\nproposer.model = from-file  # trailing\nsearch.max_states = 90\n");
  CHECK(s.get("search.k") == "2");
  CHECK(s.get("proposer.model") == "from-file");

  std::map<std::string, std::string> env{{"VP_MODEL", "from-env"}, {"VP_ENDPOINT", "http://localhost:9"}};
  s.load_env([&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  CHECK(s.get("proposer.model") == "from-env");
  CHECK(s.proposer().endpoint == "http://localhost:9");
  CHECK(s.get("proposer.api_key").empty());

  s.set("model", "from-flag");
  s.set("max_states", "1");
  CHECK(s.proposer().model == "from-flag");
  // explicit keys beat the blocksworld budget preset
  CHECK(s.search(sim::DomainId::blocksworld).max_states == 1);
  CHECK(s.search(sim::DomainId::blocksworld).k == 2);
  CHECK(s.search(sim::DomainId::blocksworld).max_depth == search::SearchConfig::simple().max_depth);
}

TEST_CASE("typed values") {
  Settings s;
  s.set("search.no_beam", "yes");
  s.set("faults.ranking_noise", "0.25");
  s.set("proposer.temperatures", "0.1, 0.2");
  s.set("faults.seed", "18446744073709551615");
  CHECK(s.search(sim::DomainId::tetris).ablations.no_beam);
  CHECK(s.faults().ranking_noise == 0.25);
  CHECK(s.faults().seed == 18446744073709551615ull);
  CHECK(s.proposer().temperatures == std::vector<double>{0.1, 0.2});
  s.set("proposer.kind", "live");
  CHECK(s.get("proposer.kind") == "live");
}

TEST_CASE("bad keys and values are rejected") {
  Settings s;
  CHECK_THROWS_AS(s.set("search.bogus", "1"), ConfigError);
  CHECK_THROWS_AS(s.set("bogus", "1"), ConfigError);
  CHECK_THROWS_WITH_AS(s.set("seed", "1"), doctest::Contains("ambiguous"), ConfigError);
  CHECK_THROWS_AS(s.set("search.k", "four"), ConfigError);
  CHECK_THROWS_AS(s.set("search.k", "4.5"), ConfigError);
  CHECK_THROWS_AS(s.set("search.seed", "-1"), ConfigError);
  CHECK_THROWS_AS(s.set("search.no_beam", "maybe"), ConfigError);
  CHECK_THROWS_AS(s.set("proposer.kind", "human"), ConfigError);
  CHECK_THROWS_AS(s.set("proposer.temperatures", ""), ConfigError);
  CHECK_THROWS_WITH_AS(s.load_text("search.k = 2\nsearch.n 3\n", "x.conf"), "x.conf:2: expected 'key = value'", ConfigError);
  CHECK_THROWS_WITH_AS(s.load_text("nope = 1\n", "x.conf"), "x.conf:1: unknown key 'nope'", ConfigError);
  CHECK_THROWS_AS(s.load_file("/nonexistent/vplan.conf"), ConfigError);
  CHECK_THROWS_AS(s.get("search.bogus"), ConfigError);
  CHECK(s.get("search.k") == "2");  // from the first line of the failed load
}

TEST_CASE("dump lists every key once and masks the api key") {
  Settings s;
  s.set("proposer.api_key", "secret");
  const std::string out = s.dump();
  CHECK(out.find("secret") == std::string::npos);
  CHECK(out.find("proposer.api_key = ***\n") != std::string::npos);
  int lines = 0;
  for (char c : out) lines += c == '\n';
  CHECK(lines == static_cast<int>(config::known_keys().size()));

  Settings back;
  std::string reload;
  for (const auto& k : config::known_keys())
    if (k.key != "proposer.api_key") reload += k.key + " = " + s.get(k.key) + "\n";
  back.load_text(reload);
  CHECK(back.dump() == Settings{}.dump());
}
