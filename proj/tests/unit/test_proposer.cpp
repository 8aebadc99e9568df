#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "vplan/diagram/schema.hpp"
#include "vplan/diagram/style.hpp"
#include "vplan/nl/bridge.hpp"
#include "vplan/pddl/parser.hpp"
#include "vplan/pddl/semantics.hpp"
#include "vplan/proposer/live.hpp"
#include "vplan/proposer/oracle.hpp"
#include "vplan/sim/domains.hpp"
#include "vplan/sim/rng.hpp"

using namespace vp;
using nlohmann::json;
using proposer::CallTag;
using proposer::NodeBundle;
using proposer::ProposerError;
using sim::DomainId;

namespace {

const char* kOnAB = R"(
(define (problem ab) (:domain blocksworld)
  (:objects a b - block)
  (:init (handempty) (on a b) (ontable b) (clear a))
  (:goal (and (ontable a))))
)";

const pddl::DomainDef& blocks() { return sim::corpus_domain(DomainId::blocksworld); }

NodeBundle node(std::uint64_t id, std::string text) {
  NodeBundle b;
  b.id = id;
  b.state_text = std::move(text);
  return b;
}

std::string chat_reply(const std::string& content) {
  return json({{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}).dump();
}

// A local chat-completions stub on an ephemeral port.
class StubServer {
 public:
  explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post(".*", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

proposer::ProposerConfig fast_config(const std::string& endpoint) {
  proposer::ProposerConfig c;
  c.endpoint = endpoint;
  c.model = "stub-model";
  c.timeout_s = 5;
  c.backoff_ms = 1;
  return c;
}

std::vector<proposer::ChatTurn> hello() { return {proposer::ChatTurn::text(proposer::Role::user, "hello")}; }

// Scripted model: pops replies in order and records every conversation.
struct ScriptedModel {
  std::deque<std::string> replies;
  std::vector<std::vector<proposer::ChatTurn>> seen;
  std::vector<double> temperatures;

  proposer::ModelFn fn() {
    return [this](const std::vector<proposer::ChatTurn>& turns, double t) {
      seen.push_back(turns);
      temperatures.push_back(t);
      REQUIRE_FALSE(replies.empty());
      std::string r = replies.front();
      replies.pop_front();
      return r;
    };
  }
};

}  // namespace

TEST_CASE("fault calibration: verify_local false negatives at rate 0.25") {
  const std::size_t calls = 1000;
  // Valid transitions from seeded random walks over generated instances.
  int fails = 0, clean_fails = 0;
  std::size_t i = 0;
  for (std::uint64_t seed = 1; i < calls; ++seed) {
    auto inst = sim::gen_instance(DomainId::blocksworld, sim::GenParams::smallest(DomainId::blocksworld, seed));
    sim::FaultModel faults;
    faults.local_false_negative_rate = 0.25;
    faults.seed = 99;
    proposer::OracleProposer faulty(blocks(), inst, faults);
    proposer::OracleProposer clean(blocks(), inst);
    const auto& table = nl::PhraseTable::for_domain("blocksworld");
    auto actions = pddl::ground(blocks(), inst, pddl::GroundingMode::static_pruned);
    sim::Rng rng(seed);
    pddl::State s = inst.init;
    for (int step = 0; step < 40 && i < calls; ++step, ++i) {
      std::vector<const pddl::GroundAction*> ok;
      for (const auto& a : actions)
        if (pddl::applicable(s, a)) ok.push_back(&a);
      const auto* a = ok[rng.below(ok.size())];
      pddl::State t = pddl::apply(s, *a);
      auto pb = node(i, nl::state_to_nl(s, blocks(), inst, table));
      auto cb = node(i + 1, nl::state_to_nl(t, blocks(), inst, table));
      auto text = nl::action_to_nl(a->name, a->args, blocks(), inst, table);
      CallTag tag{i, 0, 0};
      if (!clean.verify_local(tag, pb, cb, text).pass) ++clean_fails;
      if (!faulty.verify_local(tag, pb, cb, text).pass) ++fails;
      s = t;
    }
  }
  CHECK(clean_fails == 0);
  double rate = fails / static_cast<double>(calls);
  CAPTURE(rate);
  CHECK(rate >= 0.21);
  CHECK(rate <= 0.29);
}

TEST_CASE("oracle verify_local judges transitions") {
  for (DomainId id : sim::all_domains()) {
    CAPTURE(sim::to_string(id));
    auto p = sim::gen_instance(id, sim::GenParams::smallest(id, 1));
    const auto& d = sim::corpus_domain(id);
    const auto& table = nl::PhraseTable::for_domain(d.name);
    proposer::OracleProposer prop(d, p);
    auto actions = pddl::ground(d, p, pddl::GroundingMode::static_pruned);
    const pddl::GroundAction* good = nullptr;
    const pddl::GroundAction* bad = nullptr;
    for (const auto& a : actions) {
      if (pddl::applicable(p.init, a)) {
        if (!good) good = &a;
      } else if (!bad) {
        bad = &a;
      }
    }
    REQUIRE(good);
    REQUIRE(bad);
    auto init = node(0, nl::state_to_nl(p.init, d, p, table));
    auto next = node(1, nl::state_to_nl(pddl::apply(p.init, *good), d, p, table));
    auto good_text = nl::action_to_nl(good->name, good->args, d, p, table);
    CHECK(prop.verify_local({}, init, next, good_text).pass);
    // wrong result
    auto same = prop.verify_local({}, init, init, good_text);
    CHECK_FALSE(same.pass);
    CHECK_FALSE(same.critique.empty());
    // inapplicable action
    auto bad_next = node(1, nl::state_to_nl(pddl::apply_unchecked(p.init, *bad), d, p, table));
    CHECK_FALSE(prop.verify_local({}, init, bad_next, nl::action_to_nl(bad->name, bad->args, d, p, table)).pass);
    // garbage
    CHECK_FALSE(prop.verify_local({}, init, next, "juggle the moon").pass);
  }
}

TEST_CASE("oracle propose_action follows goal distance") {
  for (DomainId id : sim::all_domains()) {
    CAPTURE(sim::to_string(id));
    auto p = sim::gen_instance(id, sim::GenParams::smallest(id, 2));
    const auto& d = sim::corpus_domain(id);
    proposer::OracleProposer prop(d, p);
    const auto& table = prop.phrases();
    auto root = node(0, nl::state_to_nl(p.init, d, p, table));
    auto goal = node(1, "");
    auto proposal = prop.propose_action({0, 0, 0}, root, goal, {});
    auto step = nl::action_from_nl(proposal.action_text, d, p, table);
    auto a = pddl::resolve(d, p, step);
    REQUIRE(pddl::applicable(p.init, a));
    auto next = pddl::apply(p.init, a);
    CHECK(prop.parse_state(proposal.next_state_text).text() == next.text());
    auto before = sim::bfs_distance(d, p, 30);
    auto moved = p;
    moved.init = next;
    auto after = sim::bfs_distance(d, moved, 30);
    REQUIRE(before);
    REQUIRE(after);
    CHECK(*after == *before - 1);
  }
}

TEST_CASE("oracle invalid-action faults propose inapplicable actions") {
  auto p = sim::gen_instance(DomainId::parking, sim::GenParams::smallest(DomainId::parking, 3));
  const auto& d = sim::corpus_domain(DomainId::parking);
  sim::FaultModel faults;
  faults.invalid_action_rate = 1.0;
  proposer::OracleProposer prop(d, p, faults);
  auto root = node(0, nl::state_to_nl(p.init, d, p, prop.phrases()));
  for (std::uint32_t sample = 0; sample < 4; ++sample) {
    auto proposal = prop.propose_action({0, sample, 0}, root, node(1, ""), {});
    auto a = pddl::resolve(d, p, nl::action_from_nl(proposal.action_text, d, p, prop.phrases()));
    CHECK_FALSE(pddl::applicable(p.init, a));
    CHECK_FALSE(prop.verify_local({0, sample, 0}, root, node(2, proposal.next_state_text), proposal.action_text).pass);
  }
}

TEST_CASE("oracle samples rotate through successors") {
  auto p = pddl::parse_problem(kOnAB, blocks());
  proposer::OracleProposer prop(blocks(), p);
  auto root = node(0, nl::state_to_nl(p.init, blocks(), p, prop.phrases()));
  std::set<std::string> actions;
  for (std::uint32_t sample = 0; sample < 4; ++sample) {
    actions.insert(prop.propose_action({0, sample, 0}, root, node(1, ""), {}).action_text);
  }
  // only unstack a from b is applicable
  CHECK(actions.size() == 1);
  CHECK(prop.counts().at("propose_action") == 4);
}

TEST_CASE("oracle global check replays the path") {
  auto p = pddl::parse_problem(kOnAB, blocks());
  proposer::OracleProposer prop(blocks(), p);
  auto init = node(0, "");
  auto goal = node(1, "");
  CHECK(prop.verify_global({}, {"unstack block a from block b"}, init, goal).pass);
  CHECK(prop.verify_global({}, {"unstack block a from block b", "put down block a"}, init, goal).pass);
  // back to the start without progress
  CHECK_FALSE(prop.verify_global({}, {"unstack block a from block b", "stack block a on top of block b"}, init, goal).pass);
  CHECK_FALSE(prop.verify_global({}, {"put down block a"}, init, goal).pass);
  CHECK_FALSE(prop.verify_global({}, {"launch block a"}, init, goal).pass);
}

TEST_CASE("oracle goal check and state ranking") {
  auto p = sim::gen_instance(DomainId::blocksworld, sim::GenParams::smallest(DomainId::blocksworld, 5));
  proposer::OracleProposer prop(blocks(), p);
  const auto& table = prop.phrases();
  pddl::State goal_state = p.init;
  auto bfs = sim::bfs(prop.task(), 30);
  REQUIRE(bfs.distance);
  for (const auto& a : bfs.plan) goal_state = pddl::apply(goal_state, a);
  auto goal = node(1, "");
  CHECK(prop.check_goal({}, node(5, nl::state_to_nl(goal_state, blocks(), p, table)), goal));
  CHECK_FALSE(prop.check_goal({}, node(0, nl::state_to_nl(p.init, blocks(), p, table)), goal));

  // states along the shortest plan, shuffled
  std::vector<pddl::State> along{p.init};
  for (const auto& a : bfs.plan) along.push_back(pddl::apply(along.back(), a));
  std::vector<NodeBundle> cands;
  for (std::size_t i = 0; i < along.size(); ++i) cands.push_back(node(100 + i, nl::state_to_nl(along[i], blocks(), p, table)));
  std::reverse(cands.begin(), cands.end());
  auto order = prop.rank_states({}, cands, goal);
  REQUIRE(order.size() == cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);  // reversed = closest first
  CHECK_THROWS_AS(prop.rank_states({}, {}, goal), ProposerError);
}

TEST_CASE("oracle schemas pass reflection and mutations do not") {
  for (DomainId id : sim::all_domains()) {
    CAPTURE(sim::to_string(id));
    auto p = sim::gen_instance(id, sim::GenParams::smallest(id, 4));
    const auto& d = sim::corpus_domain(id);
    proposer::OracleProposer prop(d, p);
    auto text = nl::state_to_nl(p.init, d, p, prop.phrases());
    auto style = diagram::default_style(d);
    auto schema_text = prop.make_schema({}, text, "none", style);
    auto schema = diagram::parse_schema(schema_text);
    CHECK(diagram::check_schema(schema, diagram::object_ids(d, p)).empty());
    CHECK(prop.reflect_schema({}, schema_text, text, "none").pass);

    auto moved = schema;
    auto& victim = moved.objects.back();
    victim.pos = diagram::Position{};
    victim.pos.x = 123.25;
    victim.pos.y = 77.5;
    auto verdict = prop.reflect_schema({}, diagram::to_text(moved), text, "none");
    CHECK_FALSE(verdict.pass);
    CHECK(verdict.critique.find(victim.id) != std::string::npos);

    auto dropped = schema;
    std::string gone = dropped.objects.front().id;
    dropped.objects.erase(dropped.objects.begin());
    verdict = prop.reflect_schema({}, diagram::to_text(dropped), text, "none");
    CHECK_FALSE(verdict.pass);
    CHECK(verdict.critique.find("missing: " + gone) != std::string::npos);
  }
}

TEST_CASE("oracle domain schemas and diagram ranking") {
  auto p = sim::gen_instance(DomainId::tetris, sim::GenParams::smallest(DomainId::tetris, 1));
  const auto& d = sim::corpus_domain(DomainId::tetris);
  proposer::OracleProposer prop(d, p);
  auto text = nl::state_to_nl(p.init, d, p, prop.phrases());
  std::vector<diagram::DiagramSchema> cands;
  for (std::uint32_t i = 0; i < 3; ++i) cands.push_back(diagram::parse_schema(prop.propose_domain_schema({0, i, 0}, "", text)));
  CHECK(diagram::to_text(cands[0]) != diagram::to_text(cands[1]));
  auto broken = cands[0];
  broken.objects.pop_back();
  cands.insert(cands.begin(), broken);
  auto order = prop.rank_diagrams({}, "", cands);
  CHECK(order.size() == 4);
  CHECK(order.back() == 0);
}

TEST_CASE("reply parsers") {
  using namespace proposer::reply;
  SUBCASE("proposal") {
    auto p = parse_proposal("**ACTION:** pick up block a\nNEXT_STATE:\nthe hand holds block a.\nblock b is clear.\n"
                            "RATIONALE: closer to the goal\n");
    REQUIRE(p);
    CHECK(p->action_text == "pick up block a");
    CHECK(p->next_state_text == "the hand holds block a.\nblock b is clear.\n");
    CHECK(p->rationale == "closer to the goal");
    CHECK_FALSE(parse_proposal("NEXT_STATE: x"));
    CHECK_FALSE(parse_proposal("I would pick up block a."));
    CHECK_FALSE(parse_proposal("ACTION:   \n"));
  }
  SUBCASE("verdict") {
    CHECK(parse_verdict("VERDICT: PASS\nCRITIQUE: none")->pass);
    auto f = parse_verdict("verdict: fail - bad\ncritique: block a is not clear");
    REQUIRE(f);
    CHECK_FALSE(f->pass);
    CHECK(f->critique == "block a is not clear");
    CHECK(parse_verdict("VERDICT: FAIL\nCRITIQUE: \"none\"")->critique == "rejected");
    CHECK_FALSE(parse_verdict("looks fine to me"));
    CHECK_FALSE(parse_verdict("VERDICT: maybe"));
  }
  SUBCASE("goal") {
    CHECK(parse_goal("GOAL: YES") == true);
    CHECK(parse_goal("`GOAL`: no, block c is misplaced") == false);
    CHECK_FALSE(parse_goal("GOALS: yes"));
    CHECK_FALSE(parse_goal("yes"));
  }
  SUBCASE("ranking") {
    CHECK(parse_ranking("RANKING: 2, 0, 1", 3) == std::vector<std::size_t>{2, 0, 1});
    CHECK(parse_ranking("RANKING: [1 > 0]", 2) == std::vector<std::size_t>{1, 0});
    CHECK_FALSE(parse_ranking("RANKING: 0, 0, 1", 3));
    CHECK_FALSE(parse_ranking("RANKING: 0, 1", 3));
    CHECK_FALSE(parse_ranking("RANKING: 0, 3, 1", 3));
    CHECK_FALSE(parse_ranking("RANKING: first, second", 2));
    CHECK_FALSE(parse_ranking("0, 1", 2));
  }
  SUBCASE("schema fences") {
    CHECK(strip_fences("Here it is:\n```\ncanvas 4x4\nobject a shape=square color=red size=1x1 pos=0,0\n```\n") ==
          "canvas 4x4\nobject a shape=square color=red size=1x1 pos=0,0\n");
    CHECK(strip_fences("no schema here").empty());
  }
}

TEST_CASE("builtin prompt templates") {
  const auto& set = proposer::TemplateSet::builtin();
  CHECK(set.id() == "v1");
  for (const auto& name : proposer::TemplateSet::required_names()) CHECK_NOTHROW(set.get(name));
  const auto& t = set.get("local_check");
  proposer::TemplateVars vars{{"domain_nl", "rules"},     {"parent_text", "before"},
                              {"child_text", "after"},    {"action_text", "act"},
                              {"parent_diagram", proposer::TemplateValue::image("<svg/>", "image/svg+xml")},
                              {"child_diagram", "plain text stands in"}};
  auto turns = t.render(vars);
  REQUIRE(turns.size() == 2);
  CHECK(turns[0].role == proposer::Role::system);
  CHECK(turns[0].flat_text().find("rules") != std::string::npos);
  int images = 0;
  for (const auto& part : turns[1].parts) images += part.kind == proposer::ContentPart::Kind::image;
  CHECK(images == 1);
  CHECK(turns[1].flat_text().find("plain text stands in") != std::string::npos);
  vars.erase("action_text");
  CHECK_THROWS_AS(t.render(vars), proposer::TemplateError);
  CHECK_THROWS_AS(proposer::PromptTemplate::parse("x", "# requires: a\n---user\n{{b}}\n"), proposer::TemplateError);
  CHECK_THROWS_AS(set.get("no_such_template"), proposer::TemplateError);
}

TEST_CASE("chat request and response envelopes") {
  proposer::ChatTurn user = proposer::ChatTurn::text(proposer::Role::user, "look");
  user.add_image("abc", "image/png");
  auto body = json::parse(proposer::chat_request_json(
      {proposer::ChatTurn::text(proposer::Role::system, "be brief"), user}, 0.7, "m1"));
  CHECK(body["model"] == "m1");
  CHECK(body["temperature"] == 0.7);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][1]["content"][0]["text"] == "look");
  CHECK(body["messages"][1]["content"][1]["image_url"]["url"] == "data:image/png;base64,YWJj");

  proposer::ChatTurn sys_image = proposer::ChatTurn::text(proposer::Role::system, "x");
  sys_image.add_image("abc", "image/png");
  CHECK_THROWS_AS(proposer::chat_request_json({sys_image}, 0, "m"), std::invalid_argument);

  CHECK(proposer::chat_response_text(chat_reply("hi")) == "hi");
  CHECK(proposer::chat_response_text(
            R"({"choices":[{"message":{"content":[{"type":"text","text":"a"},{"type":"text","text":"b"}]}}]})") == "ab");
  for (const char* bad : {"not json", "{}", R"({"choices":[]})", R"({"choices":[{"message":{}}]})"}) {
    try {
      proposer::chat_response_text(bad);
      FAIL("expected malformed_envelope for " << bad);
    } catch (const ProposerError& e) {
      CHECK(e.kind() == ProposerError::Kind::malformed_envelope);
    }
  }
}

TEST_CASE("proposer config validation") {
  proposer::ProposerConfig c;
  c.validate();
  CHECK(c.temperatures == std::vector<double>{0.0, 0.3, 0.7, 1.0});
  CHECK(c.max_retries == 3);
  c.temperatures.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.timeout_s = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.max_in_flight = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("call_model against a stub server") {
  SUBCASE("echo with auth and path") {
    std::string path, auth, model;
    StubServer server([&](const httplib::Request& req, httplib::Response& res) {
      path = req.path;
      auth = req.get_header_value("Authorization");
      auto body = json::parse(req.body);
      model = body["model"];
      res.set_content(chat_reply("echo: " + body["messages"][0]["content"][0]["text"].get<std::string>()),
                      "application/json");
    });
    auto c = fast_config(server.url());
    c.api_key = "k123";
    CHECK(proposer::call_model(hello(), 0, c) == "echo: hello");
    CHECK(path == "/v1/chat/completions");
    CHECK(auth == "Bearer k123");
    CHECK(model == "stub-model");
    c.endpoint = server.url() + "/api/v2/";
    proposer::call_model(hello(), 0, c);
    CHECK(path == "/api/v2/chat/completions");
    c.endpoint = server.url() + "/x/chat/completions";
    proposer::call_model(hello(), 0, c);
    CHECK(path == "/x/chat/completions");
  }
  SUBCASE("server errors are retried") {
    std::atomic<int> hits{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
      if (++hits <= 2) {
        res.status = 500;
        res.set_content("boom", "text/plain");
      } else {
        res.set_content(chat_reply("ok"), "application/json");
      }
    });
    CHECK(proposer::call_model(hello(), 0, fast_config(server.url())) == "ok");
    CHECK(hits == 3);
  }
  SUBCASE("retries run out") {
    std::atomic<int> hits{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.status = 503;
    });
    auto c = fast_config(server.url());
    c.max_retries = 2;
    try {
      proposer::call_model(hello(), 0, c);
      FAIL("expected http_status");
    } catch (const ProposerError& e) {
      CHECK(e.kind() == ProposerError::Kind::http_status);
    }
    CHECK(hits == 3);
  }
  SUBCASE("client errors are not retried") {
    std::atomic<int> hits{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.status = 400;
    });
    CHECK_THROWS_AS(proposer::call_model(hello(), 0, fast_config(server.url())), ProposerError);
    CHECK(hits == 1);
  }
  SUBCASE("timeout") {
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1500));
      res.set_content(chat_reply("late"), "application/json");
    });
    auto c = fast_config(server.url());
    c.timeout_s = 0.3;
    c.max_retries = 0;
    try {
      proposer::call_model(hello(), 0, c);
      FAIL("expected timeout");
    } catch (const ProposerError& e) {
      CHECK(e.kind() == ProposerError::Kind::timeout);
    }
  }
  SUBCASE("malformed envelope") {
    StubServer server([&](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
    try {
      proposer::call_model(hello(), 0, fast_config(server.url()));
      FAIL("expected malformed_envelope");
    } catch (const ProposerError& e) {
      CHECK(e.kind() == ProposerError::Kind::malformed_envelope);
    }
  }
  SUBCASE("connection refused") {
    std::string url;
    {
      StubServer server([](const httplib::Request&, httplib::Response&) {});
      url = server.url();
    }
    auto c = fast_config(url);
    c.max_retries = 1;
    try {
      proposer::call_model(hello(), 0, c);
      FAIL("expected transport");
    } catch (const ProposerError& e) {
      CHECK(e.kind() == ProposerError::Kind::transport);
    }
  }
}

TEST_CASE("HttpModel logs each exchange") {
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_reply("logged"), "application/json");
  });
  auto dir = std::filesystem::temp_directory_path() / "vplan_test_http_log";
  std::filesystem::remove_all(dir);
  proposer::HttpModel model(fast_config(server.url()), dir.string());
  auto fn = model.fn();
  CHECK(fn(hello(), 0.3) == "logged");
  CHECK(fn(hello(), 0.3) == "logged");
  CHECK(std::filesystem::exists(dir / "0001.request.json"));
  CHECK(std::filesystem::exists(dir / "0002.response.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("live proposer with a scripted model") {
  auto dir = std::filesystem::temp_directory_path() / "vplan_test_live";
  std::filesystem::remove_all(dir);
  proposer::ProposerConfig c;
  c.max_retries = 2;
  c.transcript_dir = dir.string();
  ScriptedModel model;
  proposer::LiveProposer live(c, proposer::TemplateSet::builtin(), model.fn(), "the rules");

  NodeBundle parent = node(7, "block a is on the table.\n");
  parent.diagram_svg = "<svg/>";
  NodeBundle goal = node(1, "block a is on block b.\n");

  SUBCASE("proposal after one malformed reply") {
    model.replies = {"I think we should move a block.",
                     "ACTION: pick up block a\nNEXT_STATE:\nthe hand holds block a.\nRATIONALE: needed"};
    auto p = live.propose_action({7, 2, 0}, parent, goal, {"put down block b"});
    CHECK(p.action_text == "pick up block a");
    CHECK(model.seen.size() == 2);
    CHECK(model.temperatures[0] == doctest::Approx(0.7));
    std::string prompt = model.seen[0].back().flat_text();
    CHECK(prompt.find("1. put down block b") != std::string::npos);
    CHECK(prompt.find("[image]") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "state_7" / "attempts" / "001_propose_action.json"));
    CHECK(std::filesystem::exists(dir / "state_7" / "attempts" / "002_propose_action.json"));
    CHECK(live.counts().at("propose_action") == 1);
  }
  SUBCASE("unparseable after the retries") {
    model.replies = {"no", "still no", "nope"};
    try {
      live.verify_local({7, 0, 0}, parent, node(8, "x"), "act");
      FAIL("expected unparseable_output");
    } catch (const ProposerError& e) {
      CHECK(e.kind() == ProposerError::Kind::unparseable_output);
    }
    CHECK(model.seen.size() == 3);
  }
  SUBCASE("verdicts, goal and ranking") {
    model.replies = {"VERDICT: FAIL\nCRITIQUE: block a is not clear", "VERDICT: PASS\nCRITIQUE: none", "GOAL: no",
                     "RANKING: 1, 0"};
    auto v = live.verify_local({7, 0, 0}, parent, node(8, "x"), "act");
    CHECK_FALSE(v.pass);
    CHECK(v.critique == "block a is not clear");
    CHECK(live.verify_global({7, 0, 0}, {"a"}, parent, goal).pass);
    CHECK_FALSE(live.check_goal({7, 0, 0}, parent, goal));
    CHECK(live.rank_states({7, 0, 0}, {parent, node(9, "y")}, goal) == std::vector<std::size_t>{1, 0});
    CHECK(live.rank_states({7, 0, 0}, {parent}, goal) == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(live.rank_states({7, 0, 0}, {}, goal), ProposerError);
    CHECK(model.replies.empty());
  }
  SUBCASE("schemas must parse") {
    model.replies = {"object a shape=blob", "```\ncanvas 4x4\nobject a shape=square color=red size=1x1 pos=0,0\n```"};
    auto s = live.make_schema({7, 0, 0}, "block a is on the table.", "none", diagram::StyleMap{});
    CHECK(s == "canvas 4x4\nobject a shape=square color=red size=1x1 pos=0,0\n");
  }
  std::filesystem::remove_all(dir);
}
