#include <algorithm>
#include <set>
#include <string>

#include "doctest.h"
#include "vplan/nl/bridge.hpp"
#include "vplan/pddl/parser.hpp"
#include "vplan/pddl/semantics.hpp"
#include "vplan/sim/domains.hpp"
#include "vplan/sim/rng.hpp"
#include "vplan/sim/search.hpp"

using namespace vp;
using sim::DomainId;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

const char* kOnAB = R"(
(define (problem ab) (:domain blocksworld)
  (:objects a b - block)
  (:init (handempty) (on a b) (ontable b) (clear a))
  (:goal (and (ontable a))))
)";

const nl::PhraseTable& table(DomainId id) { return nl::PhraseTable::for_domain(sim::to_string(id)); }

}  // namespace

TEST_CASE("every corpus domain is covered by its phrase table") {
  for (DomainId id : sim::all_domains()) {
    CHECK_NOTHROW(nl::check_coverage(sim::corpus_domain(id), table(id)));
  }
}

TEST_CASE("blocksworld domain text has one paragraph per action") {
  const auto& d = sim::corpus_domain(DomainId::blocksworld);
  std::string text = nl::domain_to_nl(d, table(DomainId::blocksworld));
  CHECK(count_of(text, "\nAction: ") == 4);
  CHECK(count_of(text, "\n\n") == 4);
  CHECK(text.find("Action: Pick up block ?x.") != std::string::npos);
}

TEST_CASE("uncovered symbols are reported") {
  auto d = sim::corpus_domain(DomainId::blocksworld);
  auto t = nl::PhraseTable::parse(
      "type block: block\n"
      "pred on: {0} is on {1}\npred ontable: {0} is on the table\npred clear: {0} is clear\n"
      "pred handempty: the hand is empty\npred holding: the hand holds {0}\n"
      "action pick-up: pick up {0}\naction put-down: put down {0}\naction stack: stack {0} on top of {1}\n");
  try {
    nl::domain_to_nl(d, t);
    FAIL("expected uncovered_symbol");
  } catch (const nl::NlError& e) {
    CHECK(e.kind() == nl::NlError::Kind::uncovered_symbol);
  }
  CHECK_THROWS_AS(nl::PhraseTable::parse("verb x: y\n"), nl::NlError);
  CHECK_THROWS_AS(nl::PhraseTable::parse("pred on: a\npred on: b\n"), nl::NlError);
}

TEST_CASE("instance text") {
  const auto& d = sim::corpus_domain(DomainId::blocksworld);
  auto p = pddl::parse_problem(kOnAB, d);
  std::string text = nl::instance_to_nl(d, p, table(DomainId::blocksworld));
  CHECK(text.find("block a is on block b") != std::string::npos);
  CHECK(text == nl::instance_to_nl(d, p, table(DomainId::blocksworld)));

  auto trivial = p;
  trivial.goal_pos.clear();
  CHECK(nl::instance_to_nl(d, trivial, table(DomainId::blocksworld)).find("The goal is trivially satisfied.") !=
        std::string::npos);

  auto negated = p;
  negated.goal_neg = {{"on", {"a", "b"}}};
  CHECK(nl::instance_to_nl(d, negated, table(DomainId::blocksworld))
            .find("It is not the case that block a is on block b.") != std::string::npos);
}

TEST_CASE("instance text separates distinct problems") {
  for (DomainId id : sim::all_domains()) {
    std::set<std::string> texts, canon;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      auto p = sim::gen_instance(id, sim::GenParams::smallest(id, seed));
      p.name = "same";
      canon.insert(pddl::to_pddl(p));
      texts.insert(nl::instance_to_nl(sim::corpus_domain(id), p, table(id)));
    }
    CHECK(texts.size() == canon.size());
  }
}

TEST_CASE("action text inversion") {
  const auto& d = sim::corpus_domain(DomainId::blocksworld);
  auto p = pddl::parse_problem(kOnAB, d);
  const auto& t = table(DomainId::blocksworld);
  auto step = nl::action_from_nl("pick up block a", d, p, t);
  CHECK(step.name == "pick-up");
  CHECK(step.args == std::vector<std::string>{"a"});
  CHECK(nl::plan_to_pddl(std::vector<std::string>{"pick up block a"}, d, p, t) == "(pick-up a)\n");
  CHECK(nl::action_from_nl("  Stack block a on top of block b. ", d, p, t).args ==
        std::vector<std::string>{"a", "b"});
  CHECK(nl::action_from_nl("stack a on top of b", d, p, t).name == "stack");
  try {
    nl::action_from_nl("fly to the moon", d, p, t);
    FAIL("expected unresolvable_action");
  } catch (const nl::NlError& e) {
    CHECK(e.kind() == nl::NlError::Kind::unresolvable_action);
  }
  CHECK_THROWS_AS(nl::action_from_nl("pick up block z", d, p, t), nl::NlError);
  CHECK(nl::canonical_action_text("  Pick  UP block a. ") == "pick up block a");
}

TEST_CASE("random ground actions survive the text round trip") {
  for (DomainId id : sim::all_domains()) {
    const auto& d = sim::corpus_domain(id);
    auto p = sim::gen_instance(id, sim::GenParams::smallest(id, 1));
    auto mode = id == DomainId::tetris ? pddl::GroundingMode::static_pruned : pddl::GroundingMode::all;
    auto grounded = pddl::ground(d, p, mode);
    REQUIRE(!grounded.empty());
    sim::Rng rng(17);
    int exact = 0;
    std::vector<std::string> texts;
    std::string expected;
    for (int i = 0; i < 200; ++i) {
      const auto& a = grounded[rng.below(grounded.size())];
      std::string text = nl::action_to_nl(a.name, a.args, d, p, table(id));
      auto back = nl::action_from_nl(text, d, p, table(id));
      CAPTURE(text);
      CHECK(back.name == a.name);
      CHECK(back.args == a.args);
      exact += back.name == a.name && back.args == a.args;
      texts.push_back(text);
      expected += a.text() + "\n";
    }
    CHECK(exact == 200);
    CHECK(nl::plan_to_pddl(texts, d, p, table(id)) == expected);
  }
}

TEST_CASE("state text round trip omits statics and restores them") {
  for (DomainId id : sim::all_domains()) {
    const auto& d = sim::corpus_domain(id);
    auto p = sim::gen_instance(id, sim::GenParams::smallest(id, 2));
    auto grounded = pddl::ground(d, p, pddl::GroundingMode::static_pruned);
    sim::Rng rng(3);
    pddl::State s = p.init;
    for (int i = 0; i < 10; ++i) {
      std::string text = nl::state_to_nl(s, d, p, table(id));
      for (const auto& pred : d.static_predicates()) CHECK(text.find("(" + pred) == std::string::npos);
      CHECK(nl::state_from_nl(text, d, p, table(id)) == s);
      auto next = sim::successors(s, grounded);
      if (next.empty()) break;
      s = next[rng.below(next.size())].second;
    }
  }
}

TEST_CASE("prompt mode returns the model reply and validates plans") {
  const auto& d = sim::corpus_domain(DomainId::blocksworld);
  auto p = pddl::parse_problem(kOnAB, d);
  std::string seen;
  proposer::ModelFn echo = [&](const std::vector<proposer::ChatTurn>& turns, double) {
    seen.clear();
    for (const auto& t : turns) seen += t.flat_text() + "\n";
    return std::string("stub completion");
  };
  CHECK(nl::domain_to_nl(d, echo) == "stub completion");
  CHECK(count_of(seen, "Example domain:") == 5);
  CHECK(seen.find("(define (domain parking)") != std::string::npos);
  CHECK(count_of(seen, "(define (domain blocksworld)") == 1);

  CHECK(nl::instance_to_nl(d, p, echo) == "stub completion");
  CHECK(seen.find("(define (problem ab)") != std::string::npos);

  proposer::ModelFn planner = [](const std::vector<proposer::ChatTurn>&, double) {
    return std::string("(unstack a b)\n(put-down a)\n");
  };
  std::vector<std::string> acts{"unstack block a from block b", "put down block a"};
  CHECK(nl::plan_to_pddl(acts, d, p, planner) == "(unstack a b)\n(put-down a)\n");

  proposer::ModelFn junk = [](const std::vector<proposer::ChatTurn>&, double) { return std::string("(fly moon)\n"); };
  try {
    nl::plan_to_pddl(acts, d, p, junk);
    FAIL("expected model_output");
  } catch (const nl::NlError& e) {
    CHECK(e.kind() == nl::NlError::Kind::model_output);
  }
}
