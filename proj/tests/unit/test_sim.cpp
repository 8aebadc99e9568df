#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <string>

#include "doctest.h"
#include "vplan/nl/bridge.hpp"
#include "vplan/pddl/parser.hpp"
#include "vplan/pddl/semantics.hpp"
#include "vplan/sim/domains.hpp"
#include "vplan/sim/fault.hpp"
#include "vplan/sim/rng.hpp"
#include "vplan/sim/search.hpp"

using namespace vp;
using sim::DomainId;

namespace {

pddl::ProblemDef problem(DomainId id, const char* text) { return pddl::parse_problem(text, sim::corpus_domain(id)); }

// Reference BFS over sets of atoms, using only pddl::ground/applicable/apply.
std::optional<int> naive_distance(const pddl::DomainDef& d, const pddl::ProblemDef& p, int cap) {
  auto actions = pddl::ground(d, p, pddl::GroundingMode::static_pruned);
  auto is_goal = [&](const pddl::State& s) {
    for (const auto& g : p.goal_pos)
      if (!s.contains(g)) return false;
    for (const auto& g : p.goal_neg)
      if (s.contains(g)) return false;
    return true;
  };
  std::map<std::string, int> seen{{p.init.text(), 0}};
  std::deque<pddl::State> queue{p.init};
  while (!queue.empty()) {
    pddl::State s = queue.front();
    queue.pop_front();
    int depth = seen[s.text()];
    if (is_goal(s)) return depth;
    if (depth == cap) continue;
    for (const auto& a : actions) {
      if (!pddl::applicable(s, a)) continue;
      pddl::State n = pddl::apply_unchecked(s, a);
      if (seen.emplace(n.text(), depth + 1).second) queue.push_back(std::move(n));
    }
  }
  return std::nullopt;
}

std::vector<pddl::State> random_walk(const pddl::DomainDef& d, const pddl::ProblemDef& p, int length,
                                     std::uint64_t seed) {
  auto actions = pddl::ground(d, p, pddl::GroundingMode::static_pruned);
  sim::Rng rng(seed);
  std::vector<pddl::State> walk{p.init};
  for (int i = 0; i < length; ++i) {
    auto next = sim::successors(walk.back(), actions);
    if (next.empty()) break;
    walk.push_back(next[rng.below(next.size())].second);
  }
  return walk;
}

std::vector<std::string> args_of(const pddl::State& s, std::string_view pred, std::size_t i) {
  std::vector<std::string> out;
  for (const auto& a : s)
    if (a.predicate == pred) out.push_back(a.args[i]);
  return out;
}

// Every block is on the table or on exactly one block, at most one block
// sits on each block, and following `on` never loops.
bool valid_towers(const std::vector<pddl::GroundAtom>& atoms, const std::vector<std::string>& blocks,
                  bool need_table) {
  std::map<std::string, std::string> below;
  std::map<std::string, int> above_count;
  std::set<std::string> table;
  for (const auto& a : atoms) {
    if (a.predicate == "on") {
      if (!below.emplace(a.args[0], a.args[1]).second) return false;
      if (++above_count[a.args[1]] > 1) return false;
    } else if (a.predicate == "ontable") {
      table.insert(a.args[0]);
    }
  }
  for (const auto& b : blocks) {
    bool on_block = below.count(b) > 0;
    if (need_table && on_block == (table.count(b) > 0)) return false;
    std::set<std::string> path{b};
    std::string cur = b;
    while (below.count(cur)) {
      cur = below[cur];
      if (!path.insert(cur).second) return false;
    }
  }
  return true;
}

const char* kTwoBlocks = R"(
(define (problem two) (:domain blocksworld)
  (:objects a b - block)
  (:init (handempty) (ontable a) (ontable b) (clear a) (clear b))
  (:goal (and (on a b))))
)";

const char* kThreeTable = R"(
(define (problem three) (:domain blocksworld)
  (:objects a b c - block)
  (:init (handempty) (ontable a) (ontable b) (ontable c) (clear a) (clear b) (clear c))
  (:goal (and (on a b) (on b c))))
)";

}  // namespace

TEST_CASE("load_domain action counts") {
  CHECK(sim::load_domain(DomainId::floortile).def.actions.size() == 7);
  CHECK(sim::load_domain(DomainId::elevator).def.actions.size() == 6);
  CHECK(sim::load_domain(DomainId::tetris).def.actions.size() == 6);
  std::set<std::string> names;
  for (const auto& a : sim::corpus_domain(DomainId::floortile).actions) names.insert(a.name);
  CHECK(names == std::set<std::string>{"change-color", "paint-up", "paint-down", "up", "down", "right", "left"});
  for (DomainId id : sim::all_domains()) {
    auto loaded = sim::load_domain(id);
    CHECK(sim::domain_id_of(loaded.def) == id);
    CHECK(!loaded.nl.empty());
  }
}

TEST_CASE("successors on hand-enumerated blocksworld states") {
  const auto& d = sim::corpus_domain(DomainId::blocksworld);
  auto p = problem(DomainId::blocksworld, kThreeTable);
  auto grounded = pddl::ground(d, p);

  auto succ = sim::successors(p.init, grounded);
  REQUIRE(succ.size() == 3);
  CHECK(succ[0].first.text() == "(pick-up a)");
  CHECK(succ[1].first.text() == "(pick-up b)");
  CHECK(succ[2].first.text() == "(pick-up c)");

  pddl::State holding = succ[1].second;
  std::set<std::string> texts;
  for (const auto& [a, s] : sim::successors(holding, grounded)) texts.insert(a.text());
  CHECK(texts == std::set<std::string>{"(put-down b)", "(stack b a)", "(stack b c)"});

  CHECK(sim::successors(p.init, {}).empty());
}

TEST_CASE("successors equal the applicable subset on random states") {
  for (DomainId id : sim::all_domains()) {
    const auto& d = sim::corpus_domain(id);
    auto p = sim::gen_instance(id, sim::GenParams::smallest(id, 3));
    auto grounded = pddl::ground(d, p, pddl::GroundingMode::static_pruned);
    for (const auto& s : random_walk(d, p, 30, 11)) {
      auto succ = sim::successors(s, grounded);
      std::size_t j = 0;
      for (const auto& a : grounded) {
        if (!pddl::applicable(s, a)) continue;
        REQUIRE(j < succ.size());
        CHECK(succ[j].first.text() == a.text());
        CHECK(succ[j].second == pddl::apply(s, a));
        ++j;
      }
      CHECK(j == succ.size());
    }
  }
}

TEST_CASE("bfs_distance examples") {
  const auto& d = sim::corpus_domain(DomainId::blocksworld);
  auto two = problem(DomainId::blocksworld, kTwoBlocks);
  CHECK(sim::bfs_distance(d, two, 30) == 2);
  CHECK(sim::bfs_distance(d, two, 1) == std::nullopt);
  CHECK(sim::bfs_distance(d, two, 2) == 2);

  auto done = two;
  done.goal_pos = {{"ontable", {"a"}}};
  CHECK(sim::bfs_distance(d, done, 0) == 0);

  auto task = sim::Task(d, two);
  auto r = sim::bfs(task, 30);
  REQUIRE(r.distance == 2);
  REQUIRE(r.plan.size() == 2);
  CHECK(r.plan[0].text() == "(pick-up a)");
  CHECK(r.plan[1].text() == "(stack a b)");
}

TEST_CASE("bfs agrees with a reference search and its plans replay") {
  for (DomainId id : {DomainId::blocksworld, DomainId::parking, DomainId::tetris, DomainId::elevator}) {
    const auto& d = sim::corpus_domain(id);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      auto p = sim::gen_instance(id, sim::GenParams::smallest(id, seed));
      sim::Task task(d, p);
      auto r = sim::bfs(task, 30);
      CAPTURE(p.name);
      REQUIRE(r.distance);
      CHECK(r.distance == naive_distance(d, p, 30));
      pddl::State s = p.init;
      for (const auto& a : r.plan) s = pddl::apply(s, a);
      for (const auto& g : p.goal_pos) CHECK(s.contains(g));
      CHECK(static_cast<int>(r.plan.size()) == *r.distance);
    }
  }
}

TEST_CASE("distance oracle matches forward bfs from sampled states") {
  for (DomainId id : {DomainId::blocksworld, DomainId::parking, DomainId::tetris}) {
    const auto& d = sim::corpus_domain(id);
    auto p = sim::gen_instance(id, sim::GenParams::smallest(id, 5));
    auto task = std::make_shared<const sim::Task>(d, p);
    sim::DistanceOracle oracle(task);
    REQUIRE(oracle.exhaustive());
    for (const auto& s : random_walk(d, p, 12, 3)) {
      auto from = p;
      from.init = s;
      auto expect = naive_distance(d, from, 60);
      CHECK(oracle.distance(s) == expect);
    }
  }
}

TEST_CASE("distance oracle fallback path") {
  const auto& d = sim::corpus_domain(DomainId::blocksworld);
  auto p = problem(DomainId::blocksworld, kThreeTable);
  auto task = std::make_shared<const sim::Task>(d, p);
  sim::OracleOptions opts;
  opts.state_limit = 2;
  sim::DistanceOracle oracle(task, opts);
  CHECK(!oracle.exhaustive());
  CHECK(oracle.distance(p.init) == naive_distance(d, p, 30));

  auto dead = p;
  dead.goal_pos = {{"on", {"a", "a"}}};
  sim::DistanceOracle dead_oracle(std::make_shared<const sim::Task>(d, dead));
  CHECK(dead_oracle.distance(dead.init) == std::nullopt);
}

TEST_CASE("blocksworld generator yields valid towers") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto params = sim::GenParams::smallest(DomainId::blocksworld, seed);
    auto p = sim::gen_instance(DomainId::blocksworld, params);
    auto blocks = p.objects_of(sim::corpus_domain(DomainId::blocksworld), "block");
    CHECK(static_cast<int>(blocks.size()) == params.blocks);
    CHECK(valid_towers(p.init.atoms(), blocks, true));
    CHECK(valid_towers(p.goal_pos, blocks, false));
  }
  sim::GenParams params;
  params.blocks = 3;
  params.seed = 7;
  auto p = sim::gen_instance(DomainId::blocksworld, params);
  CHECK(p.name == "blocksworld-7");
  CHECK(valid_towers(p.init.atoms(), p.objects_of(sim::corpus_domain(DomainId::blocksworld), "block"), true));
}

TEST_CASE("parking generator keeps at most two cars per curb") {
  sim::GenParams params;
  params.curbs = 4;
  params.cars = 6;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    params.seed = seed;
    auto p = sim::gen_instance(DomainId::parking, params);
    std::map<std::string, int> per_curb;
    std::map<std::string, std::string> curb_of;
    for (const auto& a : p.init) {
      if (a.predicate == "at-curb-num") curb_of[a.args[0]] = a.args[1];
    }
    for (const auto& [car, curb] : curb_of) ++per_curb[curb];
    for (const auto& a : p.init) {
      if (a.predicate == "behind-car") ++per_curb[curb_of.at(a.args[1])];
    }
    CHECK(curb_of.size() + args_of(p.init, "behind-car", 0).size() == 6);
    for (const auto& [curb, n] : per_curb) CHECK(n <= 2);
  }
}

TEST_CASE("tetris generator places pieces inside the grid without overlap") {
  for (int grid : {4, 6}) {
    sim::GenParams params;
    params.grid = grid;
    params.pieces = grid == 4 ? 3 : 5;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      params.seed = seed;
      auto p = sim::gen_instance(DomainId::tetris, params);
      std::set<std::string> cells;
      for (int r = 0; r < grid; ++r)
        for (int c = 0; c < grid; ++c) cells.insert("f" + std::to_string(r) + "-" + std::to_string(c) + "f");
      std::multiset<std::string> used;
      for (const auto& a : p.init) {
        if (a.predicate.rfind("at_", 0) != 0) continue;
        for (std::size_t i = 1; i < a.args.size(); ++i) used.insert(a.args[i]);
      }
      for (const auto& c : used) {
        CHECK(cells.count(c) == 1);
        CHECK(used.count(c) == 1);
      }
      for (const auto& c : args_of(p.init, "clear", 0)) CHECK(used.count(c) == 0);
      CHECK(used.size() + args_of(p.init, "clear", 0).size() == cells.size());
    }
  }
}

TEST_CASE("generators reject out-of-range parameters") {
  auto range_error = [](DomainId id, sim::GenParams p) {
    try {
      sim::gen_instance(id, p);
    } catch (const sim::GenError& e) {
      return e.kind() == sim::GenError::Kind::range;
    }
    return false;
  };
  sim::GenParams p;
  p.blocks = 2;
  CHECK(range_error(DomainId::blocksworld, p));
  p = {};
  p.grid = 5;
  CHECK(range_error(DomainId::tetris, p));
  p = {};
  p.curbs = 4;
  p.cars = 8;
  CHECK(range_error(DomainId::parking, p));
  p = {};
  p.rows = 4;
  CHECK(range_error(DomainId::floortile, p));
  p = {};
  p.cocktails = 5;
  CHECK(range_error(DomainId::barman, p));
  p = {};
  p.floors = 9;
  CHECK(range_error(DomainId::elevator, p));
}

TEST_CASE("generated instances are deterministic and solvable") {
  for (DomainId id : sim::all_domains()) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto params = sim::GenParams::smallest(id, seed);
      auto a = sim::gen_instance(id, params);
      auto b = sim::gen_instance(id, params);
      CHECK(pddl::to_pddl(a) == pddl::to_pddl(b));
      const auto& d = sim::corpus_domain(id);
      auto reparsed = pddl::parse_problem(pddl::to_pddl(a), d);
      CHECK(reparsed.init == a.init);
      CHECK(!pddl::ground(d, reparsed, pddl::GroundingMode::static_pruned).empty());
      auto dist = sim::bfs_distance(d, reparsed, 30);
      CAPTURE(a.name);
      CHECK(dist.has_value());
    }
  }
  auto p0 = sim::gen_instance(DomainId::parking, sim::GenParams::smallest(DomainId::parking, 0));
  auto p1 = sim::gen_instance(DomainId::parking, sim::GenParams::smallest(DomainId::parking, 1));
  CHECK(pddl::to_pddl(p0) != pddl::to_pddl(p1));
}

TEST_CASE("parking walks keep one car per curb and behind each car") {
  const auto& d = sim::corpus_domain(DomainId::parking);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = sim::gen_instance(DomainId::parking, sim::GenParams::smallest(DomainId::parking, seed));
    for (const auto& s : random_walk(d, p, 50, seed)) {
      std::map<std::string, int> at_curb, behind;
      for (const auto& a : s) {
        if (a.predicate == "at-curb-num") ++at_curb[a.args[1]];
        if (a.predicate == "behind-car") ++behind[a.args[1]];
      }
      for (const auto& [k, n] : at_curb) CHECK(n <= 1);
      for (const auto& [k, n] : behind) CHECK(n <= 1);
    }
  }
}

TEST_CASE("floortile walks never occupy a painted tile") {
  const auto& d = sim::corpus_domain(DomainId::floortile);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = sim::gen_instance(DomainId::floortile, sim::GenParams::smallest(DomainId::floortile, seed));
    std::set<std::string> painted;
    for (const auto& s : random_walk(d, p, 50, seed + 100)) {
      for (const auto& t : args_of(s, "painted", 0)) painted.insert(t);
      for (const auto& t : args_of(s, "robot-at", 1)) CHECK(painted.count(t) == 0);
    }
  }
}

TEST_CASE("task encode/decode round-trip") {
  const auto& d = sim::corpus_domain(DomainId::tetris);
  auto p = sim::gen_instance(DomainId::tetris, sim::GenParams::smallest(DomainId::tetris, 2));
  sim::Task task(d, p);
  for (const auto& s : random_walk(d, p, 20, 9)) {
    auto bits = task.encode(s);
    REQUIRE(bits);
    pddl::State back = task.decode(bits->data());
    for (const auto& a : back) CHECK(s.contains(a));
  }
  CHECK(!task.encode(pddl::State(std::vector<pddl::GroundAtom>{{"clear", {"nowhere"}}})));
}

TEST_CASE("rng and seed derivation are deterministic") {
  sim::Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    auto x = a.next();
    CHECK(x == b.next());
    differs |= x != c.next();
  }
  CHECK(differs);
  CHECK(sim::derive_seed({1, 2, 3}) == sim::derive_seed({1, 2, 3}));
  CHECK(sim::derive_seed({1, 2, 3}) != sim::derive_seed({1, 3, 2}));
  sim::Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    CHECK(r.below(7) < 7);
    double u = r.unit();
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("fault model is a pure function of its inputs") {
  sim::FaultModel f;
  f.local_false_negative_rate = 0.25;
  f.seed = 9;
  int fired = 0;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    bool x = f.fires(sim::FaultKind::local_false_negative, {i, 3});
    CHECK(x == f.fires(sim::FaultKind::local_false_negative, {i, 3}));
    fired += x;
  }
  CHECK(fired > 900);
  CHECK(fired < 1100);
  CHECK(!f.fires(sim::FaultKind::invalid_action, {1}));
  f.invalid_action_rate = 1.0;
  CHECK(f.fires(sim::FaultKind::invalid_action, {1}));
  f.ranking_noise = 1.5;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}
