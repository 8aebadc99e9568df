// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed below. Criterion names given as
// arguments restrict the run to those.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vplan/bench/suite.hpp"
#include "vplan/diagram/render.hpp"
#include "vplan/diagram/schema.hpp"
#include "vplan/nl/bridge.hpp"
#include "vplan/pddl/parser.hpp"
#include "vplan/pddl/semantics.hpp"
#include "vplan/pddl/validate.hpp"
#include "vplan/proposer/oracle.hpp"
#include "vplan/search/engine.hpp"
#include "vplan/sim/domains.hpp"
#include "vplan/sim/rng.hpp"
#include "vplan/sim/search.hpp"

namespace fs = std::filesystem;
using namespace vp;
using sim::DomainId;

namespace {

constexpr int kE2eSeeds = 20;
constexpr int kEquivPlans = 100;       // per domain
constexpr int kTrendSeeds = 30;
constexpr int kRoundTripActions = 200;  // per domain
constexpr int kCalibrationCalls = 1000;
constexpr double kCalibrationRate = 0.25, kCalibrationTol = 0.04;
constexpr int kSoundnessSeeds = 50;
constexpr int kBfsCap = 30;

struct Result {
  bool pass = false;
  std::string detail;
};

std::vector<std::uint64_t> seeds(std::uint64_t from, std::uint64_t to) {
  std::vector<std::uint64_t> out;
  for (auto s = from; s <= to; ++s) out.push_back(s);
  return out;
}

search::SearchConfig budget(DomainId id) {
  return id == DomainId::blocksworld ? search::SearchConfig::simple() : search::SearchConfig{};
}

int workers() { return static_cast<int>(std::max(1u, std::min(8u, std::thread::hardware_concurrency()))); }

int count(const bench::SuiteReport& r, bench::Outcome o) {
  int n = 0;
  for (const auto& run : r.runs) n += run.outcome == o;
  return n;
}

bench::SuiteReport suite(DomainId id, int n_seeds, const search::SearchConfig& config, const sim::FaultModel& faults) {
  bench::ProposerSpec spec;
  spec.faults = faults;
  bench::SuiteOptions options;
  options.workers = workers();
  return bench::run_suite(id, seeds(1, n_seeds), config, spec, options);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Step-by-step replay used as the reference for validate_plan.
struct Replay {
  pddl::Verdict verdict = pddl::Verdict::valid;
  std::optional<std::size_t> failing_step;
};

Replay replay(const pddl::DomainDef& d, const pddl::ProblemDef& p, const pddl::Plan& plan) {
  pddl::State s = p.init;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& step = plan[i];
    const auto* schema = d.find_action(step.name);
    if (!schema) return {pddl::Verdict::unknown_action, i};
    if (step.args.size() != schema->params.size()) return {pddl::Verdict::arity_type_error, i};
    for (std::size_t j = 0; j < step.args.size(); ++j) {
      std::optional<std::string> type = p.object_type(step.args[j]);
      if (!type) {
        for (const auto& [name, t] : d.constants)
          if (name == step.args[j]) type = t;
      }
      if (!type || !d.is_subtype(*type, schema->params[j].type)) return {pddl::Verdict::arity_type_error, i};
    }
    auto action = pddl::instantiate(d, p, *schema, step.args);
    try {
      s = pddl::apply(s, action);
    } catch (const pddl::PddlError&) {
      return {pddl::Verdict::precondition_failure, i};
    }
  }
  for (const auto& g : p.goal_pos)
    if (!s.contains(g)) return {pddl::Verdict::goal_unsatisfied, std::nullopt};
  for (const auto& g : p.goal_neg)
    if (s.contains(g)) return {pddl::Verdict::goal_unsatisfied, std::nullopt};
  return {};
}

pddl::PlanStep step_of(const pddl::GroundAction& a) { return {a.name, a.args, 0}; }

// 1
Result oracle_end_to_end() {
  const fs::path out = fs::temp_directory_path() / "vplan_acceptance_e2e";
  fs::remove_all(out);
  int correct = 0, total = 0, replayed = 0;
  std::string misses;
  for (DomainId id : sim::all_domains()) {
    bench::SuiteOptions options;
    options.workers = workers();
    options.out_dir = out.string();
    options.resume = false;
    auto report = bench::run_suite(id, seeds(1, kE2eSeeds), budget(id), {}, options);
    const auto& d = sim::corpus_domain(id);
    for (const auto& r : report.runs) {
      ++total;
      if (r.outcome != bench::Outcome::correct) {
        misses += " " + r.domain + "/" + std::to_string(r.seed) + "(" + r.detail + ")";
        continue;
      }
      ++correct;
      // the written plan file, checked by the reference replay
      auto p = sim::gen_instance(id, sim::GenParams::smallest(id, r.seed));
      auto plan = pddl::parse_plan(slurp(out / (r.domain + "_instance_" + std::to_string(r.seed)) / "plan.pddl"));
      replayed += replay(d, p, plan).verdict == pddl::Verdict::valid && !plan.empty() == (r.depth > 0);
    }
  }
  fs::remove_all(out);
  Result res;
  res.pass = correct == total && replayed == total && total == kE2eSeeds * 6;
  res.detail = std::to_string(correct) + "/" + std::to_string(total) + " correct, " + std::to_string(replayed) +
               " plans replay to the goal (need all)" + misses;
  return res;
}

// 2
Result validator_equivalence() {
  int plans = 0, disagreements = 0;
  std::set<std::string> verdicts;
  std::string first;
  for (DomainId id : sim::all_domains()) {
    const auto& d = sim::corpus_domain(id);
    pddl::ProblemDef p;
    sim::BfsResult bfs;
    std::vector<pddl::GroundAction> actions;
    for (int k = 0; k < kEquivPlans; ++k) {
      if (k % 10 == 0) {
        p = sim::gen_instance(id, sim::GenParams::smallest(id, static_cast<std::uint64_t>(k / 10)));
        bfs = sim::bfs(sim::Task(d, p), kBfsCap);
        actions = pddl::ground(d, p, pddl::GroundingMode::static_pruned);
      }
      sim::Rng rng(sim::derive_seed({77, static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(k)}));
      pddl::Plan plan;
      for (const auto& a : bfs.plan) plan.push_back(step_of(a));
      const int mutation = k % 10;
      auto at = [&] { return plan.empty() ? 0 : static_cast<std::size_t>(rng.below(plan.size())); };
      switch (mutation) {
        case 0: break;  // as found
        case 1: plan.resize(at()); break;  // strict prefix
        case 2:
          if (!plan.empty()) plan.erase(plan.begin() + static_cast<long>(at()));
          break;
        case 3:
          if (plan.size() > 1) {
            auto i = static_cast<std::size_t>(rng.below(plan.size() - 1));
            std::swap(plan[i], plan[i + 1]);
          }
          break;
        case 4:
          if (!plan.empty()) plan[at()] = step_of(actions[rng.below(actions.size())]);
          break;
        case 5:
          plan.insert(plan.begin() + static_cast<long>(at()), step_of(actions[rng.below(actions.size())]));
          break;
        case 6:
          if (!plan.empty()) plan[at()].name += "-x";
          break;
        case 7:
          if (!plan.empty()) plan[at()].args.push_back(p.objects.front().first);
          break;
        case 8:
          if (!plan.empty()) {
            auto& s = plan[at()];
            if (!s.args.empty()) s.args[rng.below(s.args.size())] = p.objects[rng.below(p.objects.size())].first;
          }
          break;
        case 9:
          for (int r = 0; r < 3; ++r) plan.push_back(step_of(actions[rng.below(actions.size())]));
          break;
      }
      auto got = pddl::validate_plan(d, p, plan);
      auto want = replay(d, p, plan);
      ++plans;
      verdicts.insert(std::string(pddl::to_string(want.verdict)));
      if (got.verdict != want.verdict || got.failing_step != want.failing_step) {
        ++disagreements;
        if (first.empty()) first = " first: " + p.name + " mutation " + std::to_string(mutation);
      }
    }
  }
  std::string kinds;
  for (const auto& v : verdicts) kinds += (kinds.empty() ? "" : ",") + v;
  return {disagreements == 0 && plans == kEquivPlans * 6,
          std::to_string(disagreements) + " disagreements over " + std::to_string(plans) + " plans (need 0); verdicts seen: " +
              kinds + first};
}

// 3
Result beam_budget_properties() {
  int runs = 0, rounds = 0, violations = 0, unfinished = 0;
  std::string first;
  struct Setting {
    int max_states;
    sim::FaultModel faults;
  };
  sim::FaultModel noisy;
  noisy.invalid_action_rate = 0.2;
  noisy.local_false_negative_rate = 0.25;
  noisy.global_false_negative_rate = 0.1;
  noisy.ranking_noise = 0.3;
  for (DomainId id : sim::all_domains()) {
    const auto& d = sim::corpus_domain(id);
    bench::ProposerSpec spec;
    auto style = bench::suite_style(id, spec, {});
    for (const Setting& setting : {Setting{0, {}}, Setting{0, noisy}, Setting{60, noisy}}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto p = sim::gen_instance(id, sim::GenParams::smallest(id, seed));
        auto config = budget(id);
        if (setting.max_states) config.max_states = setting.max_states;
        config.seed = seed;
        sim::FaultModel faults = setting.faults;
        faults.seed = seed;
        proposer::OracleProposer prop(d, p, faults);
        auto result = search::run_search(search::make_instance(d, p), config, prop, style);
        ++runs;
        auto flag = [&](const std::string& what) {
          ++violations;
          if (first.empty()) first = " first: " + p.name + " " + what;
        };
        if (result.outcome == search::SearchResult::Outcome::incomplete && result.reason.empty()) ++unfinished;
        if (result.stats.states_generated > config.max_states) flag("states over budget");
        for (const auto& round : result.rounds) {
          ++rounds;
          if (static_cast<int>(round.parents.size()) > config.k) flag("parents > k");
          if (static_cast<int>(round.children.size()) > config.k * config.n) flag("children > k*n");
        }
        for (const auto& node : result.nodes) {
          if (node.depth < 0) continue;
          if (node.depth > config.max_depth) flag("depth over limit");
        }
      }
    }
  }
  return {violations == 0 && unfinished == 0,
          std::to_string(violations) + " violations over " + std::to_string(runs) + " runs / " + std::to_string(rounds) +
              " rounds (need 0), " + std::to_string(unfinished) + " runs without a stop reason" + first};
}

// 4
Result backtracking_trend() {
  auto config = search::SearchConfig::simple();
  sim::FaultModel faults;
  faults.local_false_negative_rate = 0.25;
  auto on = suite(DomainId::blocksworld, kTrendSeeds, config, faults);
  config.ablations.no_backtrack = true;
  auto off = suite(DomainId::blocksworld, kTrendSeeds, config, faults);
  const int c_on = count(on, bench::Outcome::correct), c_off = count(off, bench::Outcome::correct);
  const int i_on = count(on, bench::Outcome::incomplete), i_off = count(off, bench::Outcome::incomplete);
  return {c_on >= c_off && i_off >= i_on, "correct on/off " + std::to_string(c_on) + "/" + std::to_string(c_off) +
                                              ", incomplete on/off " + std::to_string(i_on) + "/" +
                                              std::to_string(i_off) + " (need on >= off, off >= on)"};
}

// 5
Result branching_trend() {
  sim::FaultModel faults;
  faults.ranking_noise = 0.3;
  std::vector<int> corrects;
  for (int n : {1, 2, 4}) {
    auto config = search::SearchConfig::simple();
    config.n = n;
    corrects.push_back(count(suite(DomainId::blocksworld, kTrendSeeds, config, faults), bench::Outcome::correct));
  }
  return {corrects[0] <= corrects[1] && corrects[1] <= corrects[2],
          "correct n=1/2/4: " + std::to_string(corrects[0]) + "/" + std::to_string(corrects[1]) + "/" +
              std::to_string(corrects[2]) + " (need non-decreasing)"};
}

// 6
Result beam_trend() {
  auto config = search::SearchConfig::simple();
  config.max_states = 60;
  auto beam = suite(DomainId::blocksworld, kTrendSeeds, config, {});
  config.ablations.no_beam = true;
  auto wide = suite(DomainId::blocksworld, kTrendSeeds, config, {});
  const double s_beam = beam.domains[0].avg_states, s_wide = wide.domains[0].avg_states;
  const int c_beam = count(beam, bench::Outcome::correct), c_wide = count(wide, bench::Outcome::correct);
  char buf[160];
  std::snprintf(buf, sizeof buf, "avg states beam/no-beam %.2f/%.2f, correct %d/%d (need states no-beam > beam, correct beam >= no-beam)",
                s_beam, s_wide, c_beam, c_wide);
  return {s_wide > s_beam && c_beam >= c_wide, buf};
}

// 7
Result renderer_goldens() {
  const fs::path dir = fs::path(VPLAN_TEST_DATA_DIR) / "golden";
  int files = 0, mismatches = 0;
  std::string first;
  std::vector<fs::path> schemas;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".schema") schemas.push_back(e.path());
  std::sort(schemas.begin(), schemas.end());
  for (const auto& path : schemas) {
    ++files;
    auto svg = path;
    svg.replace_extension(".svg");
    const auto schema = diagram::parse_schema(slurp(path));
    const std::string a = diagram::render(schema).svg;
    const std::string b = diagram::render(diagram::parse_schema(slurp(path))).svg;
    if (a != b || !fs::exists(svg) || a != slurp(svg)) {
      ++mismatches;
      if (first.empty()) first = " first: " + path.filename().string();
    }
  }
  return {files >= 7 && mismatches == 0,
          std::to_string(mismatches) + " mismatches over " + std::to_string(files) + " golden schemas (need 0)" + first};
}

// 8
Result nl_round_trip() {
  int checked = 0, exact = 0;
  std::string first;
  for (DomainId id : sim::all_domains()) {
    const auto& d = sim::corpus_domain(id);
    const auto& table = nl::PhraseTable::for_domain(d.name);
    sim::Rng rng(sim::derive_seed({88, static_cast<std::uint64_t>(id)}));
    pddl::ProblemDef p;
    std::vector<pddl::GroundAction> actions;
    for (int k = 0; k < kRoundTripActions; ++k) {
      if (k % 20 == 0) {
        p = sim::gen_instance(id, sim::GenParams::smallest(id, static_cast<std::uint64_t>(k / 20)));
        actions = pddl::ground(d, p, pddl::GroundingMode::static_pruned);
      }
      const auto& a = actions[rng.below(actions.size())];
      ++checked;
      try {
        const std::string text = nl::action_to_nl(a.name, a.args, d, p, table);
        const std::vector<std::string> texts{text};
        auto back = pddl::parse_plan(nl::plan_to_pddl(texts, d, p, table));
        if (back.size() == 1 && back[0].name == a.name && back[0].args == a.args) {
          ++exact;
          continue;
        }
      } catch (const std::exception&) {
      }
      if (first.empty()) first = " first: " + a.text();
    }
  }
  return {exact == checked && checked == kRoundTripActions * 6,
          std::to_string(exact) + "/" + std::to_string(checked) + " exact (need all)" + first};
}

// 9
Result fault_calibration() {
  int calls = 0, fails = 0;
  for (std::uint64_t seed = 1; calls < kCalibrationCalls; ++seed) {
    for (DomainId id : sim::all_domains()) {
      if (calls >= kCalibrationCalls) break;
      const auto& d = sim::corpus_domain(id);
      auto p = sim::gen_instance(id, sim::GenParams::smallest(id, seed));
      const auto& table = nl::PhraseTable::for_domain(d.name);
      sim::FaultModel faults;
      faults.local_false_negative_rate = kCalibrationRate;
      faults.seed = 2024;
      proposer::OracleProposer prop(d, p, faults);
      auto actions = pddl::ground(d, p, pddl::GroundingMode::static_pruned);
      sim::Rng rng(sim::derive_seed({seed, static_cast<std::uint64_t>(id)}));
      pddl::State s = p.init;
      for (int step = 0; step < 25 && calls < kCalibrationCalls; ++step) {
        std::vector<const pddl::GroundAction*> ok;
        for (const auto& a : actions)
          if (pddl::applicable(s, a)) ok.push_back(&a);
        if (ok.empty()) break;
        const auto* a = ok[rng.below(ok.size())];
        pddl::State t = pddl::apply(s, *a);
        proposer::NodeBundle parent, child;
        parent.id = static_cast<std::uint64_t>(calls) * 2;
        parent.state_text = nl::state_to_nl(s, d, p, table);
        child.id = parent.id + 1;
        child.state_text = nl::state_to_nl(t, d, p, table);
        proposer::CallTag tag{child.id, 0, 0};
        fails += !prop.verify_local(tag, parent, child, nl::action_to_nl(a->name, a->args, d, p, table)).pass;
        ++calls;
        s = t;
      }
    }
  }
  const double rate = static_cast<double>(fails) / calls;
  char buf[128];
  std::snprintf(buf, sizeof buf, "failure rate %.3f over %d calls (need %.2f +/- %.2f)", rate, calls, kCalibrationRate,
                kCalibrationTol);
  return {std::abs(rate - kCalibrationRate) <= kCalibrationTol, buf};
}

// 10
Result generator_soundness() {
  int ok = 0, total = 0;
  std::string first;
  for (DomainId id : sim::all_domains()) {
    const auto& d = sim::corpus_domain(id);
    for (std::uint64_t seed = 0; seed < kSoundnessSeeds; ++seed) {
      ++total;
      try {
        auto gen = sim::gen_instance(id, sim::GenParams::smallest(id, seed));
        auto p = pddl::parse_problem(pddl::to_pddl(gen), d);
        auto grounded = pddl::ground(d, p, pddl::GroundingMode::static_pruned);
        auto dist = sim::bfs_distance(d, p, kBfsCap);
        if (p == gen && !grounded.empty() && dist && *dist <= kBfsCap) {
          ++ok;
          continue;
        }
      } catch (const std::exception& e) {
        if (first.empty()) first = std::string(" first error: ") + e.what();
      }
      if (first.empty()) first = " first: " + std::string(sim::to_string(id)) + " seed " + std::to_string(seed);
    }
  }
  return {ok == total && total == kSoundnessSeeds * 6,
          std::to_string(ok) + "/" + std::to_string(total) + " parse, ground and solve within " +
              std::to_string(kBfsCap) + " (need all)" + first};
}

}  // namespace

int main(int argc, char** argv) {
  const std::set<std::string> only(argv + 1, argv + argc);
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"oracle-end-to-end", oracle_end_to_end},
      {"validator-simulator-equivalence", validator_equivalence},
      {"beam-budget-properties", beam_budget_properties},
      {"backtracking-trend", backtracking_trend},
      {"branching-trend", branching_trend},
      {"beam-trend", beam_trend},
      {"renderer-goldens", renderer_goldens},
      {"nl-round-trip", nl_round_trip},
      {"fault-calibration", fault_calibration},
      {"generator-soundness", generator_soundness},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !r.pass;
    std::printf("%s %s: %s [%.1fs]\n", r.pass ? "PASS" : "FAIL", name.c_str(), r.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
