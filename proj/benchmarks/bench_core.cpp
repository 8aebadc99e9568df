#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "vplan/diagram/render.hpp"
#include "vplan/diagram/schema.hpp"
#include "vplan/diagram/style.hpp"
#include "vplan/nl/bridge.hpp"
#include "vplan/pddl/parser.hpp"
#include "vplan/pddl/semantics.hpp"
#include "vplan/pddl/validate.hpp"
#include "vplan/proposer/oracle.hpp"
#include "vplan/search/engine.hpp"
#include "vplan/sim/domains.hpp"
#include "vplan/sim/search.hpp"

using namespace vp;
using sim::DomainId;

namespace {

DomainId domain_arg(const benchmark::State& state) { return sim::all_domains()[static_cast<std::size_t>(state.range(0))]; }

pddl::ProblemDef instance(DomainId id, std::uint64_t seed = 1) {
  return sim::gen_instance(id, sim::GenParams::smallest(id, seed));
}

void domain_args(benchmark::internal::Benchmark* b) {
  for (std::size_t i = 0; i < sim::all_domains().size(); ++i) b->Arg(static_cast<int>(i));
}

void BM_ParseDomain(benchmark::State& state) {
  const auto id = domain_arg(state);
  const std::string text(sim::corpus_text(id));
  for (auto _ : state) benchmark::DoNotOptimize(pddl::parse_domain(text));
  state.SetLabel(std::string(sim::to_string(id)));
}
BENCHMARK(BM_ParseDomain)->Apply(domain_args);

void BM_Ground(benchmark::State& state) {
  const auto id = domain_arg(state);
  const auto& d = sim::corpus_domain(id);
  auto p = instance(id);
  for (auto _ : state) benchmark::DoNotOptimize(pddl::ground(d, p, pddl::GroundingMode::static_pruned));
  state.SetLabel(std::string(sim::to_string(id)));
}
BENCHMARK(BM_Ground)->Apply(domain_args);

void BM_Bfs(benchmark::State& state) {
  const auto id = domain_arg(state);
  sim::Task task(sim::corpus_domain(id), instance(id));
  for (auto _ : state) benchmark::DoNotOptimize(sim::bfs(task, 30));
  state.SetLabel(std::string(sim::to_string(id)));
}
BENCHMARK(BM_Bfs)->Apply(domain_args)->Unit(benchmark::kMillisecond);

void BM_ValidatePlan(benchmark::State& state) {
  const auto id = domain_arg(state);
  const auto& d = sim::corpus_domain(id);
  auto p = instance(id);
  pddl::Plan plan;
  for (const auto& a : sim::bfs(sim::Task(d, p), 30).plan) plan.push_back({a.name, a.args, 0});
  for (auto _ : state) benchmark::DoNotOptimize(pddl::validate_plan(d, p, plan));
  state.SetLabel(std::string(sim::to_string(id)));
}
BENCHMARK(BM_ValidatePlan)->Apply(domain_args);

void BM_NlRoundTrip(benchmark::State& state) {
  const auto id = domain_arg(state);
  const auto& d = sim::corpus_domain(id);
  auto p = instance(id);
  const auto& table = nl::PhraseTable::for_domain(d.name);
  auto actions = pddl::ground(d, p, pddl::GroundingMode::static_pruned);
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < actions.size() && i < 32; ++i)
    texts.push_back(nl::action_to_nl(actions[i].name, actions[i].args, d, p, table));
  for (auto _ : state) benchmark::DoNotOptimize(nl::plan_to_pddl(texts, d, p, table));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(texts.size()));
  state.SetLabel(std::string(sim::to_string(id)));
}
BENCHMARK(BM_NlRoundTrip)->Apply(domain_args);

void BM_RenderState(benchmark::State& state) {
  const auto id = domain_arg(state);
  const auto& d = sim::corpus_domain(id);
  auto p = instance(id);
  auto schema = diagram::schema_from_state(p.init, diagram::default_style(d), d, p);
  for (auto _ : state) benchmark::DoNotOptimize(diagram::render(schema));
  state.SetLabel(std::string(sim::to_string(id)));
}
BENCHMARK(BM_RenderState)->Apply(domain_args);

void BM_OracleSearch(benchmark::State& state) {
  const auto id = domain_arg(state);
  const auto& d = sim::corpus_domain(id);
  auto p = instance(id);
  auto inst = search::make_instance(d, p);
  auto config = id == DomainId::blocksworld ? search::SearchConfig::simple() : search::SearchConfig{};
  proposer::OracleProposer boot(d, p);
  auto style = search::bootstrap_domain_diagram(inst.domain_nl, inst.init_text, d, p, boot, 3, "");
  for (auto _ : state) {
    proposer::OracleProposer prop(d, p);
    benchmark::DoNotOptimize(search::run_search(inst, config, prop, style));
  }
  state.SetLabel(std::string(sim::to_string(id)));
}
BENCHMARK(BM_OracleSearch)->Apply(domain_args)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
