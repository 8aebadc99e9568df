#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vplan/proposer/live.hpp"
#include "vplan/search/engine.hpp"
#include "vplan/sim/domains.hpp"
#include "vplan/sim/fault.hpp"
#include "vplan/sim/search.hpp"

namespace vp::bench {

enum class Outcome { correct, incorrect, incomplete };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);

struct RunRecord {
  std::string domain;
  std::uint64_t seed = 0;
  std::string instance;
  Outcome outcome = Outcome::incomplete;
  int depth = 0;  // plan length
  int states = 0;
  int backtracks = 0;
  double wall_ms = 0;
  proposer::CallCounts calls;
  std::string detail;  // search stop reason, validation failure or error
};

std::string to_json(const RunRecord& record);
// Throws std::invalid_argument on malformed input.
RunRecord record_from_json(const std::string& text);

struct DomainSummary {
  std::string domain;
  int runs = 0;
  double correct_pct = 0, incorrect_pct = 0, incomplete_pct = 0;
  // over correct runs only
  std::optional<double> avg_depth;
  std::optional<int> max_depth, min_depth;
  double avg_states = 0;  // over all runs
};

DomainSummary summarize(const std::string& domain, const std::vector<RunRecord>& runs);

struct SuiteReport {
  std::vector<RunRecord> runs;  // by domain, then seed
  std::vector<DomainSummary> domains;
};

struct ProposerSpec {
  enum class Kind { oracle, live };
  Kind kind = Kind::oracle;
  // Oracle mode. Each run uses derive_seed({faults.seed, instance seed}).
  sim::FaultModel faults;
  sim::OracleOptions oracle;
  // Live mode.
  proposer::ProposerConfig live;
};

struct SuiteOptions {
  int workers = 1;       // instances in flight
  std::string out_dir;   // run directories and records; empty: nothing written
  int m_schemas = 3;     // bootstrap candidates
  bool resume = true;    // reuse record.json of finished runs under out_dir
};

// Search, back-translation and validation of one problem. Writes the run
// directory when `run_dir` is set (replacing any previous contents). Never
// throws; failures become incomplete records.
RunRecord run_problem(const pddl::DomainDef& domain, const pddl::ProblemDef& problem, std::uint64_t seed,
                      const search::SearchConfig& config, const ProposerSpec& spec, const std::string& run_dir,
                      const diagram::StyleMap& style);

// Bootstrapped style for `problem`'s domain, cached at `cache_path` when set.
diagram::StyleMap problem_style(const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                                const ProposerSpec& spec, int m_schemas, const std::string& cache_path);

// One generated instance end to end: search, back-translation, validation.
// Never throws for per-instance failures; they become incomplete records.
RunRecord run_instance(sim::DomainId domain, std::uint64_t seed, const search::SearchConfig& config,
                       const ProposerSpec& spec, const SuiteOptions& options, const diagram::StyleMap& style);

// The style used for a domain's runs: bootstrapped once per suite (cached in
// out_dir when set).
diagram::StyleMap suite_style(sim::DomainId domain, const ProposerSpec& spec, const SuiteOptions& options);

SuiteReport run_suite(sim::DomainId domain, const std::vector<std::uint64_t>& seeds,
                      const search::SearchConfig& config, const ProposerSpec& spec, const SuiteOptions& options);

// Aligned text table of the per-domain summaries.
std::string to_table(const SuiteReport& report);
// `domain,seed,outcome,depth,states,backtracks,wall_ms`; wall_ms is left
// empty when `with_wall` is false.
std::string to_csv(const SuiteReport& report, bool with_wall = true);

// Named configurations compared by the ablation study, baseline first.
std::vector<std::pair<std::string, search::SearchConfig>> ablation_variants(const search::SearchConfig& base);

using AblationReport = std::vector<std::pair<std::string, SuiteReport>>;

// Runs every variant on the same seeds; each variant writes under
// out_dir/<variant name> when out_dir is set.
AblationReport ablation_grid(sim::DomainId domain, const std::vector<std::uint64_t>& seeds,
                             const search::SearchConfig& base, const ProposerSpec& spec, const SuiteOptions& options);

// One row per variant.
std::string comparison_table(const AblationReport& report);

}  // namespace vp::bench
