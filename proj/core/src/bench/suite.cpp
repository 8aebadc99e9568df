#include "vplan/bench/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <mutex>
#include <sstream>

#include "json.hpp"
#include "vplan/nl/bridge.hpp"
#include "vplan/pddl/parser.hpp"
#include "vplan/pddl/validate.hpp"
#include "vplan/proposer/oracle.hpp"
#include "vplan/sim/rng.hpp"

namespace vp::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w, bool left = false) {
  if (s.size() >= w) return s;
  return left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
}

fs::path run_dir(const SuiteOptions& options, std::string_view domain, std::uint64_t seed) {
  if (options.out_dir.empty()) return {};
  return fs::path(options.out_dir) / (std::string(domain) + "_instance_" + std::to_string(seed));
}

// Live runs need a template set that outlives the proposer.
const proposer::TemplateSet& templates_for(const std::string& id) {
  static std::mutex mutex;
  static std::map<std::string, std::unique_ptr<proposer::TemplateSet>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[id];
  if (!slot) slot = std::make_unique<proposer::TemplateSet>(proposer::TemplateSet::load(id));
  return *slot;
}

std::vector<std::string> summary_cells(const DomainSummary& s) {
  auto pct = [](double v) { return fmt("%.1f%%", v); };
  return {std::to_string(s.runs),
          pct(s.correct_pct),
          pct(s.incorrect_pct),
          pct(s.incomplete_pct),
          s.avg_depth ? fmt("%.2f", *s.avg_depth) : "-",
          s.max_depth ? std::to_string(*s.max_depth) : "-",
          s.min_depth ? std::to_string(*s.min_depth) : "-",
          fmt("%.2f", s.avg_states)};
}

std::string table(const std::string& first, const std::vector<std::pair<std::string, DomainSummary>>& rows) {
  std::vector<std::string> head{first,       "runs",      "correct",   "incorrect", "incomplete",
                                "avg_depth", "max_depth", "min_depth", "avg_states"};
  std::vector<std::vector<std::string>> cells{head};
  for (const auto& [name, s] : rows) {
    std::vector<std::string> row{name};
    for (auto& c : summary_cells(s)) row.push_back(std::move(c));
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += "  ";
      line += pad(row[i], width[i], i == 0);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::correct: return "correct";
    case Outcome::incorrect: return "incorrect";
    case Outcome::incomplete: return "incomplete";
  }
  return "unknown";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  for (Outcome o : {Outcome::correct, Outcome::incorrect, Outcome::incomplete}) {
    if (text == to_string(o)) return o;
  }
  return std::nullopt;
}

std::string to_json(const RunRecord& r) {
  json calls = json::object();
  for (const auto& [k, v] : r.calls) calls[k] = v;
  json j = {{"domain", r.domain},   {"seed", r.seed},     {"instance", r.instance},
            {"outcome", std::string(to_string(r.outcome))}, {"depth", r.depth},   {"states", r.states},
            {"backtracks", r.backtracks}, {"wall_ms", r.wall_ms}, {"calls", calls}, {"detail", r.detail}};
  return j.dump(2) + "\n";
}

RunRecord record_from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    RunRecord r;
    r.domain = j.at("domain").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.instance = j.value("instance", "");
    auto outcome = parse_outcome(j.at("outcome").get<std::string>());
    if (!outcome) throw std::invalid_argument("unknown outcome");
    r.outcome = *outcome;
    r.depth = j.at("depth").get<int>();
    r.states = j.at("states").get<int>();
    r.backtracks = j.at("backtracks").get<int>();
    r.wall_ms = j.value("wall_ms", 0.0);
    const json calls = j.value("calls", json::object());
    for (const auto& [k, v] : calls.items()) r.calls[k] = v.get<std::uint64_t>();
    r.detail = j.value("detail", "");
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad run record: ") + e.what());
  }
}

DomainSummary summarize(const std::string& domain, const std::vector<RunRecord>& runs) {
  DomainSummary s;
  s.domain = domain;
  int correct = 0, incorrect = 0, incomplete = 0;
  double depth_sum = 0, states_sum = 0;
  for (const auto& r : runs) {
    if (r.domain != domain) continue;
    ++s.runs;
    states_sum += r.states;
    switch (r.outcome) {
      case Outcome::correct:
        ++correct;
        depth_sum += r.depth;
        s.max_depth = std::max(s.max_depth.value_or(r.depth), r.depth);
        s.min_depth = std::min(s.min_depth.value_or(r.depth), r.depth);
        break;
      case Outcome::incorrect: ++incorrect; break;
      case Outcome::incomplete: ++incomplete; break;
    }
  }
  if (s.runs == 0) return s;
  s.correct_pct = 100.0 * correct / s.runs;
  s.incorrect_pct = 100.0 * incorrect / s.runs;
  s.incomplete_pct = 100.0 * incomplete / s.runs;
  if (correct) s.avg_depth = depth_sum / correct;
  s.avg_states = states_sum / s.runs;
  return s;
}

diagram::StyleMap problem_style(const pddl::DomainDef& d, const pddl::ProblemDef& p, const ProposerSpec& spec,
                                int m_schemas, const std::string& cache_path) {
  auto inst = search::make_instance(d, p);
  if (!cache_path.empty() && fs::path(cache_path).has_parent_path()) fs::create_directories(fs::path(cache_path).parent_path());
  if (spec.kind == ProposerSpec::Kind::oracle) {
    proposer::OracleProposer prop(d, p, {}, spec.oracle);
    return search::bootstrap_domain_diagram(inst.domain_nl, inst.init_text, d, p, prop, m_schemas, cache_path);
  }
  proposer::HttpModel http(spec.live);
  proposer::LiveProposer prop(spec.live, templates_for(spec.live.template_set), http.fn(), inst.domain_nl);
  return search::bootstrap_domain_diagram(inst.domain_nl, inst.init_text, d, p, prop, m_schemas, cache_path);
}

diagram::StyleMap suite_style(sim::DomainId id, const ProposerSpec& spec, const SuiteOptions& options) {
  std::string cache;
  if (!options.out_dir.empty()) cache = (fs::path(options.out_dir) / ("style_" + std::string(sim::to_string(id)) + ".txt")).string();
  return problem_style(sim::corpus_domain(id), sim::gen_instance(id, sim::GenParams::smallest(id, 0)), spec,
                       options.m_schemas, cache);
}

RunRecord run_problem(const pddl::DomainDef& d, const pddl::ProblemDef& p, std::uint64_t seed,
                      const search::SearchConfig& config, const ProposerSpec& spec, const std::string& run_dir,
                      const diagram::StyleMap& style) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.domain = d.name;
  rec.seed = seed;
  rec.instance = p.name;
  const fs::path dir = run_dir;
  if (!dir.empty()) fs::remove_all(dir);
  try {
    auto inst = search::make_instance(d, p);
    search::SearchConfig cfg = config;
    cfg.seed = seed;
    cfg.run_dir = dir.string();

    std::unique_ptr<proposer::HttpModel> http;
    std::unique_ptr<proposer::Proposer> prop;
    if (spec.kind == ProposerSpec::Kind::oracle) {
      sim::FaultModel faults = spec.faults;
      faults.seed = sim::derive_seed({spec.faults.seed, seed});
      prop = std::make_unique<proposer::OracleProposer>(d, p, faults, spec.oracle);
    } else {
      proposer::ProposerConfig live = spec.live;
      live.transcript_dir = dir.string();
      http = std::make_unique<proposer::HttpModel>(live, dir.empty() ? "" : (dir / "http").string());
      prop = std::make_unique<proposer::LiveProposer>(live, templates_for(live.template_set), http->fn(), inst.domain_nl);
    }

    auto result = search::run_search(inst, cfg, *prop, style);
    rec.states = result.stats.states_generated;
    rec.backtracks = result.stats.backtracks;
    rec.calls = result.stats.calls;
    if (result.outcome == search::SearchResult::Outcome::solved) {
      rec.depth = static_cast<int>(result.plan.size());
      try {
        std::string plan_text;
        try {
          plan_text = nl::plan_to_pddl(result.plan, d, p, nl::PhraseTable::for_domain(d.name));
        } catch (const nl::NlError&) {
          if (!http) throw;
          plan_text = nl::plan_to_pddl(result.plan, d, p, http->fn());
        }
        if (!dir.empty()) write_file(dir / "plan.pddl", plan_text);
        auto report = pddl::validate_plan(d, p, pddl::parse_plan(plan_text));
        rec.outcome = report.valid() ? Outcome::correct : Outcome::incorrect;
        if (!report.valid()) {
          rec.detail = std::string(pddl::to_string(report.verdict)) +
                       (report.failing_step ? " at step " + std::to_string(*report.failing_step) : "");
        }
      } catch (const std::exception& e) {
        rec.outcome = Outcome::incorrect;
        rec.detail = std::string("plan not translatable: ") + e.what();
      }
    } else {
      rec.outcome = Outcome::incomplete;
      rec.detail = result.reason;
    }
  } catch (const std::exception& e) {
    rec.outcome = Outcome::incomplete;
    rec.detail = std::string("error: ") + e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (!dir.empty()) write_file(dir / "record.json", to_json(rec));
  return rec;
}

RunRecord run_instance(sim::DomainId id, std::uint64_t seed, const search::SearchConfig& config,
                       const ProposerSpec& spec, const SuiteOptions& options, const diagram::StyleMap& style) {
  const fs::path dir = run_dir(options, sim::to_string(id), seed);
  if (!dir.empty() && options.resume && fs::exists(dir / "record.json")) {
    try {
      return record_from_json(read_file(dir / "record.json"));
    } catch (const std::invalid_argument&) {
    }
  }
  pddl::ProblemDef p;
  try {
    p = sim::gen_instance(id, sim::GenParams::smallest(id, seed));
  } catch (const std::exception& e) {
    RunRecord rec;
    rec.domain = std::string(sim::to_string(id));
    rec.seed = seed;
    rec.detail = std::string("error: ") + e.what();
    return rec;
  }
  return run_problem(sim::corpus_domain(id), p, seed, config, spec, dir.string(), style);
}

SuiteReport run_suite(sim::DomainId domain, const std::vector<std::uint64_t>& seeds,
                      const search::SearchConfig& config, const ProposerSpec& spec, const SuiteOptions& options) {
  config.validate();
  diagram::StyleMap style = suite_style(domain, spec, options);
  SuiteReport report;
  report.runs.resize(seeds.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, options.workers));
  for (std::size_t start = 0; start < seeds.size(); start += workers) {
    std::vector<std::future<RunRecord>> jobs;
    std::size_t end = std::min(seeds.size(), start + workers);
    for (std::size_t i = start; i < end; ++i) {
      jobs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                [&, i] { return run_instance(domain, seeds[i], config, spec, options, style); }));
    }
    for (std::size_t i = start; i < end; ++i) report.runs[i] = jobs[i - start].get();
  }
  report.domains.push_back(summarize(std::string(sim::to_string(domain)), report.runs));
  return report;
}

std::string to_table(const SuiteReport& report) {
  std::vector<std::pair<std::string, DomainSummary>> rows;
  for (const auto& s : report.domains) rows.emplace_back(s.domain, s);
  return table("domain", rows);
}

std::string to_csv(const SuiteReport& report, bool with_wall) {
  std::string out = "domain,seed,outcome,depth,states,backtracks,wall_ms\n";
  for (const auto& r : report.runs) {
    out += r.domain + "," + std::to_string(r.seed) + "," + std::string(to_string(r.outcome)) + "," +
           std::to_string(r.depth) + "," + std::to_string(r.states) + "," + std::to_string(r.backtracks) + "," +
           (with_wall ? fmt("%.1f", r.wall_ms) : "") + "\n";
  }
  return out;
}

std::vector<std::pair<std::string, search::SearchConfig>> ablation_variants(const search::SearchConfig& base) {
  std::vector<std::pair<std::string, search::SearchConfig>> out;
  auto add = [&](const char* name, auto tweak) {
    search::SearchConfig c = base;
    tweak(c);
    out.emplace_back(name, c);
  };
  add("baseline", [](search::SearchConfig&) {});
  add("no-diagram", [](search::SearchConfig& c) { c.ablations.no_diagram = true; });
  add("no-schema", [](search::SearchConfig& c) { c.ablations.no_schema = true; });
  add("no-code-execution", [](search::SearchConfig& c) { c.ablations.code_as_context = true; });
  add("branching-1", [](search::SearchConfig& c) { c.n = 1; });
  add("branching-2", [](search::SearchConfig& c) { c.n = 2; });
  add("no-backtracking", [](search::SearchConfig& c) { c.ablations.no_backtrack = true; });
  add("no-beam", [](search::SearchConfig& c) { c.ablations.no_beam = true; });
  return out;
}

AblationReport ablation_grid(sim::DomainId domain, const std::vector<std::uint64_t>& seeds,
                             const search::SearchConfig& base, const ProposerSpec& spec, const SuiteOptions& options) {
  AblationReport out;
  for (const auto& [name, config] : ablation_variants(base)) {
    SuiteOptions o = options;
    if (!o.out_dir.empty()) o.out_dir = (fs::path(options.out_dir) / name).string();
    out.emplace_back(name, run_suite(domain, seeds, config, spec, o));
  }
  return out;
}

std::string comparison_table(const AblationReport& report) {
  std::vector<std::pair<std::string, DomainSummary>> rows;
  for (const auto& [name, suite] : report) {
    if (!suite.domains.empty()) rows.emplace_back(name, suite.domains.front());
  }
  return table("variant", rows);
}

}  // namespace vp::bench
