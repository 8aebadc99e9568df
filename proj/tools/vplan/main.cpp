// vplan: generate, translate, plan, validate, render and benchmark.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error, 3 incorrect or
// invalid plan, 4 incomplete search.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vplan/bench/suite.hpp"
#include "vplan/config/settings.hpp"
#include "vplan/diagram/render.hpp"
#include "vplan/diagram/schema.hpp"
#include "vplan/nl/bridge.hpp"
#include "vplan/pddl/parser.hpp"
#include "vplan/pddl/validate.hpp"
#include "vplan/sim/domains.hpp"

namespace fs = std::filesystem;
using namespace vp;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kUsage = 2, kInvalid = 3, kIncomplete = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string valid_ids() {
  std::string out;
  for (auto id : sim::all_domains()) out += (out.empty() ? "" : ", ") + std::string(sim::to_string(id));
  return out;
}

sim::DomainId domain_id_arg(const std::string& name) {
  auto id = sim::parse_domain_id(name);
  if (!id) throw UsageError("unknown domain '" + name + "' (valid: " + valid_ids() + ")");
  return *id;
}

// A corpus id or a domain file.
pddl::DomainDef load_domain(const std::string& arg) {
  if (auto id = sim::parse_domain_id(arg)) return sim::corpus_domain(*id);
  if (!fs::exists(arg)) throw UsageError("'" + arg + "' is neither a domain file nor a domain id (" + valid_ids() + ")");
  return pddl::parse_domain(read_file(arg));
}

bool is_domain_text(const std::string& text) {
  static const std::regex re(R"(\(\s*define\s*\(\s*domain\b)", std::regex::icase);
  return std::regex_search(text, re);
}

// The problem's domain: `domain_arg` when given, otherwise the corpus domain
// it names.
pddl::DomainDef problem_domain(const std::string& problem_text, const std::string& domain_arg) {
  if (!domain_arg.empty()) return load_domain(domain_arg);
  static const std::regex re(R"(\(\s*:domain\s+([^\s()]+)\s*\))", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(problem_text, m, re)) throw std::runtime_error("problem has no (:domain ...) clause");
  auto id = sim::parse_domain_id(m[1].str());
  if (!id) throw UsageError("problem names domain '" + m[1].str() + "', which is not in the corpus; pass --domain");
  return sim::corpus_domain(*id);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  static const std::regex range(R"(\s*(\d+)\s*(?:-\s*(\d+))?\s*)");
  while (std::getline(ss, item, ',')) {
    std::smatch m;
    if (!std::regex_match(item, m, range)) throw UsageError("bad seed list '" + text + "' (e.g. 1-20 or 1,4,9)");
    const auto from = std::stoull(m[1].str());
    const auto to = m[2].matched ? std::stoull(m[2].str()) : from;
    if (to < from) throw UsageError("bad seed range '" + item + "'");
    for (auto s = from; s <= to; ++s) out.push_back(s);
  }
  if (out.empty()) throw UsageError("empty seed list");
  return out;
}

bench::ProposerSpec proposer_spec(const config::Settings& settings) {
  bench::ProposerSpec spec;
  spec.faults = settings.faults();
  spec.oracle = settings.oracle();
  spec.live = settings.proposer();
  if (settings.get("proposer.kind") == "live") {
    spec.kind = bench::ProposerSpec::Kind::live;
    if (spec.live.endpoint.empty()) throw UsageError("live proposer needs an endpoint: set VP_ENDPOINT or proposer.endpoint");
  }
  try {
    spec.faults.validate();
    spec.live.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return spec;
}

search::SearchConfig search_config(const config::Settings& settings, std::optional<sim::DomainId> id) {
  auto c = settings.search(id);
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return c;
}

int exit_for(bench::Outcome outcome) {
  switch (outcome) {
    case bench::Outcome::correct: return kOk;
    case bench::Outcome::incorrect: return kInvalid;
    case bench::Outcome::incomplete: return kIncomplete;
  }
  return kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual planning with generated diagrams"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string workdir = ".";
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--workdir", workdir, "Base directory for relative paths");
  app.add_option("--config", config_path, "Settings file (key = value)");
  app.add_option("--set", overrides, "Override a setting, KEY=VALUE")->allow_extra_args(false);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate problem instances");
  std::string gen_domain, gen_out;
  int gen_count = 1;
  std::uint64_t gen_seed = 0;
  gen->add_option("domain", gen_domain, "Domain id")->required();
  gen->add_option("--count", gen_count, "Number of instances")->check(CLI::Range(1, 1000000));
  gen->add_option("--seed", gen_seed, "First seed");
  gen->add_option("--out", gen_out, "Output directory (default instances/<domain>)");

  // translate
  auto* tr = app.add_subcommand("translate", "Natural-language views of PDDL, and NL plans back to PDDL");
  std::string tr_file, tr_domain, tr_plan;
  tr->add_option("file", tr_file, "Domain file, domain id or problem file")->required();
  tr->add_option("--domain", tr_domain, "Domain file or id for a problem");
  tr->add_option("--plan-nl", tr_plan, "Plan with one natural-language action per line");

  // plan
  auto* pl = app.add_subcommand("plan", "Solve one problem");
  std::string pl_problem, pl_domain, pl_out, pl_proposer;
  pl->add_option("problem", pl_problem, "Problem file")->required();
  pl->add_option("--domain", pl_domain, "Domain file or id (default: named by the problem)");
  pl->add_option("--proposer", pl_proposer, "oracle or live")->check(CLI::IsMember({"oracle", "live"}));
  pl->add_option("--out", pl_out, "Run directory (default <paths.out>/<problem name>)");

  // validate
  auto* va = app.add_subcommand("validate", "Check a plan against a problem");
  std::string va_domain, va_problem, va_plan;
  va->add_option("domain", va_domain, "Domain file or id")->required();
  va->add_option("problem", va_problem, "Problem file")->required();
  va->add_option("plan", va_plan, "Plan file")->required();

  // render
  auto* re = app.add_subcommand("render", "Render a diagram schema to SVG");
  std::string re_schema, re_out, re_code;
  re->add_option("schema", re_schema, "Schema file")->required();
  re->add_option("--out", re_out, "SVG output (default stdout)");
  re->add_option("--code", re_code, "Also write equivalent plotting code");

  // bench
  auto* be = app.add_subcommand("bench", "Run the benchmark suite");
  std::string be_domain, be_seeds = "1-20", be_out, be_proposer;
  bool be_ablations = false;
  be->add_option("domain", be_domain, "Domain id or 'all'")->required();
  be->add_option("--seeds", be_seeds, "Seeds, e.g. 1-20 or 1,4,9");
  be->add_flag("--ablations", be_ablations, "Compare the ablation variants");
  be->add_option("--proposer", be_proposer, "oracle or live")->check(CLI::IsMember({"oracle", "live"}));
  be->add_option("--out", be_out, "Report directory (default <paths.out>/bench)");

  // config
  auto* co = app.add_subcommand("config", "Print the effective settings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    std::error_code ec;
    fs::current_path(workdir, ec);
    if (ec) throw UsageError("cannot enter workdir '" + workdir + "': " + ec.message());

    config::Settings settings;
    if (!config_path.empty()) settings.load_file(config_path);
    settings.load_env([](const char* name) { return std::getenv(name); });
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got '" + kv + "'");
      settings.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!pl_proposer.empty()) settings.set("proposer.kind", pl_proposer);
    if (!be_proposer.empty()) settings.set("proposer.kind", be_proposer);

    if (*gen) {
      const auto id = domain_id_arg(gen_domain);
      const fs::path out = gen_out.empty() ? fs::path("instances") / std::string(sim::to_string(id)) : fs::path(gen_out);
      for (int i = 0; i < gen_count; ++i) {
        const std::uint64_t seed = gen_seed + static_cast<std::uint64_t>(i);
        auto p = sim::gen_instance(id, sim::GenParams::smallest(id, seed));
        const fs::path file = out / ("instance-" + std::to_string(seed) + ".pddl");
        write_file(file, pddl::to_pddl(p));
        std::cout << file.string() << "\n";
      }
      return kOk;
    }

    if (*tr) {
      if (sim::parse_domain_id(tr_file) && !fs::exists(tr_file)) {
        const auto& d = sim::corpus_domain(*sim::parse_domain_id(tr_file));
        std::cout << nl::domain_to_nl(d, nl::PhraseTable::for_domain(d.name));
        return kOk;
      }
      const std::string text = read_file(tr_file);
      if (is_domain_text(text)) {
        auto d = pddl::parse_domain(text);
        std::cout << nl::domain_to_nl(d, nl::PhraseTable::for_domain(d.name));
        return kOk;
      }
      auto d = problem_domain(text, tr_domain);
      auto p = pddl::parse_problem(text, d);
      const auto& table = nl::PhraseTable::for_domain(d.name);
      if (tr_plan.empty()) {
        std::cout << nl::instance_to_nl(d, p, table);
        return kOk;
      }
      std::vector<std::string> actions;
      std::stringstream ss(read_file(tr_plan));
      for (std::string line; std::getline(ss, line);)
        if (line.find_first_not_of(" \t\r") != std::string::npos) actions.push_back(line);
      std::cout << nl::plan_to_pddl(actions, d, p, table);
      return kOk;
    }

    if (*pl) {
      const std::string text = read_file(pl_problem);
      auto d = problem_domain(text, pl_domain);
      auto p = pddl::parse_problem(text, d);
      const auto id = sim::domain_id_of(d);
      auto cfg = search_config(settings, id);
      auto spec = proposer_spec(settings);
      const fs::path dir = pl_out.empty() ? fs::path(settings.get("paths.out")) / p.name : fs::path(pl_out);
      const fs::path style_cache = dir.parent_path() / ("style_" + d.name + ".txt");
      std::cerr << "planning " << p.name << " in " << dir.string() << "\n";
      auto style = bench::problem_style(d, p, spec, std::stoi(settings.get("bench.m_schemas")), style_cache.string());
      auto rec = bench::run_problem(d, p, cfg.seed, cfg, spec, dir.string(), style);
      std::cout << bench::to_json(rec) << "\n";
      if (!rec.detail.empty()) std::cerr << bench::to_string(rec.outcome) << ": " << rec.detail << "\n";
      return exit_for(rec.outcome);
    }

    if (*va) {
      auto d = load_domain(va_domain);
      auto p = pddl::parse_problem(read_file(va_problem), d);
      auto report = pddl::validate_plan(d, p, pddl::parse_plan(read_file(va_plan)));
      std::cout << report.to_text();
      return report.valid() ? kOk : kInvalid;
    }

    if (*re) {
      auto schema = diagram::parse_schema(read_file(re_schema));
      auto rendered = diagram::render(schema);
      if (re_out.empty()) {
        std::cout << rendered.svg;
      } else {
        write_file(re_out, rendered.svg);
      }
      if (!re_code.empty()) write_file(re_code, diagram::matplotlib_code(schema));
      return kOk;
    }

    if (*be) {
      std::vector<sim::DomainId> domains;
      if (be_domain == "all") {
        domains.assign(sim::all_domains().begin(), sim::all_domains().end());
      } else {
        domains.push_back(domain_id_arg(be_domain));
      }
      const auto seeds = parse_seeds(be_seeds);
      auto spec = proposer_spec(settings);
      const fs::path out = be_out.empty() ? fs::path(settings.get("paths.out")) / "bench" : fs::path(be_out);
      bench::SuiteOptions options;
      options.out_dir = out.string();
      options.workers = std::stoi(settings.get("bench.workers"));
      options.m_schemas = std::stoi(settings.get("bench.m_schemas"));
      if (options.workers < 1 || options.m_schemas < 1) throw UsageError("bench.workers and bench.m_schemas must be positive");

      if (be_ablations) {
        for (auto id : domains) {
          const std::string name(sim::to_string(id));
          auto grid = bench::ablation_grid(id, seeds, search_config(settings, id), spec, options);
          const std::string table = bench::comparison_table(grid);
          write_file(out / ("ablations_" + name + ".txt"), table);
          for (const auto& [variant, report] : grid)
            write_file(out / variant / ("report_" + name + ".csv"), bench::to_csv(report));
          std::cout << name << "\n" << table;
        }
        return kOk;
      }
      bench::SuiteReport all;
      for (auto id : domains) {
        std::cerr << "running " << sim::to_string(id) << " on " << seeds.size() << " seeds\n";
        auto report = bench::run_suite(id, seeds, search_config(settings, id), spec, options);
        all.runs.insert(all.runs.end(), report.runs.begin(), report.runs.end());
        all.domains.insert(all.domains.end(), report.domains.begin(), report.domains.end());
      }
      write_file(out / "report.txt", bench::to_table(all));
      write_file(out / "report.csv", bench::to_csv(all));
      std::cout << bench::to_table(all);
      return kOk;
    }

    if (*co) {
      std::cout << settings.dump();
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "vplan: " << e.what() << "\n";
    return kUsage;
  } catch (const config::ConfigError& e) {
    std::cerr << "vplan: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "vplan: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
