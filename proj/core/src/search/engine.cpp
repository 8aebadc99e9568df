#include "vplan/search/engine.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "vplan/nl/bridge.hpp"

namespace vp::search {

namespace fs = std::filesystem;
using proposer::CallTag;
using proposer::NodeBundle;
using proposer::ProposerError;

namespace {

constexpr std::uint64_t kRootId = 0;
constexpr std::uint64_t kGoalId = 1;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

NodeBundle bundle(const SearchNode& n, std::vector<std::string> path, const Ablations& ab) {
  NodeBundle b;
  b.id = n.id;
  b.state_text = n.state_text;
  b.schema = n.schema;
  b.action_path = std::move(path);
  if (!ab.no_diagram && n.schema) {
    if (ab.code_as_context) {
      b.source_code = "Diagram schema:\n" + diagram::to_text(*n.schema) + "\nPlotting code:\n" + n.diagram.source_code;
    } else {
      b.diagram_svg = n.diagram.svg;
    }
  }
  return b;
}

std::vector<std::string> path_of(const std::vector<SearchNode>& nodes, std::uint64_t id) {
  std::vector<std::string> out;
  for (const SearchNode* n = &nodes[id]; n->parent; n = &nodes[*n->parent]) out.push_back(n->action.value_or(""));
  std::reverse(out.begin(), out.end());
  return out;
}

struct Drawn {
  std::optional<diagram::DiagramSchema> schema;
  diagram::RenderedDiagram diagram;
  std::vector<std::string> notes;
  bool failed = false;
};

// Schema generation with self-reflection and retries, then rendering.
Drawn draw(proposer::Proposer& p, CallTag tag, const std::string& state_text, const std::string& action_text,
           const diagram::StyleMap& style, const SearchConfig& config, const std::vector<std::string>& expected) {
  Drawn out;
  if (config.ablations.no_diagram) return out;
  for (int attempt = 0; attempt <= config.schema_retries; ++attempt) {
    tag.attempt = static_cast<std::uint32_t>(attempt);
    std::string text;
    diagram::DiagramSchema schema;
    try {
      text = p.make_schema(tag, state_text, action_text, style);
      schema = diagram::parse_schema(text);
    } catch (const std::exception& e) {
      out.notes.push_back("schema attempt " + std::to_string(attempt) + ": " + e.what());
      continue;
    }
    if (!config.ablations.no_schema) {
      proposer::Verdict v = p.reflect_schema(tag, text, state_text, action_text);
      if (!v.pass) {
        out.notes.push_back("schema attempt " + std::to_string(attempt) + " rejected: " + v.critique);
        continue;
      }
    }
    auto violations = diagram::check_schema(schema, expected);
    if (!violations.empty()) {
      out.notes.push_back("schema attempt " + std::to_string(attempt) + ": " + violations.front().text());
      continue;
    }
    out.diagram = diagram::render(schema);
    if (config.ablations.code_as_context) out.diagram.source_code = diagram::matplotlib_code(schema);
    out.schema = std::move(schema);
    return out;
  }
  out.failed = true;
  out.notes.push_back("no acceptable schema after " + std::to_string(config.schema_retries + 1) + " attempts");
  return out;
}

std::string info_text(const SearchNode& n) {
  std::string out;
  out += "id: " + std::to_string(n.id) + "\n";
  out += "depth: " + std::to_string(n.depth) + "\n";
  out += "parent: " + (n.parent ? std::to_string(*n.parent) : std::string("none")) + "\n";
  out += "action: " + n.action.value_or("none") + "\n";
  out += "status: " + std::string(to_string(n.status)) + "\n";
  out += "sample: " + std::to_string(n.sample_index) + "\n";
  out += "expansions: " + std::to_string(n.expansions) + "\n";
  out += "rank: " + (n.rank < 0 ? std::string("none") : std::to_string(n.rank)) + "\n";
  for (const auto& note : n.notes) out += "note: " + note + "\n";
  return out;
}

void write_node(const fs::path& dir, const SearchNode& n) {
  spit(dir / "state.txt", n.state_text);
  if (n.schema) spit(dir / "schema.txt", diagram::to_text(*n.schema));
  if (!n.diagram.svg.empty()) spit(dir / "diagram.svg", n.diagram.svg);
  if (!n.diagram.source_code.empty()) spit(dir / "diagram.py", n.diagram.source_code);
  spit(dir / "info.txt", info_text(n));
}

}  // namespace

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::candidate: return "candidate";
    case NodeStatus::validated: return "validated";
    case NodeStatus::invalid: return "invalid";
    case NodeStatus::exhausted: return "exhausted";
    case NodeStatus::goal: return "goal";
  }
  return "unknown";
}

std::string_view to_string(SearchResult::Outcome outcome) {
  return outcome == SearchResult::Outcome::solved ? "solved" : "incomplete";
}

SearchConfig SearchConfig::simple() {
  SearchConfig c;
  c.max_states = 120;
  c.max_depth = 28;
  return c;
}

void SearchConfig::validate() const {
  auto bad = [](const std::string& m) { throw SearchError(SearchError::Kind::bad_config, m); };
  if (n < 1) bad("n must be at least 1");
  if (k < 1) bad("k must be at least 1");
  if (B < 0) bad("B must not be negative");
  if (max_states < 1) bad("max_states must be positive");
  if (max_depth < 1) bad("max_depth must be positive");
  if (schema_retries < 0 || code_retries < 0) bad("retry counts must not be negative");
  if (workers < 1) bad("workers must be at least 1");
}

Instance make_instance(const pddl::DomainDef& domain, const pddl::ProblemDef& problem) {
  const nl::PhraseTable& table = nl::PhraseTable::for_domain(domain.name);
  Instance inst;
  inst.name = problem.name;
  inst.domain_nl = nl::domain_to_nl(domain, table);
  inst.instance_nl = nl::instance_to_nl(domain, problem, table);
  inst.init_text = nl::state_to_nl(problem.init, domain, problem, table);
  inst.goal_schema_text = nl::state_to_nl(pddl::State(problem.goal_pos), domain, problem, table);
  inst.goal_text = inst.goal_schema_text;
  for (const auto& g : problem.goal_neg) {
    inst.goal_text += "It is not the case that " + nl::fact_to_nl(g, domain, problem, table) + ".\n";
  }
  if (inst.goal_text.empty()) inst.goal_text = "The goal is trivially satisfied.\n";
  inst.object_ids = diagram::object_ids(domain, problem);
  return inst;
}

diagram::StyleMap bootstrap_domain_diagram(const std::string& domain_nl, const std::string& state_text,
                                           const pddl::DomainDef& domain, const pddl::ProblemDef& problem,
                                           proposer::Proposer& proposer, int m_schemas, const std::string& cache_path) {
  if (!cache_path.empty() && fs::exists(cache_path)) return diagram::parse_style(slurp(cache_path));
  const auto expected = diagram::object_ids(domain, problem);
  std::vector<std::string> problems;
  for (int round = 0; round < 2; ++round) {
    std::vector<diagram::DiagramSchema> valid;
    for (int i = 0; i < m_schemas; ++i) {
      CallTag tag{0, static_cast<std::uint32_t>(round * m_schemas + i), 0};
      try {
        auto schema = diagram::parse_schema(proposer.propose_domain_schema(tag, domain_nl, state_text));
        auto violations = diagram::check_schema(schema, expected);
        if (violations.empty()) valid.push_back(std::move(schema));
        else problems.push_back(violations.front().text());
      } catch (const std::exception& e) {
        problems.push_back(e.what());
      }
    }
    if (valid.empty()) continue;
    auto order = proposer.rank_diagrams({}, domain_nl, valid);
    pddl::State state = problem.init;
    try {
      state = nl::state_from_nl(state_text, domain, problem, nl::PhraseTable::for_domain(domain.name));
    } catch (const std::exception&) {
    }
    diagram::StyleMap style =
        diagram::style_from_schema(valid.at(order.at(0)), state, domain, problem, diagram::default_style(domain));
    diagram::check_style(style, domain);
    if (!cache_path.empty()) spit(cache_path, diagram::to_text(style));
    return style;
  }
  throw SearchError(SearchError::Kind::all_candidates_invalid,
                    "no candidate diagram passed the checks" + (problems.empty() ? "" : ": " + problems.back()));
}

Endpoints init_endpoints(const Instance& instance, const diagram::StyleMap& style, proposer::Proposer& proposer,
                         const SearchConfig& config) {
  Endpoints ep;
  ep.root.id = kRootId;
  ep.root.state_text = instance.init_text;
  ep.goal.id = kGoalId;
  ep.goal.depth = -1;
  ep.goal.state_text = instance.goal_text;
  auto fill = [&](SearchNode& node, const std::string& schema_text, const char* what) {
    Drawn d = draw(proposer, {node.id, 0, 0}, schema_text, "none", style, config, instance.object_ids);
    if (d.failed) {
      throw SearchError(SearchError::Kind::schema_failure,
                        std::string("no diagram for the ") + what + " state: " + d.notes.back() +
                            (d.notes.size() > 1 ? " (" + d.notes[d.notes.size() - 2] + ")" : ""));
    }
    node.schema = std::move(d.schema);
    node.diagram = std::move(d.diagram);
  };
  fill(ep.root, instance.init_text, "initial");
  fill(ep.goal, instance.goal_schema_text, "goal");
  ep.root.status = NodeStatus::validated;
  return ep;
}

std::vector<ChildDraft> expand_node(const SearchNode& parent, const std::vector<std::string>& parent_path,
                                    const Endpoints& endpoints, const Instance& instance,
                                    const diagram::StyleMap& style, proposer::Proposer& proposer,
                                    const SearchConfig& config, int max_children,
                                    const std::vector<std::string>& accepted) {
  const Ablations& ab = config.ablations;
  const NodeBundle parent_b = bundle(parent, parent_path, ab);
  const NodeBundle goal_b = bundle(endpoints.goal, {}, ab);
  const NodeBundle root_b = bundle(endpoints.root, {}, ab);
  std::vector<ChildDraft> out;
  std::vector<std::string> tried;
  std::set<std::string> seen;
  for (const auto& a : accepted) seen.insert(nl::canonical_action_text(a));
  int created = 0;
  const int first = parent.expansions * config.n;
  for (int i = first; i < first + config.n && created < max_children; ++i) {
    CallTag tag{parent.id, static_cast<std::uint32_t>(i), 0};
    ChildDraft d;
    d.node.depth = parent.depth + 1;
    d.node.parent = parent.id;
    d.node.sample_index = tag.sample;
    proposer::ActionProposal proposal;
    try {
      proposal = proposer.propose_action(tag, parent_b, goal_b, tried);
    } catch (const std::exception& e) {
      d.node.status = NodeStatus::invalid;
      d.node.notes.push_back(std::string("proposal failed: ") + e.what());
      out.push_back(std::move(d));
      ++created;
      continue;
    }
    const std::string canon = nl::canonical_action_text(proposal.action_text);
    if (seen.count(canon)) continue;
    tried.push_back(proposal.action_text);
    ++created;
    d.node.action = proposal.action_text;
    d.node.state_text = proposal.next_state_text;
    if (!proposal.rationale.empty()) d.node.notes.push_back("rationale: " + proposal.rationale);

    Drawn drawn = draw(proposer, tag, d.node.state_text, proposal.action_text, style, config, instance.object_ids);
    d.node.notes.insert(d.node.notes.end(), drawn.notes.begin(), drawn.notes.end());
    if (drawn.failed) {
      d.node.status = NodeStatus::invalid;
      out.push_back(std::move(d));
      continue;
    }
    d.node.schema = std::move(drawn.schema);
    d.node.diagram = std::move(drawn.diagram);

    std::vector<std::string> path = parent_path;
    path.push_back(proposal.action_text);
    NodeBundle child_b = bundle(d.node, path, ab);
    proposer::Verdict local = proposer.verify_local(tag, parent_b, child_b, proposal.action_text);
    if (!local.pass) {
      d.node.status = NodeStatus::invalid;
      d.node.notes.push_back("local check failed: " + local.critique);
      out.push_back(std::move(d));
      continue;
    }
    proposer::Verdict global = proposer.verify_global(tag, path, root_b, goal_b);
    if (!global.pass) {
      d.node.status = NodeStatus::invalid;
      d.node.notes.push_back("global check failed: " + global.critique);
      out.push_back(std::move(d));
      continue;
    }
    d.node.status = NodeStatus::validated;
    seen.insert(canon);
    bool goal = false;
    try {
      goal = proposer.check_goal(tag, child_b, goal_b);
    } catch (const std::exception& e) {
      d.node.notes.push_back(std::string("goal check failed: ") + e.what());
    }
    if (goal) {
      d.node.status = NodeStatus::goal;
      d.is_goal = true;
      out.push_back(std::move(d));
      break;
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<std::uint64_t> beam_step(std::vector<SearchNode*> children, const SearchNode& goal,
                                     proposer::Proposer& proposer, const SearchConfig& config) {
  if (children.empty()) return {};
  std::vector<std::size_t> order(children.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (children.size() > 1) {
    std::vector<NodeBundle> bundles;
    for (const SearchNode* c : children) bundles.push_back(bundle(*c, {}, config.ablations));
    try {
      order = proposer.rank_states({children.front()->id, 0, 0}, bundles, bundle(goal, {}, config.ablations));
    } catch (const ProposerError& e) {
      for (SearchNode* c : children) c->notes.push_back(std::string("ranking failed, creation order kept: ") + e.what());
    }
  }
  std::size_t keep = config.ablations.no_beam ? order.size() : std::min<std::size_t>(order.size(), config.k);
  std::vector<std::uint64_t> frontier;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    SearchNode* c = children[order[pos]];
    c->rank = static_cast<int>(pos);
    if (pos < keep) {
      c->frontier = true;
      frontier.push_back(c->id);
    }
  }
  return frontier;
}

std::vector<std::uint64_t> backtrack(DepthLedger& ledger, std::vector<SearchNode>& nodes, int failed_depth,
                                     const SearchConfig& config) {
  if (config.ablations.no_backtrack) return {};
  for (int d = failed_depth; d >= 0; --d) {
    DepthInfo& info = ledger[d];
    if (info.dead) continue;
    std::vector<SearchNode*> spare;
    for (auto& n : nodes) {
      if (n.depth == d && (n.status == NodeStatus::validated || n.status == NodeStatus::exhausted)) spare.push_back(&n);
    }
    if (spare.empty()) continue;
    if (info.attempts >= config.B) {
      for (SearchNode* n : spare) {
        n->status = NodeStatus::invalid;
        n->notes.push_back("invalidated: backtracking attempts at depth " + std::to_string(d) + " used up");
        info.invalidated.push_back(n->id);
      }
      info.dead = true;
      continue;
    }
    std::stable_sort(spare.begin(), spare.end(), [](const SearchNode* a, const SearchNode* b) {
      if ((a->expansions > 0) != (b->expansions > 0)) return a->expansions == 0;
      int ra = a->rank < 0 ? INT32_MAX : a->rank, rb = b->rank < 0 ? INT32_MAX : b->rank;
      return ra != rb ? ra < rb : a->id < b->id;
    });
    std::size_t keep = config.ablations.no_beam ? spare.size() : std::min<std::size_t>(spare.size(), config.k);
    ++info.attempts;
    info.frontier.clear();
    for (std::size_t i = 0; i < keep; ++i) {
      spare[i]->frontier = true;
      info.frontier.push_back(spare[i]->id);
    }
    return info.frontier;
  }
  return {};
}

SearchResult run_search(const Instance& instance, const SearchConfig& config, proposer::Proposer& proposer,
                        const diagram::StyleMap& style) {
  config.validate();
  SearchResult result;
  std::vector<std::pair<int, std::string>> ranking_log;
  auto finish = [&](SearchResult::Outcome outcome, std::string reason) {
    result.outcome = outcome;
    result.reason = std::move(reason);
    result.stats.calls = proposer.counts();
    if (config.run_dir.empty()) return;
    fs::path dir(config.run_dir);
    for (const auto& n : result.nodes) {
      if (n.id == kGoalId) write_node(dir / "goal_state", n);
      else write_node(dir / ("state_" + std::to_string(n.id)), n);
    }
    std::map<int, std::string> by_depth;
    for (const auto& [d, text] : ranking_log) by_depth[d] += text;
    for (const auto& [d, text] : by_depth) spit(dir / "ranking" / ("depth_" + std::to_string(d) + ".txt"), text);
    std::string r;
    r += "instance: " + instance.name + "\n";
    r += "outcome: " + std::string(to_string(result.outcome)) + "\n";
    if (!result.reason.empty()) r += "reason: " + result.reason + "\n";
    r += "plan_length: " + std::to_string(result.plan.size()) + "\n";
    r += "states_generated: " + std::to_string(result.stats.states_generated) + "\n";
    r += "max_depth_reached: " + std::to_string(result.stats.max_depth_reached) + "\n";
    r += "backtracks: " + std::to_string(result.stats.backtracks) + "\n";
    for (const auto& [kind, count] : result.stats.calls) r += "calls." + kind + ": " + std::to_string(count) + "\n";
    spit(dir / "result.txt", r);
    std::string plan;
    for (const auto& a : result.plan) plan += a + "\n";
    spit(dir / "plan.nl.txt", plan);
  };

  Endpoints ep;
  try {
    ep = init_endpoints(instance, style, proposer, config);
  } catch (const std::exception& e) {
    finish(SearchResult::Outcome::incomplete, e.what());
    return result;
  }
  auto& nodes = result.nodes;
  nodes.push_back(ep.root);
  nodes.push_back(ep.goal);
  nodes[kRootId].frontier = true;
  result.ledger[0].frontier = {kRootId};

  auto solved_at = [&](std::uint64_t id) {
    result.plan = path_of(nodes, id);
    for (std::optional<std::uint64_t> cur = id; cur; cur = nodes[*cur].parent) result.goal_chain.push_back(*cur);
    std::reverse(result.goal_chain.begin(), result.goal_chain.end());
    finish(SearchResult::Outcome::solved, "");
  };

  bool root_goal = false;
  try {
    root_goal = proposer.check_goal({kRootId, 0, 0}, bundle(nodes[kRootId], {}, config.ablations),
                                    bundle(nodes[kGoalId], {}, config.ablations));
  } catch (const std::exception&) {
  }
  if (root_goal) {
    nodes[kRootId].status = NodeStatus::goal;
    solved_at(kRootId);
    return result;
  }

  std::vector<std::uint64_t> frontier{kRootId};
  int depth = 0;
  bool after_backtrack = false;
  while (true) {
    if (result.stats.states_generated >= config.max_states) {
      finish(SearchResult::Outcome::incomplete, "state budget exhausted");
      return result;
    }
    std::vector<SearchNode*> validated;
    if (depth < config.max_depth) {
      RoundTrace round;
      round.depth = depth;
      round.parents = frontier;
      round.after_backtrack = after_backtrack;
      const int room = config.max_states - result.stats.states_generated;
      std::vector<std::vector<ChildDraft>> drafts(frontier.size());
      std::vector<std::vector<std::string>> paths(frontier.size());
      std::vector<std::vector<std::string>> accepted(frontier.size());
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        paths[i] = path_of(nodes, frontier[i]);
        for (const auto& n : nodes) {
          if (n.parent == frontier[i] && n.status != NodeStatus::invalid && n.action) accepted[i].push_back(*n.action);
        }
      }
      if (config.workers > 1 && frontier.size() > 1) {
        for (std::size_t start = 0; start < frontier.size(); start += static_cast<std::size_t>(config.workers)) {
          std::vector<std::future<std::vector<ChildDraft>>> jobs;
          std::size_t end = std::min(frontier.size(), start + static_cast<std::size_t>(config.workers));
          for (std::size_t i = start; i < end; ++i) {
            jobs.push_back(std::async(std::launch::async, [&, i] {
              return expand_node(nodes[frontier[i]], paths[i], ep, instance, style, proposer, config, room, accepted[i]);
            }));
          }
          for (std::size_t i = start; i < end; ++i) drafts[i] = jobs[i - start].get();
        }
      } else {
        int left = room;
        for (std::size_t i = 0; i < frontier.size() && left > 0; ++i) {
          drafts[i] = expand_node(nodes[frontier[i]], paths[i], ep, instance, style, proposer, config, left, accepted[i]);
          left -= static_cast<int>(drafts[i].size());
          if (!drafts[i].empty() && drafts[i].back().is_goal) break;
        }
      }
      std::optional<std::uint64_t> goal_id;
      for (std::size_t i = 0; i < frontier.size() && !goal_id; ++i) {
        nodes[frontier[i]].status = NodeStatus::exhausted;
        ++nodes[frontier[i]].expansions;
        for (auto& d : drafts[i]) {
          if (result.stats.states_generated >= config.max_states) break;
          d.node.id = nodes.size();
          ++result.stats.states_generated;
          result.stats.max_depth_reached = std::max(result.stats.max_depth_reached, d.node.depth);
          round.children.push_back(d.node.id);
          nodes.push_back(std::move(d.node));
          if (d.is_goal) {
            goal_id = nodes.back().id;
            break;
          }
        }
      }
      result.rounds.push_back(round);
      if (goal_id) {
        solved_at(*goal_id);
        return result;
      }
      for (auto id : round.children) {
        if (nodes[id].status == NodeStatus::validated) validated.push_back(&nodes[id]);
      }
    } else {
      for (auto id : frontier) {
        nodes[id].status = NodeStatus::exhausted;
        nodes[id].notes.push_back("not expanded: depth limit");
      }
    }

    if (!validated.empty()) {
      frontier = beam_step(validated, nodes[kGoalId], proposer, config);
      ++depth;
      result.ledger[depth].frontier = frontier;
      std::string log = "# ranking of " + std::to_string(validated.size()) + " children\n";
      std::vector<SearchNode*> ranked = validated;
      std::sort(ranked.begin(), ranked.end(), [](auto* a, auto* b) { return a->rank < b->rank; });
      for (auto* c : ranked) {
        log += std::to_string(c->rank) + " state_" + std::to_string(c->id) + (c->frontier ? " frontier" : "") + "\n";
      }
      ranking_log.emplace_back(depth, log);
      after_backtrack = false;
      continue;
    }

    frontier = backtrack(result.ledger, nodes, std::min(depth, config.max_depth - 1), config);
    if (frontier.empty()) {
      finish(SearchResult::Outcome::incomplete,
             config.ablations.no_backtrack ? "no valid children and backtracking is off" : "no ancestor left to resume from");
      return result;
    }
    ++result.stats.backtracks;
    depth = nodes[frontier.front()].depth;
    after_backtrack = true;
  }
}

}  // namespace vp::search
