#include "vplan/proposer/oracle.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <set>

#include "vplan/diagram/render.hpp"
#include "vplan/pddl/error.hpp"
#include "vplan/pddl/semantics.hpp"

namespace vp::proposer {

namespace {

// Tags separating fault streams that share a kind.
constexpr std::uint64_t kReflectStream = 0x7265666c;
constexpr std::uint64_t kLocalStream = 0x6c6f6361;
constexpr std::uint64_t kProposalStream = 0x70726f70;

int rank_key(std::optional<int> d) { return d ? *d : INT_MAX; }

std::string join_ids(const std::set<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
  return out;
}

// Schema text keeps three decimals.
bool near(double a, double b) { return std::fabs(a - b) < 1e-3; }

}  // namespace

OracleProposer::OracleProposer(pddl::DomainDef domain, pddl::ProblemDef problem, sim::FaultModel faults,
                               sim::OracleOptions options)
    : OracleProposer(std::make_shared<const sim::DistanceOracle>(
                         std::make_shared<const sim::Task>(std::move(domain), std::move(problem)), options),
                     faults) {}

OracleProposer::OracleProposer(std::shared_ptr<const sim::DistanceOracle> oracle, sim::FaultModel faults)
    : oracle_(std::move(oracle)), phrases_(&nl::PhraseTable::for_domain(oracle_->task().domain().name)),
      faults_(faults) {
  faults_.validate();
}

std::string OracleProposer::state_text(const pddl::State& state) const {
  return nl::state_to_nl(state, domain(), problem(), *phrases_);
}

pddl::State OracleProposer::parse_state(std::string_view text) const {
  try {
    return nl::state_from_nl(text, domain(), problem(), *phrases_);
  } catch (const std::exception& e) {
    throw ProposerError(ProposerError::Kind::bad_input, std::string("state text: ") + e.what());
  }
}

std::optional<int> OracleProposer::distance(const pddl::State& state) const { return oracle_->distance(state); }

void OracleProposer::shuffle_adjacent(std::vector<std::size_t>& order, std::uint64_t key) const {
  if (faults_.ranking_noise <= 0.0) return;
  sim::Rng rng = faults_.stream(sim::FaultKind::ranking_noise, {key});
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    if (rng.chance(faults_.ranking_noise)) std::swap(order[i], order[i + 1]);
  }
}

std::string OracleProposer::propose_domain_schema(const CallTag& tag, const std::string&,
                                                  const std::string& state_text) {
  count("propose_domain_schema");
  diagram::StyleMap style = diagram::default_style(domain());
  const auto& palette = diagram::palette();
  auto rotate = [&](std::string& color) {
    if (color.empty()) return;
    for (std::size_t i = 0; i < palette.size(); ++i) {
      if (palette[i].name == color) {
        color = std::string(palette[(i + tag.sample) % palette.size()].name);
        return;
      }
    }
  };
  for (auto& [type, ts] : style.types) rotate(ts.color);
  for (auto& s : style.statuses) rotate(s.color);
  return diagram::to_text(diagram::schema_from_state(parse_state(state_text), style, domain(), problem()));
}

std::vector<std::size_t> OracleProposer::rank_diagrams(const CallTag&, const std::string&,
                                                       const std::vector<diagram::DiagramSchema>& candidates) {
  count("rank_diagrams");
  if (candidates.empty()) throw ProposerError(ProposerError::Kind::empty_candidates, "no diagrams to rank");
  return diagram::oracle_schema_order(candidates, diagram::object_ids(domain(), problem()));
}

ActionProposal OracleProposer::propose_action(const CallTag& tag, const NodeBundle& node, const NodeBundle&,
                                              const std::vector<std::string>&) {
  count("propose_action");
  const sim::Task& t = task();
  pddl::State state = parse_state(node.state_text);
  auto bits = t.encode(state);
  if (!bits) throw ProposerError(ProposerError::Kind::bad_input, "state lies outside the problem");

  struct Option {
    std::size_t action;
    int dist;
  };
  std::vector<Option> options;
  std::vector<std::uint64_t> next(t.words());
  t.for_each_applicable(bits->data(), [&](std::size_t a) {
    t.apply(a, bits->data(), next.data());
    options.push_back({a, rank_key(oracle_->distance(next.data()))});
  });

  std::optional<std::size_t> chosen;
  if (!options.empty()) {
    std::stable_sort(options.begin(), options.end(), [](const Option& a, const Option& b) { return a.dist < b.dist; });
    std::vector<std::size_t> order(options.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_adjacent(order, sim::derive_seed({kProposalStream, node.id}));
    chosen = options[order[tag.sample % order.size()]].action;
  }

  const auto actions = t.actions();
  if (!chosen || faults_.fires(sim::FaultKind::invalid_action, {node.id, tag.sample})) {
    std::vector<std::size_t> bad;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      if (!t.applicable(a, bits->data())) bad.push_back(a);
    }
    if (!bad.empty()) {
      sim::Rng rng = faults_.stream(sim::FaultKind::invalid_action, {node.id, tag.sample, 1});
      chosen = bad[rng.below(bad.size())];
    }
  }
  if (!chosen) throw ProposerError(ProposerError::Kind::bad_input, "the problem has no actions");

  const pddl::GroundAction& action = actions[*chosen];
  ActionProposal out;
  out.action_text = nl::action_to_nl(action.name, action.args, domain(), problem(), *phrases_);
  pddl::State after = pddl::apply_unchecked(state, action);
  out.next_state_text = state_text(after);
  auto d = distance(after);
  out.rationale = d ? "This leaves " + std::to_string(*d) + " actions to the goal." : "The goal looks unreachable.";
  return out;
}

std::string OracleProposer::make_schema(const CallTag&, const std::string& state_text, const std::string&,
                                        const diagram::StyleMap& style) {
  count("make_schema");
  return diagram::to_text(diagram::schema_from_state(parse_state(state_text), style, domain(), problem()));
}

std::string OracleProposer::make_code(const CallTag&, const std::string& schema_text, const std::string&) {
  count("make_code");
  try {
    return diagram::matplotlib_code(diagram::parse_schema(schema_text));
  } catch (const diagram::DiagramError& e) {
    throw ProposerError(ProposerError::Kind::bad_input, e.what());
  }
}

Verdict OracleProposer::reflect_schema(const CallTag& tag, const std::string& schema_text,
                                       const std::string& state_text, const std::string&) {
  count("reflect_schema");
  if (faults_.fires(sim::FaultKind::local_false_negative, {kReflectStream, tag.node, tag.sample, tag.attempt})) {
    return Verdict::fail("the schema does not match the description");
  }
  diagram::DiagramSchema schema;
  try {
    schema = diagram::parse_schema(schema_text);
  } catch (const diagram::DiagramError& e) {
    return Verdict::fail(std::string("unreadable schema: ") + e.what());
  }
  pddl::State state = parse_state(state_text);
  // Redraw with the style the schema itself uses, so only placement and
  // status can differ.
  diagram::StyleMap style =
      diagram::style_from_schema(schema, state, domain(), problem(), diagram::default_style(domain()));
  diagram::DiagramSchema truth = diagram::schema_from_state(state, style, domain(), problem());

  std::set<std::string> missing, unknown, wrong;
  for (const auto& o : truth.objects) {
    const diagram::ObjectSpec* got = schema.find(o.id);
    if (!got) {
      missing.insert(o.id);
      continue;
    }
    bool same_pos = got->pos.relative() == o.pos.relative();
    if (same_pos && o.pos.relative()) {
      same_pos = got->pos.relation == o.pos.relation && got->pos.target == o.pos.target && near(got->pos.gap, o.pos.gap);
    } else if (same_pos) {
      same_pos = near(got->pos.x, o.pos.x) && near(got->pos.y, o.pos.y);
    }
    if (!same_pos || got->status != o.status) wrong.insert(o.id);
  }
  for (const auto& o : schema.objects) {
    if (!truth.find(o.id)) unknown.insert(o.id);
  }
  if (missing.empty() && unknown.empty() && wrong.empty()) return Verdict::ok();
  std::string why;
  if (!wrong.empty()) why += "misplaced or mislabelled: " + join_ids(wrong);
  if (!missing.empty()) why += std::string(why.empty() ? "" : "; ") + "missing: " + join_ids(missing);
  if (!unknown.empty()) why += std::string(why.empty() ? "" : "; ") + "not in the state: " + join_ids(unknown);
  return Verdict::fail(why);
}

Verdict OracleProposer::verify_local(const CallTag& tag, const NodeBundle& parent, const NodeBundle& child,
                                     const std::string& action_text) {
  count("verify_local");
  Verdict v = Verdict::ok();
  try {
    pddl::State before = parse_state(parent.state_text);
    pddl::State after = parse_state(child.state_text);
    pddl::GroundAction a =
        pddl::resolve(domain(), problem(), nl::action_from_nl(action_text, domain(), problem(), *phrases_));
    if (!pddl::applicable(before, a)) {
      v = Verdict::fail("'" + action_text + "' is not allowed in the parent state");
    } else if (pddl::apply(before, a).text() != after.text()) {
      v = Verdict::fail("the child state is not the result of '" + action_text + "'");
    }
  } catch (const std::exception& e) {
    v = Verdict::fail(e.what());
  }
  if (v.pass && faults_.fires(sim::FaultKind::local_false_negative, {kLocalStream, tag.node, tag.sample, tag.attempt})) {
    v = Verdict::fail("the action seems to break a domain rule");
  }
  return v;
}

Verdict OracleProposer::verify_global(const CallTag& tag, const std::vector<std::string>& path, const NodeBundle&,
                                      const NodeBundle&) {
  count("verify_global");
  Verdict v = Verdict::ok();
  std::vector<pddl::State> states{problem().init};
  try {
    for (std::size_t i = 0; i < path.size() && v.pass; ++i) {
      pddl::GroundAction a =
          pddl::resolve(domain(), problem(), nl::action_from_nl(path[i], domain(), problem(), *phrases_));
      if (!pddl::applicable(states.back(), a)) {
        v = Verdict::fail("step " + std::to_string(i + 1) + " ('" + path[i] + "') is not feasible");
      } else {
        states.push_back(pddl::apply(states.back(), a));
      }
    }
  } catch (const std::exception& e) {
    v = Verdict::fail(e.what());
  }
  bool no_goal = problem().goal_pos.empty() && problem().goal_neg.empty();
  if (v.pass && !path.empty() && !no_goal) {
    auto child = distance(states.back());
    auto parent = distance(states[states.size() - 2]);
    bool closer = child && (!parent || *child < *parent);
    std::set<std::string> seen;
    bool revisit = false;
    for (const auto& s : states) revisit = !seen.insert(s.text()).second || revisit;
    if (!closer && revisit) v = Verdict::fail("inefficient: the path returns to a state it already visited");
  }
  if (v.pass && faults_.fires(sim::FaultKind::global_false_negative, {tag.node, tag.sample, tag.attempt})) {
    v = Verdict::fail("the plan so far looks wasteful");
  }
  return v;
}

bool OracleProposer::check_goal(const CallTag&, const NodeBundle& node, const NodeBundle&) {
  count("check_goal");
  pddl::State s = parse_state(node.state_text);
  for (const auto& g : problem().goal_pos) {
    if (!s.contains(g)) return false;
  }
  for (const auto& g : problem().goal_neg) {
    if (s.contains(g)) return false;
  }
  return true;
}

std::vector<std::size_t> OracleProposer::rank_states(const CallTag&, const std::vector<NodeBundle>& candidates,
                                                     const NodeBundle&) {
  count("rank_states");
  if (candidates.empty()) throw ProposerError(ProposerError::Kind::empty_candidates, "no states to rank");
  std::vector<int> dist(candidates.size(), INT_MAX);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    try {
      dist[i] = rank_key(distance(parse_state(candidates[i].state_text)));
    } catch (const ProposerError&) {
    }
  }
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return candidates[a].id < candidates[b].id;
  });
  std::uint64_t key = 0;
  for (const auto& c : candidates) key = sim::derive_seed({key, c.id});
  shuffle_adjacent(order, key);
  return order;
}

}  // namespace vp::proposer
