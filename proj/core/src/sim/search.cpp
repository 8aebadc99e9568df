#include "vplan/sim/search.hpp"

#include <algorithm>
#include <queue>

#include "vplan/pddl/semantics.hpp"

namespace vp::sim {

std::vector<std::pair<pddl::GroundAction, pddl::State>> successors(const pddl::State& state,
                                                                   std::span<const pddl::GroundAction> grounded) {
  std::vector<std::pair<pddl::GroundAction, pddl::State>> out;
  for (const auto& g : grounded) {
    if (pddl::applicable(state, g)) out.emplace_back(g, pddl::apply_unchecked(state, g));
  }
  return out;
}

namespace {

constexpr std::uint32_t kNone = ~std::uint32_t{0};

std::vector<pddl::GroundAction> extract_plan(const Task& task, const std::vector<std::uint32_t>& parent,
                                             const std::vector<std::uint32_t>& via, std::uint32_t node) {
  std::vector<pddl::GroundAction> plan;
  while (parent[node] != kNone) {
    plan.push_back(task.actions()[via[node]]);
    node = parent[node];
  }
  std::reverse(plan.begin(), plan.end());
  return plan;
}

}  // namespace

BfsResult bfs(const Task& task, int cap, std::size_t state_limit, const std::vector<std::uint64_t>* start) {
  BfsResult result;
  const std::vector<std::uint64_t>& root = start ? *start : task.initial();
  if (task.is_goal(root.data())) {
    result.distance = 0;
    result.states = 1;
    return result;
  }
  if (!task.goal_possible()) {
    result.exhausted = true;
    return result;
  }
  StateStore store(task.words());
  std::vector<std::uint32_t> parent{kNone}, via{kNone};
  std::vector<int> depth{0};
  store.insert(root.data());
  std::vector<std::uint64_t> next(task.words()), cur;
  // Store indices are assigned in BFS order, so the store doubles as queue.
  bool capped = false;
  for (std::uint32_t head = 0; head < store.size(); ++head) {
    if (depth[head] >= cap) {
      capped = true;
      break;
    }
    // Copy out: inserting may reallocate the arena.
    cur.assign(store.get(head), store.get(head) + task.words());
    bool done = false;
    task.for_each_applicable(cur.data(), [&](std::size_t a) {
      if (done) return;
      task.apply(a, cur.data(), next.data());
      auto [index, fresh] = store.insert(next.data());
      if (!fresh) return;
      parent.push_back(head);
      via.push_back(static_cast<std::uint32_t>(a));
      depth.push_back(depth[head] + 1);
      if (task.is_goal(next.data())) {
        result.distance = depth[head] + 1;
        result.plan = extract_plan(task, parent, via, index);
        done = true;
      }
    });
    if (done) break;
    if (store.size() > state_limit) {
      result.truncated = true;
      break;
    }
  }
  result.states = store.size();
  result.exhausted = !result.distance && !result.truncated && !capped;
  return result;
}

std::optional<int> bfs_distance(const pddl::DomainDef& domain, const pddl::ProblemDef& problem, int cap) {
  Task task(domain, problem);
  return bfs(task, cap).distance;
}

std::optional<std::vector<pddl::GroundAction>> greedy_plan(const Task& task, std::size_t state_limit) {
  StateStore store(task.words());
  std::vector<std::uint32_t> parent{kNone}, via{kNone};
  store.insert(task.initial().data());
  if (task.is_goal(task.initial().data())) return std::vector<pddl::GroundAction>{};
  if (!task.goal_possible()) return std::nullopt;
  using Item = std::pair<int, std::uint32_t>;  // (unmet goals, index); ties by index = FIFO
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  open.emplace(task.unmet_goals(task.initial().data()), 0);
  std::vector<std::uint64_t> next(task.words()), state;
  while (!open.empty() && store.size() <= state_limit) {
    std::uint32_t cur = open.top().second;
    open.pop();
    std::optional<std::uint32_t> found;
    state.assign(store.get(cur), store.get(cur) + task.words());
    task.for_each_applicable(state.data(), [&](std::size_t a) {
      if (found) return;
      task.apply(a, state.data(), next.data());
      auto [index, fresh] = store.insert(next.data());
      if (!fresh) return;
      parent.push_back(cur);
      via.push_back(static_cast<std::uint32_t>(a));
      if (task.is_goal(next.data())) {
        found = index;
        return;
      }
      open.emplace(task.unmet_goals(next.data()), index);
    });
    if (found) return extract_plan(task, parent, via, *found);
  }
  return std::nullopt;
}

DistanceOracle::DistanceOracle(std::shared_ptr<const Task> task, OracleOptions options)
    : task_(std::move(task)), options_(options), store_(task_->words()) {
  const Task& t = *task_;
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> targets;
  std::vector<std::uint64_t> next(t.words()), cur;
  store_.insert(t.initial().data());
  bool overflow = false;
  for (std::uint32_t head = 0; head < store_.size(); ++head) {
    cur.assign(store_.get(head), store_.get(head) + t.words());
    t.for_each_applicable(cur.data(), [&](std::size_t a) {
      t.apply(a, cur.data(), next.data());
      targets.push_back(store_.insert(next.data()).first);
    });
    offsets.push_back(static_cast<std::uint32_t>(targets.size()));
    if (store_.size() > options_.state_limit) {
      overflow = true;
      break;
    }
  }
  if (overflow) {
    store_ = StateStore(t.words());
    return;
  }
  const std::size_t n = store_.size();
  // Reverse adjacency, then a multi-source sweep from every goal state.
  std::vector<std::uint32_t> rev_offsets(n + 1, 0);
  for (std::uint32_t target : targets) ++rev_offsets[target + 1];
  for (std::size_t i = 0; i < n; ++i) rev_offsets[i + 1] += rev_offsets[i];
  std::vector<std::uint32_t> rev(targets.size());
  std::vector<std::uint32_t> fill(rev_offsets.begin(), rev_offsets.end() - 1);
  for (std::uint32_t src = 0; src < n; ++src) {
    for (std::uint32_t e = offsets[src]; e < offsets[src + 1]; ++e) rev[fill[targets[e]]++] = src;
  }
  dist_.assign(n, -1);
  std::vector<std::uint32_t> queue;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (t.is_goal(store_.get(i))) {
      dist_[i] = 0;
      queue.push_back(i);
    }
  }
  for (std::size_t q = 0; q < queue.size(); ++q) {
    std::uint32_t cur = queue[q];
    for (std::uint32_t e = rev_offsets[cur]; e < rev_offsets[cur + 1]; ++e) {
      std::uint32_t pred = rev[e];
      if (dist_[pred] < 0) {
        dist_[pred] = dist_[cur] + 1;
        queue.push_back(pred);
      }
    }
  }
  exhaustive_ = true;
}

std::optional<int> DistanceOracle::distance(const pddl::State& state) const {
  auto bits = task_->encode(state);
  if (!bits) return std::nullopt;
  return distance(bits->data());
}

std::optional<int> DistanceOracle::distance(const std::uint64_t* bits) const {
  if (exhaustive_) {
    if (auto index = store_.find(bits)) {
      int d = dist_[*index];
      if (d < 0) return std::nullopt;
      return d;
    }
  }
  return fallback(bits);
}

std::optional<int> DistanceOracle::fallback(const std::uint64_t* bits) const {
  std::string key(reinterpret_cast<const char*>(bits), task_->words() * sizeof(std::uint64_t));
  {
    std::lock_guard lock(memo_mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  std::vector<std::uint64_t> start(bits, bits + task_->words());
  BfsResult r = bfs(*task_, options_.fallback_cap, options_.fallback_state_limit, &start);
  std::optional<int> d = r.distance;
  // Beyond the cap or cut off: rank past the cap by unmet goals.
  if (!d && !r.exhausted) d = options_.fallback_cap + 1 + task_->unmet_goals(bits);
  std::lock_guard lock(memo_mutex_);
  memo_.emplace(std::move(key), d);
  return d;
}

}  // namespace vp::sim
