#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vplan/pddl/types.hpp"
#include "vplan/sim/task.hpp"

namespace vp::sim {

// Applicable actions of `state` with their successor states, in the order
// of `grounded`.
std::vector<std::pair<pddl::GroundAction, pddl::State>> successors(const pddl::State& state,
                                                                   std::span<const pddl::GroundAction> grounded);

inline constexpr std::size_t kDefaultStateLimit = 2'000'000;

struct BfsResult {
  std::optional<int> distance;
  std::vector<pddl::GroundAction> plan;  // a shortest plan when distance is set
  bool truncated = false;                // state limit hit before an answer
  bool exhausted = false;                // whole reachable space seen, no goal
  std::size_t states = 0;
};

// Breadth-first search from `start` (default: the problem's init) for plans
// of at most `cap` actions.
BfsResult bfs(const Task& task, int cap, std::size_t state_limit = kDefaultStateLimit,
              const std::vector<std::uint64_t>* start = nullptr);

std::optional<int> bfs_distance(const pddl::DomainDef& domain, const pddl::ProblemDef& problem, int cap);

// Greedy best-first search on the unmet-goal count. Used only to show that
// large generated instances are solvable.
std::optional<std::vector<pddl::GroundAction>> greedy_plan(const Task& task, std::size_t state_limit);

struct OracleOptions {
  std::size_t state_limit = kDefaultStateLimit;
  int fallback_cap = 30;
  std::size_t fallback_state_limit = 200'000;
};

// Goal distance for any state reachable from init. When the reachable space
// fits in `state_limit` it is enumerated once and distances come from a
// backward sweep; otherwise each query runs a bounded forward search and, if
// that is inconclusive, returns an estimate above the cap.
class DistanceOracle {
 public:
  explicit DistanceOracle(std::shared_ptr<const Task> task, OracleOptions options = {});

  const Task& task() const { return *task_; }
  bool exhaustive() const { return exhaustive_; }
  std::size_t reachable_states() const { return exhaustive_ ? store_.size() : 0; }

  // nullopt when the goal is unreachable from `state`. Thread-safe.
  std::optional<int> distance(const pddl::State& state) const;
  std::optional<int> distance(const std::uint64_t* bits) const;

 private:
  std::optional<int> fallback(const std::uint64_t* bits) const;

  std::shared_ptr<const Task> task_;
  OracleOptions options_;
  bool exhaustive_ = false;
  StateStore store_;
  std::vector<std::int32_t> dist_;  // -1 = dead end
  mutable std::mutex memo_mutex_;
  mutable std::unordered_map<std::string, std::optional<int>> memo_;
};

}  // namespace vp::sim
