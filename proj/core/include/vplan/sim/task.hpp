#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vplan/pddl/semantics.hpp"
#include "vplan/pddl/types.hpp"

namespace vp::sim {

// A problem compiled for fast search: fluent atoms become bit positions and
// states become fixed-width bitsets. Static atoms are kept aside; the
// grounding already discarded actions whose static preconditions fail.
class Task {
 public:
  Task(pddl::DomainDef domain, pddl::ProblemDef problem);

  const pddl::DomainDef& domain() const { return domain_; }
  const pddl::ProblemDef& problem() const { return problem_; }

  std::size_t words() const { return words_; }
  std::size_t atom_count() const { return atoms_.size(); }
  const pddl::GroundAtom& atom(std::size_t i) const { return atoms_[i]; }
  std::span<const pddl::GroundAction> actions() const { return actions_; }
  const std::vector<std::uint64_t>& initial() const { return init_; }

  // False when some goal atom can never become true.
  bool goal_possible() const { return goal_possible_; }

  // nullopt when `state` mentions an atom outside the compiled model or
  // disagrees with the static facts of the problem.
  std::optional<std::vector<std::uint64_t>> encode(const pddl::State& state) const;
  pddl::State decode(const std::uint64_t* bits) const;

  bool is_goal(const std::uint64_t* s) const;
  // Goal literals not yet satisfied; 0 exactly at goal states.
  int unmet_goals(const std::uint64_t* s) const;
  bool applicable(std::size_t action, const std::uint64_t* s) const;
  void apply(std::size_t action, const std::uint64_t* s, std::uint64_t* out) const;

  // Calls f(action index) for every applicable action, in grounding order.
  template <typename F>
  void for_each_applicable(const std::uint64_t* s, F&& f) const {
    scratch_candidates(s, [&](std::size_t a) {
      if (applicable(a, s)) f(a);
    });
  }

 private:
  struct Compiled {
    std::vector<std::uint32_t> pre_pos, pre_neg, add, del;
  };

  template <typename F>
  void scratch_candidates(const std::uint64_t* s, F&& f) const;

  static bool test(const std::uint64_t* s, std::uint32_t bit) { return (s[bit >> 6] >> (bit & 63)) & 1U; }

  pddl::DomainDef domain_;
  pddl::ProblemDef problem_;
  std::vector<pddl::GroundAtom> atoms_;
  std::unordered_map<std::string, std::uint32_t> atom_index_;
  std::vector<pddl::GroundAtom> static_init_;
  std::vector<std::string> static_predicates_;
  std::vector<pddl::GroundAction> actions_;
  std::vector<Compiled> compiled_;
  // Actions grouped by their first positive precondition; actions with
  // none are always candidates.
  std::vector<std::vector<std::uint32_t>> by_trigger_;
  std::vector<std::uint32_t> untriggered_;
  std::vector<std::uint32_t> goal_pos_, goal_neg_;
  bool goal_possible_ = true;
  std::size_t words_ = 1;
  std::vector<std::uint64_t> init_;
};

template <typename F>
void Task::scratch_candidates(const std::uint64_t* s, F&& f) const {
  // Candidates must be visited in ascending action order so that successor
  // order matches grounding order; merge the per-trigger lists.
  thread_local std::vector<std::uint32_t> buf;
  buf.clear();
  buf.insert(buf.end(), untriggered_.begin(), untriggered_.end());
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t bits = s[w];
    while (bits) {
      auto bit = static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits)));
      bits &= bits - 1;
      const auto& list = by_trigger_[bit];
      buf.insert(buf.end(), list.begin(), list.end());
    }
  }
  std::sort(buf.begin(), buf.end());
  for (std::uint32_t a : buf) f(a);
}

// Interning set of packed states backed by one flat arena.
class StateStore {
 public:
  explicit StateStore(std::size_t words);

  // Index of `s`, and whether it was newly added.
  std::pair<std::uint32_t, bool> insert(const std::uint64_t* s);
  std::optional<std::uint32_t> find(const std::uint64_t* s) const;
  const std::uint64_t* get(std::uint32_t i) const { return arena_.data() + static_cast<std::size_t>(i) * words_; }
  std::size_t size() const { return count_; }

 private:
  std::uint64_t hash(const std::uint64_t* s) const;
  void grow();

  std::size_t words_;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> arena_;
  std::vector<std::uint32_t> slots_;  // index + 1; 0 = empty
};

}  // namespace vp::sim
