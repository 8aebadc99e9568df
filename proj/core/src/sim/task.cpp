#include "vplan/sim/task.hpp"

#include <algorithm>
#include <cstring>
#include <set>

namespace vp::sim {

namespace {

bool is_static(const std::vector<std::string>& statics, const std::string& predicate) {
  return std::find(statics.begin(), statics.end(), predicate) != statics.end();
}

}  // namespace

Task::Task(pddl::DomainDef domain, pddl::ProblemDef problem)
    : domain_(std::move(domain)), problem_(std::move(problem)) {
  static_predicates_ = domain_.static_predicates();
  for (const auto& a : problem_.init) {
    if (is_static(static_predicates_, a.predicate)) static_init_.push_back(a);
  }
  std::vector<pddl::GroundAction> grounded = pddl::ground(domain_, problem_, pddl::GroundingMode::static_pruned);

  // Fluent atoms: those true initially plus anything some action adds.
  std::set<pddl::GroundAtom> fluent;
  for (const auto& a : problem_.init) {
    if (!is_static(static_predicates_, a.predicate)) fluent.insert(a);
  }
  for (const auto& g : grounded) fluent.insert(g.add.begin(), g.add.end());
  atoms_.assign(fluent.begin(), fluent.end());
  for (std::uint32_t i = 0; i < atoms_.size(); ++i) atom_index_.emplace(atoms_[i].text(), i);
  words_ = std::max<std::size_t>(1, (atoms_.size() + 63) / 64);
  by_trigger_.resize(atoms_.size());

  auto id_of = [&](const pddl::GroundAtom& a) -> std::optional<std::uint32_t> {
    auto it = atom_index_.find(a.text());
    if (it == atom_index_.end()) return std::nullopt;
    return it->second;
  };

  for (auto& g : grounded) {
    Compiled c;
    bool possible = true;
    for (const auto& a : g.pre_pos) {
      if (is_static(static_predicates_, a.predicate)) continue;
      auto id = id_of(a);
      if (!id) {
        possible = false;
        break;
      }
      c.pre_pos.push_back(*id);
    }
    if (!possible) continue;
    for (const auto& a : g.pre_neg) {
      if (is_static(static_predicates_, a.predicate)) continue;
      if (auto id = id_of(a)) c.pre_neg.push_back(*id);
    }
    for (const auto& a : g.add) c.add.push_back(*id_of(a));
    for (const auto& a : g.del) {
      // Deleting an atom that can never be true is a no-op.
      if (auto id = id_of(a)) c.del.push_back(*id);
    }
    auto index = static_cast<std::uint32_t>(actions_.size());
    if (c.pre_pos.empty()) {
      untriggered_.push_back(index);
    } else {
      by_trigger_[c.pre_pos.front()].push_back(index);
    }
    actions_.push_back(std::move(g));
    compiled_.push_back(std::move(c));
  }

  for (const auto& g : problem_.goal_pos) {
    if (is_static(static_predicates_, g.predicate)) {
      if (!problem_.init.contains(g)) goal_possible_ = false;
      continue;
    }
    if (auto id = id_of(g)) {
      goal_pos_.push_back(*id);
    } else {
      goal_possible_ = false;
    }
  }
  for (const auto& g : problem_.goal_neg) {
    if (is_static(static_predicates_, g.predicate)) {
      if (problem_.init.contains(g)) goal_possible_ = false;
      continue;
    }
    if (auto id = id_of(g)) goal_neg_.push_back(*id);
  }

  init_ = *encode(problem_.init);
}

std::optional<std::vector<std::uint64_t>> Task::encode(const pddl::State& state) const {
  std::vector<std::uint64_t> bits(words_, 0);
  std::size_t statics_seen = 0;
  for (const auto& a : state) {
    if (is_static(static_predicates_, a.predicate)) {
      if (!std::binary_search(static_init_.begin(), static_init_.end(), a)) return std::nullopt;
      ++statics_seen;
      continue;
    }
    auto it = atom_index_.find(a.text());
    if (it == atom_index_.end()) return std::nullopt;
    bits[it->second >> 6] |= std::uint64_t{1} << (it->second & 63);
  }
  // States written without their static facts are accepted as well.
  if (statics_seen != 0 && statics_seen != static_init_.size()) return std::nullopt;
  return bits;
}

pddl::State Task::decode(const std::uint64_t* bits) const {
  std::vector<pddl::GroundAtom> out = static_init_;
  for (std::uint32_t i = 0; i < atoms_.size(); ++i) {
    if (test(bits, i)) out.push_back(atoms_[i]);
  }
  return pddl::State(std::move(out));
}

bool Task::is_goal(const std::uint64_t* s) const {
  if (!goal_possible_) return false;
  for (auto g : goal_pos_) {
    if (!test(s, g)) return false;
  }
  for (auto g : goal_neg_) {
    if (test(s, g)) return false;
  }
  return true;
}

int Task::unmet_goals(const std::uint64_t* s) const {
  int n = 0;
  for (auto g : goal_pos_) n += test(s, g) ? 0 : 1;
  for (auto g : goal_neg_) n += test(s, g) ? 1 : 0;
  return n;
}

bool Task::applicable(std::size_t action, const std::uint64_t* s) const {
  const Compiled& c = compiled_[action];
  for (auto b : c.pre_pos) {
    if (!test(s, b)) return false;
  }
  for (auto b : c.pre_neg) {
    if (test(s, b)) return false;
  }
  return true;
}

void Task::apply(std::size_t action, const std::uint64_t* s, std::uint64_t* out) const {
  const Compiled& c = compiled_[action];
  if (out != s) std::memcpy(out, s, words_ * sizeof(std::uint64_t));
  for (auto b : c.del) out[b >> 6] &= ~(std::uint64_t{1} << (b & 63));
  for (auto b : c.add) out[b >> 6] |= std::uint64_t{1} << (b & 63);
}

StateStore::StateStore(std::size_t words) : words_(words), slots_(1024, 0) {}

std::uint64_t StateStore::hash(const std::uint64_t* s) const {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::size_t i = 0; i < words_; ++i) {
    h ^= s[i] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return h ^ (h >> 33);
}

std::optional<std::uint32_t> StateStore::find(const std::uint64_t* s) const {
  std::size_t mask = slots_.size() - 1;
  for (std::size_t i = hash(s) & mask;; i = (i + 1) & mask) {
    std::uint32_t slot = slots_[i];
    if (slot == 0) return std::nullopt;
    if (std::memcmp(get(slot - 1), s, words_ * sizeof(std::uint64_t)) == 0) return slot - 1;
  }
}

std::pair<std::uint32_t, bool> StateStore::insert(const std::uint64_t* s) {
  if (2 * (count_ + 1) > slots_.size()) grow();
  std::size_t mask = slots_.size() - 1;
  for (std::size_t i = hash(s) & mask;; i = (i + 1) & mask) {
    std::uint32_t slot = slots_[i];
    if (slot == 0) {
      auto index = static_cast<std::uint32_t>(count_++);
      arena_.insert(arena_.end(), s, s + words_);
      slots_[i] = index + 1;
      return {index, true};
    }
    if (std::memcmp(get(slot - 1), s, words_ * sizeof(std::uint64_t)) == 0) return {slot - 1, false};
  }
}

void StateStore::grow() {
  std::vector<std::uint32_t> next(slots_.size() * 2, 0);
  std::size_t mask = next.size() - 1;
  for (std::uint32_t slot : slots_) {
    if (slot == 0) continue;
    std::size_t i = hash(get(slot - 1)) & mask;
    while (next[i] != 0) i = (i + 1) & mask;
    next[i] = slot;
  }
  slots_.swap(next);
}

}  // namespace vp::sim
