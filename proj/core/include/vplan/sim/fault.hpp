#pragma once

#include <cstdint>
#include <initializer_list>

#include "vplan/sim/rng.hpp"

namespace vp::sim {

enum class FaultKind : std::uint64_t {
  invalid_action = 1,
  local_false_negative = 2,
  global_false_negative = 3,
  ranking_noise = 4,
};

// Seeded fault injection for the oracle proposer. Every decision is a pure
// function of (seed, kind, call coordinates), so concurrent callers see the
// same faults as a serial run.
struct FaultModel {
  double invalid_action_rate = 0.0;
  double local_false_negative_rate = 0.0;
  double global_false_negative_rate = 0.0;
  double ranking_noise = 0.0;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument when a rate lies outside [0, 1].
  void validate() const;

  double rate(FaultKind kind) const;
  Rng stream(FaultKind kind, std::initializer_list<std::uint64_t> call) const;
  bool fires(FaultKind kind, std::initializer_list<std::uint64_t> call) const;
};

}  // namespace vp::sim
