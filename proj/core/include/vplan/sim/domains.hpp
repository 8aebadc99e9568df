#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vplan/pddl/types.hpp"

namespace vp::sim {

enum class DomainId { blocksworld, barman, elevator, parking, tetris, floortile };

std::span<const DomainId> all_domains();
std::string_view to_string(DomainId id);
std::optional<DomainId> parse_domain_id(std::string_view name);
// Looks the domain up by its PDDL name.
std::optional<DomainId> domain_id_of(const pddl::DomainDef& domain);

// Parsed once per process and shared.
const pddl::DomainDef& corpus_domain(DomainId id);
std::string_view corpus_text(DomainId id);

struct LoadedDomain {
  pddl::DomainDef def;
  std::string nl;  // template-mode description
};

LoadedDomain load_domain(DomainId id);

class GenError : public std::runtime_error {
 public:
  enum class Kind { range, unsolvable };
  GenError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Size knobs for all generators; each domain reads its own fields.
struct GenParams {
  int blocks = 3;
  int curbs = 4, cars = 4;
  int rows = 2, cols = 3, robots = 1, colors = 2;  // floortile
  int grid = 4, pieces = 3;                        // tetris
  int floors = 4, passengers = 4;                  // elevator: one slow and one fast lift
  int cocktails = 2, ingredients = 3;              // barman
  int bfs_cap = 30;
  std::uint64_t seed = 0;

  // Smallest evaluated sizes; blocksworld cycles through 3-5 blocks by seed.
  static GenParams smallest(DomainId id, std::uint64_t seed);
};

// Throws GenError(range) when a field used by `id` is out of range.
void check_params(DomainId id, const GenParams& params);

// Seeded, solvable instance named `<domain>-<seed>`. A candidate is kept
// when a breadth-first search finds a plan within params.bfs_cap; when the
// state space is too large for that, a greedy search must find any plan.
// Up to 100 perturbed seeds are tried before GenError(unsolvable).
pddl::ProblemDef gen_instance(DomainId id, const GenParams& params);

}  // namespace vp::sim
