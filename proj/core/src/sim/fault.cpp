#include "vplan/sim/fault.hpp"

#include <stdexcept>
#include <string>

namespace vp::sim {

void FaultModel::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  check(invalid_action_rate, "invalid_action_rate");
  check(local_false_negative_rate, "local_false_negative_rate");
  check(global_false_negative_rate, "global_false_negative_rate");
  check(ranking_noise, "ranking_noise");
}

double FaultModel::rate(FaultKind kind) const {
  switch (kind) {
    case FaultKind::invalid_action: return invalid_action_rate;
    case FaultKind::local_false_negative: return local_false_negative_rate;
    case FaultKind::global_false_negative: return global_false_negative_rate;
    case FaultKind::ranking_noise: return ranking_noise;
  }
  return 0.0;
}

Rng FaultModel::stream(FaultKind kind, std::initializer_list<std::uint64_t> call) const {
  std::uint64_t h = derive_seed({seed, static_cast<std::uint64_t>(kind)});
  for (std::uint64_t c : call) h = mix64(h ^ c);
  return Rng(h);
}

bool FaultModel::fires(FaultKind kind, std::initializer_list<std::uint64_t> call) const {
  double p = rate(kind);
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return stream(kind, call).chance(p);
}

}  // namespace vp::sim
