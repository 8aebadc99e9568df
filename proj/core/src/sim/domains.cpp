#include <array>
#include <map>
#include <mutex>

#include "vplan/nl/bridge.hpp"
#include "vplan/pddl/parser.hpp"
#include "vplan/resources.hpp"
#include "vplan/sim/domains.hpp"

namespace vp::sim {

namespace {

constexpr std::array<DomainId, 6> kAll = {DomainId::blocksworld, DomainId::barman,  DomainId::elevator,
                                          DomainId::parking,     DomainId::tetris, DomainId::floortile};

}  // namespace

std::span<const DomainId> all_domains() { return kAll; }

std::string_view to_string(DomainId id) {
  switch (id) {
    case DomainId::blocksworld: return "blocksworld";
    case DomainId::barman: return "barman";
    case DomainId::elevator: return "elevator";
    case DomainId::parking: return "parking";
    case DomainId::tetris: return "tetris";
    case DomainId::floortile: return "floortile";
  }
  return "unknown";
}

std::optional<DomainId> parse_domain_id(std::string_view name) {
  for (DomainId id : kAll) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

std::optional<DomainId> domain_id_of(const pddl::DomainDef& domain) { return parse_domain_id(domain.name); }

std::string_view corpus_text(DomainId id) {
  auto text = resources::find("domains/" + std::string(to_string(id)) + "/domain.pddl");
  if (!text) throw std::logic_error("corpus file missing for " + std::string(to_string(id)));
  return *text;
}

const pddl::DomainDef& corpus_domain(DomainId id) {
  static std::mutex mutex;
  static std::map<DomainId, pddl::DomainDef> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(id);
  if (it == cache.end()) it = cache.emplace(id, pddl::parse_domain(corpus_text(id))).first;
  return it->second;
}

LoadedDomain load_domain(DomainId id) {
  LoadedDomain out{corpus_domain(id), {}};
  out.nl = nl::domain_to_nl(out.def, nl::PhraseTable::for_domain(out.def.name));
  return out;
}

}  // namespace vp::sim
