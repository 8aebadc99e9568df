#include "vplan/resources.hpp"

#include <algorithm>

namespace vp::resources {

std::optional<std::string_view> find(std::string_view path) {
  for (const auto& e : entries()) {
    if (e.path == path) return e.content;
  }
  return std::nullopt;
}

std::vector<std::string_view> list(std::string_view prefix) {
  std::vector<std::string_view> out;
  for (const auto& e : entries()) {
    if (e.path.substr(0, prefix.size()) == prefix) out.push_back(e.path);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace vp::resources
