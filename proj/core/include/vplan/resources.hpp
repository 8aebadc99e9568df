#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

// Data files (domain corpus, phrase tables, prompt templates) compiled into
// the library so that the core never depends on the working directory.
namespace vp::resources {

struct Entry {
  std::string_view path;
  std::string_view content;
};

std::span<const Entry> entries();

std::optional<std::string_view> find(std::string_view path);

// Paths starting with `prefix`, in lexicographic order.
std::vector<std::string_view> list(std::string_view prefix);

}  // namespace vp::resources
