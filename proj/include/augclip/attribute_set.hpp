#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "augclip/geometry.hpp"

namespace augclip {

enum class Role { source, target };
enum class Origin { generated, manual };

std::string_view to_string(Role role) noexcept;
std::string_view to_string(Origin origin) noexcept;
std::optional<Role> parse_role(std::string_view s) noexcept;
std::optional<Origin> parse_origin(std::string_view s) noexcept;

// Attribute descriptions of one side of an edit together with their
// embeddings. `embeddings` is either empty (descriptions only) or aligned
// 1:1 with `descriptions`.
struct AttributeSet {
  Role role = Role::source;
  std::vector<std::string> descriptions;
  std::vector<Embedding> embeddings;
  Origin origin = Origin::generated;

  std::size_t size() const noexcept { return descriptions.size(); }
  bool is_embedded() const noexcept {
    return !descriptions.empty() && embeddings.size() == descriptions.size();
  }

  // Builds an embedded set with placeholder descriptions "<prefix>0", ...
  static AttributeSet from_embeddings(Role role, std::vector<Embedding> embeddings,
                                      std::string_view prefix = "attr");
};

// Throws EmptySet, DuplicateId (repeated description) or DimensionMismatch.
void validate(const AttributeSet& set);

// Same as validate, plus requires the set to be embedded.
void require_embedded(const AttributeSet& set);

}  // namespace augclip
