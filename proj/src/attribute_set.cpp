#include "augclip/attribute_set.hpp"

#include <unordered_set>

#include "augclip/error.hpp"

namespace augclip {

std::string_view to_string(Role role) noexcept {
  return role == Role::source ? "source" : "target";
}

std::string_view to_string(Origin origin) noexcept {
  return origin == Origin::generated ? "generated" : "manual";
}

std::optional<Role> parse_role(std::string_view s) noexcept {
  if (s == "source") return Role::source;
  if (s == "target") return Role::target;
  return std::nullopt;
}

std::optional<Origin> parse_origin(std::string_view s) noexcept {
  if (s == "generated") return Origin::generated;
  if (s == "manual") return Origin::manual;
  return std::nullopt;
}

AttributeSet AttributeSet::from_embeddings(Role role, std::vector<Embedding> embeddings,
                                           std::string_view prefix) {
  AttributeSet set;
  set.role = role;
  set.origin = Origin::manual;
  set.descriptions.reserve(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    set.descriptions.push_back(std::string(prefix) + std::to_string(i));
  }
  set.embeddings = std::move(embeddings);
  return set;
}

void validate(const AttributeSet& set) {
  const std::string side(to_string(set.role));
  if (set.descriptions.empty()) throw Error(ErrorCode::EmptySet, side + " attribute set is empty");
  std::unordered_set<std::string> seen;
  for (const auto& d : set.descriptions) {
    if (d.empty()) throw Error(ErrorCode::SchemaError, side + " attribute set has an empty description");
    if (!seen.insert(d).second) {
      throw Error(ErrorCode::DuplicateId, side + " description repeated: \"" + d + "\"");
    }
  }
  if (!set.embeddings.empty()) {
    if (set.embeddings.size() != set.descriptions.size()) {
      throw Error(ErrorCode::DimensionMismatch, side + " descriptions and embeddings misaligned");
    }
    const std::size_t d = set.embeddings.front().dim();
    for (const auto& e : set.embeddings) {
      if (e.dim() != d) throw Error(ErrorCode::DimensionMismatch, side + " attribute dimensions differ");
    }
  }
}

void require_embedded(const AttributeSet& set) {
  validate(set);
  if (!set.is_embedded()) {
    throw Error(ErrorCode::MissingId,
                std::string(to_string(set.role)) + " attribute set has no embeddings");
  }
}

}  // namespace augclip
