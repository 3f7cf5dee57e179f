#pragma once

// Precomputed embeddings keyed by string id.
//
// Text format (UTF-8, one record per line):
//   id<TAB>kind<TAB>v1,v2,...,vd
// kind is "image" or "text"; lines starting with '#' are comments, and a
// comment of the form "# provenance: <text>" records the encoder. The first
// record fixes d.
//
// Binary format (little-endian):
//   magic "AGCS" | u32 version=1 | u32 dim | u32 count | u32 len | provenance
//   then per record: u32 id_len | id | u8 kind (0 image, 1 text) | dim x f64
//
// Files keep the encoder's raw output; vectors are unit-normalized on load.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "augclip/geometry.hpp"

namespace augclip {

enum class EmbeddingKind { image, text };

std::string_view to_string(EmbeddingKind kind) noexcept;
std::optional<EmbeddingKind> parse_kind(std::string_view s) noexcept;

struct StoreEntry {
  std::string id;
  EmbeddingKind kind = EmbeddingKind::text;
  Vector raw;
  Embedding embedding;  // normalize(raw)

  friend bool operator==(const StoreEntry&, const StoreEntry&) = default;
};

class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::string provenance) : provenance_(std::move(provenance)) {}

  // Throws DimensionMismatch, DuplicateId, SchemaError (empty id) or
  // ZeroVector.
  void insert(std::string id, EmbeddingKind kind, Vector raw);

  // Throws MissingId.
  const Embedding& resolve(std::string_view id) const;
  const StoreEntry* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::string& provenance() const noexcept { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

  // Insertion order.
  const std::vector<StoreEntry>& entries() const noexcept { return entries_; }

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.dim_ == b.dim_ && a.provenance_ == b.provenance_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t dim_ = 0;
  std::string provenance_;
  std::vector<StoreEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class StoreFormat { text, binary };

// Detects the format from the file's first bytes. Throws IoError, ParseError
// (with line or record context), DimensionMismatch, DuplicateId.
EmbeddingStore load_store(const std::filesystem::path& path);

void emit_store(const EmbeddingStore& store, const std::filesystem::path& path,
                StoreFormat format = StoreFormat::text);

// Merges `extra` into `base`; ids already in `base` are kept.
void merge_into(EmbeddingStore& base, const EmbeddingStore& extra);

}  // namespace augclip
