#pragma once

// Dataset manifests (JSON).
//
// {
//   "schema_version": 1,
//   "name": "...",
//   "payloads": { "<embedding id>": {"kind": "image", "path": "img/1.png"}
//               | {"kind": "text", "text": "a man sitting"} },
//   "descriptions_file": "descriptions.json",          // optional
//   "attribute_sets": { "<set id>": {"role": "source", "origin": "manual",
//                                    "descriptions": ["..."]} },  // optional, inline
//   "cases": [{
//     "case_id": "c1",
//     "source_image": "<id>", "source_text": "<id>", "target_text": "<id>",
//     "edits": [{"image": "<id>", "tag": "candidate_a"}, ...],
//     "human_vote": "candidate_a",                      // 2AFC cases
//     "votes": {"candidate_a": 4, "candidate_b": 1},    // optional, audit only
//     "source_attributes": "<set id>",                  // default "<case_id>/source"
//     "target_attributes": "<set id>"                   // default "<case_id>/target"
//   }]
// }
//
// A case with candidate_a/candidate_b edits is a 2AFC case; a case with
// ground_truth/over_preserved/over_modified edits is a triplet case.
// Attribute descriptions resolve to embeddings by their literal text.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "augclip/attribute_set.hpp"
#include "augclip/embedding_store.hpp"

namespace augclip {

enum class EditTag { candidate_a, candidate_b, ground_truth, over_preserved, over_modified };
enum class CaseKind { two_afc, triplet };

std::string_view to_string(EditTag tag) noexcept;
std::optional<EditTag> parse_edit_tag(std::string_view s) noexcept;
std::string_view to_string(CaseKind kind) noexcept;

struct EditedImage {
  std::string image_id;
  EditTag tag = EditTag::candidate_a;
};

struct CaseRecord {
  std::string case_id;
  CaseKind kind = CaseKind::two_afc;
  std::string source_image_id;
  std::string source_text_id;
  std::string target_text_id;
  std::vector<EditedImage> edited;
  std::optional<EditTag> human_vote;
  std::map<std::string, int> vote_counts;
  std::string source_attributes_id;
  std::string target_attributes_id;
};

struct Payload {
  EmbeddingKind kind = EmbeddingKind::text;
  // Resolved image path, or the text itself.
  std::string ref;
};

using AttributeCatalog = std::map<std::string, AttributeSet>;

struct Manifest {
  int schema_version = 1;
  std::string name;
  std::filesystem::path base_dir;
  std::map<std::string, Payload> payloads;
  std::optional<std::filesystem::path> descriptions_file;
  // Inline sets plus those read from descriptions_file (inline wins).
  AttributeCatalog attribute_sets;
  std::vector<CaseRecord> cases;
};

inline constexpr int kManifestSchemaVersion = 1;

// Parses and validates structure (SchemaError). Loads descriptions_file when
// it exists; a missing descriptions file is not an error at this stage.
Manifest load_manifest(const std::filesystem::path& path);

// load_manifest plus check_references against `store`.
Manifest load_manifest(const std::filesystem::path& path, const EmbeddingStore& store);

// Throws DanglingReference(case_id, id) for the first embedding id or
// attribute set that cannot be resolved.
void check_references(const Manifest& manifest, const EmbeddingStore& store);

// Throws SchemaError when the case's edit tags or vote break its kind.
void validate_case(const CaseRecord& c);

// Descriptions file: {"schema_version": 1, "attribute_sets": {<id>: {...}}}.
AttributeCatalog load_descriptions(const std::filesystem::path& path);
void write_descriptions(const AttributeCatalog& sets, const std::filesystem::path& path);

// Writes a manifest that load_manifest reads back (payload paths relative
// to base_dir where possible).
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace augclip
