#pragma once

// Attribute descriptions from a multimodal chat model, with a
// content-addressed completion cache, plus the parser that turns a
// completion into a list of single-attribute descriptions.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "augclip/attribute_set.hpp"
#include "augclip/embedding_store.hpp"

namespace augclip {

enum class LengthMode { short_form, long_form };

std::string_view to_string(LengthMode m) noexcept;
std::optional<LengthMode> parse_length_mode(std::string_view s) noexcept;

// Free count, or a fixed number of descriptions in [1, 64].
struct CountMode {
  std::optional<int> fixed;
  friend bool operator==(const CountMode&, const CountMode&) = default;
};

std::string to_string(const CountMode& m);
// "free" or "fixed:<n>"; throws InvalidArgument.
CountMode parse_count_mode(std::string_view s);

struct DescriptionRequest {
  Role role = Role::source;
  std::optional<std::string> image_ref;    // source role
  std::optional<std::string> source_text;  // target role
  std::optional<std::string> target_text;  // target role
  LengthMode length = LengthMode::short_form;
  CountMode count;

  // Throws InvalidArgument when the role's required fields are missing or
  // fixed(n) is outside [1, 64].
  void validate() const;
};

struct Prompt {
  std::string system;
  std::string user;
};

Prompt build_prompt(const DescriptionRequest& req);

// Splits a completion into descriptions: one per line, leading enumerators
// ("1.", "2)", "-", "*", bullet) stripped, whitespace and trailing
// punctuation trimmed, empties dropped, duplicates removed
// case-insensitively keeping the first. When a list is present, unnumbered
// lines ending in ':' are treated as headings and dropped. A single line of
// prose is split into sentences.
std::vector<std::string> parse_description_list(std::string_view raw);

struct ChatRequest {
  std::string model;
  double temperature = 0.0;
  Prompt prompt;
  std::optional<std::string> image_base64;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the completion text. Throws TransportError.
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct MllmConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4-vision-preview";
  double temperature = 0.0;
  int timeout_ms = 120000;
  int max_concurrent = 4;
  std::string api_key_env = "AUGCLIP_MLLM_API_KEY";
};

// Chat-completions style HTTP client: POST <base_url>/chat/completions.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(MllmConfig cfg);
  std::string complete(const ChatRequest& request) override;

 private:
  MllmConfig cfg_;
};

// Directory of raw completions, one file per key: <dir>/<sha256(key)>.txt.
// Files are human-editable; writes go through a temp file and a rename.
class DescriptionCache {
 public:
  explicit DescriptionCache(std::filesystem::path dir);

  // Throws CacheCorruption when the file exists but is unreadable or not
  // valid UTF-8 text.
  std::optional<std::string> get(std::string_view key) const;
  void put(std::string_view key, std::string_view completion) const;
  std::filesystem::path path_for(std::string_view key) const;

 private:
  std::filesystem::path dir_;
};

// Canonical cache key over prompt text, model id, role, and references.
std::string description_cache_key(const DescriptionRequest& req, const ChatRequest& chat);

// Builds the prompt, consults the cache, calls the client on a miss, parses
// and caches the completion. Throws EmptyGeneration when nothing parseable
// came back, TransportError, CacheCorruption.
AttributeSet generate_descriptions(const DescriptionRequest& req, ChatClient& client,
                                   const MllmConfig& cfg, const DescriptionCache* cache);

// Looks up an embedding for a description; empty optional when unknown.
using EmbeddingResolver = std::function<std::optional<Embedding>(std::string_view description)>;

// Fills set.embeddings (unit-normalized) in description order. Throws
// MissingId naming the first description without an embedding.
AttributeSet embed_attributes(AttributeSet set, const EmbeddingResolver& resolve);
// Descriptions are looked up by their literal text as store id.
AttributeSet embed_attributes(AttributeSet set, const EmbeddingStore& store);

}  // namespace augclip
