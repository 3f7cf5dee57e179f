#pragma once

// Client for an external image/text encoder service.
//
// Request:  POST {"items": [{"id", "kind", "payload"}]}
//           payload is the text itself, or base64 of the image file bytes.
// Response: {"embeddings": [{"id", "vector": [...]}], "errors": [{"id", "message"}]}

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "augclip/embedding_store.hpp"

namespace augclip {

struct EncoderEndpointConfig {
  std::string base_url;
  int timeout_ms = 30000;
  int max_concurrent = 4;
  std::optional<std::string> auth_token;
  std::size_t batch_size = 32;

  void validate() const;
};

struct EncodeItem {
  std::string id;
  EmbeddingKind kind = EmbeddingKind::text;
  // Inline text for text items, file path for image items.
  std::string payload_ref;
};

struct EncoderErrorRecord {
  std::string id;
  std::string message;
};

struct EncodeResult {
  EmbeddingStore store;
  std::vector<EncoderErrorRecord> errors;
};

// Items are sent in batches with at most max_concurrent requests in flight;
// the returned store follows item order. Per-item failures land in
// `errors`. Throws TransportError when no batch got a response.
EncodeResult encode_remote(std::span<const EncodeItem> items, const EncoderEndpointConfig& cfg,
                           const std::string& provenance = "remote-encoder");

}  // namespace augclip
