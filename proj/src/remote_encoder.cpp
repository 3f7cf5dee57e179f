#include "augclip/remote_encoder.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "augclip/error.hpp"
#include "augclip/hashing.hpp"
#include "augclip/http.hpp"

namespace augclip {

using nlohmann::json;

namespace {

std::string payload_for(const EncodeItem& item) {
  if (item.kind == EmbeddingKind::text) return item.payload_ref;
  std::ifstream in(item.payload_ref, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read image " + item.payload_ref);
  std::ostringstream ss;
  ss << in.rdbuf();
  return base64_encode(ss.str());
}

struct BatchOutcome {
  bool responded = false;
  std::string transport_error;
  std::map<std::string, Vector> vectors;
  std::map<std::string, std::string> errors;
};

}  // namespace

void EncoderEndpointConfig::validate() const {
  if (base_url.empty()) throw Error(ErrorCode::InvalidArgument, "encoder base_url is empty");
  if (timeout_ms < 1) throw Error(ErrorCode::InvalidArgument, "encoder timeout_ms must be >= 1");
  if (max_concurrent < 1) throw Error(ErrorCode::InvalidArgument, "encoder max_concurrent must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "encoder batch_size must be >= 1");
}

EncodeResult encode_remote(std::span<const EncodeItem> items, const EncoderEndpointConfig& cfg,
                           const std::string& provenance) {
  cfg.validate();
  EncodeResult result{EmbeddingStore(provenance), {}};
  if (items.empty()) return result;

  const std::size_t batches = (items.size() + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<BatchOutcome> outcomes(batches);
  std::vector<std::string> payload_errors(items.size());

  http::run_bounded(batches, cfg.max_concurrent, [&](std::size_t b) {
    const std::size_t begin = b * cfg.batch_size;
    const std::size_t end = std::min(items.size(), begin + cfg.batch_size);
    json request_items = json::array();
    for (std::size_t k = begin; k < end; ++k) {
      try {
        request_items.push_back({{"id", items[k].id},
                                 {"kind", std::string(to_string(items[k].kind))},
                                 {"payload", payload_for(items[k])}});
      } catch (const Error& e) {
        payload_errors[k] = e.what();
      }
    }
    BatchOutcome& out = outcomes[b];
    if (request_items.empty()) {
      out.responded = true;
      return;
    }
    http::Response resp;
    try {
      resp = http::post_json(cfg.base_url, json{{"items", request_items}}.dump(), cfg.timeout_ms,
                             cfg.auth_token);
    } catch (const Error& e) {
      out.transport_error = e.what();
      return;
    }
    if (resp.status != 200) {
      out.transport_error = "HTTP " + std::to_string(resp.status);
      return;
    }
    out.responded = true;
    json body;
    try {
      body = json::parse(resp.body);
    } catch (const json::exception& e) {
      out.responded = false;
      out.transport_error = std::string("malformed response: ") + e.what();
      return;
    }
    if (body.contains("embeddings") && body["embeddings"].is_array()) {
      for (const auto& e : body["embeddings"]) {
        if (!e.contains("id") || !e.contains("vector")) continue;
        try {
          out.vectors[e["id"].get<std::string>()] = e["vector"].get<Vector>();
        } catch (const json::exception& ex) {
          if (e["id"].is_string()) out.errors[e["id"].get<std::string>()] = ex.what();
        }
      }
    }
    if (body.contains("errors") && body["errors"].is_array()) {
      for (const auto& e : body["errors"]) {
        if (e.contains("id") && e["id"].is_string()) {
          out.errors[e["id"].get<std::string>()] = e.value("message", std::string("encoder error"));
        }
      }
    }
  });

  bool any_response = false;
  std::string first_transport_error;
  for (const auto& o : outcomes) {
    any_response = any_response || o.responded;
    if (!o.responded && first_transport_error.empty()) first_transport_error = o.transport_error;
  }
  if (!any_response) throw Error(ErrorCode::TransportError, first_transport_error);

  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto& item = items[k];
    const BatchOutcome& o = outcomes[k / cfg.batch_size];
    if (!payload_errors[k].empty()) {
      result.errors.push_back({item.id, payload_errors[k]});
      continue;
    }
    if (!o.responded) {
      result.errors.push_back({item.id, "TransportError: " + o.transport_error});
      continue;
    }
    if (auto it = o.errors.find(item.id); it != o.errors.end()) {
      result.errors.push_back({item.id, it->second});
      continue;
    }
    auto it = o.vectors.find(item.id);
    if (it == o.vectors.end()) {
      result.errors.push_back({item.id, "encoder returned no embedding"});
      continue;
    }
    try {
      result.store.insert(item.id, item.kind, it->second);
    } catch (const Error& e) {
      result.errors.push_back({item.id, e.what()});
    }
  }
  return result;
}

}  // namespace augclip
