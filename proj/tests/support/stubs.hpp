#pragma once

// In-process HTTP stubs for the encoder and chat endpoints. Each server
// binds to an ephemeral localhost port and serves on a background thread.

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace stubs {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

// Deterministic pseudo-embedding for a payload.
inline std::vector<double> vector_for(const std::string& payload, std::size_t dim) {
  std::mt19937_64 rng(fnv1a(payload));
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = g(rng);
  return v;
}

class Server {
 public:
  Server() = default;
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;
  ~Server() { stop(); }

  void start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    while (!server_.is_running()) std::this_thread::yield();
  }
  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_.load(); }

 protected:
  httplib::Server server_;
  std::atomic<int> requests_{0};

 private:
  std::thread thread_;
  int port_ = 0;
};

// POST /encode: {"items":[{id,kind,payload}]} -> {"embeddings":[...],"errors":[...]}.
// Payloads containing "FAIL" are reported as per-item errors.
class Encoder : public Server {
 public:
  explicit Encoder(std::size_t dim = 8, std::string required_token = {})
      : dim_(dim), token_(std::move(required_token)) {
    server_.Post("/encode", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      if (!token_.empty() && req.get_header_value("Authorization") != "Bearer " + token_) {
        res.status = 401;
        return;
      }
      auto body = nlohmann::json::parse(req.body);
      nlohmann::json out{{"embeddings", nlohmann::json::array()},
                         {"errors", nlohmann::json::array()}};
      for (const auto& item : body["items"]) {
        const std::string id = item["id"];
        const std::string payload = item["payload"];
        if (payload.find("FAIL") != std::string::npos) {
          out["errors"].push_back({{"id", id}, {"message", "stub refused payload"}});
        } else {
          out["embeddings"].push_back({{"id", id}, {"vector", vector_for(payload, dim_)}});
        }
      }
      res.set_content(out.dump(), "application/json");
    });
    start();
  }
  std::string url() const { return base_url() + "/encode"; }

 private:
  std::size_t dim_;
  std::string token_;
};

// POST /v1/chat/completions answering with a fixed completion chosen by
// `reply` from the request body.
class Chat : public Server {
 public:
  using Reply = std::function<std::string(const nlohmann::json& request)>;

  explicit Chat(Reply reply) : reply_(std::move(reply)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   ++requests_;
                   {
                     std::lock_guard<std::mutex> lock(mu_);
                     last_body_ = req.body;
                   }
                   auto body = nlohmann::json::parse(req.body);
                   nlohmann::json out{
                       {"choices",
                        {{{"message", {{"role", "assistant"}, {"content", reply_(body)}}}}}}};
                   res.set_content(out.dump(), "application/json");
                 });
    start();
  }
  std::string url() const { return base_url() + "/v1"; }
  std::string last_body() const {
    std::lock_guard<std::mutex> lock(mu_);
    return last_body_;
  }

 private:
  Reply reply_;
  mutable std::mutex mu_;
  std::string last_body_;
};

// Role-aware completion: source prompts get source-side attributes, target
// prompts target-side ones, each tagged with a digest of the prompt so
// different cases get different descriptions.
inline std::string attribute_reply(const nlohmann::json& request) {
  std::string user, image;
  for (const auto& m : request["messages"]) {
    if (m["role"] != "user") continue;
    if (m["content"].is_string()) {
      user += m["content"].get<std::string>();
      continue;
    }
    for (const auto& part : m["content"]) {
      if (part.value("type", "") == "text") user += part["text"].get<std::string>();
      if (part.value("type", "") == "image_url") image += part["image_url"]["url"].get<std::string>();
    }
  }
  const bool target = user.find("Target text") != std::string::npos;
  const std::string tag = std::to_string(fnv1a(user + image) % 1000);
  if (target) {
    return "1. wearing a red armor suit " + tag + "\n2. metallic helmet " + tag +
           "\n3. glowing chest light " + tag + "\n";
  }
  return "1. a sitting man " + tag + "\n2. wearing a blue cap " + tag + "\n3. orange t-shirt " +
         tag + "\n";
}

}  // namespace stubs
