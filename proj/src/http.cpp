#include "augclip/http.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "httplib.h"

#include "augclip/error.hpp"

namespace augclip::http {

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos ||
      (url.compare(0, scheme_end, "http") != 0 && url.compare(0, scheme_end, "https") != 0)) {
    throw Error(ErrorCode::InvalidArgument, "endpoint URL must start with http:// or https://: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Url out;
  if (path_start == std::string::npos) {
    out.origin = url;
    out.path = "/";
  } else {
    out.origin = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  return out;
}

std::string join_path(const std::string& base, const std::string& suffix) {
  std::string b = base;
  while (!b.empty() && b.back() == '/') b.pop_back();
  std::string s = suffix;
  while (!s.empty() && s.front() == '/') s.erase(0, 1);
  return b + "/" + s;
}

Response post_json(const std::string& url, const std::string& body, int timeout_ms,
                   const std::optional<std::string>& bearer_token) {
  const Url parts = split_url(url);
  httplib::Client client(parts.origin);
  const auto sec = timeout_ms / 1000;
  const auto usec = (timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  httplib::Headers headers;
  if (bearer_token && !bearer_token->empty()) {
    headers.emplace("Authorization", "Bearer " + *bearer_token);
  }
  auto res = client.Post(parts.path, headers, body, "application/json");
  if (!res) {
    throw Error(ErrorCode::TransportError,
                url + ": " + httplib::to_string(res.error()));
  }
  return Response{res->status, res->body};
}

void run_bounded(std::size_t count, int max_concurrent,
                 const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  const auto workers = static_cast<std::size_t>(std::clamp<long long>(
      max_concurrent, 1, static_cast<long long>(count)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace augclip::http
