#pragma once

#include <functional>
#include <optional>
#include <string>

namespace augclip::http {

// "http://host:8080/v1/encode" -> origin "http://host:8080", path "/v1/encode".
struct Url {
  std::string origin;
  std::string path;
};

// Throws InvalidArgument for URLs without an http(s) scheme.
Url split_url(const std::string& url);

// Joins a base path and a suffix with exactly one slash between them.
std::string join_path(const std::string& base, const std::string& suffix);

struct Response {
  int status = 0;
  std::string body;
};

// POSTs a JSON body. Throws TransportError when no HTTP response arrives.
Response post_json(const std::string& url, const std::string& body, int timeout_ms,
                   const std::optional<std::string>& bearer_token);

// Runs task(i) for i in [0, count) on at most `max_concurrent` threads.
// Tasks are claimed in index order; exceptions escaping a task are rethrown
// after all threads join (the first one by index wins).
void run_bounded(std::size_t count, int max_concurrent, const std::function<void(std::size_t)>& task);

}  // namespace augclip::http
