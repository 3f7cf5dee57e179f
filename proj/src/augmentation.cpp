#include "augclip/augmentation.hpp"

#include <cctype>
#include <cstdlib>
#include <thread>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "augclip/error.hpp"
#include "augclip/hashing.hpp"
#include "augclip/http.hpp"

namespace augclip {

using nlohmann::json;

namespace {

constexpr std::string_view kBullet = "\xE2\x80\xA2";
constexpr int kMaxFixedCount = 64;

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Removes a leading list marker. Returns true when one was present.
bool strip_enumerator(std::string_view& s) {
  if (s.starts_with(kBullet)) {
    s.remove_prefix(kBullet.size());
    return true;
  }
  if (!s.empty() && (s.front() == '-' || s.front() == '*')) {
    s.remove_prefix(1);
    return true;
  }
  std::size_t i = 0;
  const bool paren = !s.empty() && s.front() == '(';
  if (paren) ++i;
  const std::size_t digits_begin = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == digits_begin || i >= s.size()) return false;
  if (paren ? s[i] == ')' : (s[i] == '.' || s[i] == ')')) {
    // "3.5 inches" is not an enumerator.
    if (i + 1 < s.size() && !std::isspace(static_cast<unsigned char>(s[i + 1]))) return false;
    s.remove_prefix(i + 1);
    return true;
  }
  return false;
}

std::string clean(std::string_view s) {
  s = trim_view(s);
  while (!s.empty() && std::string_view(".,;:!?").find(s.back()) != std::string_view::npos) {
    s.remove_suffix(1);
    s = trim_view(s);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = trim_view(s.substr(1, s.size() - 2));
  std::string out(s);
  for (char& c : out) {
    if (c == '\t' || c == '\r') c = ' ';
  }
  return out;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool boundary = (c == '.' || c == ';' || c == '!' || c == '?') &&
                          (i + 1 == s.size() || s[i + 1] == ' ');
    if (boundary) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  if (start < s.size()) out.emplace_back(s.substr(start));
  return out;
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == 0) return false;
    std::size_t extra = 0;
    if (c < 0x80) extra = 0;
    else if ((c >> 5) == 0x6) extra = 1;
    else if ((c >> 4) == 0xE) extra = 2;
    else if ((c >> 3) == 0x1E) extra = 3;
    else return false;
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += extra + 1;
  }
  return true;
}

std::string read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read image " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string mime_for(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : lower_ascii(path.substr(dot + 1));
  if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
  if (ext == "webp") return "image/webp";
  if (ext == "gif") return "image/gif";
  return "image/png";
}

}  // namespace

std::string_view to_string(LengthMode m) noexcept {
  return m == LengthMode::short_form ? "short" : "long";
}

std::optional<LengthMode> parse_length_mode(std::string_view s) noexcept {
  if (s == "short") return LengthMode::short_form;
  if (s == "long") return LengthMode::long_form;
  return std::nullopt;
}

std::string to_string(const CountMode& m) {
  return m.fixed ? "fixed:" + std::to_string(*m.fixed) : "free";
}

CountMode parse_count_mode(std::string_view s) {
  if (s == "free") return {};
  constexpr std::string_view prefix = "fixed:";
  if (s.starts_with(prefix)) {
    int n = 0;
    const auto rest = s.substr(prefix.size());
    auto res = std::from_chars(rest.data(), rest.data() + rest.size(), n);
    if (res.ec == std::errc() && res.ptr == rest.data() + rest.size() && n >= 1 &&
        n <= kMaxFixedCount) {
      return CountMode{n};
    }
  }
  throw Error(ErrorCode::InvalidArgument,
              "count mode must be free or fixed:<1..64>, got \"" + std::string(s) + "\"");
}

void DescriptionRequest::validate() const {
  if (role == Role::source && (!image_ref || image_ref->empty())) {
    throw Error(ErrorCode::InvalidArgument, "source descriptions need an image reference");
  }
  if (role == Role::target && (!source_text || !target_text)) {
    throw Error(ErrorCode::InvalidArgument, "target descriptions need source and target text");
  }
  if (count.fixed && (*count.fixed < 1 || *count.fixed > kMaxFixedCount)) {
    throw Error(ErrorCode::InvalidArgument, "fixed description count must be in [1, 64]");
  }
}

Prompt build_prompt(const DescriptionRequest& req) {
  req.validate();
  const std::string length_rule = req.length == LengthMode::short_form
                                      ? "Keep every description under 5 words."
                                      : "Write every description with more than 5 words.";
  const std::string count_rule =
      req.count.fixed ? "Write exactly " + std::to_string(*req.count.fixed) + " descriptions."
                      : "Write as many descriptions as the content calls for.";
  const std::string format_rule =
      "Each line names exactly one visual property such as color, shape, texture, pattern, size, "
      "pose, action or position. Answer with a numbered list and nothing else.\n"
      "Example answer:\n1. a red umbrella\n2. wet cobblestones\n3. an open hand";

  Prompt p;
  if (req.role == Role::source) {
    p.system = "You catalogue the visual attributes of a photograph. " + length_rule + " " +
               count_rule + " " + format_rule;
    p.user = "List the visual attributes of the attached image.";
  } else {
    p.system = "You describe how an image must look after a text-guided edit. " + length_rule +
               " " + count_rule + " " + format_rule;
    p.user = "Source text: \"" + *req.source_text + "\"\nTarget text: \"" + *req.target_text +
             "\"\nList the visual attributes an image matching the target text shows that the "
             "source text does not.";
  }
  return p;
}

std::vector<std::string> parse_description_list(std::string_view raw) {
  struct Line {
    std::string_view text;
    bool enumerated;
  };
  std::vector<Line> lines;
  bool any_enumerated = false;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string_view line = trim_view(raw.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    const bool enumerated = strip_enumerator(line);
    any_enumerated = any_enumerated || enumerated;
    lines.push_back({trim_view(line), enumerated});
  }

  std::vector<std::string> candidates;
  if (lines.size() == 1 && !any_enumerated) {
    candidates = split_sentences(lines.front().text);
  } else {
    for (const auto& l : lines) {
      if (any_enumerated && !l.enumerated && l.text.ends_with(':')) continue;
      candidates.emplace_back(l.text);
    }
  }

  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& c : candidates) {
    std::string d = clean(c);
    if (d.empty()) continue;
    if (seen.insert(lower_ascii(d)).second) out.push_back(std::move(d));
  }
  return out;
}

HttpChatClient::HttpChatClient(MllmConfig cfg) : cfg_(std::move(cfg)) {}

std::string HttpChatClient::complete(const ChatRequest& request) {
  json user_content = json::array();
  user_content.push_back({{"type", "text"}, {"text", request.prompt.user}});
  if (request.image_base64) {
    user_content.push_back(
        {{"type", "image_url"}, {"image_url", {{"url", *request.image_base64}}}});
  }
  json body = {{"model", request.model},
               {"temperature", request.temperature},
               {"messages",
                json::array({{{"role", "system"}, {"content", request.prompt.system}},
                             {{"role", "user"}, {"content", user_content}}})}};
  std::optional<std::string> key;
  if (const char* env = std::getenv(cfg_.api_key_env.c_str()); env != nullptr && *env != '\0') {
    key = env;
  }
  const auto resp = http::post_json(http::join_path(cfg_.base_url, "chat/completions"), body.dump(),
                                    cfg_.timeout_ms, key);
  if (resp.status != 200) {
    throw Error(ErrorCode::TransportError, "chat endpoint returned HTTP " + std::to_string(resp.status));
  }
  try {
    const json parsed = json::parse(resp.body);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::TransportError, std::string("malformed chat response: ") + e.what());
  }
}

DescriptionCache::DescriptionCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create cache directory " + dir_.string());
}

std::filesystem::path DescriptionCache::path_for(std::string_view key) const {
  return dir_ / (sha256_hex(key) + ".txt");
}

std::optional<std::string> DescriptionCache::get(std::string_view key) const {
  const auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::CacheCorruption, "unreadable cache entry " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  if (!valid_utf8(text)) {
    throw Error(ErrorCode::CacheCorruption, "cache entry is not UTF-8 text: " + path.string());
  }
  return text;
}

void DescriptionCache::put(std::string_view key, std::string_view completion) const {
  const auto path = path_for(key);
  auto tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(completion.data(), static_cast<std::streamsize>(completion.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename cache entry: " + ec.message());
}

std::string description_cache_key(const DescriptionRequest& req, const ChatRequest& chat) {
  std::ostringstream key;
  key << "augclip-descriptions/v1\n"
      << "model=" << chat.model << '\n'
      << "role=" << to_string(req.role) << '\n'
      << "image_ref=" << req.image_ref.value_or("") << '\n'
      << "system=" << chat.prompt.system << '\n'
      << "user=" << chat.prompt.user << '\n';
  return key.str();
}

AttributeSet generate_descriptions(const DescriptionRequest& req, ChatClient& client,
                                   const MllmConfig& cfg, const DescriptionCache* cache) {
  ChatRequest chat;
  chat.model = cfg.model;
  chat.temperature = cfg.temperature;
  chat.prompt = build_prompt(req);
  const std::string key = description_cache_key(req, chat);

  std::optional<std::string> completion;
  if (cache) completion = cache->get(key);
  const bool hit = completion.has_value();
  if (!hit) {
    if (req.role == Role::source) {
      chat.image_base64 =
          "data:" + mime_for(*req.image_ref) + ";base64," + base64_encode(read_binary(*req.image_ref));
    }
    completion = client.complete(chat);
  }

  AttributeSet set;
  set.role = req.role;
  set.origin = Origin::generated;
  set.descriptions = parse_description_list(*completion);
  if (set.descriptions.empty()) {
    throw Error(ErrorCode::EmptyGeneration,
                std::string(to_string(req.role)) + " completion had no parseable descriptions");
  }
  if (cache && !hit) cache->put(key, *completion);
  return set;
}

AttributeSet embed_attributes(AttributeSet set, const EmbeddingResolver& resolve) {
  validate(set);
  std::vector<Embedding> embeddings;
  embeddings.reserve(set.descriptions.size());
  for (const auto& d : set.descriptions) {
    auto e = resolve(d);
    if (!e) throw Error(ErrorCode::MissingId, "no embedding for description \"" + d + "\"");
    embeddings.push_back(e->is_normalized() ? std::move(*e) : normalize(*e));
  }
  set.embeddings = std::move(embeddings);
  validate(set);
  return set;
}

AttributeSet embed_attributes(AttributeSet set, const EmbeddingStore& store) {
  return embed_attributes(std::move(set), [&store](std::string_view d) -> std::optional<Embedding> {
    if (const auto* e = store.find(d)) return e->embedding;
    return std::nullopt;
  });
}

}  // namespace augclip
