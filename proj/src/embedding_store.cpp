#include "augclip/embedding_store.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "augclip/error.hpp"

namespace augclip {

namespace {

constexpr std::array<char, 4> kMagic = {'A', 'G', 'C', 'S'};
constexpr std::uint32_t kBinaryVersion = 1;
constexpr std::string_view kProvenancePrefix = "# provenance:";

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, std::string context)
      : data_(data), context_(std::move(context)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return byte(pos_++);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::uint8_t byte(std::size_t i) const { return static_cast<std::uint8_t>(data_[i]); }
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw Error(ErrorCode::ParseError, context_ + ": truncated at byte " + std::to_string(pos_));
    }
  }

  const std::string& data_;
  std::string context_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vector parse_vector(std::string_view text, const std::string& where) {
  Vector out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    auto field = text.substr(pos, comma - pos);
    while (!field.empty() && (field.front() == ' ')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
      throw Error(ErrorCode::ParseError, where + ": bad component \"" + std::string(field) + "\"");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

EmbeddingStore parse_text(const std::string& data, const std::string& name) {
  EmbeddingStore store;
  std::istringstream in(data);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.starts_with(kProvenancePrefix)) {
        auto p = line.substr(kProvenancePrefix.size());
        if (!p.empty() && p.front() == ' ') p.erase(0, 1);
        store.set_provenance(p);
      }
      continue;
    }
    const std::string where = name + ":" + std::to_string(line_no);
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw Error(ErrorCode::ParseError, where + ": expected id<TAB>kind<TAB>vector");
    }
    const std::string id = line.substr(0, t1);
    const auto kind = parse_kind(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
    if (!kind) throw Error(ErrorCode::ParseError, where + ": kind must be image or text");
    Vector raw = parse_vector(std::string_view(line).substr(t2 + 1), where);
    try {
      store.insert(id, *kind, std::move(raw));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ZeroVector || e.code() == ErrorCode::NonFinite ||
          e.code() == ErrorCode::SchemaError) {
        throw Error(ErrorCode::ParseError, where + ": " + e.what());
      }
      throw Error(e.code(), where + ": " + e.what());
    }
  }
  return store;
}

EmbeddingStore parse_binary(const std::string& data, const std::string& name) {
  ByteReader r(data, name);
  r.bytes(kMagic.size());
  const auto version = r.u32();
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::ParseError, name + ": unsupported version " + std::to_string(version));
  }
  const auto dim = r.u32();
  const auto count = r.u32();
  EmbeddingStore store(r.bytes(r.u32()));
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string where = name + ": record " + std::to_string(k);
    std::string id = r.bytes(r.u32());
    const auto kind_byte = r.u8();
    if (kind_byte > 1) throw Error(ErrorCode::ParseError, where + ": bad kind byte");
    Vector raw(dim);
    for (auto& v : raw) v = std::bit_cast<double>(r.u64());
    try {
      store.insert(std::move(id), kind_byte == 0 ? EmbeddingKind::image : EmbeddingKind::text,
                   std::move(raw));
    } catch (const Error& e) {
      throw Error(e.code() == ErrorCode::DuplicateId ? e.code() : ErrorCode::ParseError,
                  where + ": " + e.what());
    }
  }
  if (!r.done()) throw Error(ErrorCode::ParseError, name + ": trailing bytes after last record");
  return store;
}

}  // namespace

std::string_view to_string(EmbeddingKind kind) noexcept {
  return kind == EmbeddingKind::image ? "image" : "text";
}

std::optional<EmbeddingKind> parse_kind(std::string_view s) noexcept {
  if (s == "image") return EmbeddingKind::image;
  if (s == "text") return EmbeddingKind::text;
  return std::nullopt;
}

void EmbeddingStore::insert(std::string id, EmbeddingKind kind, Vector raw) {
  if (id.empty()) throw Error(ErrorCode::SchemaError, "embedding id must be non-empty");
  if (id.find_first_of("\t\n") != std::string::npos) {
    throw Error(ErrorCode::SchemaError, "embedding id contains a tab or newline");
  }
  if (entries_.empty() ? raw.empty() : raw.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "entry \"" + id + "\" has dimension " + std::to_string(raw.size()) +
                    ", store dimension is " + std::to_string(dim_));
  }
  if (index_.contains(id)) throw Error(ErrorCode::DuplicateId, "\"" + id + "\"");
  Embedding unit = normalize(Embedding(raw).values());
  if (entries_.empty()) dim_ = raw.size();
  index_.emplace(id, entries_.size());
  entries_.push_back(StoreEntry{std::move(id), kind, std::move(raw), std::move(unit)});
}

const StoreEntry* EmbeddingStore::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const Embedding& EmbeddingStore::resolve(std::string_view id) const {
  const auto* e = find(id);
  if (e == nullptr) throw Error(ErrorCode::MissingId, "\"" + std::string(id) + "\"");
  return e->embedding;
}

EmbeddingStore load_store(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() >= kMagic.size() &&
      std::equal(kMagic.begin(), kMagic.end(), data.begin())) {
    return parse_binary(data, path.string());
  }
  return parse_text(data, path.string());
}

void emit_store(const EmbeddingStore& store, const std::filesystem::path& path,
                StoreFormat format) {
  std::string out;
  if (format == StoreFormat::text) {
    out += "# augclip embedding store\n";
    if (!store.provenance().empty()) {
      out += std::string(kProvenancePrefix) + " " + store.provenance() + "\n";
    }
    for (const auto& e : store.entries()) {
      out += e.id;
      out += '\t';
      out += to_string(e.kind);
      out += '\t';
      for (std::size_t i = 0; i < e.raw.size(); ++i) {
        if (i) out += ',';
        out += format_double(e.raw[i]);
      }
      out += '\n';
    }
  } else {
    out.append(kMagic.begin(), kMagic.end());
    put_u32(out, kBinaryVersion);
    put_u32(out, static_cast<std::uint32_t>(store.dim()));
    put_u32(out, static_cast<std::uint32_t>(store.size()));
    put_u32(out, static_cast<std::uint32_t>(store.provenance().size()));
    out += store.provenance();
    for (const auto& e : store.entries()) {
      put_u32(out, static_cast<std::uint32_t>(e.id.size()));
      out += e.id;
      out.push_back(e.kind == EmbeddingKind::image ? 0 : 1);
      for (double v : e.raw) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void merge_into(EmbeddingStore& base, const EmbeddingStore& extra) {
  for (const auto& e : extra.entries()) {
    if (!base.contains(e.id)) base.insert(e.id, e.kind, e.raw);
  }
  if (base.provenance().empty()) base.set_provenance(extra.provenance());
}

}  // namespace augclip
