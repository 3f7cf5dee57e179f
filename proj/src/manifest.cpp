#include "augclip/manifest.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

#include "augclip/error.hpp"

namespace augclip {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(EditTag tag) noexcept {
  switch (tag) {
    case EditTag::candidate_a: return "candidate_a";
    case EditTag::candidate_b: return "candidate_b";
    case EditTag::ground_truth: return "ground_truth";
    case EditTag::over_preserved: return "over_preserved";
    case EditTag::over_modified: return "over_modified";
  }
  return "candidate_a";
}

std::optional<EditTag> parse_edit_tag(std::string_view s) noexcept {
  for (auto t : {EditTag::candidate_a, EditTag::candidate_b, EditTag::ground_truth,
                 EditTag::over_preserved, EditTag::over_modified}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::string_view to_string(CaseKind kind) noexcept {
  return kind == CaseKind::two_afc ? "2afc" : "triplet";
}

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SchemaError, where + ": " + what);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

std::string get_string(const json& obj, const char* key, const std::string& where,
                       bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) schema(where, std::string("missing \"") + key + "\"");
    return {};
  }
  if (!it->is_string()) schema(where, std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

AttributeSet parse_attribute_set(const json& j, const std::string& where) {
  if (!j.is_object()) schema(where, "attribute set must be an object");
  AttributeSet set;
  auto role = parse_role(get_string(j, "role", where));
  if (!role) schema(where, "role must be \"source\" or \"target\"");
  set.role = *role;
  auto origin_s = get_string(j, "origin", where, false);
  if (!origin_s.empty()) {
    auto origin = parse_origin(origin_s);
    if (!origin) schema(where, "origin must be \"generated\" or \"manual\"");
    set.origin = *origin;
  }
  auto it = j.find("descriptions");
  if (it == j.end() || !it->is_array()) schema(where, "\"descriptions\" must be an array");
  for (const auto& d : *it) {
    if (!d.is_string()) schema(where, "descriptions must be strings");
    set.descriptions.push_back(d.get<std::string>());
  }
  try {
    validate(set);
  } catch (const Error& e) {
    schema(where, e.what());
  }
  return set;
}

json attribute_set_json(const AttributeSet& set) {
  return json{{"role", std::string(to_string(set.role))},
              {"origin", std::string(to_string(set.origin))},
              {"descriptions", set.descriptions}};
}

CaseRecord parse_case(const json& j, std::size_t index) {
  std::string where = "cases[" + std::to_string(index) + "]";
  if (!j.is_object()) schema(where, "case must be an object");
  CaseRecord c;
  c.case_id = get_string(j, "case_id", where);
  if (c.case_id.empty()) schema(where, "empty case_id");
  where += " (" + c.case_id + ")";
  c.source_image_id = get_string(j, "source_image", where);
  c.source_text_id = get_string(j, "source_text", where);
  c.target_text_id = get_string(j, "target_text", where);
  auto edits = j.find("edits");
  if (edits == j.end() || !edits->is_array()) schema(where, "\"edits\" must be an array");
  for (const auto& e : *edits) {
    if (!e.is_object()) schema(where, "edit must be an object");
    EditedImage img;
    img.image_id = get_string(e, "image", where);
    auto tag = parse_edit_tag(get_string(e, "tag", where));
    if (!tag) schema(where, "unknown edit tag \"" + e["tag"].get<std::string>() + "\"");
    img.tag = *tag;
    c.edited.push_back(std::move(img));
  }
  auto vote = get_string(j, "human_vote", where, false);
  if (!vote.empty()) {
    c.human_vote = parse_edit_tag(vote);
    if (!c.human_vote) schema(where, "unknown human_vote \"" + vote + "\"");
  }
  if (auto v = j.find("votes"); v != j.end()) {
    if (!v->is_object()) schema(where, "\"votes\" must be an object");
    for (const auto& [k, n] : v->items()) {
      if (!n.is_number_integer() || n.get<int>() < 0) schema(where, "vote counts must be >= 0");
      c.vote_counts[k] = n.get<int>();
    }
  }
  c.source_attributes_id = get_string(j, "source_attributes", where, false);
  c.target_attributes_id = get_string(j, "target_attributes", where, false);
  if (c.source_attributes_id.empty()) c.source_attributes_id = c.case_id + "/source";
  if (c.target_attributes_id.empty()) c.target_attributes_id = c.case_id + "/target";

  bool afc = false, triplet = false;
  for (const auto& e : c.edited) {
    if (e.tag == EditTag::candidate_a || e.tag == EditTag::candidate_b) afc = true;
    else triplet = true;
  }
  c.kind = triplet && !afc ? CaseKind::triplet : CaseKind::two_afc;
  try {
    validate_case(c);
  } catch (const Error& e) {
    schema(where, e.what());
  }
  return c;
}

}  // namespace

void validate_case(const CaseRecord& c) {
  std::set<EditTag> tags;
  for (const auto& e : c.edited) {
    if (!tags.insert(e.tag).second) {
      throw Error(ErrorCode::SchemaError, "duplicate edit tag " + std::string(to_string(e.tag)));
    }
  }
  if (c.edited.empty()) throw Error(ErrorCode::SchemaError, "case has no edits");
  if (c.kind == CaseKind::two_afc) {
    if (tags != std::set<EditTag>{EditTag::candidate_a, EditTag::candidate_b}) {
      throw Error(ErrorCode::SchemaError,
                  "2afc case needs exactly candidate_a and candidate_b edits");
    }
    if (!c.human_vote) throw Error(ErrorCode::SchemaError, "2afc case has no human_vote");
    if (*c.human_vote != EditTag::candidate_a && *c.human_vote != EditTag::candidate_b) {
      throw Error(ErrorCode::SchemaError, "2afc human_vote must name a candidate");
    }
  } else {
    for (auto t : tags) {
      if (t == EditTag::candidate_a || t == EditTag::candidate_b) {
        throw Error(ErrorCode::SchemaError, "triplet case mixes candidate tags");
      }
    }
    if (c.human_vote) throw Error(ErrorCode::SchemaError, "triplet case carries a human_vote");
  }
}

AttributeCatalog load_descriptions(const fs::path& path) {
  json j = read_json(path);
  const std::string where = path.string();
  if (!j.is_object()) schema(where, "top level must be an object");
  if (j.value("schema_version", 0) != kManifestSchemaVersion) {
    schema(where, "unsupported schema_version");
  }
  auto sets = j.find("attribute_sets");
  if (sets == j.end() || !sets->is_object()) schema(where, "\"attribute_sets\" must be an object");
  AttributeCatalog out;
  for (const auto& [id, s] : sets->items()) {
    out.emplace(id, parse_attribute_set(s, where + ": attribute_sets." + id));
  }
  return out;
}

void write_descriptions(const AttributeCatalog& sets, const fs::path& path) {
  json j;
  j["schema_version"] = kManifestSchemaVersion;
  json s = json::object();
  for (const auto& [id, set] : sets) s[id] = attribute_set_json(set);
  j["attribute_sets"] = std::move(s);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Manifest load_manifest(const fs::path& path) {
  json j = read_json(path);
  const std::string where = path.string();
  if (!j.is_object()) schema(where, "top level must be an object");
  Manifest m;
  auto version = j.find("schema_version");
  if (version == j.end() || !version->is_number_integer()) {
    schema(where, "missing integer \"schema_version\"");
  }
  m.schema_version = version->get<int>();
  if (m.schema_version != kManifestSchemaVersion) {
    schema(where, "unsupported schema_version " + std::to_string(m.schema_version));
  }
  m.name = get_string(j, "name", where, false);
  m.base_dir = path.parent_path();

  if (auto p = j.find("payloads"); p != j.end()) {
    if (!p->is_object()) schema(where, "\"payloads\" must be an object");
    for (const auto& [id, pj] : p->items()) {
      const std::string pw = where + ": payloads." + id;
      if (!pj.is_object()) schema(pw, "payload must be an object");
      auto kind = parse_kind(get_string(pj, "kind", pw));
      if (!kind) schema(pw, "kind must be \"image\" or \"text\"");
      Payload payload{*kind, {}};
      if (*kind == EmbeddingKind::image) {
        fs::path ref = get_string(pj, "path", pw);
        payload.ref = (ref.is_absolute() ? ref : m.base_dir / ref).string();
      } else {
        payload.ref = get_string(pj, "text", pw);
      }
      m.payloads.emplace(id, std::move(payload));
    }
  }

  auto df = get_string(j, "descriptions_file", where, false);
  if (!df.empty()) {
    fs::path dpath = fs::path(df).is_absolute() ? fs::path(df) : m.base_dir / df;
    m.descriptions_file = dpath;
    if (fs::exists(dpath)) m.attribute_sets = load_descriptions(dpath);
  }
  if (auto s = j.find("attribute_sets"); s != j.end()) {
    if (!s->is_object()) schema(where, "\"attribute_sets\" must be an object");
    for (const auto& [id, sj] : s->items()) {
      m.attribute_sets.insert_or_assign(id, parse_attribute_set(sj, where + ": attribute_sets." + id));
    }
  }

  auto cases = j.find("cases");
  if (cases == j.end() || !cases->is_array()) schema(where, "\"cases\" must be an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < cases->size(); ++i) {
    CaseRecord c = parse_case((*cases)[i], i);
    if (!ids.insert(c.case_id).second) {
      throw Error(ErrorCode::DuplicateId, where + ": duplicate case_id " + c.case_id);
    }
    m.cases.push_back(std::move(c));
  }
  return m;
}

Manifest load_manifest(const fs::path& path, const EmbeddingStore& store) {
  Manifest m = load_manifest(path);
  check_references(m, store);
  return m;
}

void check_references(const Manifest& manifest, const EmbeddingStore& store) {
  auto dangling = [](const CaseRecord& c, const std::string& id, const char* what) {
    throw Error(ErrorCode::DanglingReference, c.case_id + ": " + what + " \"" + id + "\"");
  };
  for (const auto& c : manifest.cases) {
    for (const auto* id : {&c.source_image_id, &c.source_text_id, &c.target_text_id}) {
      if (!store.contains(*id)) dangling(c, *id, "embedding");
    }
    for (const auto& e : c.edited) {
      if (!store.contains(e.image_id)) dangling(c, e.image_id, "embedding");
    }
    for (const auto* sid : {&c.source_attributes_id, &c.target_attributes_id}) {
      auto it = manifest.attribute_sets.find(*sid);
      if (it == manifest.attribute_sets.end()) dangling(c, *sid, "attribute set");
      for (const auto& d : it->second.descriptions) {
        if (!store.contains(d)) dangling(c, d, "description embedding");
      }
    }
  }
}

void write_manifest(const Manifest& m, const fs::path& path) {
  json j;
  j["schema_version"] = m.schema_version;
  if (!m.name.empty()) j["name"] = m.name;
  const fs::path dir = path.parent_path();
  json payloads = json::object();
  for (const auto& [id, p] : m.payloads) {
    if (p.kind == EmbeddingKind::image) {
      fs::path ref = p.ref;
      std::error_code ec;
      fs::path rel = dir.empty() ? ref : fs::relative(ref, dir, ec);
      payloads[id] = {{"kind", "image"}, {"path", (ec || rel.empty() ? ref : rel).generic_string()}};
    } else {
      payloads[id] = {{"kind", "text"}, {"text", p.ref}};
    }
  }
  j["payloads"] = std::move(payloads);
  if (m.descriptions_file) {
    std::error_code ec;
    fs::path rel = dir.empty() ? *m.descriptions_file : fs::relative(*m.descriptions_file, dir, ec);
    j["descriptions_file"] = (ec || rel.empty() ? *m.descriptions_file : rel).generic_string();
  } else if (!m.attribute_sets.empty()) {
    json sets = json::object();
    for (const auto& [id, set] : m.attribute_sets) sets[id] = attribute_set_json(set);
    j["attribute_sets"] = std::move(sets);
  }
  json cases = json::array();
  for (const auto& c : m.cases) {
    json cj{{"case_id", c.case_id},
            {"source_image", c.source_image_id},
            {"source_text", c.source_text_id},
            {"target_text", c.target_text_id}};
    json edits = json::array();
    for (const auto& e : c.edited) {
      edits.push_back({{"image", e.image_id}, {"tag", std::string(to_string(e.tag))}});
    }
    cj["edits"] = std::move(edits);
    if (c.human_vote) cj["human_vote"] = std::string(to_string(*c.human_vote));
    if (!c.vote_counts.empty()) cj["votes"] = c.vote_counts;
    if (c.source_attributes_id != c.case_id + "/source") {
      cj["source_attributes"] = c.source_attributes_id;
    }
    if (c.target_attributes_id != c.case_id + "/target") {
      cj["target_attributes"] = c.target_attributes_id;
    }
    cases.push_back(std::move(cj));
  }
  j["cases"] = std::move(cases);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace augclip
