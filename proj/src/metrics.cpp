#include "augclip/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "augclip/error.hpp"

namespace augclip {

namespace {

std::string_view side_name(AugSide side) {
  switch (side) {
    case AugSide::src: return "src";
    case AugSide::trg: return "trg";
    case AugSide::src_trg: return "src_trg";
  }
  return "src_trg";
}

std::string format_gamma(double g) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), g);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string to_string(const MetricId& id) {
  switch (id.family) {
    case MetricFamily::clipscore: return "clipscore";
    case MetricFamily::augclip: return "augclip";
    case MetricFamily::preservation_embedding: return "preservation_embedding";
    case MetricFamily::preservation_external: return "preservation_external";
    case MetricFamily::clipscore_aug: {
      const AugVariant v = id.variant.value_or(AugVariant{});
      return "clipscore_aug:" + std::string(side_name(v.side)) +
             (v.weighted ? ":weighted" : ":unweighted");
    }
    case MetricFamily::combined: return "combined:" + format_gamma(id.gamma.value_or(0.5));
  }
  return "unknown";
}

MetricId parse_metric(std::string_view name) {
  if (name == "clipscore") return MetricId::clipscore();
  if (name == "augclip") return MetricId::augclip();
  if (name == "preservation_embedding") return MetricId::preservation_embedding();
  if (name == "preservation_external") return MetricId::preservation_external();
  constexpr std::string_view aug = "clipscore_aug:";
  if (name.starts_with(aug)) {
    const auto rest = name.substr(aug.size());
    const auto colon = rest.find(':');
    if (colon != std::string_view::npos) {
      const auto side = rest.substr(0, colon);
      const auto mode = rest.substr(colon + 1);
      std::optional<AugSide> s;
      if (side == "src") s = AugSide::src;
      if (side == "trg") s = AugSide::trg;
      if (side == "src_trg") s = AugSide::src_trg;
      if (s && (mode == "weighted" || mode == "unweighted")) {
        return MetricId::clipscore_aug(*s, mode == "weighted");
      }
    }
  }
  constexpr std::string_view comb = "combined:";
  if (name.starts_with(comb)) {
    const auto rest = name.substr(comb.size());
    double g = 0.0;
    auto res = std::from_chars(rest.data(), rest.data() + rest.size(), g);
    if (res.ec == std::errc() && res.ptr == rest.data() + rest.size() && g >= 0.0 && g <= 1.0) {
      return MetricId::combined(g);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown metric \"" + std::string(name) + "\"");
}

std::vector<MetricId> clipscore_aug_variants() {
  std::vector<MetricId> out;
  for (AugSide side : {AugSide::src, AugSide::trg, AugSide::src_trg}) {
    for (bool weighted : {false, true}) out.push_back(MetricId::clipscore_aug(side, weighted));
  }
  return out;
}

double clipscore(std::span<const double> i_edit, std::span<const double> i_src,
                 std::span<const double> t_trg, std::span<const double> t_src) {
  const Vector image_delta = subtract(i_edit, i_src);
  const Vector text_delta = subtract(t_trg, t_src);
  require_same_dim(image_delta, text_delta);
  const bool image_zero = !(norm(image_delta) > kZeroNormThreshold);
  const bool text_zero = !(norm(text_delta) > kZeroNormThreshold);
  if (image_zero || text_zero) {
    std::string which = image_zero && text_zero ? "image and text" : (image_zero ? "image" : "text");
    throw Error(ErrorCode::DegenerateDirection, which + " direction vanished");
  }
  return cosine(image_delta, text_delta);
}

double clipscore(const Embedding& i_edit, const Embedding& i_src, const Embedding& t_trg,
                 const Embedding& t_src) {
  return clipscore(i_edit.values(), i_src.values(), t_trg.values(), t_src.values());
}

double clipscore_augmented(const Embedding& i_edit, const Embedding& i_src, const Embedding& t_trg,
                           const Embedding& t_src, const AttributeSet& source,
                           const AttributeSet& target, const WeightVector& weights,
                           AugVariant variant) {
  const bool use_src = variant.side != AugSide::trg;
  const bool use_trg = variant.side != AugSide::src;
  Vector src_text = t_src.vector();
  Vector trg_text = t_trg.vector();
  if (use_src) {
    require_embedded(source);
    std::optional<std::span<const double>> w;
    if (variant.weighted) w = std::span<const double>(weights.source);
    src_text = mean_embedding(source.embeddings, w);
  }
  if (use_trg) {
    require_embedded(target);
    std::optional<std::span<const double>> w;
    if (variant.weighted) w = std::span<const double>(weights.target);
    trg_text = mean_embedding(target.embeddings, w);
  }
  return clipscore(i_edit.values(), i_src.values(), trg_text, src_text);
}

double preservation_embedding(const Embedding& i_edit, const Embedding& i_src) {
  return cosine(i_edit, i_src);
}

void CombineConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma must lie in [0, 1]");
  }
}

std::vector<double> minmax_scale(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySet, "nothing to scale");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw Error(ErrorCode::ConstantScores, "min-max scaling of constant scores");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / (hi - lo);
  return out;
}

std::vector<double> combine_scores(std::span<const double> modification,
                                   std::span<const double> preservation,
                                   const CombineConfig& cfg) {
  cfg.validate();
  if (modification.size() != preservation.size()) {
    throw Error(ErrorCode::InvalidArgument, "score lists differ in length");
  }
  std::vector<double> presv(preservation.begin(), preservation.end());
  if (cfg.preservation_direction == PreservationDirection::lower_better) {
    for (double& p : presv) p = -p;
  }
  const auto mod_scaled = minmax_scale(modification);
  const auto presv_scaled = minmax_scale(presv);
  std::vector<double> out(mod_scaled.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = cfg.gamma * mod_scaled[i] + (1.0 - cfg.gamma) * presv_scaled[i];
  }
  return out;
}

std::optional<double> ExternalScores::lookup(std::string_view case_id,
                                             std::string_view image_id) const {
  const std::string specific = std::string(case_id) + "/" + std::string(image_id);
  if (auto it = scores.find(specific); it != scores.end()) return it->second;
  if (auto it = scores.find(std::string(case_id)); it != scores.end()) return it->second;
  return std::nullopt;
}

ExternalScores load_external_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  ExternalScores out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                             ": expected two tab-separated columns");
    }
    const std::string key = trim(t.substr(0, tab));
    const std::string value = trim(t.substr(tab + 1));
    if (!header_seen) {
      if (key != "direction" || (value != "higher_better" && value != "lower_better")) {
        throw Error(ErrorCode::ParseError,
                    path.string() + ": first line must be direction<TAB>higher_better|lower_better");
      }
      out.direction = value == "higher_better" ? PreservationDirection::higher_better
                                               : PreservationDirection::lower_better;
      header_seen = true;
      continue;
    }
    double v = 0.0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !std::isfinite(v)) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(line_no) + ": bad score \"" + value + "\"");
    }
    if (!out.scores.emplace(key, v).second) {
      throw Error(ErrorCode::DuplicateId, path.string() + ": case " + key + " listed twice");
    }
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, path.string() + ": missing direction header");
  return out;
}

}  // namespace augclip
