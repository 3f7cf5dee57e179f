#include "augclip/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "augclip/error.hpp"

namespace augclip {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ReportFormat f) noexcept {
  return f == ReportFormat::structured ? "structured" : "tabular";
}

std::optional<ReportFormat> parse_report_format(std::string_view s) noexcept {
  if (s == "structured" || s == "json") return ReportFormat::structured;
  if (s == "tabular" || s == "tsv") return ReportFormat::tabular;
  return std::nullopt;
}

namespace {

constexpr EditTag kTagOrder[] = {EditTag::candidate_a, EditTag::candidate_b,
                                 EditTag::ground_truth, EditTag::over_preserved,
                                 EditTag::over_modified};

[[noreturn]] void schema(const std::string& what) {
  throw Error(ErrorCode::SchemaError, "report: " + what);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) schema(std::string(key) + " must be a number or null");
  return it->get<double>();
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fixed(const std::optional<double>& v, int precision = 4) {
  if (!v) return "-";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << *v;
  return ss.str();
}

json score_json(const ScoreValue& s) {
  if (s.value) return *s.value;
  if (s.error) {
    return json{{"error", std::string(to_string(*s.error))}, {"message", s.message}};
  }
  return nullptr;
}

ScoreValue score_from_json(const json& j) {
  if (j.is_null()) return {};
  if (j.is_number()) return ScoreValue{j.get<double>(), std::nullopt, {}};
  if (!j.is_object() || !j.contains("error")) schema("score must be a number, null or error");
  auto code = parse_error_code(j["error"].get<std::string>());
  if (!code) schema("unknown error code " + j["error"].get<std::string>());
  return ScoreValue{std::nullopt, code, j.value("message", std::string())};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

std::string tabular_rows(const ScoreReport& report, const std::string& prefix) {
  std::string out;
  for (const auto& c : report.cases) {
    for (std::size_t m = 0; m < report.metrics.size(); ++m) {
      out += prefix;
      out += c.case_id;
      out += '\t';
      out += to_string(c.kind);
      out += '\t';
      out += report.metrics[m];
      for (EditTag tag : kTagOrder) {
        out += '\t';
        for (const auto& e : c.edits) {
          if (e.tag != tag) continue;
          const ScoreValue& s = e.scores[m];
          if (s.value) out += format_double(*s.value);
          else if (s.error) out += "ERR:" + std::string(to_string(*s.error));
        }
      }
      out += '\n';
    }
  }
  return out;
}

std::string tabular_header(bool with_cell) {
  std::string h = with_cell ? "cell\t" : "";
  h += "case_id\tkind\tmetric";
  for (EditTag tag : kTagOrder) {
    h += '\t';
    h += to_string(tag);
  }
  return h + '\n';
}

}  // namespace

json report_to_json(const ScoreReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["label"] = r.label;
  j["provenance"] = r.provenance;
  j["config"] = r.config;
  j["metrics"] = r.metrics;
  json aggs = json::object();
  for (const auto& [name, a] : r.aggregates) {
    aggs[name] = {{"s_align", optional_number(a.s_align)},
                  {"s_align_cases", a.s_align_cases},
                  {"s_align_excluded", a.s_align_excluded},
                  {"acc_both", optional_number(a.acc_both)},
                  {"acc_both_cases", a.acc_both_cases},
                  {"acc_both_excluded", a.acc_both_excluded}};
  }
  j["aggregates"] = std::move(aggs);
  j["misclassification_mean"] = optional_number(r.misclassification_mean);
  j["fitted_cases"] = r.fitted_cases;
  json cases = json::array();
  for (const auto& c : r.cases) {
    json cj{{"case_id", c.case_id}, {"kind", std::string(to_string(c.kind))}};
    cj["human_vote"] = c.human_vote ? json(std::string(to_string(*c.human_vote))) : json(nullptr);
    cj["misclassification"] = optional_number(c.misclassification);
    cj["alpha_min"] = optional_number(c.alpha_min);
    cj["warnings"] = c.warnings;
    json edits = json::array();
    for (const auto& e : c.edits) {
      json scores = json::object();
      for (std::size_t m = 0; m < r.metrics.size() && m < e.scores.size(); ++m) {
        scores[r.metrics[m]] = score_json(e.scores[m]);
      }
      edits.push_back({{"image", e.image_id},
                       {"tag", std::string(to_string(e.tag))},
                       {"scores", std::move(scores)}});
    }
    cj["edits"] = std::move(edits);
    cases.push_back(std::move(cj));
  }
  j["cases"] = std::move(cases);
  return j;
}

ScoreReport report_from_json(const json& j) {
  try {
    if (!j.is_object()) schema("top level must be an object");
    if (j.value("schema_version", 0) != kReportSchemaVersion) schema("unsupported schema_version");
    ScoreReport r;
    r.label = j.at("label").get<std::string>();
    r.provenance = j.at("provenance").get<std::string>();
    r.config = j.at("config");
    r.metrics = j.at("metrics").get<std::vector<std::string>>();
    for (const auto& [name, a] : j.at("aggregates").items()) {
      MetricAggregate agg;
      agg.s_align = read_optional(a, "s_align");
      agg.s_align_cases = a.at("s_align_cases").get<std::size_t>();
      agg.s_align_excluded = a.at("s_align_excluded").get<std::size_t>();
      agg.acc_both = read_optional(a, "acc_both");
      agg.acc_both_cases = a.at("acc_both_cases").get<std::size_t>();
      agg.acc_both_excluded = a.at("acc_both_excluded").get<std::size_t>();
      r.aggregates.emplace(name, agg);
    }
    r.misclassification_mean = read_optional(j, "misclassification_mean");
    r.fitted_cases = j.at("fitted_cases").get<std::size_t>();
    for (const auto& cj : j.at("cases")) {
      CaseScores c;
      c.case_id = cj.at("case_id").get<std::string>();
      const auto kind = cj.at("kind").get<std::string>();
      if (kind != "2afc" && kind != "triplet") schema("unknown case kind " + kind);
      c.kind = kind == "2afc" ? CaseKind::two_afc : CaseKind::triplet;
      if (!cj.at("human_vote").is_null()) {
        c.human_vote = parse_edit_tag(cj["human_vote"].get<std::string>());
        if (!c.human_vote) schema("unknown human_vote");
      }
      c.misclassification = read_optional(cj, "misclassification");
      c.alpha_min = read_optional(cj, "alpha_min");
      c.warnings = cj.at("warnings").get<std::vector<std::string>>();
      for (const auto& ej : cj.at("edits")) {
        EditScores e;
        e.image_id = ej.at("image").get<std::string>();
        auto tag = parse_edit_tag(ej.at("tag").get<std::string>());
        if (!tag) schema("unknown edit tag");
        e.tag = *tag;
        const json& scores = ej.at("scores");
        for (const auto& name : r.metrics) {
          auto it = scores.find(name);
          e.scores.push_back(it == scores.end() ? ScoreValue{} : score_from_json(*it));
        }
        c.edits.push_back(std::move(e));
      }
      r.cases.push_back(std::move(c));
    }
    return r;
  } catch (const json::exception& e) {
    schema(e.what());
  }
}

std::string render_tabular(const ScoreReport& report) {
  return tabular_header(false) + tabular_rows(report, "");
}

void write_report(const ScoreReport& report, const fs::path& path, ReportFormat format) {
  if (format == ReportFormat::structured) {
    write_text(path, report_to_json(report).dump(2) + '\n');
  } else {
    write_text(path, render_tabular(report));
  }
}

ScoreReport read_report(const fs::path& path) { return report_from_json(read_json_file(path)); }

json ablation_to_json(std::span<const AblationCell> cells) {
  json arr = json::array();
  for (const auto& c : cells) {
    json cj{{"label", c.label},
            {"fitter", std::string(to_string(c.fitter))},
            {"weighting", c.weighting},
            {"error", c.error}};
    cj["report"] = c.report ? report_to_json(*c.report) : json(nullptr);
    arr.push_back(std::move(cj));
  }
  return json{{"schema_version", kReportSchemaVersion}, {"cells", std::move(arr)}};
}

std::vector<AblationCell> ablation_from_json(const json& j) {
  try {
    if (j.value("schema_version", 0) != kReportSchemaVersion) schema("unsupported schema_version");
    std::vector<AblationCell> cells;
    for (const auto& cj : j.at("cells")) {
      AblationCell c;
      c.label = cj.at("label").get<std::string>();
      auto f = parse_fitter(cj.at("fitter").get<std::string>());
      if (!f) schema("unknown fitter");
      c.fitter = *f;
      c.weighting = cj.at("weighting").get<bool>();
      c.error = cj.at("error").get<std::string>();
      if (!cj.at("report").is_null()) c.report = report_from_json(cj["report"]);
      cells.push_back(std::move(c));
    }
    return cells;
  } catch (const json::exception& e) {
    schema(e.what());
  }
}

void write_ablation(std::span<const AblationCell> cells, const fs::path& path,
                    ReportFormat format) {
  if (format == ReportFormat::structured) {
    write_text(path, ablation_to_json(cells).dump(2) + '\n');
    return;
  }
  std::string text = tabular_header(true);
  for (const auto& c : cells) {
    if (c.report) text += tabular_rows(*c.report, c.label + '\t');
  }
  write_text(path, text);
}

std::vector<AblationCell> read_ablation(const fs::path& path) {
  return ablation_from_json(read_json_file(path));
}

std::string format_aggregate_table(const ScoreReport& report) {
  std::ostringstream ss;
  ss << std::left << std::setw(34) << "metric" << std::setw(10) << "s_align" << std::setw(8)
     << "n" << std::setw(10) << "acc_both" << std::setw(8) << "n" << "excluded\n";
  for (const auto& name : report.metrics) {
    const auto it = report.aggregates.find(name);
    if (it == report.aggregates.end()) continue;
    const MetricAggregate& a = it->second;
    ss << std::setw(34) << name << std::setw(10) << fixed(a.s_align) << std::setw(8)
       << a.s_align_cases << std::setw(10) << fixed(a.acc_both) << std::setw(8)
       << a.acc_both_cases << (a.s_align_excluded + a.acc_both_excluded) << '\n';
  }
  ss << "cases: " << report.cases.size() << ", fitted: " << report.fitted_cases
     << ", misclassification mean: " << fixed(report.misclassification_mean) << '\n';
  return ss.str();
}

std::string format_ablation_table(std::span<const AblationCell> cells) {
  std::vector<std::string> metrics;
  for (const auto& c : cells) {
    if (!c.report) continue;
    for (const auto& m : c.report->metrics) {
      if (std::find(metrics.begin(), metrics.end(), m) == metrics.end()) metrics.push_back(m);
    }
  }
  std::ostringstream ss;
  ss << std::left << std::setw(20) << "cell" << std::setw(10) << "misclass";
  for (const auto& m : metrics) ss << "  " << m << " (s_align/acc_both)";
  ss << '\n';
  for (const auto& c : cells) {
    ss << std::setw(20) << c.label;
    if (!c.report) {
      ss << "error: " << c.error << '\n';
      continue;
    }
    ss << std::setw(10) << fixed(c.report->misclassification_mean);
    for (const auto& m : metrics) {
      auto it = c.report->aggregates.find(m);
      const MetricAggregate a = it == c.report->aggregates.end() ? MetricAggregate{} : it->second;
      ss << "  " << fixed(a.s_align) << '/' << fixed(a.acc_both);
    }
    ss << '\n';
  }
  return ss.str();
}

}  // namespace augclip
