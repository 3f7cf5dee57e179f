#include "run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>

namespace augclip::cli {

using nlohmann::json;

const std::vector<OptionSpec>& option_specs() {
  static const std::vector<OptionSpec> specs = {
      {"manifest", Group::dataset, "dataset manifest (JSON)"},
      {"store", Group::dataset, "embedding store (text or binary)"},
      {"output", Group::output, "output path"},
      {"format", Group::output, "structured | tabular"},
      {"report", Group::report, "existing structured report"},
      {"metrics", Group::harness, "comma-separated metric names"},
      {"fitter", Group::harness, "svm | logistic | lda"},
      {"weighting", Group::harness, "on | off"},
      {"include_self", Group::harness, "include the self term in intra-class means (on | off)"},
      {"weight_floor", Group::harness, "lower bound on importance weights"},
      {"c", Group::harness, "soft-margin constant"},
      {"tol", Group::harness, "solver tolerance"},
      {"max_iters", Group::harness, "solver iteration budget"},
      {"ridge", Group::harness, "covariance regularization for lda"},
      {"gamma", Group::harness, "comma-separated gamma values for combined scores"},
      {"workers", Group::harness, "parallel workers (0 = all cores)"},
      {"external_scores", Group::harness, "external preservation scores (TSV)"},
      {"fitters", Group::ablation, "comma-separated fitters for the grid"},
      {"weightings", Group::ablation, "comma-separated on/off values for the grid"},
      {"encoder_url", Group::encoder, "encoder endpoint URL"},
      {"encoder_timeout_ms", Group::encoder, "encoder request timeout"},
      {"encoder_max_concurrent", Group::encoder, "encoder requests in flight"},
      {"encoder_batch_size", Group::encoder, "items per encoder request"},
      {"encoder_token_env", Group::encoder, "environment variable holding the encoder token"},
      {"mllm_url", Group::mllm, "chat endpoint base URL"},
      {"mllm_model", Group::mllm, "model id"},
      {"mllm_temperature", Group::mllm, "sampling temperature"},
      {"mllm_timeout_ms", Group::mllm, "chat request timeout"},
      {"mllm_max_concurrent", Group::mllm, "chat requests in flight"},
      {"mllm_key_env", Group::mllm, "environment variable holding the API key"},
      {"length", Group::mllm, "short | long"},
      {"count", Group::mllm, "free | fixed:<n>"},
      {"cache_dir", Group::mllm, "completion cache directory"},
      {"triplets", Group::synth, "number of triplet cases"},
      {"pairs", Group::synth, "number of 2AFC cases"},
      {"dim", Group::synth, "embedding dimension"},
      {"attributes", Group::synth, "attributes per side"},
      {"sigma", Group::synth, "edit noise per coordinate"},
      {"seed", Group::synth, "random seed"},
  };
  return specs;
}

std::vector<Group> groups_for(std::string_view sub) {
  if (sub == "describe") return {Group::dataset, Group::mllm, Group::output};
  if (sub == "embed") return {Group::dataset, Group::encoder, Group::output};
  if (sub == "score") return {Group::dataset, Group::harness, Group::output};
  if (sub == "evaluate") return {Group::report, Group::output};
  if (sub == "ablate") return {Group::dataset, Group::harness, Group::ablation, Group::output};
  if (sub == "synth") return {Group::synth, Group::harness, Group::output};
  return {};
}

std::string flag_name(std::string_view key) {
  std::string f = "--" + std::string(key);
  std::replace(f.begin(), f.end(), '_', '-');
  return f;
}

std::string env_name(std::string_view key) {
  std::string e = "AUGCLIP_";
  for (char ch : key) e += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return e;
}

namespace {

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view expected) {
  throw UsageError("invalid value \"" + std::string(value) + "\" for " + std::string(key) +
                   " (expected " + std::string(expected) + ")");
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    std::string item(s.substr(start, comma - start));
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(key, v, "a number");
  return out;
}

long long to_int(std::string_view key, std::string_view v, long long lo, long long hi) {
  long long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || out < lo || out > hi) {
    bad(key, v, "an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  bad(key, v, "on or off");
}

Fitter to_fitter(std::string_view key, std::string_view v) {
  auto f = parse_fitter(v);
  if (!f) bad(key, v, "svm, logistic or lda");
  return *f;
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"manifest", [](RunConfig& c, auto, auto v) { c.manifest = v; }},
      {"store", [](RunConfig& c, auto, auto v) { c.store = v; }},
      {"output", [](RunConfig& c, auto, auto v) { c.output = v; }},
      {"report", [](RunConfig& c, auto, auto v) { c.report = v; }},
      {"format",
       [](RunConfig& c, auto k, auto v) {
         auto f = parse_report_format(v);
         if (!f) bad(k, v, "structured or tabular");
         c.format = *f;
       }},
      {"metrics",
       [](RunConfig& c, auto k, auto v) {
         auto names = split_list(v);
         if (names.empty()) bad(k, v, "at least one metric");
         for (const auto& n : names) {
           try {
             (void)parse_metric(n);
           } catch (const Error&) {
             bad(k, n, "a known metric name");
           }
         }
         c.metrics = names;
       }},
      {"fitter", [](RunConfig& c, auto k, auto v) { c.fitter = to_fitter(k, v); }},
      {"weighting", [](RunConfig& c, auto k, auto v) { c.weighting = to_bool(k, v); }},
      {"include_self", [](RunConfig& c, auto k, auto v) { c.include_self = to_bool(k, v); }},
      {"weight_floor",
       [](RunConfig& c, auto k, auto v) {
         c.weight_floor = to_double(k, v);
         if (!(c.weight_floor > 0.0)) bad(k, v, "a positive number");
       }},
      {"c",
       [](RunConfig& c, auto k, auto v) {
         c.c = to_double(k, v);
         if (!(c.c > 0.0)) bad(k, v, "a positive number");
       }},
      {"tol",
       [](RunConfig& c, auto k, auto v) {
         c.tol = to_double(k, v);
         if (!(c.tol > 0.0)) bad(k, v, "a positive number");
       }},
      {"max_iters",
       [](RunConfig& c, auto k, auto v) { c.max_iters = static_cast<int>(to_int(k, v, 1, 100000000)); }},
      {"ridge",
       [](RunConfig& c, auto k, auto v) {
         c.ridge = to_double(k, v);
         if (!(c.ridge > 0.0)) bad(k, v, "a positive number");
       }},
      {"gamma",
       [](RunConfig& c, auto k, auto v) {
         c.gammas.clear();
         for (const auto& g : split_list(v)) {
           const double x = to_double(k, g);
           if (!(x >= 0.0 && x <= 1.0)) bad(k, g, "values in [0, 1]");
           c.gammas.push_back(x);
         }
       }},
      {"workers", [](RunConfig& c, auto k, auto v) { c.workers = static_cast<int>(to_int(k, v, 0, 4096)); }},
      {"external_scores", [](RunConfig& c, auto, auto v) { c.external_scores = v; }},
      {"fitters",
       [](RunConfig& c, auto k, auto v) {
         c.fitters.clear();
         for (const auto& f : split_list(v)) c.fitters.push_back(to_fitter(k, f));
         if (c.fitters.empty()) bad(k, v, "at least one fitter");
       }},
      {"weightings",
       [](RunConfig& c, auto k, auto v) {
         c.weightings.clear();
         for (const auto& w : split_list(v)) c.weightings.push_back(to_bool(k, w));
         if (c.weightings.empty()) bad(k, v, "at least one of on, off");
       }},
      {"encoder_url", [](RunConfig& c, auto, auto v) { c.encoder.base_url = v; }},
      {"encoder_timeout_ms",
       [](RunConfig& c, auto k, auto v) { c.encoder.timeout_ms = static_cast<int>(to_int(k, v, 1, 3600000)); }},
      {"encoder_max_concurrent",
       [](RunConfig& c, auto k, auto v) { c.encoder.max_concurrent = static_cast<int>(to_int(k, v, 1, 256)); }},
      {"encoder_batch_size",
       [](RunConfig& c, auto k, auto v) { c.encoder.batch_size = static_cast<std::size_t>(to_int(k, v, 1, 100000)); }},
      {"encoder_token_env", [](RunConfig& c, auto, auto v) { c.encoder_token_env = v; }},
      {"mllm_url", [](RunConfig& c, auto, auto v) { c.mllm.base_url = v; }},
      {"mllm_model", [](RunConfig& c, auto, auto v) { c.mllm.model = v; }},
      {"mllm_temperature",
       [](RunConfig& c, auto k, auto v) {
         c.mllm.temperature = to_double(k, v);
         if (!(c.mllm.temperature >= 0.0)) bad(k, v, "a nonnegative number");
       }},
      {"mllm_timeout_ms",
       [](RunConfig& c, auto k, auto v) { c.mllm.timeout_ms = static_cast<int>(to_int(k, v, 1, 3600000)); }},
      {"mllm_max_concurrent",
       [](RunConfig& c, auto k, auto v) { c.mllm.max_concurrent = static_cast<int>(to_int(k, v, 1, 256)); }},
      {"mllm_key_env", [](RunConfig& c, auto, auto v) { c.mllm.api_key_env = v; }},
      {"length",
       [](RunConfig& c, auto k, auto v) {
         auto m = parse_length_mode(v);
         if (!m) bad(k, v, "short or long");
         c.length = *m;
       }},
      {"count",
       [](RunConfig& c, auto k, auto v) {
         try {
           c.count = parse_count_mode(v);
         } catch (const Error&) {
           bad(k, v, "free or fixed:<1..64>");
         }
       }},
      {"cache_dir", [](RunConfig& c, auto, auto v) { c.cache_dir = v; }},
      {"triplets",
       [](RunConfig& c, auto k, auto v) { c.synth.triplets = static_cast<std::size_t>(to_int(k, v, 0, 1000000)); }},
      {"pairs",
       [](RunConfig& c, auto k, auto v) { c.synth.two_afc = static_cast<std::size_t>(to_int(k, v, 0, 1000000)); }},
      {"dim", [](RunConfig& c, auto k, auto v) { c.synth.dim = static_cast<std::size_t>(to_int(k, v, 2, 65536)); }},
      {"attributes",
       [](RunConfig& c, auto k, auto v) {
         c.synth.source_attributes = c.synth.target_attributes =
             static_cast<std::size_t>(to_int(k, v, 1, 4096));
       }},
      {"sigma",
       [](RunConfig& c, auto k, auto v) {
         c.synth.sigma = to_double(k, v);
         if (!(c.synth.sigma >= 0.0)) bad(k, v, "a nonnegative number");
       }},
      {"seed",
       [](RunConfig& c, auto k, auto v) {
         c.synth.seed = static_cast<std::uint64_t>(to_int(k, v, 0, std::numeric_limits<long long>::max()));
       }},
  };
  return table;
}

bool in_groups(const OptionSpec& spec, const std::vector<Group>& groups) {
  return std::find(groups.begin(), groups.end(), spec.group) != groups.end();
}

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "on" : "off";
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string out;
    for (const auto& x : v) {
      if (!out.empty()) out += ',';
      out += json_scalar(x);
    }
    return out;
  }
  throw UsageError("config values must be strings, numbers, booleans or arrays");
}

}  // namespace

void apply_option(RunConfig& cfg, std::string_view key, std::string_view value) {
  auto it = setters().find(key);
  if (it == setters().end()) throw UsageError("unknown option " + std::string(key));
  it->second(cfg, key, value);
}

void resolve(RunConfig& cfg, const std::map<std::string, std::string>& flags) {
  const auto groups = groups_for(cfg.subcommand);

  for (const auto& spec : option_specs()) {
    if (!in_groups(spec, groups)) continue;
    if (const char* v = std::getenv(env_name(spec.key).c_str()); v && *v) {
      apply_option(cfg, spec.key, v);
    }
  }

  if (cfg.config_file.empty()) {
    if (const char* v = std::getenv("AUGCLIP_CONFIG"); v && *v) cfg.config_file = v;
  }
  if (!cfg.config_file.empty()) {
    std::ifstream in(cfg.config_file);
    if (!in) throw UsageError("cannot read config file " + cfg.config_file);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError("config file " + cfg.config_file + ": " + e.what());
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
      auto spec = std::find_if(option_specs().begin(), option_specs().end(),
                               [&](const OptionSpec& s) { return s.key == key; });
      if (spec == option_specs().end()) throw UsageError("unknown config key \"" + key + "\"");
      if (in_groups(*spec, groups)) apply_option(cfg, key, json_scalar(value));
    }
  }

  for (const auto& [key, value] : flags) apply_option(cfg, key, value);
}

json to_json(const RunConfig& cfg, bool for_report) {
  const auto groups = groups_for(cfg.subcommand);
  auto has = [&](Group g) { return std::find(groups.begin(), groups.end(), g) != groups.end(); };
  json j;
  j["subcommand"] = cfg.subcommand;
  if (!for_report) {
    j["dry_run"] = cfg.dry_run;
    j["config_file"] = cfg.config_file;
  }
  if (has(Group::dataset)) {
    j["manifest"] = cfg.manifest;
    j["store"] = cfg.store;
  }
  if (has(Group::report)) j["report"] = cfg.report;
  if (has(Group::output) && !for_report) {
    j["output"] = cfg.output;
    j["format"] = std::string(to_string(cfg.format));
  }
  if (has(Group::harness)) {
    j["metrics"] = cfg.metrics;
    j["fitter"] = std::string(to_string(cfg.fitter));
    j["weighting"] = cfg.weighting;
    j["include_self"] = cfg.include_self;
    j["weight_floor"] = cfg.weight_floor;
    j["c"] = cfg.c;
    j["tol"] = cfg.tol;
    j["max_iters"] = cfg.max_iters;
    j["ridge"] = cfg.ridge;
    j["gamma"] = cfg.gammas;
    j["workers"] = cfg.workers;
    j["external_scores"] = cfg.external_scores;
  }
  if (has(Group::ablation)) {
    json f = json::array();
    for (auto x : cfg.fitters) f.push_back(std::string(to_string(x)));
    json w = json::array();
    for (bool x : cfg.weightings) w.push_back(x ? "on" : "off");
    j["fitters"] = f;
    j["weightings"] = w;
  }
  if (has(Group::encoder)) {
    j["encoder_url"] = cfg.encoder.base_url;
    j["encoder_timeout_ms"] = cfg.encoder.timeout_ms;
    j["encoder_max_concurrent"] = cfg.encoder.max_concurrent;
    j["encoder_batch_size"] = cfg.encoder.batch_size;
    j["encoder_token_env"] = cfg.encoder_token_env;
  }
  if (has(Group::mllm)) {
    j["mllm_url"] = cfg.mllm.base_url;
    j["mllm_model"] = cfg.mllm.model;
    j["mllm_temperature"] = cfg.mllm.temperature;
    j["mllm_timeout_ms"] = cfg.mllm.timeout_ms;
    j["mllm_max_concurrent"] = cfg.mllm.max_concurrent;
    j["mllm_key_env"] = cfg.mllm.api_key_env;
    j["length"] = std::string(to_string(cfg.length));
    j["count"] = to_string(cfg.count);
    j["cache_dir"] = cfg.cache_dir;
  }
  if (has(Group::synth)) {
    j["triplets"] = cfg.synth.triplets;
    j["pairs"] = cfg.synth.two_afc;
    j["dim"] = cfg.synth.dim;
    j["attributes"] = cfg.synth.source_attributes;
    j["sigma"] = cfg.synth.sigma;
    j["seed"] = cfg.synth.seed;
  }
  return j;
}

HarnessConfig harness_config(const RunConfig& cfg) {
  HarnessConfig h;
  h.metrics.clear();
  for (const auto& m : cfg.metrics) h.metrics.push_back(parse_metric(m));
  for (double g : cfg.gammas) {
    const MetricId id = MetricId::combined(g);
    if (std::find(h.metrics.begin(), h.metrics.end(), id) == h.metrics.end()) h.metrics.push_back(id);
  }
  h.fitter = cfg.fitter;
  h.weighting = cfg.weighting;
  h.weighting_cfg.include_self = cfg.include_self;
  h.weighting_cfg.floor = cfg.weight_floor;
  h.fit.c = cfg.c;
  h.fit.tol = cfg.tol;
  h.fit.max_iters = cfg.max_iters;
  h.fit.ridge = cfg.ridge;
  h.workers = cfg.workers;
  return h;
}

}  // namespace augclip::cli
