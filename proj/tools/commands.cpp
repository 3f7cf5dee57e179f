#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>

#include "augclip/augmentation.hpp"
#include "augclip/embedding_store.hpp"
#include "augclip/harness.hpp"
#include "augclip/http.hpp"
#include "augclip/manifest.hpp"
#include "augclip/remote_encoder.hpp"
#include "augclip/report.hpp"
#include "augclip/synthetic.hpp"

namespace augclip::cli {

namespace fs = std::filesystem;

namespace {

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing ") + what);
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

void require_parent(const std::string& path) {
  if (path.empty()) return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError("output directory does not exist: " + parent.string());
  }
}

StoreFormat store_format_for(const std::string& path) {
  const auto ext = fs::path(path).extension();
  return ext == ".bin" || ext == ".agcs" ? StoreFormat::binary : StoreFormat::text;
}

bool any_score(const CaseScores& c) {
  for (const auto& e : c.edits) {
    for (const auto& s : e.scores) {
      if (s.ok()) return true;
    }
  }
  return false;
}

nlohmann::json report_config(const RunConfig& cfg, const nlohmann::json& harness) {
  return nlohmann::json{{"run", to_json(cfg, true)}, {"harness", harness}};
}

HarnessConfig load_harness(const RunConfig& cfg) {
  HarnessConfig h = harness_config(cfg);
  if (!cfg.external_scores.empty()) h.external = load_external_scores(cfg.external_scores);
  return h;
}

}  // namespace

void validate_paths(const RunConfig& cfg) {
  const std::string& sub = cfg.subcommand;
  if (sub == "describe") {
    require_file(cfg.manifest, "--manifest");
    require_parent(cfg.output);
  } else if (sub == "embed") {
    require_file(cfg.manifest, "--manifest");
    if (cfg.encoder.base_url.empty()) throw UsageError("missing --encoder-url");
    if (cfg.store.empty() && cfg.output.empty()) throw UsageError("missing --store or --output");
    require_parent(cfg.output.empty() ? cfg.store : cfg.output);
  } else if (sub == "score" || sub == "ablate") {
    require_file(cfg.manifest, "--manifest");
    require_file(cfg.store, "--store");
    if (!cfg.external_scores.empty()) require_file(cfg.external_scores, "--external-scores");
    require_parent(cfg.output);
  } else if (sub == "evaluate") {
    require_file(cfg.report, "--report");
    require_parent(cfg.output);
  } else if (sub == "synth") {
    if (cfg.output.empty()) throw UsageError("missing --output directory");
  }
}

int cmd_describe(const RunConfig& cfg) {
  Manifest m = load_manifest(cfg.manifest);
  const fs::path out_path = !cfg.output.empty()            ? fs::path(cfg.output)
                            : m.descriptions_file.has_value() ? *m.descriptions_file
                                                              : m.base_dir / "descriptions.json";
  const fs::path cache_dir =
      cfg.cache_dir.empty() ? m.base_dir / ".augclip-cache" : fs::path(cfg.cache_dir);
  DescriptionCache cache(cache_dir);
  HttpChatClient client(cfg.mllm);

  struct Task {
    std::size_t case_index;
    std::string set_id;
    DescriptionRequest request;
    std::string setup_error;
  };
  std::vector<Task> tasks;
  std::set<std::string> queued;
  auto payload = [&](const std::string& id, EmbeddingKind kind) -> std::optional<std::string> {
    auto it = m.payloads.find(id);
    if (it == m.payloads.end() || it->second.kind != kind) return std::nullopt;
    return it->second.ref;
  };
  for (std::size_t i = 0; i < m.cases.size(); ++i) {
    const CaseRecord& c = m.cases[i];
    for (Role role : {Role::source, Role::target}) {
      const std::string& set_id =
          role == Role::source ? c.source_attributes_id : c.target_attributes_id;
      if (m.attribute_sets.count(set_id) || !queued.insert(set_id).second) continue;
      Task t{i, set_id, {}, {}};
      t.request.role = role;
      t.request.length = cfg.length;
      t.request.count = cfg.count;
      if (role == Role::source) {
        t.request.image_ref = payload(c.source_image_id, EmbeddingKind::image);
        if (!t.request.image_ref) t.setup_error = "no image payload for " + c.source_image_id;
      } else {
        t.request.source_text = payload(c.source_text_id, EmbeddingKind::text);
        t.request.target_text = payload(c.target_text_id, EmbeddingKind::text);
        if (!t.request.source_text || !t.request.target_text) {
          t.setup_error = "no text payloads for " + c.source_text_id + " / " + c.target_text_id;
        }
      }
      tasks.push_back(std::move(t));
    }
  }

  std::vector<std::optional<AttributeSet>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  http::run_bounded(tasks.size(), cfg.mllm.max_concurrent, [&](std::size_t k) {
    if (!tasks[k].setup_error.empty()) {
      errors[k] = tasks[k].setup_error;
      return;
    }
    try {
      results[k] = generate_descriptions(tasks[k].request, client, cfg.mllm, &cache);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });

  std::vector<bool> case_failed(m.cases.size(), false);
  std::vector<bool> case_touched(m.cases.size(), false);
  AttributeCatalog catalog = m.attribute_sets;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    case_touched[tasks[k].case_index] = true;
    if (results[k]) {
      catalog.emplace(tasks[k].set_id, std::move(*results[k]));
    } else {
      case_failed[tasks[k].case_index] = true;
      std::cerr << "describe: " << m.cases[tasks[k].case_index].case_id << " ("
                << tasks[k].set_id << "): " << errors[k] << '\n';
    }
  }
  std::size_t touched = 0, failed = 0;
  for (std::size_t i = 0; i < m.cases.size(); ++i) {
    touched += case_touched[i];
    failed += case_touched[i] && case_failed[i];
  }
  write_descriptions(catalog, out_path);
  std::cout << "described " << (touched - failed) << " of " << touched << " cases needing sets ("
            << tasks.size() << " sets requested); wrote " << out_path.string() << '\n';
  return touched > 0 && failed == touched ? kExitRuntime : kExitOk;
}

int cmd_embed(const RunConfig& cfg) {
  Manifest m = load_manifest(cfg.manifest);
  const std::string out_path = cfg.output.empty() ? cfg.store : cfg.output;
  EmbeddingStore store;
  if (!cfg.store.empty() && fs::exists(cfg.store)) store = load_store(cfg.store);

  std::vector<EncodeItem> items;
  std::vector<EncoderErrorRecord> missing;
  std::set<std::string> seen;
  auto want = [&](const std::string& id, std::optional<EncodeItem> item) {
    if (store.contains(id) || !seen.insert(id).second) return;
    if (item) items.push_back(std::move(*item));
    else missing.push_back({id, "no payload"});
  };
  auto from_payload = [&](const std::string& id) -> std::optional<EncodeItem> {
    auto it = m.payloads.find(id);
    if (it == m.payloads.end()) return std::nullopt;
    return EncodeItem{id, it->second.kind, it->second.ref};
  };
  for (const auto& c : m.cases) {
    for (const auto* id : {&c.source_image_id, &c.source_text_id, &c.target_text_id}) {
      want(*id, from_payload(*id));
    }
    for (const auto& e : c.edited) want(e.image_id, from_payload(e.image_id));
    for (const auto* sid : {&c.source_attributes_id, &c.target_attributes_id}) {
      auto it = m.attribute_sets.find(*sid);
      if (it == m.attribute_sets.end()) continue;
      for (const auto& d : it->second.descriptions) {
        want(d, EncodeItem{d, EmbeddingKind::text, d});
      }
    }
  }

  EncoderEndpointConfig enc = cfg.encoder;
  if (const char* tok = std::getenv(cfg.encoder_token_env.c_str()); tok && *tok) {
    enc.auth_token = tok;
  }
  std::size_t encoded = 0;
  std::vector<EncoderErrorRecord> errors = missing;
  if (!items.empty()) {
    EncodeResult result = encode_remote(items, enc, enc.base_url);
    encoded = result.store.size();
    errors.insert(errors.end(), result.errors.begin(), result.errors.end());
    if (store.empty() && store.provenance().empty()) store.set_provenance(result.store.provenance());
    merge_into(store, result.store);
  }
  for (const auto& e : errors) std::cerr << "embed: " << e.id << ": " << e.message << '\n';
  emit_store(store, out_path, store_format_for(out_path));
  std::cout << "encoded " << encoded << " of " << (items.size() + missing.size())
            << " new items; store has " << store.size() << " entries; wrote " << out_path << '\n';
  const bool needed = !items.empty() || !missing.empty();
  return needed && encoded == 0 ? kExitRuntime : kExitOk;
}

int cmd_score(const RunConfig& cfg) {
  const EmbeddingStore store = load_store(cfg.store);
  const Manifest m = load_manifest(cfg.manifest, store);
  const HarnessConfig h = load_harness(cfg);
  ScoreReport report = score_dataset(m, store, h);
  report.label = m.name;
  report.config = report_config(cfg, report.config);
  if (!cfg.output.empty()) write_report(report, cfg.output, cfg.format);
  std::cout << format_aggregate_table(report);
  const bool scored = std::any_of(report.cases.begin(), report.cases.end(), any_score);
  if (!scored) {
    std::cerr << "score: no case produced a score\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg) {
  ScoreReport report = read_report(cfg.report);
  compute_aggregates(report);
  if (!cfg.output.empty()) write_report(report, cfg.output, cfg.format);
  std::cout << format_aggregate_table(report);
  return kExitOk;
}

int cmd_ablate(const RunConfig& cfg) {
  const EmbeddingStore store = load_store(cfg.store);
  const Manifest m = load_manifest(cfg.manifest, store);
  if (m.cases.empty()) throw Error(ErrorCode::EmptySet, "dataset has no cases");
  const HarnessConfig h = load_harness(cfg);
  std::vector<AblationCell> cells = ablation_run(m, store, h, cfg.fitters, cfg.weightings);
  for (auto& c : cells) {
    if (c.report) c.report->config = report_config(cfg, c.report->config);
  }
  if (!cfg.output.empty()) write_ablation(cells, cfg.output, cfg.format);
  std::cout << format_ablation_table(cells);
  const bool any_ok = std::any_of(cells.begin(), cells.end(),
                                  [](const auto& c) { return c.report.has_value(); });
  return any_ok ? kExitOk : kExitRuntime;
}

int cmd_synth(const RunConfig& cfg) {
  SyntheticConfig s = cfg.synth;
  const HarnessConfig h = harness_config(cfg);
  s.fitter = h.fitter;
  s.weighting = h.weighting;
  s.weighting_cfg = h.weighting_cfg;
  s.fit = h.fit;
  const SyntheticDataset data = make_synthetic_dataset(s);
  write_dataset(data, cfg.output);
  std::cout << "wrote " << data.manifest.cases.size() << " cases (" << data.store.size()
            << " embeddings) to " << cfg.output << '\n';
  return kExitOk;
}

int dispatch(const RunConfig& cfg) {
  const std::string& sub = cfg.subcommand;
  if (sub == "describe") return cmd_describe(cfg);
  if (sub == "embed") return cmd_embed(cfg);
  if (sub == "score") return cmd_score(cfg);
  if (sub == "evaluate") return cmd_evaluate(cfg);
  if (sub == "ablate") return cmd_ablate(cfg);
  if (sub == "synth") return cmd_synth(cfg);
  throw UsageError("unknown subcommand " + sub);
}

}  // namespace augclip::cli
