#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "augclip/augmentation.hpp"
#include "augclip/harness.hpp"
#include "augclip/remote_encoder.hpp"
#include "augclip/report.hpp"
#include "augclip/synthetic.hpp"

namespace augclip::cli {

// Bad flags, bad values, missing input files: exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Group { dataset, harness, output, encoder, mllm, ablation, synth, report };

struct RunConfig {
  std::string subcommand;
  std::string config_file;
  bool dry_run = false;

  std::string manifest;
  std::string store;
  std::string cache_dir;
  std::string output;
  std::string report;
  ReportFormat format = ReportFormat::structured;

  std::vector<std::string> metrics = {"augclip", "clipscore", "preservation_embedding"};
  Fitter fitter = Fitter::svm;
  bool weighting = true;
  bool include_self = true;
  double weight_floor = 1e-3;
  double c = 1.0;
  double tol = 1e-8;
  int max_iters = 10000;
  double ridge = 1e-4;
  std::vector<double> gammas;
  int workers = 0;
  std::string external_scores;

  std::vector<Fitter> fitters = {Fitter::svm, Fitter::lda, Fitter::logistic};
  std::vector<bool> weightings = {true, false};

  EncoderEndpointConfig encoder;
  std::string encoder_token_env = "AUGCLIP_ENCODER_TOKEN";

  MllmConfig mllm;
  LengthMode length = LengthMode::short_form;
  CountMode count;

  SyntheticConfig synth;
};

// Option keys as used in config files; flags are "--" + key with '_' -> '-'
// and environment variables are "AUGCLIP_" + upper-case key.
struct OptionSpec {
  std::string key;
  Group group;
  std::string help;
};

const std::vector<OptionSpec>& option_specs();
std::vector<Group> groups_for(std::string_view subcommand);
std::string flag_name(std::string_view key);
std::string env_name(std::string_view key);

// Parses `value` into the field named by `key`. Throws UsageError.
void apply_option(RunConfig& cfg, std::string_view key, std::string_view value);

// Applies environment, then config file, then explicitly given flags.
// `flags` maps keys to the raw flag values that were present.
void resolve(RunConfig& cfg, const std::map<std::string, std::string>& flags);

// Resolved configuration, secrets excluded. `for_report` drops fields that
// do not influence results (output paths, dry-run).
nlohmann::json to_json(const RunConfig& cfg, bool for_report = false);

HarnessConfig harness_config(const RunConfig& cfg);

}  // namespace augclip::cli
