#include "cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "keyframe_dpc/dpc.hpp"
#include "keyframe_dpc/error.hpp"
#include "keyframe_dpc/feature_io.hpp"
#include "keyframe_dpc/frame_features.hpp"
#include "keyframe_dpc/fusion.hpp"
#include "keyframe_dpc/image_io.hpp"
#include "keyframe_dpc/lstm.hpp"
#include "keyframe_dpc/tsdpc.hpp"

namespace kfdpc::cli {
namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::size_t k_segments = tsdpc::kDefaultSegments;
  double t = 0.2;
  std::string kernel = "gaussian";
  std::string metric = "euclidean";
  std::optional<std::size_t> n_c;
  std::string extractor = "color-histogram:8";
  unsigned threads = 1;

  std::string features;
  std::string frames_dir;
  std::string keyframes;
  std::string params;
  std::string out;
  std::string graph_out;
  std::string stats_out;
  std::string config;
  bool zero_state = false;
  std::vector<double> rates;
  std::vector<std::string> predictions;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto logger = std::make_shared<spdlog::logger>("kfdpc", std::make_shared<spdlog::sinks::ostream_sink_mt>(err));
  logger->set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("KEYFRAME_DPC_LOG")) level = spdlog::level::from_str(env);
  logger->set_level(level);
  return logger;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Flat key=value file; '#' starts a comment line.
std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    entries[std::string(trim(text.substr(0, eq)))] = std::string(trim(text.substr(eq + 1)));
  }
  return entries;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

/// Appends config entries the command line did not already set, so flags
/// take precedence over the file and the file over built-in defaults.
std::vector<std::string> apply_config(const std::vector<std::string>& args, CLI::App& command) {
  const auto path = find_config_path(args);
  if (!path) return args;
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : read_config_file(*path)) {
    const std::string flag = "--" + key;
    if (key == "config") continue;
    if (command.get_option_no_throw(flag) == nullptr) {
      throw UsageError("config key '" + key + "' is not valid for '" + command.get_name() + "'");
    }
    if (flag_given(args, flag)) continue;
    if (key == "zero-state") {
      if (value == "true" || value == "1") merged.push_back(flag);
      continue;
    }
    merged.push_back(flag);
    merged.push_back(value);
  }
  return merged;
}

dpc::DpcConfig dpc_config(const RunConfig& cfg) {
  dpc::DpcConfig c;
  c.t = cfg.t;
  c.kernel = dpc::parse_kernel(cfg.kernel);
  c.metric = dpc::parse_metric(cfg.metric);
  c.n_c_override = cfg.n_c;
  c.validate();
  return c;
}

FeatureMatrix load_input(const RunConfig& cfg, spdlog::logger& log) {
  if (!cfg.features.empty() && !cfg.frames_dir.empty()) throw UsageError("use only one of --features and --frames-dir");
  if (!cfg.features.empty()) {
    const auto format = features::sniff_feature_format(cfg.features);
    auto m = features::import_features(cfg.features, format);
    log.info("loaded {}x{} features from {}", m.rows(), m.cols(), cfg.features);
    return m;
  }
  if (!cfg.frames_dir.empty()) {
    const auto extractor = features::parse_extractor(cfg.extractor);
    const auto seq = features::load_frame_directory(cfg.frames_dir);
    log.info("loaded {} frames from {}", seq.frames.size(), cfg.frames_dir);
    return features::extract_features(seq, extractor, cfg.threads);
  }
  throw UsageError("one of --features or --frames-dir is required");
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write " + path);
  file << text;
  if (!file) throw Error("write failed for " + path);
}

void write_graphs(const std::string& dir, const tsdpc::Extraction& extraction) {
  fs::create_directories(dir);
  for (std::size_t s = 0; s < extraction.graphs.size(); ++s) {
    std::ostringstream csv;
    dpc::write_decision_graph_csv(csv, extraction.graphs[s], extraction.key_frames.segments[s].range.start);
    emit((fs::path(dir) / ("segment_" + std::to_string(s) + ".csv")).string(), csv.str(), std::cout);
  }
}

struct TimedExtraction {
  tsdpc::Extraction extraction;
  double elapsed_ms = 0.0;
};

TimedExtraction run_extraction(const FeatureMatrix& features, const RunConfig& cfg, spdlog::logger& log) {
  const auto config = dpc_config(cfg);
  if (cfg.k_segments == 0) throw UsageError("--k must be positive");
  const auto start = std::chrono::steady_clock::now();
  auto extraction =
      tsdpc::extract_key_frames(features, tsdpc::segment_video(features.rows(), cfg.k_segments), config, cfg.threads);
  const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
  log.info("selected {} of {} frames in {:.3f} ms", extraction.key_frames.indices.size(), features.rows(),
           elapsed.count());
  return {std::move(extraction), elapsed.count()};
}

std::string stats_json(const tsdpc::KeyFrameSet& set, double elapsed_ms) {
  return fusion::to_json(fusion::summary_stats(set.indices.size(), set.total_frames, elapsed_ms)).dump(2) + "\n";
}

void add_input_options(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--features", cfg.features, "Feature file (CSV or FMTX binary)");
  cmd.add_option("--frames-dir", cfg.frames_dir, "Directory of .ppm/.png frames, read in filename order");
  cmd.add_option("--extractor", cfg.extractor,
                 "color-histogram[:B] | downsampled-luminance[:WxH] | identity-luminance")
      ->capture_default_str();
  cmd.add_option("--threads", cfg.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_dpc_options(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--k", cfg.k_segments, "Number of temporal segments")->capture_default_str();
  cmd.add_option("--t", cfg.t, "Cutoff quantile in (0, 1]")->capture_default_str();
  cmd.add_option("--kernel", cfg.kernel, "gaussian | cutoff")->capture_default_str();
  cmd.add_option("--metric", cfg.metric, "euclidean | cosine")->capture_default_str();
  cmd.add_option("--n-c", cfg.n_c, "Fixed number of centers per segment (default: automatic)");
}

void add_common(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--config", cfg.config, "Flat key=value file; command-line flags take precedence");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  RunConfig cfg;

  CLI::App app{"Key frame extraction with temporal segment density peaks clustering", "keyframe-dpc"};
  app.require_subcommand(1);

  auto* extract = app.add_subcommand("extract", "Select key frames and write the key frame set");
  add_input_options(*extract, cfg);
  add_dpc_options(*extract, cfg);
  extract->add_option("--out", cfg.out, "Key frame JSON output (default stdout)");
  extract->add_option("--graph-out", cfg.graph_out, "Directory for per-segment decision graph CSVs");
  extract->add_option("--stats-out", cfg.stats_out, "Summary statistics JSON output");
  add_common(*extract, cfg);

  auto* graph = app.add_subcommand("decision-graph", "Write per-segment decision graphs as CSV");
  add_input_options(*graph, cfg);
  add_dpc_options(*graph, cfg);
  graph->add_option("--out,--graph-out", cfg.graph_out, "Output directory")->required();
  add_common(*graph, cfg);

  auto* classify_cmd = app.add_subcommand("classify", "Score key frames with an LSTM and average the predictions");
  add_input_options(*classify_cmd, cfg);
  add_dpc_options(*classify_cmd, cfg);
  classify_cmd->add_option("--params", cfg.params, "LSTM parameter file")->required();
  classify_cmd->add_option("--keyframes", cfg.keyframes, "Key frame JSON (default: extract with the DPC flags)");
  classify_cmd->add_flag("--zero-state", cfg.zero_state, "Score every key frame from zero state");
  classify_cmd->add_option("--out", cfg.out, "Prediction JSON output (default stdout)");
  add_common(*classify_cmd, cfg);

  auto* fuse = app.add_subcommand("fuse", "Derive fusion weights from rates and combine predictions");
  fuse->add_option("--rates", cfg.rates, "Per-input accuracy percentages")->required()->delimiter(',');
  fuse->add_option("--predictions", cfg.predictions, "Prediction JSON per input, in rate order")
      ->required()
      ->delimiter(',');
  fuse->add_option("--out", cfg.out, "Fusion JSON output (default stdout)");
  add_common(*fuse, cfg);

  auto* stats = app.add_subcommand("stats", "Report frame counts and compression ratio");
  add_input_options(*stats, cfg);
  add_dpc_options(*stats, cfg);
  stats->add_option("--keyframes", cfg.keyframes, "Key frame JSON (default: extract with the DPC flags)");
  stats->add_option("--out", cfg.out, "Stats JSON output (default stdout)");
  add_common(*stats, cfg);

  try {
    std::vector<std::string> args = raw_args;
    if (!args.empty()) {
      if (auto* command = app.get_subcommand_no_throw(args.front())) args = apply_config(args, *command);
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  }

  try {
    if (extract->parsed()) {
      const auto features = load_input(cfg, *log);
      const auto timed = run_extraction(features, cfg, *log);
      const auto& set = timed.extraction.key_frames;
      emit(cfg.out, tsdpc::dump(set), out);
      if (!cfg.graph_out.empty()) write_graphs(cfg.graph_out, timed.extraction);
      if (!cfg.stats_out.empty()) {
        emit(cfg.stats_out, stats_json(set, timed.elapsed_ms), out);
      } else if (!cfg.out.empty() && cfg.out != "-") {
        out << stats_json(set, timed.elapsed_ms);
      }
    } else if (graph->parsed()) {
      const auto features = load_input(cfg, *log);
      write_graphs(cfg.graph_out, run_extraction(features, cfg, *log).extraction);
    } else if (classify_cmd->parsed()) {
      const auto params = classify::load_params(cfg.params);
      params.validate();
      const auto features = load_input(cfg, *log);
      tsdpc::KeyFrameSet set;
      if (!cfg.keyframes.empty()) {
        std::ifstream in(cfg.keyframes);
        if (!in) throw FormatError("cannot open " + cfg.keyframes);
        nlohmann::json json;
        try {
          json = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw FormatError(cfg.keyframes + ": " + e.what());
        }
        set = tsdpc::key_frame_set_from_json(json);
        if (set.total_frames != features.rows()) throw FormatError("key frame set does not match the feature rows");
      } else {
        set = run_extraction(features, cfg, *log).extraction.key_frames;
      }
      const auto mode = cfg.zero_state ? classify::ScoringMode::zero_state : classify::ScoringMode::sequential;
      const auto prediction = classify::classify_video(set, features, params, mode);
      emit(cfg.out, classify::to_json(prediction).dump(2) + "\n", out);
    } else if (fuse->parsed()) {
      if (cfg.rates.size() != cfg.predictions.size()) {
        throw UsageError(std::to_string(cfg.rates.size()) + " rates but " + std::to_string(cfg.predictions.size()) +
                         " prediction files");
      }
      std::vector<classify::PredictionMatrix> predictions;
      for (const auto& path : cfg.predictions) {
        std::ifstream in(path);
        if (!in) throw FormatError("cannot open " + path);
        try {
          predictions.push_back(classify::prediction_from_json(nlohmann::json::parse(in)));
        } catch (const nlohmann::json::exception& e) {
          throw FormatError(path + ": " + e.what());
        }
      }
      const auto weights = fusion::compute_fusion_weights(cfg.rates);
      const auto combined = fusion::weighted_combine(predictions, weights);
      auto json = fusion::to_json(weights);
      json["combined"] = combined;
      json["label"] = classify::argmax(combined);
      emit(cfg.out, json.dump(2) + "\n", out);
    } else if (stats->parsed()) {
      if (!cfg.keyframes.empty()) {
        std::ifstream in(cfg.keyframes);
        if (!in) throw FormatError("cannot open " + cfg.keyframes);
        try {
          const auto set = tsdpc::key_frame_set_from_json(nlohmann::json::parse(in));
          emit(cfg.out, stats_json(set, 0.0), out);
        } catch (const nlohmann::json::exception& e) {
          throw FormatError(cfg.keyframes + ": " + e.what());
        }
      } else {
        const auto features = load_input(cfg, *log);
        const auto timed = run_extraction(features, cfg, *log);
        emit(cfg.out, stats_json(timed.extraction.key_frames, timed.elapsed_ms), out);
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kMalformedInput;
  } catch (const DegenerateInput& e) {
    err << "error: " << e.what() << "\n";
    return kMalformedInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace kfdpc::cli
