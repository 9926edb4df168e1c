#include "keyframe_dpc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "keyframe_dpc/error.hpp"
#include "keyframe_dpc/rounding.hpp"

namespace kfdpc::fusion {

FusionWeights compute_fusion_weights(std::span<const double> rates) {
  if (rates.empty()) throw InvalidArgument("at least one rate is required");
  for (double r : rates) {
    if (!std::isfinite(r) || r < 0.0 || r > 100.0) {
      throw InvalidArgument("rates must be percentages in [0, 100], got " + std::to_string(r));
    }
  }
  FusionWeights out;
  out.rates.assign(rates.begin(), rates.end());
  const std::size_t n = rates.size();
  const double lowest = *std::min_element(rates.begin(), rates.end());

  out.t0.assign(n, 0.0);
  if (lowest < 100.0) {
    const double scale = (100.0 - lowest) / 10.0;
    for (std::size_t i = 0; i < n; ++i) out.t0[i] = (rates[i] - lowest) / scale;
  }
  out.t1.resize(n);
  std::transform(out.t0.begin(), out.t0.end(), out.t1.begin(), round_half_up);

  const double max_t0 = *std::max_element(out.t0.begin(), out.t0.end());
  const double max_t1 = *std::max_element(out.t1.begin(), out.t1.end());
  if (max_t0 == 0.0 || max_t1 <= 1.0) {
    out.t2.assign(n, 1.0);
    out.w.assign(n, 1);
    return out;
  }
  out.t2.resize(n);
  out.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.t2[i] = out.t0[i] * (max_t1 - 1.0) / max_t0 + 1.0;
    out.w[i] = static_cast<int>(round_half_up(out.t2[i]));
  }
  return out;
}

std::vector<double> weighted_combine(std::span<const std::vector<double>> video_predictions,
                                     std::span<const int> weights) {
  if (video_predictions.empty()) throw InvalidArgument("nothing to combine");
  if (video_predictions.size() != weights.size()) {
    throw InvalidArgument(std::to_string(video_predictions.size()) + " predictions but " +
                          std::to_string(weights.size()) + " weights");
  }
  const std::size_t classes = video_predictions.front().size();
  std::vector<double> combined(classes, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < video_predictions.size(); ++i) {
    if (video_predictions[i].size() != classes) throw FormatError("predictions have different class counts");
    if (weights[i] < 1) throw InvalidArgument("fusion weights must be positive");
    for (std::size_t c = 0; c < classes; ++c) combined[c] += weights[i] * video_predictions[i][c];
    total += weights[i];
  }
  for (auto& v : combined) v /= total;
  return combined;
}

std::vector<double> weighted_combine(std::span<const classify::PredictionMatrix> predictions,
                                     const FusionWeights& weights) {
  std::vector<std::vector<double>> video;
  video.reserve(predictions.size());
  for (const auto& p : predictions) video.push_back(p.video_prediction);
  return weighted_combine(video, weights.w);
}

double compression_ratio(std::size_t n_key, std::size_t n_total) {
  if (n_key < 1 || n_key > n_total) {
    throw InvalidArgument("compression ratio needs 1 <= key frames <= total frames");
  }
  return 1.0 - static_cast<double>(n_key) / static_cast<double>(n_total);
}

SummaryStats summary_stats(std::size_t key_frames, std::size_t total_frames, double extraction_ms) {
  return {total_frames, key_frames, compression_ratio(key_frames, total_frames), extraction_ms};
}

nlohmann::ordered_json to_json(const SummaryStats& stats) {
  nlohmann::ordered_json json;
  json["total_frames"] = stats.total_frames;
  json["key_frames"] = stats.key_frames;
  json["compression_ratio"] = stats.compression_ratio;
  json["extraction_ms"] = stats.extraction_ms;
  return json;
}

nlohmann::ordered_json to_json(const FusionWeights& weights) {
  nlohmann::ordered_json json;
  json["rates"] = weights.rates;
  json["t0"] = weights.t0;
  json["t1"] = weights.t1;
  json["t2"] = weights.t2;
  json["weights"] = weights.w;
  return json;
}

}  // namespace kfdpc::fusion
