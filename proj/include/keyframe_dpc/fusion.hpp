#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "keyframe_dpc/lstm.hpp"

namespace kfdpc::fusion {

/// Intermediate and final values of the rate-to-weight mapping.
struct FusionWeights {
  std::vector<double> rates;
  std::vector<double> t0;
  std::vector<double> t1;
  std::vector<double> t2;
  std::vector<int> w;
};

/// Maps per-input accuracy percentages to integer weights:
///   t0 = (r - min r) / ((100 - min r) / 10)
///   t1 = round(t0)
///   t2 = t0 (max t1 - 1) / max t0 + 1
///   w  = round(t2)
/// with round-half-up. All-equal rates or max t1 <= 1 give all-ones weights.
FusionWeights compute_fusion_weights(std::span<const double> rates);

/// (sum_i w_i R_V,i) / (sum_i w_i).
std::vector<double> weighted_combine(std::span<const std::vector<double>> video_predictions,
                                     std::span<const int> weights);
std::vector<double> weighted_combine(std::span<const classify::PredictionMatrix> predictions,
                                     const FusionWeights& weights);

/// 1 - n_key / n_total; requires 1 <= n_key <= n_total.
double compression_ratio(std::size_t n_key, std::size_t n_total);

struct SummaryStats {
  std::size_t total_frames = 0;
  std::size_t key_frames = 0;
  double compression_ratio = 0.0;
  double extraction_ms = 0.0;
};

SummaryStats summary_stats(std::size_t key_frames, std::size_t total_frames,
                           double extraction_ms);

nlohmann::ordered_json to_json(const SummaryStats& stats);
nlohmann::ordered_json to_json(const FusionWeights& weights);

}  // namespace kfdpc::fusion
