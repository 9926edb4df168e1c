#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "keyframe_dpc/feature_matrix.hpp"

namespace fixtures {

inline std::vector<std::vector<double>> random_points(std::size_t n, std::size_t dim, std::mt19937_64& rng,
                                                      double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts)
    for (auto& v : p) v = u(rng);
  return pts;
}

inline kfdpc::FeatureMatrix to_matrix(const std::vector<std::vector<double>>& pts) {
  std::vector<double> flat;
  for (const auto& p : pts) flat.insert(flat.end(), p.begin(), p.end());
  return {pts.size(), pts.front().size(), std::move(flat)};
}

struct PlantedSequence {
  std::vector<std::vector<double>> points;
  std::vector<std::size_t> blob_of;  // blob id per frame
};

/// `blobs` Gaussian blobs laid out contiguously in time. Blob centers sit on
/// scaled axis directions `separation` apart; within-blob spread is `spread`.
inline PlantedSequence planted_blobs(std::size_t blobs, std::size_t dim, double spread, double separation,
                                     std::mt19937_64& rng, std::size_t min_len = 10, std::size_t max_len = 30) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::normal_distribution<double> noise(0.0, spread);
  PlantedSequence seq;
  for (std::size_t b = 0; b < blobs; ++b) {
    std::vector<double> center(dim, 0.0);
    center[b % dim] = separation * static_cast<double>(b / dim + 1);
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p = center;
      for (auto& v : p) v += noise(rng);
      seq.points.push_back(std::move(p));
      seq.blob_of.push_back(b);
    }
  }
  return seq;
}

}  // namespace fixtures
