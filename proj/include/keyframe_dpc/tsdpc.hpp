#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "keyframe_dpc/dpc.hpp"
#include "keyframe_dpc/feature_matrix.hpp"

namespace kfdpc::tsdpc {

/// Half-open frame range [start, end).
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SegmentSpec {
  std::size_t total_frames = 0;
  std::vector<Segment> segments;

  std::size_t k() const { return segments.size(); }
};

struct SegmentKeyFrames {
  Segment range;
  std::size_t n_c = 0;
  std::vector<std::size_t> indices;  // global frame indices

  friend bool operator==(const SegmentKeyFrames&, const SegmentKeyFrames&) = default;
};

struct KeyFrameSet {
  std::size_t total_frames = 0;
  std::vector<SegmentKeyFrames> segments;
  std::vector<std::size_t> indices;  // strictly increasing

  friend bool operator==(const KeyFrameSet&, const KeyFrameSet&) = default;
};

struct Extraction {
  KeyFrameSet key_frames;
  std::vector<dpc::DecisionGraph> graphs;  // one per segment, segment-local indices
  std::vector<double> cutoffs;             // d_c used per segment (0 for degenerate)
};

/// K' = min(k, n_frames) contiguous segments; the first n_frames mod K'
/// segments are one frame longer.
SegmentSpec segment_video(std::size_t n_frames, std::size_t k);

/// Runs density peaks clustering independently in every segment and merges
/// the centers. A segment with one frame or only identical rows contributes
/// its median frame. Segments are processed on up to `threads` workers.
Extraction extract_key_frames(const FeatureMatrix& features, const SegmentSpec& spec,
                              const dpc::DpcConfig& config, unsigned threads = 1);

inline constexpr std::size_t kDefaultSegments = 3;

/// extract_key_frames(features, segment_video(N, k), config).key_frames
KeyFrameSet summarize(const FeatureMatrix& features, const dpc::DpcConfig& config = {},
                      std::size_t k = kDefaultSegments, unsigned threads = 1);

nlohmann::ordered_json to_json(const KeyFrameSet& key_frames);
KeyFrameSet key_frame_set_from_json(const nlohmann::json& json);

/// Serialized form with a trailing newline.
std::string dump(const KeyFrameSet& key_frames);

}  // namespace kfdpc::tsdpc
