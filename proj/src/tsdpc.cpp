#include "keyframe_dpc/tsdpc.hpp"

#include <algorithm>
#include <string>

#include "keyframe_dpc/error.hpp"
#include "keyframe_dpc/parallel.hpp"

namespace kfdpc::tsdpc {
namespace {

bool all_rows_identical(const FeatureMatrix& features) {
  const auto first = features.row(0);
  for (std::size_t i = 1; i < features.rows(); ++i) {
    const auto r = features.row(i);
    if (!std::equal(first.begin(), first.end(), r.begin())) return false;
  }
  return true;
}

struct SegmentOutcome {
  SegmentKeyFrames key_frames;
  dpc::DecisionGraph graph;
  double cutoff = 0.0;
};

SegmentOutcome process_segment(const FeatureMatrix& features, const Segment& range, const dpc::DpcConfig& config) {
  SegmentOutcome out;
  out.key_frames.range = range;
  const FeatureMatrix local = features.slice_rows(range.start, range.end);
  const auto distances = dpc::compute_distances(local, config.metric);

  if (local.rows() == 1 || all_rows_identical(local)) {
    // Zero pairwise distance everywhere: report a flat graph and the median frame.
    auto& g = out.graph;
    g.rho.assign(local.rows(), 0.0);
    auto delta = dpc::compute_delta(distances, g.rho);
    g.delta = std::move(delta.delta);
    g.nhd = std::move(delta.nhd);
    g.gamma = dpc::compute_gamma(g.rho, g.delta);
    out.key_frames.n_c = 1;
    out.key_frames.indices = {(range.start + range.end - 1) / 2};
    return out;
  }

  auto result = dpc::cluster(distances, config);
  out.graph = std::move(result.graph);
  out.cutoff = result.cutoff;
  out.key_frames.n_c = result.centers.size();
  for (auto c : result.centers) out.key_frames.indices.push_back(range.start + c);
  return out;
}

}  // namespace

SegmentSpec segment_video(std::size_t n_frames, std::size_t k) {
  if (n_frames == 0) throw InvalidArgument("video has no frames");
  if (k == 0) throw InvalidArgument("segment count must be positive");
  const std::size_t segments = std::min(k, n_frames);
  const std::size_t base = n_frames / segments;
  const std::size_t extra = n_frames % segments;
  SegmentSpec spec;
  spec.total_frames = n_frames;
  std::size_t start = 0;
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t len = base + (s < extra ? 1 : 0);
    spec.segments.push_back({start, start + len});
    start += len;
  }
  return spec;
}

Extraction extract_key_frames(const FeatureMatrix& features, const SegmentSpec& spec, const dpc::DpcConfig& config,
                              unsigned threads) {
  config.validate();
  if (features.rows() != spec.total_frames) {
    throw FormatError("feature matrix has " + std::to_string(features.rows()) + " rows but the segmentation covers " +
                      std::to_string(spec.total_frames) + " frames");
  }
  std::size_t expected_start = 0;
  for (const auto& s : spec.segments) {
    if (s.start != expected_start || s.end <= s.start) throw InvalidArgument("segments must be contiguous and non-empty");
    expected_start = s.end;
  }
  if (spec.segments.empty() || expected_start != spec.total_frames) {
    throw InvalidArgument("segments must cover every frame");
  }

  std::vector<SegmentOutcome> outcomes(spec.k());
  parallel_for(spec.k(), threads,
               [&](std::size_t s) { outcomes[s] = process_segment(features, spec.segments[s], config); });

  Extraction extraction;
  extraction.key_frames.total_frames = spec.total_frames;
  for (auto& o : outcomes) {
    extraction.key_frames.indices.insert(extraction.key_frames.indices.end(), o.key_frames.indices.begin(),
                                         o.key_frames.indices.end());
    extraction.key_frames.segments.push_back(std::move(o.key_frames));
    extraction.graphs.push_back(std::move(o.graph));
    extraction.cutoffs.push_back(o.cutoff);
  }
  // Segments are ordered and disjoint, so concatenation is already sorted.
  return extraction;
}

KeyFrameSet summarize(const FeatureMatrix& features, const dpc::DpcConfig& config, std::size_t k, unsigned threads) {
  return extract_key_frames(features, segment_video(features.rows(), k), config, threads).key_frames;
}

nlohmann::ordered_json to_json(const KeyFrameSet& key_frames) {
  nlohmann::ordered_json json;
  json["total_frames"] = key_frames.total_frames;
  auto segments = nlohmann::ordered_json::array();
  for (const auto& s : key_frames.segments) {
    nlohmann::ordered_json seg;
    seg["start"] = s.range.start;
    seg["end"] = s.range.end;
    seg["n_c"] = s.n_c;
    seg["indices"] = s.indices;
    segments.push_back(std::move(seg));
  }
  json["segments"] = std::move(segments);
  json["indices"] = key_frames.indices;
  return json;
}

KeyFrameSet key_frame_set_from_json(const nlohmann::json& json) {
  try {
    KeyFrameSet set;
    set.total_frames = json.at("total_frames").get<std::size_t>();
    for (const auto& seg : json.at("segments")) {
      SegmentKeyFrames s;
      s.range = {seg.at("start").get<std::size_t>(), seg.at("end").get<std::size_t>()};
      s.n_c = seg.at("n_c").get<std::size_t>();
      s.indices = seg.at("indices").get<std::vector<std::size_t>>();
      set.segments.push_back(std::move(s));
    }
    set.indices = json.at("indices").get<std::vector<std::size_t>>();
    for (std::size_t i = 0; i < set.indices.size(); ++i) {
      if (set.indices[i] >= set.total_frames || (i > 0 && set.indices[i] <= set.indices[i - 1])) {
        throw FormatError("key frame indices must be strictly increasing and below total_frames");
      }
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed key frame JSON: ") + e.what());
  }
}

std::string dump(const KeyFrameSet& key_frames) { return to_json(key_frames).dump(2) + "\n"; }

}  // namespace kfdpc::tsdpc
