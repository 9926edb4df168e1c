#include "keyframe_dpc/tsdpc.hpp"

#include <gtest/gtest.h>

#include <random>

#include "keyframe_dpc/error.hpp"
#include "support/dpc_oracle.hpp"
#include "support/fixtures.hpp"

using namespace kfdpc;
using namespace kfdpc::tsdpc;

TEST(Segmentation, ExactDivision) {
  auto s = segment_video(9, 3);
  EXPECT_EQ(s.segments, (std::vector<Segment>{{0, 3}, {3, 6}, {6, 9}}));
}

TEST(Segmentation, RemainderGoesToEarliestSegments) {
  auto s = segment_video(10, 3);
  EXPECT_EQ(s.segments, (std::vector<Segment>{{0, 4}, {4, 7}, {7, 10}}));
}

TEST(Segmentation, MoreSegmentsThanFrames) {
  auto s = segment_video(2, 3);
  EXPECT_EQ(s.segments, (std::vector<Segment>{{0, 1}, {1, 2}}));
}

TEST(Segmentation, InvariantsHoldForManySizes) {
  for (std::size_t n = 1; n < 60; ++n) {
    for (std::size_t k = 1; k < 12; ++k) {
      auto s = segment_video(n, k);
      ASSERT_EQ(s.k(), std::min(n, k));
      std::size_t start = 0, shortest = n, longest = 0;
      for (auto& seg : s.segments) {
        EXPECT_EQ(seg.start, start);
        EXPECT_GT(seg.length(), 0u);
        shortest = std::min(shortest, seg.length());
        longest = std::max(longest, seg.length());
        start = seg.end;
      }
      EXPECT_EQ(start, n);
      EXPECT_LE(longest - shortest, 1u);
    }
  }
  EXPECT_THROW(segment_video(0, 3), InvalidArgument);
  EXPECT_THROW(segment_video(3, 0), InvalidArgument);
}

TEST(KeyFrames, IdenticalFramesReturnMedian) {
  FeatureMatrix m(3, 2, {1, 1, 1, 1, 1, 1});
  auto e = extract_key_frames(m, segment_video(3, 1), {});
  EXPECT_EQ(e.key_frames.indices, std::vector<std::size_t>{1});
  EXPECT_EQ(e.key_frames.segments[0].n_c, 1u);
  ASSERT_EQ(e.graphs.size(), 1u);
  EXPECT_EQ(e.graphs[0].gamma, (std::vector<double>{0, 0, 0}));
}

TEST(KeyFrames, PlantedClustersMatchOracle) {
  const std::vector<std::vector<double>> pts{{0}, {0.1}, {0.2}, {10}, {10.1}, {10.2}};
  dpc::DpcConfig cfg;
  cfg.n_c_override = 2;
  auto e = extract_key_frames(fixtures::to_matrix(pts), segment_video(6, 1), cfg);
  const auto& idx = e.key_frames.indices;
  ASSERT_EQ(idx.size(), 2u);
  EXPECT_LE(idx[0], 2u);
  EXPECT_GE(idx[1], 3u);
  EXPECT_EQ(idx, oracle::run(pts, 0.2, true, false, 2).centers);
}

TEST(KeyFrames, ThreeSegmentsEachContribute) {
  std::mt19937_64 rng(1);
  auto m = fixtures::to_matrix(fixtures::random_points(31, 4, rng));
  auto e = extract_key_frames(m, segment_video(31, 3), {});
  ASSERT_EQ(e.key_frames.segments.size(), 3u);
  std::size_t total = 0;
  for (const auto& seg : e.key_frames.segments) {
    ASSERT_GE(seg.indices.size(), 1u);
    EXPECT_EQ(seg.indices.size(), seg.n_c);
    EXPECT_LE(seg.n_c, (seg.range.length() + 3) / 4);
    for (auto i : seg.indices) {
      EXPECT_GE(i, seg.range.start);
      EXPECT_LT(i, seg.range.end);
    }
    total += seg.n_c;
  }
  EXPECT_EQ(total, e.key_frames.indices.size());
  EXPECT_TRUE(std::is_sorted(e.key_frames.indices.begin(), e.key_frames.indices.end()));
}

TEST(KeyFrames, RowCountMismatchIsRejected) {
  FeatureMatrix m(4, 1, {1, 2, 3, 4});
  EXPECT_THROW(extract_key_frames(m, segment_video(5, 2), {}), FormatError);
}

TEST(KeyFrames, OverrideClampedToShortSegments) {
  FeatureMatrix m(4, 1, {1, 2, 5, 9});
  dpc::DpcConfig cfg;
  cfg.n_c_override = 3;
  auto set = summarize(m, cfg, 2);
  EXPECT_EQ(set.indices, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(KeyFrames, SegmentsAreIndependent) {
  std::mt19937_64 rng(8);
  auto pts = fixtures::random_points(36, 3, rng);
  auto spec = segment_video(36, 3);
  auto before = extract_key_frames(fixtures::to_matrix(pts), spec, {});
  // Mutate only the middle segment.
  for (std::size_t i = spec.segments[1].start; i < spec.segments[1].end; ++i) pts[i][0] += 5.0 * static_cast<double>(i % 3);
  auto after = extract_key_frames(fixtures::to_matrix(pts), spec, {});
  for (std::size_t s : {0u, 2u}) {
    EXPECT_EQ(before.graphs[s].rho, after.graphs[s].rho);
    EXPECT_EQ(before.graphs[s].delta, after.graphs[s].delta);
    EXPECT_EQ(before.graphs[s].nhd, after.graphs[s].nhd);
    EXPECT_EQ(before.key_frames.segments[s], after.key_frames.segments[s]);
  }
}

TEST(Summarize, SingleFrame) {
  FeatureMatrix m(1, 3, {1, 2, 3});
  auto set = summarize(m);
  EXPECT_EQ(set.indices, std::vector<std::size_t>{0});
  EXPECT_EQ(set.total_frames, 1u);
}

TEST(Summarize, EqualsComposition) {
  std::mt19937_64 rng(2);
  auto m = fixtures::to_matrix(fixtures::random_points(40, 5, rng));
  dpc::DpcConfig cfg;
  cfg.kernel = dpc::Kernel::cutoff;
  EXPECT_EQ(summarize(m, cfg), extract_key_frames(m, segment_video(40, 3), cfg).key_frames);
  EXPECT_EQ(dump(summarize(m, cfg)), dump(summarize(m, cfg)));
}

TEST(Json, FieldOrderAndRoundTrip) {
  FeatureMatrix m(10, 1, {0, 0.2, 0.1, 5, 5.1, 9, 9.3, 9.1, 2, 2.2});
  auto set = summarize(m);
  const auto text = dump(set);
  EXPECT_EQ(text.find("\"total_frames\""), 4u);
  EXPECT_LT(text.find("\"segments\""), text.rfind("\"indices\""));
  auto back = key_frame_set_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back, set);
  EXPECT_EQ(dump(back), text);
}

TEST(Json, RejectsNonIncreasingIndices) {
  auto json = nlohmann::json::parse(R"({"total_frames":5,"segments":[],"indices":[3,1]})");
  EXPECT_THROW(key_frame_set_from_json(json), FormatError);
  EXPECT_THROW(key_frame_set_from_json(nlohmann::json::parse("{}")), FormatError);
}
