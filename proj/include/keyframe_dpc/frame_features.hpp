#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "keyframe_dpc/feature_matrix.hpp"

namespace kfdpc::features {

/// 8-bit raster with interleaved channels.
struct Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;
  std::vector<std::uint8_t> samples;  // width * height * channels

  std::uint8_t sample(std::uint32_t x, std::uint32_t y, std::uint32_t c) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

struct FrameSequence {
  std::vector<Image> frames;
  std::string source_id;

  /// Throws FormatError unless the sequence is non-empty and every frame has
  /// the same geometry with a consistent sample buffer.
  void validate() const;
};

/// Per-channel histogram with `bins` uniform bins over [0, 256). Each
/// channel's bins are normalized to sum to 1. Grayscale frames count as
/// R = G = B.
struct ColorHistogram {
  unsigned bins = 8;
};

/// Mean luminance over a grid_width x grid_height grid of pixel blocks.
struct DownsampledLuminance {
  unsigned grid_width = 16;
  unsigned grid_height = 16;
};

/// One feature per pixel: its luminance.
struct IdentityLuminance {};

using Extractor = std::variant<ColorHistogram, DownsampledLuminance, IdentityLuminance>;

/// Parses "color-histogram[:B]", "downsampled-luminance[:WxH]" or
/// "identity-luminance". Throws InvalidArgument on anything else.
Extractor parse_extractor(std::string_view text);

/// Stable identifier written into FeatureMatrix::extractor_tag.
std::string extractor_tag(const Extractor& extractor);

/// Rec. 601 luma of one pixel; grayscale pixels map to their own value.
double luminance(const Image& image, std::uint32_t x, std::uint32_t y);

std::vector<double> extract_frame(const Image& frame, const Extractor& extractor);

/// One row per frame, in frame order. Frames are processed on up to
/// `threads` workers; the output does not depend on the thread count.
FeatureMatrix extract_features(const FrameSequence& sequence, const Extractor& extractor,
                               unsigned threads = 1);

}  // namespace kfdpc::features
