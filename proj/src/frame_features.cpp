#include "keyframe_dpc/frame_features.hpp"

#include <charconv>
#include <string>

#include "keyframe_dpc/error.hpp"
#include "keyframe_dpc/parallel.hpp"

namespace kfdpc::features {
namespace {

unsigned parse_unsigned(std::string_view text, std::string_view what) {
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value == 0) {
    throw InvalidArgument("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

bool is_color(const Image& image) { return image.channels == 3 || image.channels == 4; }

void check_channels(const Image& image) {
  if (image.channels != 1 && !is_color(image)) {
    throw FormatError("unsupported channel count " + std::to_string(image.channels));
  }
}

std::vector<double> color_histogram(const Image& frame, unsigned bins) {
  std::vector<double> hist(3 * static_cast<std::size_t>(bins), 0.0);
  const std::size_t pixels = static_cast<std::size_t>(frame.width) * frame.height;
  for (std::size_t p = 0; p < pixels; ++p) {
    for (unsigned c = 0; c < 3; ++c) {
      const unsigned v = frame.samples[p * frame.channels + (is_color(frame) ? c : 0)];
      // Uniform bins over [0, 256); v <= 255 keeps the bin below `bins`.
      const unsigned bin = v * bins / 256;
      hist[c * bins + bin] += 1.0;
    }
  }
  for (auto& h : hist) h /= static_cast<double>(pixels);
  return hist;
}

std::vector<double> block_luminance(const Image& frame, unsigned grid_w, unsigned grid_h) {
  if (grid_w > frame.width || grid_h > frame.height) {
    throw InvalidArgument("luminance grid " + std::to_string(grid_w) + "x" + std::to_string(grid_h) +
                          " exceeds frame size " + std::to_string(frame.width) + "x" +
                          std::to_string(frame.height));
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(grid_w) * grid_h);
  for (unsigned gy = 0; gy < grid_h; ++gy) {
    const std::uint32_t y0 = static_cast<std::uint32_t>(std::uint64_t{gy} * frame.height / grid_h);
    const std::uint32_t y1 = static_cast<std::uint32_t>(std::uint64_t{gy + 1} * frame.height / grid_h);
    for (unsigned gx = 0; gx < grid_w; ++gx) {
      const std::uint32_t x0 = static_cast<std::uint32_t>(std::uint64_t{gx} * frame.width / grid_w);
      const std::uint32_t x1 = static_cast<std::uint32_t>(std::uint64_t{gx + 1} * frame.width / grid_w);
      double sum = 0.0;
      for (std::uint32_t y = y0; y < y1; ++y)
        for (std::uint32_t x = x0; x < x1; ++x) sum += luminance(frame, x, y);
      out.push_back(sum / static_cast<double>((y1 - y0) * (x1 - x0)));
    }
  }
  return out;
}

}  // namespace

void FrameSequence::validate() const {
  if (frames.empty()) throw FormatError("frame sequence is empty");
  const Image& first = frames.front();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Image& f = frames[i];
    if (f.width == 0 || f.height == 0) throw FormatError("frame " + std::to_string(i) + " has zero area");
    check_channels(f);
    if (f.width != first.width || f.height != first.height || f.channels != first.channels) {
      throw FormatError("frame " + std::to_string(i) + " geometry differs from frame 0");
    }
    if (f.samples.size() != static_cast<std::size_t>(f.width) * f.height * f.channels) {
      throw FormatError("frame " + std::to_string(i) + " sample buffer has the wrong size");
    }
  }
}

Extractor parse_extractor(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (name == "color-histogram") {
    ColorHistogram e;
    if (!arg.empty()) e.bins = parse_unsigned(arg, "histogram bin count");
    if (e.bins > 256) throw InvalidArgument("histogram bin count must be at most 256");
    return e;
  }
  if (name == "downsampled-luminance") {
    DownsampledLuminance e;
    if (!arg.empty()) {
      const auto x = arg.find('x');
      if (x == std::string_view::npos) throw InvalidArgument("luminance grid must be WxH");
      e.grid_width = parse_unsigned(arg.substr(0, x), "grid width");
      e.grid_height = parse_unsigned(arg.substr(x + 1), "grid height");
    }
    return e;
  }
  if (name == "identity-luminance" && arg.empty()) return IdentityLuminance{};
  throw InvalidArgument("unknown extractor '" + std::string(text) + "'");
}

std::string extractor_tag(const Extractor& extractor) {
  struct Visitor {
    std::string operator()(const ColorHistogram& e) const {
      return "color-histogram:" + std::to_string(e.bins);
    }
    std::string operator()(const DownsampledLuminance& e) const {
      return "downsampled-luminance:" + std::to_string(e.grid_width) + "x" + std::to_string(e.grid_height);
    }
    std::string operator()(const IdentityLuminance&) const { return "identity-luminance"; }
  };
  return std::visit(Visitor{}, extractor);
}

double luminance(const Image& image, std::uint32_t x, std::uint32_t y) {
  if (!is_color(image)) return image.sample(x, y, 0);
  return 0.299 * image.sample(x, y, 0) + 0.587 * image.sample(x, y, 1) + 0.114 * image.sample(x, y, 2);
}

std::vector<double> extract_frame(const Image& frame, const Extractor& extractor) {
  if (frame.width == 0 || frame.height == 0) throw FormatError("zero-area frame");
  check_channels(frame);
  struct Visitor {
    const Image& frame;
    std::vector<double> operator()(const ColorHistogram& e) const {
      if (e.bins == 0) throw InvalidArgument("histogram bin count must be positive");
      return color_histogram(frame, e.bins);
    }
    std::vector<double> operator()(const DownsampledLuminance& e) const {
      if (e.grid_width == 0 || e.grid_height == 0) throw InvalidArgument("luminance grid must be non-empty");
      return block_luminance(frame, e.grid_width, e.grid_height);
    }
    std::vector<double> operator()(const IdentityLuminance&) const {
      std::vector<double> out;
      out.reserve(static_cast<std::size_t>(frame.width) * frame.height);
      for (std::uint32_t y = 0; y < frame.height; ++y)
        for (std::uint32_t x = 0; x < frame.width; ++x) out.push_back(luminance(frame, x, y));
      return out;
    }
  };
  return std::visit(Visitor{frame}, extractor);
}

FeatureMatrix extract_features(const FrameSequence& sequence, const Extractor& extractor,
                               unsigned threads) {
  sequence.validate();
  const std::size_t n = sequence.frames.size();
  std::vector<std::vector<double>> rows(n);
  parallel_for(n, threads, [&](std::size_t i) { rows[i] = extract_frame(sequence.frames[i], extractor); });

  const std::size_t dim = rows.front().size();
  std::vector<double> values;
  values.reserve(n * dim);
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return {n, dim, std::move(values), extractor_tag(extractor)};
}

}  // namespace kfdpc::features
