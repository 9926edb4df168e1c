#include "keyframe_dpc/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>

#include "keyframe_dpc/error.hpp"

namespace kfdpc::features {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(std::istream& in) {
  std::string token;
  int ch = 0;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

std::uint32_t ppm_number(std::istream& in, const std::filesystem::path& path) {
  const std::string token = ppm_token(in);
  if (token.empty() || !std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw FormatError(path.string() + ": malformed PPM header");
  }
  return static_cast<std::uint32_t>(std::stoul(token));
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  if (ppm_token(in) != "P6") throw FormatError(path.string() + ": not a binary PPM (P6)");
  Image image;
  image.width = ppm_number(in, path);
  image.height = ppm_number(in, path);
  const std::uint32_t maxval = ppm_number(in, path);
  if (image.width == 0 || image.height == 0) throw FormatError(path.string() + ": zero-area frame");
  if (maxval == 0 || maxval > 255) throw FormatError(path.string() + ": only 8-bit PPM is supported");
  image.channels = 3;
  image.samples.resize(static_cast<std::size_t>(image.width) * image.height * 3);
  if (!in.read(reinterpret_cast<char*>(image.samples.data()), static_cast<std::streamsize>(image.samples.size()))) {
    throw FormatError(path.string() + ": truncated pixel data");
  }
  if (maxval != 255) {
    for (auto& s : image.samples) s = static_cast<std::uint8_t>((s * 255u + maxval / 2) / maxval);
  }
  return image;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 3) throw InvalidArgument("PPM output requires 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.samples.data()), static_cast<std::streamsize>(image.samples.size()));
}

Image read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw FormatError(path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  Image image;
  image.width = png.width;
  image.height = png.height;
  image.channels = 3;
  image.samples.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, image.samples.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw FormatError(path.string() + ": " + message);
  }
  return image;
}

Image read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".ppm") return read_ppm(path);
  if (ext == ".png") return read_png(path);
  throw FormatError(path.string() + ": unsupported image type");
}

std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw FormatError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower_extension(entry.path());
    if (ext == ".ppm" || ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

FrameSequence load_frame_directory(const std::filesystem::path& dir) {
  FrameSequence seq;
  seq.source_id = dir.string();
  for (const auto& file : list_frame_files(dir)) seq.frames.push_back(read_image(file));
  if (seq.frames.empty()) throw FormatError(dir.string() + " contains no .ppm or .png frames");
  seq.validate();
  return seq;
}

}  // namespace kfdpc::features
