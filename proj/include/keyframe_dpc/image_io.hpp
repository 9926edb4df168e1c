#pragma once

#include <filesystem>
#include <vector>

#include "keyframe_dpc/frame_features.hpp"

namespace kfdpc::features {

Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Decodes any PNG into 8-bit RGB.
Image read_png(const std::filesystem::path& path);

/// Reads a .ppm or .png file, chosen by extension (case-insensitive).
Image read_image(const std::filesystem::path& path);

/// Frame files (.ppm/.png) in `dir`, sorted lexicographically by filename.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

/// Loads every frame file of `dir` in lexicographic order.
FrameSequence load_frame_directory(const std::filesystem::path& dir);

}  // namespace kfdpc::features
