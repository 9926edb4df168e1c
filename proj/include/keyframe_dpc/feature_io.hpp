#pragma once

#include <filesystem>
#include <iosfwd>

#include "keyframe_dpc/feature_matrix.hpp"

namespace kfdpc::features {

enum class FeatureFormat { csv, binary };

// CSV: one row per frame, comma-separated decimals, no header.
FeatureMatrix read_features_csv(std::istream& in);
void write_features_csv(std::ostream& out, const FeatureMatrix& features);

// Binary: "FMTX", u32 LE rows, u32 LE cols, rows*cols f32 LE row-major.
// Values are narrowed to f32 on write.
FeatureMatrix read_features_binary(std::istream& in);
void write_features_binary(std::ostream& out, const FeatureMatrix& features);

FeatureMatrix import_features(const std::filesystem::path& path, FeatureFormat format);
void export_features(const std::filesystem::path& path, const FeatureMatrix& features,
                     FeatureFormat format);

/// Picks the format from the file's leading bytes ("FMTX" means binary).
FeatureFormat sniff_feature_format(const std::filesystem::path& path);

}  // namespace kfdpc::features
