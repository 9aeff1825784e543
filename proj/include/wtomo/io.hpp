#pragma once

#include <string>
#include <vector>

#include "wtomo/types.hpp"

namespace wtomo {

/// Clamp to [lo, hi], map linearly to 8-bit gray (round half up), write PGM P5.
void export_image(const ImageGrid& image, double lo, double hi,
                  const std::string& path);

/// Raw float32 with a 16-byte header: magic "WTR1", uint32 nx, uint32 ny,
/// uint32 reserved; data row-major little-endian.
void write_raw(const ImageGrid& image, const std::string& path);
ImageGrid read_raw(const std::string& path);

/// CSV with a header row; all columns must have equal length.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Main-diagonal samples (corner to corner) of a square image.
std::vector<double> line_profile(const ImageGrid& image);

/// CSV rows (index, value) along the main diagonal.
void export_line_profile(const ImageGrid& image, const std::string& path);

}  // namespace wtomo
