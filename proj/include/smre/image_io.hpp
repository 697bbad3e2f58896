#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "smre/image.hpp"

namespace smre {

/// Malformed or truncated image file. `offset` is the byte position where
/// reading failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

enum class ImageFormat { PgmPlain, PgmBinary, RawFloat };

/// Picks the format from the extension: ".f32" is raw float, everything else
/// binary PGM.
ImageFormat format_for_path(const std::filesystem::path& path);

/// Reads P2/P5 (scaled by 1/maxval) or SMRE-F32 (verbatim). With
/// `raw_counts` PGM samples are returned unscaled.
ImageField read_image(const std::filesystem::path& path, bool raw_counts = false);

/// Writes PGM with values clamped to [0, 1] and rounded to `maxval` levels, or
/// SMRE-F32 as little-endian float32.
void write_image(const ImageField& field, const std::filesystem::path& path, ImageFormat format,
                 unsigned maxval = 255);
void write_image(const ImageField& field, const std::filesystem::path& path);

/// Parses from memory; exposed so the format can be tested without files.
ImageField decode_image(const std::string& bytes, bool raw_counts = false);
std::string encode_image(const ImageField& field, ImageFormat format, unsigned maxval = 255);

}  // namespace smre
