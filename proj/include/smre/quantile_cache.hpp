#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smre/statistics.hpp"

namespace smre {

/// Append-only text file of calibration results, one record per line:
///   SMRE-Q v1 | m n | system_id | alpha | trials | seed | q_alpha
/// alpha is written in shortest round-trip decimal and q_alpha as a hex
/// float, so both survive a round trip exactly.
class QuantileCache {
 public:
  explicit QuantileCache(std::filesystem::path path);

  const std::filesystem::path& path() const noexcept { return path_; }

  /// First record whose (m, n, system_id, alpha, trials, seed) equals the
  /// request's. Lines that fail to parse are skipped.
  std::optional<QuantileRecord> lookup(std::size_t rows, std::size_t cols, const std::string& system_id, double alpha,
                                       std::size_t trials, std::uint64_t seed) const;

  /// Appends by rewriting to a sibling temporary and renaming over the file.
  void append(const QuantileRecord& rec) const;

  std::vector<QuantileRecord> records() const;

 private:
  std::filesystem::path path_;
};

std::string format_cache_line(const QuantileRecord& rec);
std::optional<QuantileRecord> parse_cache_line(const std::string& line);

}  // namespace smre
