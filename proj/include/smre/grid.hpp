#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "smre/image.hpp"

namespace smre {

/// Scale metadata shared by every set of a given cardinality.
struct ScaleInfo {
  std::size_t cardinality = 0;
  double mu = 0.0;     // (|S| - 0.5)^(1/4)
  double sigma = 0.0;  // (8 sqrt|S|)^(-1/2)
};

/// Sets of one cardinality, listed by index into SubsetSystem::sets().
struct ScaleGroup {
  ScaleInfo info;
  std::vector<std::size_t> members;
};

/// A multiscale system of rectangular pixel subsets on an m x n grid.
///
/// Immutable once built. Calibration (assign_weights) returns a new system
/// carrying per-set weights c_S and the quantile they were derived from.
class SubsetSystem {
 public:
  SubsetSystem(std::string system_id, std::size_t rows, std::size_t cols, std::vector<PixelRect> sets);

  const std::string& id() const noexcept { return id_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return sets_.size(); }

  const std::vector<PixelRect>& sets() const noexcept { return sets_; }
  const PixelRect& set(std::size_t k) const { return sets_[k]; }
  const ScaleInfo& scale(std::size_t k) const { return groups_[group_of_[k]].info; }
  /// Groups ordered by increasing cardinality.
  const std::vector<ScaleGroup>& scale_groups() const noexcept { return groups_; }

  bool calibrated() const noexcept { return !weights_.empty(); }
  /// c_S for set k; throws StateError when uncalibrated.
  double weight(std::size_t k) const;
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::optional<double> q_alpha() const noexcept { return q_alpha_; }

  /// Returns a copy carrying the given per-set weights (all > 0).
  SubsetSystem with_weights(std::vector<double> weights, std::optional<double> q_alpha) const;

 private:
  std::string id_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<PixelRect> sets_;
  std::vector<ScaleGroup> groups_;
  std::vector<std::size_t> group_of_;
  std::vector<double> weights_;
  std::optional<double> q_alpha_;
};

/// All squares of side 1..max_side at every position, side-major then row-major.
SubsetSystem build_system_s0(std::size_t rows, std::size_t cols, std::size_t max_side);

/// Dyadic tiling: for l = 0..ceil(log2 max(m, n)) the squares of side 2^l
/// anchored at multiples of 2^l, clipped at the bottom/right border.
SubsetSystem build_system_s2(std::size_t rows, std::size_t cols);

/// The single set G covering the whole grid.
SubsetSystem build_system_global(std::size_t rows, std::size_t cols);

/// Arbitrary rectangles. The id is "custom-<hash>" so distinct custom
/// systems never share quantile cache entries.
SubsetSystem build_system_custom(std::size_t rows, std::size_t cols, std::vector<PixelRect> sets);

/// Summed-area table of a field; rect sums in O(1).
class SummedAreaTable {
 public:
  explicit SummedAreaTable(const ImageField& f);
  /// Table of squared values f^2.
  static SummedAreaTable of_squares(const ImageField& f);

  double rect_sum(const PixelRect& r) const noexcept {
    const std::size_t w = cols_ + 1;
    const std::size_t b = r.top + r.height;
    const std::size_t e = r.left + r.width;
    return table_[b * w + e] - table_[r.top * w + e] - table_[b * w + r.left] + table_[r.top * w + r.left];
  }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

 private:
  SummedAreaTable(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}
  template <class Fn>
  void build(const ImageField& f, Fn&& fn);

  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> table_;
};

inline SummedAreaTable windowed_sums(const ImageField& f) { return SummedAreaTable(f); }

/// Plain-text system descriptor: header `SMRE-SYS v1 <id> <m> <n>` followed by
/// one `top left height width` line per set.
void write_system(std::ostream& out, const SubsetSystem& sys);
SubsetSystem read_system(std::istream& in);

}  // namespace smre
