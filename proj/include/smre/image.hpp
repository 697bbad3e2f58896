#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace smre {

/// Thrown when an operation needs state that has not been established yet,
/// e.g. evaluating the MR statistic on an uncalibrated subset system.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Dense m x n field of real values stored row-major. Carries images, data,
/// residuals, slack and dual variables alike.
class ImageField {
 public:
  ImageField() = default;
  ImageField(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Validates the length and rejects NaN/Inf entries.
  ImageField(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  bool same_shape(const ImageField& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  ImageField& operator+=(const ImageField& rhs);
  ImageField& operator-=(const ImageField& rhs);
  ImageField& operator*=(double s);

  friend bool operator==(const ImageField&, const ImageField&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

ImageField operator+(ImageField lhs, const ImageField& rhs);
ImageField operator-(ImageField lhs, const ImageField& rhs);
ImageField operator*(ImageField lhs, double s);
ImageField operator*(double s, ImageField rhs);

/// Throws std::invalid_argument unless both fields have the same dimensions.
void require_same_shape(const ImageField& a, const ImageField& b, const char* what);

double dot(const ImageField& a, const ImageField& b);
double norm(const ImageField& a);
double sum(const ImageField& a);
double mean(const ImageField& a);
double max_abs_diff(const ImageField& a, const ImageField& b);

/// Axis-aligned block of pixels [top, top+height) x [left, left+width).
struct PixelRect {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t cardinality() const noexcept { return height * width; }
  bool fits(std::size_t rows, std::size_t cols) const noexcept {
    return height >= 1 && width >= 1 && top + height <= rows && left + width <= cols;
  }
  bool contains(std::size_t i, std::size_t j) const noexcept {
    return i >= top && i < top + height && j >= left && j < left + width;
  }

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

}  // namespace smre
