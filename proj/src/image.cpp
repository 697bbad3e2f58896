#include "smre/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace smre {

ImageField::ImageField(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("ImageField: dimensions must be positive");
  if (!std::isfinite(fill)) throw std::invalid_argument("ImageField: non-finite fill value");
}

ImageField::ImageField(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("ImageField: dimensions must be positive");
  if (values_.size() != rows * cols) {
    throw std::invalid_argument("ImageField: expected " + std::to_string(rows * cols) +
                                " values, got " + std::to_string(values_.size()));
  }
  auto bad = std::find_if(values_.begin(), values_.end(), [](double x) { return !std::isfinite(x); });
  if (bad != values_.end()) {
    throw std::invalid_argument("ImageField: non-finite value at index " +
                                std::to_string(bad - values_.begin()));
  }
}

void require_same_shape(const ImageField& a, const ImageField& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

ImageField& ImageField::operator+=(const ImageField& rhs) {
  require_same_shape(*this, rhs, "operator+=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += rhs.values_[k];
  return *this;
}

ImageField& ImageField::operator-=(const ImageField& rhs) {
  require_same_shape(*this, rhs, "operator-=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= rhs.values_[k];
  return *this;
}

ImageField& ImageField::operator*=(double s) {
  for (double& x : values_) x *= s;
  return *this;
}

ImageField operator+(ImageField lhs, const ImageField& rhs) { return lhs += rhs; }
ImageField operator-(ImageField lhs, const ImageField& rhs) { return lhs -= rhs; }
ImageField operator*(ImageField lhs, double s) { return lhs *= s; }
ImageField operator*(double s, ImageField rhs) { return rhs *= s; }

double dot(const ImageField& a, const ImageField& b) {
  require_same_shape(a, b, "dot");
  return std::inner_product(a.data(), a.data() + a.size(), b.data(), 0.0);
}

double norm(const ImageField& a) { return std::sqrt(dot(a, a)); }

double sum(const ImageField& a) { return std::accumulate(a.data(), a.data() + a.size(), 0.0); }

double mean(const ImageField& a) { return a.empty() ? 0.0 : sum(a) / static_cast<double>(a.size()); }

double max_abs_diff(const ImageField& a, const ImageField& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace smre
