#include "smre/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "smre/random.hpp"

namespace smre {

LinearOperator LinearOperator::identity() {
  LinearOperator op;
  op.kind_ = Kind::Identity;
  op.norm_bound_ = 1.0;
  return op;
}

LinearOperator LinearOperator::gaussian(double std_px) {
  if (!(std_px > 0.0) || !std::isfinite(std_px))
    throw std::invalid_argument("gaussian operator: std must be positive");
  LinearOperator op;
  op.kind_ = Kind::GaussianConvolution;
  op.std_px_ = std_px;
  const auto radius = static_cast<std::size_t>(std::ceil(4.0 * std_px));
  op.taps_.resize(2 * radius + 1);
  double total = 0.0;
  for (std::size_t k = 0; k < op.taps_.size(); ++k) {
    const double x = static_cast<double>(k) - static_cast<double>(radius);
    op.taps_[k] = std::exp(-0.5 * x * x / (std_px * std_px));
    total += op.taps_[k];
  }
  for (double& t : op.taps_) t /= total;
  // Unit-sum nonnegative kernel on a periodic grid: |FFT| peaks at DC with value 1.
  op.norm_bound_ = 1.0;
  return op;
}

LinearOperator LinearOperator::mask(ImageField mask) {
  bool any = false;
  for (double x : mask.values()) {
    if (x != 0.0 && x != 1.0) throw std::invalid_argument("mask operator: mask entries must be 0 or 1");
    any = any || x == 1.0;
  }
  LinearOperator op;
  op.kind_ = Kind::Mask;
  op.mask_ = std::make_shared<const ImageField>(std::move(mask));
  op.norm_bound_ = any ? 1.0 : 0.0;
  return op;
}

const ImageField& LinearOperator::mask_field() const {
  if (kind_ != Kind::Mask) throw StateError("mask_field: operator is not a mask");
  return *mask_;
}

ImageField LinearOperator::convolve(const ImageField& u) const {
  // Separable circular convolution; the kernel is symmetric so this is also the adjoint.
  const std::size_t m = u.rows(), n = u.cols();
  const auto r = static_cast<std::ptrdiff_t>((taps_.size() - 1) / 2);
  const auto wrap = [](std::ptrdiff_t i, std::size_t len) {
    const auto l = static_cast<std::ptrdiff_t>(len);
    return static_cast<std::size_t>(((i % l) + l) % l);
  };
  ImageField tmp(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k)
        acc += taps_[static_cast<std::size_t>(k + r)] * u(i, wrap(static_cast<std::ptrdiff_t>(j) - k, n));
      tmp(i, j) = acc;
    }
  ImageField out(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k)
        acc += taps_[static_cast<std::size_t>(k + r)] * tmp(wrap(static_cast<std::ptrdiff_t>(i) - k, m), j);
      out(i, j) = acc;
    }
  return out;
}

ImageField LinearOperator::apply(const ImageField& u) const {
  switch (kind_) {
    case Kind::Identity:
      return u;
    case Kind::GaussianConvolution:
      return convolve(u);
    case Kind::Mask: {
      require_same_shape(u, *mask_, "mask operator");
      ImageField out = u;
      for (std::size_t k = 0; k < out.size(); ++k) out[k] *= (*mask_)[k];
      return out;
    }
  }
  return u;
}

ImageField LinearOperator::adjoint(const ImageField& v) const {
  // All supported operators are self-adjoint.
  return apply(v);
}

std::string LinearOperator::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Identity:
      os << "identity";
      break;
    case Kind::GaussianConvolution:
      os << "gauss:std=" << std_px_;
      break;
    case Kind::Mask:
      os << "mask:" << mask_->rows() << "x" << mask_->cols();
      break;
  }
  return os.str();
}

double norm_estimate(const LinearOperator& op, std::size_t rows, std::size_t cols, std::size_t iters,
                     std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("norm_estimate: iters must be >= 1");
  ImageField x(rows, cols);
  NormalStream(seed, 0).fill(x);
  double rayleigh = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    const double nx = norm(x);
    if (nx == 0.0) break;
    x *= 1.0 / nx;
    ImageField y = op.adjoint(op.apply(x));
    rayleigh = dot(x, y);
    x = std::move(y);
  }
  return std::min(std::sqrt(std::max(rayleigh, 0.0)) * 1.001, op.norm_bound());
}

double fwhm_to_std_px(double fwhm_nm, double pitch_nm) {
  if (!(fwhm_nm > 0.0) || !(pitch_nm > 0.0)) throw std::invalid_argument("fwhm_to_std_px: arguments must be positive");
  return fwhm_nm / (2.0 * std::sqrt(2.0 * std::numbers::ln2)) / pitch_nm;
}

}  // namespace smre
