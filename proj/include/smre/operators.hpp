#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "smre/image.hpp"

namespace smre {

/// Forward model K acting on m x n fields: identity, periodic Gaussian blur or
/// a binary inpainting mask. Immutable; apply/adjoint are pure.
class LinearOperator {
 public:
  enum class Kind { Identity, GaussianConvolution, Mask };

  static LinearOperator identity();
  /// Sampled Gaussian, truncated at ceil(4 std) and renormalized to unit sum.
  static LinearOperator gaussian(double std_px);
  /// Pointwise multiplication by a {0, 1} field (0 = occluded).
  static LinearOperator mask(ImageField mask);

  Kind kind() const noexcept { return kind_; }
  double std_px() const noexcept { return std_px_; }
  /// One-dimensional taps, index r..2r for offsets -r..r.
  const std::vector<double>& taps() const noexcept { return taps_; }
  const ImageField& mask_field() const;

  /// Diagonal operators (identity, mask) act pixelwise.
  bool is_diagonal() const noexcept { return kind_ != Kind::GaussianConvolution; }

  ImageField apply(const ImageField& u) const;
  ImageField adjoint(const ImageField& v) const;

  /// Analytic upper bound on the spectral norm.
  double norm_bound() const noexcept { return norm_bound_; }

  std::string describe() const;

 private:
  LinearOperator() = default;
  ImageField convolve(const ImageField& u) const;

  Kind kind_ = Kind::Identity;
  double std_px_ = 0.0;
  std::vector<double> taps_;
  std::shared_ptr<const ImageField> mask_;
  double norm_bound_ = 1.0;
};

/// Power iteration on K^T K from a seeded random start, inflated by 1.001 and
/// capped by the analytic bound.
double norm_estimate(const LinearOperator& op, std::size_t rows, std::size_t cols, std::size_t iters,
                     std::uint64_t seed);

/// Pixel standard deviation of a Gaussian PSF given by its FWHM.
double fwhm_to_std_px(double fwhm_nm, double pitch_nm);

}  // namespace smre
