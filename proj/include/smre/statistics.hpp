#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smre/grid.hpp"
#include "smre/image.hpp"

namespace smre {

/// Mean and standard deviation of the fourth root of a chi-square variable
/// with `card` degrees of freedom (normal approximation).
struct Moments {
  double mu;
  double sigma;
};

Moments fourth_root_moments(std::size_t card);

struct NoiseModel {
  enum class Kind { Gaussian, Poisson };

  static NoiseModel gaussian(double sigma2);
  static NoiseModel poisson() { return NoiseModel{Kind::Poisson, std::nullopt}; }

  Kind kind;
  std::optional<double> sigma2;  // present iff Gaussian
};

/// max_S (c_S / sigma2) * sum_{S} v^2. Requires a calibrated system.
double mr_statistic(const ImageField& v, const SubsetSystem& sys, double sigma2);

/// max_S (t_S^{1/4} - mu_S) / sigma_S with t_S = sigma2^{-1} sum_S v^2.
double transformed_statistic(const ImageField& v, const SubsetSystem& sys, double sigma2);

struct QuantileRecord {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string system_id;
  double alpha = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double q_alpha = 0.0;
  std::string generator;
};

/// Sorted samples of the transformed statistic under pure N(0, 1) noise.
/// Trial t draws its field from NormalStream(seed, t), so the sample does not
/// depend on `workers`.
std::vector<double> simulate_null_distribution(const SubsetSystem& sys, std::size_t trials, std::uint64_t seed,
                                               unsigned workers = 0);

/// The ceil(alpha * n)-th smallest element of a sorted sample.
double empirical_quantile(const std::vector<double>& sorted, double alpha);

QuantileRecord simulate_quantile(const SubsetSystem& sys, double alpha, std::size_t trials, std::uint64_t seed,
                                 unsigned workers = 0);

/// Sets c_S = (q sigma_S + mu_S)^{-4}. Rejects q for which the base is not
/// positive on some scale.
SubsetSystem assign_weights(const SubsetSystem& sys, double q_alpha);
SubsetSystem assign_weights(const SubsetSystem& sys, const QuantileRecord& q);

/// 1 / (c_S |S|) for a set of cardinality `card` under quantile q.
double relaxation_factor(std::size_t card, double q_alpha);

/// Union of sets whose weighted residual sum exceeds 1, optionally restricted
/// to one cardinality. Returns a 0/1 mask.
ImageField diagnose_violations(const ImageField& residual, const SubsetSystem& sys, double sigma2,
                               std::optional<std::size_t> scale_filter = std::nullopt);

}  // namespace smre
