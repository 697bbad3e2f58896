#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "smre/image.hpp"
#include "smre/operators.hpp"
#include "smre/prox.hpp"

namespace smre {

/// Penalized least squares  argmin (lambda/2)|Ku - Y|^2 + J(u).
ProxResult rof_solve(const ImageField& y, const LinearOperator& k, double lambda, const CostSpec& cost,
                     const ProxOptions& opts = {});

struct Metrics {
  double mse = 0.0;
  double bregman = 0.0;
  double tv = 0.0;
};

/// mse = |u - ref|^2 / (mn), symmetric Bregman distance at the given beta, and
/// the smoothed TV of u.
Metrics metrics(const ImageField& u, const ImageField& ref, double beta);

struct OracleScan {
  std::vector<double> lambda_grid;
  std::vector<double> mse_mean;
  std::vector<double> bregman_mean;
  std::size_t argmin_mse = 0;
  std::size_t argmin_bregman = 0;
  bool mse_on_boundary = false;
  bool bregman_on_boundary = false;
  std::size_t replicates = 0;
};

struct OracleScanOptions {
  std::size_t replicates = 10;
  std::uint64_t seed = 1;
  double beta = 1e-8;
  CostSpec cost = CostSpec::tv();
  ProxOptions prox{};
};

/// Replicate r uses noise from NormalStream(seed, r) scaled by noise_sigma
/// (0 gives noiseless data). Metrics are averaged over replicates.
OracleScan oracle_scan(const ImageField& u0, const LinearOperator& k, double noise_sigma,
                       const std::vector<double>& lambda_grid, const OracleScanOptions& opts = {});

/// `count` log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count = 40);

/// `lambda,mse_mean,bregman_mean`
void write_scan_csv(std::ostream& out, const OracleScan& scan);

}  // namespace smre
