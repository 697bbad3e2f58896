#include "smre/harness.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "smre/random.hpp"

namespace smre {

ProxResult rof_solve(const ImageField& y, const LinearOperator& k, double lambda, const CostSpec& cost,
                     const ProxOptions& opts) {
  if (!(lambda > 0.0)) throw std::invalid_argument("rof_solve: lambda must be positive");
  if (k.kind() == LinearOperator::Kind::Identity) return prox_cost(y, 1.0 / lambda, cost, opts);
  return prox_generalized(y, ScaledOperator{k, {}}, 1.0 / lambda, cost, opts);
}

Metrics metrics(const ImageField& u, const ImageField& ref, double beta) {
  require_same_shape(u, ref, "metrics");
  const ImageField d = u - ref;
  return {dot(d, d) / static_cast<double>(u.size()), bregman_sym(u, ref, beta), tv_value(u, CostSpec::tv(beta))};
}

OracleScan oracle_scan(const ImageField& u0, const LinearOperator& k, double noise_sigma,
                       const std::vector<double>& lambda_grid, const OracleScanOptions& opts) {
  if (lambda_grid.empty()) throw std::invalid_argument("oracle_scan: lambda grid is empty");
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end(), std::less_equal<>{}) ||
      std::adjacent_find(lambda_grid.begin(), lambda_grid.end()) != lambda_grid.end())
    throw std::invalid_argument("oracle_scan: lambda grid must be strictly increasing");
  if (lambda_grid.front() <= 0.0) throw std::invalid_argument("oracle_scan: lambdas must be positive");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("oracle_scan: noise sigma must be >= 0");
  if (opts.replicates < 1) throw std::invalid_argument("oracle_scan: replicates must be >= 1");

  OracleScan scan;
  scan.lambda_grid = lambda_grid;
  scan.replicates = opts.replicates;
  scan.mse_mean.assign(lambda_grid.size(), 0.0);
  scan.bregman_mean.assign(lambda_grid.size(), 0.0);

  const ImageField clean = k.apply(u0);
  for (std::size_t r = 0; r < opts.replicates; ++r) {
    ImageField noise(u0.rows(), u0.cols());
    NormalStream(opts.seed, r).fill(noise);
    const ImageField y = clean + noise * noise_sigma;
    for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
      const ProxResult est = rof_solve(y, k, lambda_grid[g], opts.cost, opts.prox);
      const Metrics mt = metrics(est.u, u0, opts.beta);
      scan.mse_mean[g] += mt.mse / static_cast<double>(opts.replicates);
      scan.bregman_mean[g] += mt.bregman / static_cast<double>(opts.replicates);
    }
  }
  const auto last = lambda_grid.size() - 1;
  scan.argmin_mse = static_cast<std::size_t>(std::min_element(scan.mse_mean.begin(), scan.mse_mean.end()) -
                                             scan.mse_mean.begin());
  scan.argmin_bregman = static_cast<std::size_t>(
      std::min_element(scan.bregman_mean.begin(), scan.bregman_mean.end()) - scan.bregman_mean.begin());
  scan.mse_on_boundary = scan.argmin_mse == 0 || scan.argmin_mse == last;
  scan.bregman_on_boundary = scan.argmin_bregman == 0 || scan.argmin_bregman == last;
  return scan;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw std::invalid_argument("log_grid: need 0 < lo < hi and count >= 2");
  std::vector<double> grid(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

void write_scan_csv(std::ostream& out, const OracleScan& scan) {
  out << "lambda,mse_mean,bregman_mean\n";
  const auto prec = out.precision(17);
  for (std::size_t g = 0; g < scan.lambda_grid.size(); ++g)
    out << scan.lambda_grid[g] << ',' << scan.mse_mean[g] << ',' << scan.bregman_mean[g] << '\n';
  out.precision(prec);
}

}  // namespace smre
