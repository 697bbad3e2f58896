#include "smre/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "smre/random.hpp"

namespace smre {

Moments fourth_root_moments(std::size_t card) {
  if (card < 1) throw std::invalid_argument("fourth_root_moments: cardinality must be >= 1");
  const double n = static_cast<double>(card);
  return {std::pow(n - 0.5, 0.25), 1.0 / std::sqrt(8.0 * std::sqrt(n))};
}

NoiseModel NoiseModel::gaussian(double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("NoiseModel: Gaussian variance must be positive");
  return NoiseModel{Kind::Gaussian, sigma2};
}

namespace {

void check_grid(const ImageField& v, const SubsetSystem& sys, const char* what) {
  if (v.rows() != sys.rows() || v.cols() != sys.cols())
    throw std::invalid_argument(std::string(what) + ": field and system dimensions differ");
}

void check_sigma2(double sigma2, const char* what) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument(std::string(what) + ": sigma2 must be positive");
}

double transformed_from_table(const SummedAreaTable& table, const SubsetSystem& sys, double inv_sigma2) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& group : sys.scale_groups()) {
    // The transform is increasing in t_S, so take the raw maximum per scale first.
    double tmax = 0.0;
    for (std::size_t k : group.members) tmax = std::max(tmax, table.rect_sum(sys.set(k)));
    const double t = tmax * inv_sigma2;
    best = std::max(best, (std::sqrt(std::sqrt(t)) - group.info.mu) / group.info.sigma);
  }
  return best;
}

}  // namespace

double mr_statistic(const ImageField& v, const SubsetSystem& sys, double sigma2) {
  check_sigma2(sigma2, "mr_statistic");
  check_grid(v, sys, "mr_statistic");
  if (!sys.calibrated()) throw StateError("mr_statistic: subset system is not calibrated");
  const auto table = SummedAreaTable::of_squares(v);
  double best = 0.0;
  const auto& w = sys.weights();
  for (std::size_t k = 0; k < sys.size(); ++k) best = std::max(best, w[k] * table.rect_sum(sys.set(k)));
  return best / sigma2;
}

double transformed_statistic(const ImageField& v, const SubsetSystem& sys, double sigma2) {
  check_sigma2(sigma2, "transformed_statistic");
  check_grid(v, sys, "transformed_statistic");
  return transformed_from_table(SummedAreaTable::of_squares(v), sys, 1.0 / sigma2);
}

std::vector<double> simulate_null_distribution(const SubsetSystem& sys, std::size_t trials, std::uint64_t seed,
                                               unsigned workers) {
  if (trials < 1) throw std::invalid_argument("simulate_quantile: trials must be >= 1");
  std::vector<double> samples(trials);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));

  auto run = [&](std::size_t begin, std::size_t end) {
    ImageField noise(sys.rows(), sys.cols());
    for (std::size_t t = begin; t < end; ++t) {
      NormalStream stream(seed, t);
      stream.fill(noise);
      samples[t] = transformed_from_table(SummedAreaTable::of_squares(noise), sys, 1.0);
    }
  };

  if (workers == 1) {
    run(0, trials);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (trials + workers - 1) / workers;
    for (std::size_t b = 0; b < trials; b += chunk) pool.emplace_back(run, b, std::min(trials, b + chunk));
  }
  std::sort(samples.begin(), samples.end());
  return samples;
}

double empirical_quantile(const std::vector<double>& sorted, double alpha) {
  if (sorted.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("empirical_quantile: alpha must lie in (0, 1)");
  auto rank = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

QuantileRecord simulate_quantile(const SubsetSystem& sys, double alpha, std::size_t trials, std::uint64_t seed,
                                 unsigned workers) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("simulate_quantile: alpha must lie in (0, 1)");
  const auto sample = simulate_null_distribution(sys, trials, seed, workers);
  return QuantileRecord{sys.rows(), sys.cols(), sys.id(), alpha, trials, seed, empirical_quantile(sample, alpha),
                        kGeneratorName};
}

SubsetSystem assign_weights(const SubsetSystem& sys, double q_alpha) {
  if (!std::isfinite(q_alpha)) throw std::invalid_argument("assign_weights: quantile must be finite");
  std::vector<double> group_weight(sys.scale_groups().size());
  for (std::size_t g = 0; g < group_weight.size(); ++g) {
    const auto& info = sys.scale_groups()[g].info;
    const double base = q_alpha * info.sigma + info.mu;
    if (!(base > 0.0))
      throw std::invalid_argument("assign_weights: q_alpha too negative, c_S base is not positive at |S| = " +
                                  std::to_string(info.cardinality));
    group_weight[g] = 1.0 / (base * base * base * base);
  }
  std::vector<double> weights(sys.size());
  for (std::size_t g = 0; g < group_weight.size(); ++g)
    for (std::size_t k : sys.scale_groups()[g].members) weights[k] = group_weight[g];
  return sys.with_weights(std::move(weights), q_alpha);
}

SubsetSystem assign_weights(const SubsetSystem& sys, const QuantileRecord& q) {
  if (q.rows != sys.rows() || q.cols != sys.cols() || q.system_id != sys.id())
    throw std::invalid_argument("assign_weights: quantile record was computed for a different system");
  return assign_weights(sys, q.q_alpha);
}

double relaxation_factor(std::size_t card, double q_alpha) {
  const auto m = fourth_root_moments(card);
  const double base = q_alpha * m.sigma + m.mu;
  return base * base * base * base / static_cast<double>(card);
}

ImageField diagnose_violations(const ImageField& residual, const SubsetSystem& sys, double sigma2,
                               std::optional<std::size_t> scale_filter) {
  check_sigma2(sigma2, "diagnose_violations");
  check_grid(residual, sys, "diagnose_violations");
  if (!sys.calibrated()) throw StateError("diagnose_violations: subset system is not calibrated");
  const auto table = SummedAreaTable::of_squares(residual);
  ImageField mask(sys.rows(), sys.cols(), 0.0);
  for (std::size_t k = 0; k < sys.size(); ++k) {
    const auto& r = sys.set(k);
    if (scale_filter && r.cardinality() != *scale_filter) continue;
    if (sys.weight(k) * table.rect_sum(r) / sigma2 <= 1.0) continue;
    for (std::size_t i = r.top; i < r.top + r.height; ++i)
      for (std::size_t j = r.left; j < r.left + r.width; ++j) mask(i, j) = 1.0;
  }
  return mask;
}

}  // namespace smre
