#include "smre/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "smre/projection.hpp"
#include "smre/statistics.hpp"

namespace smre {

void PoissonConfig::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("PoissonConfig: delta must be positive");
  if (c_anscombe != 3.0 / 8.0 && c_anscombe != 0.25)
    throw std::invalid_argument("PoissonConfig: Anscombe constant must be 3/8 or 1/4");
}

ImageField anscombe(const ImageField& counts, double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("anscombe: c must be >= 0");
  ImageField x = counts;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (counts[k] < 0.0) throw std::invalid_argument("anscombe: negative count at index " + std::to_string(k));
    x[k] = 2.0 * std::sqrt(counts[k] + c);
  }
  return x;
}

ImageField box_smooth3(const ImageField& f) {
  const std::size_t m = f.rows(), n = f.cols();
  ImageField out(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      int cnt = 0;
      for (std::size_t a = (i > 0 ? i - 1 : 0); a <= std::min(i + 1, m - 1); ++a)
        for (std::size_t b = (j > 0 ? j - 1 : 0); b <= std::min(j + 1, n - 1); ++b) {
          acc += f(a, b);
          ++cnt;
        }
      out(i, j) = acc / cnt;
    }
  return out;
}

namespace {

ImageField floored_sqrt(const ImageField& f, double floor) {
  ImageField out = f;
  for (double& x : out.values()) x = std::sqrt(std::max(x, floor));
  return out;
}

}  // namespace

SolveReport poisson_admm(const ImageField& counts, const LinearOperator& k, const SubsetSystem& sys,
                         const CostSpec& cost, const PoissonConfig& cfg) {
  if (!sys.calibrated() || !sys.q_alpha()) throw StateError("poisson_admm: subset system is not calibrated");
  if (counts.rows() != sys.rows() || counts.cols() != sys.cols())
    throw std::invalid_argument("poisson_admm: data and system dimensions differ");
  cfg.validate();
  const AdmmConfig& acfg = cfg.admm;
  acfg.validate(k.norm_bound());

  const double q_alpha = *sys.q_alpha();
  const std::size_t m = counts.rows(), n = counts.cols();
  const double lambda = acfg.lambda;
  const double norm_y = std::max(norm(counts), std::numeric_limits<double>::min());
  const double rms_scale = norm_y / std::sqrt(static_cast<double>(counts.size()));
  const ImageField x = anscombe(counts, cfg.c_anscombe);

  ImageField y = floored_sqrt(box_smooth3(counts), cfg.delta);
  ImageField w(m, n), p(m, n), u(m, n), ku(m, n);
  ImageField u_sum(m, n), p_sum(m, n);
  GeneralizedProxSolver prox(acfg.prox);
  double prev_gap = std::numeric_limits<double>::infinity();

  SolveReport report;
  for (std::size_t it = 1; it <= acfg.max_outer; ++it) {
    // (1) primal step against the current linearization point
    ScaledOperator a{k, ImageField(m, n)};
    for (std::size_t i = 0; i < y.size(); ++i) a.row_scale[i] = 1.0 / y[i];
    ProxResult pr = prox.solve(w - p * lambda, a, lambda, cost);
    ImageField ku_new = k.apply(pr.u);

    // (2) relinearize
    y = floored_sqrt(ku_new, cfg.delta);
    ImageField lin(m, n);
    for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = ku_new[i] / y[i];

    // (3) slack: orthant and shifted cylinders around X - y, radius^2 = 1 / c_S
    auto center = std::make_shared<const ImageField>(x - y);
    std::vector<ConvexSet> sets;
    sets.reserve(sys.size() + 1);
    sets.push_back(NonnegOrthant{});
    for (std::size_t s = 0; s < sys.size(); ++s) sets.push_back(Cylinder{sys.set(s), center, 1.0 / sys.weight(s)});
    const ImageField proj_in = lin + p * lambda;
    DykstraOptions dopts = acfg.dykstra;
    if (acfg.adaptive_inner_tol && std::isfinite(prev_gap)) dopts.tol = std::max(acfg.dykstra.tol, 0.1 * prev_gap * rms_scale);
    DykstraResult dr = dykstra(proj_in, sets, dopts);

    // (4) dual ascent
    const ImageField p_prev = p;
    p = p_prev + (lin - dr.point) * (1.0 / lambda);

    ImageField root(m, n);  // 2 sqrt(max(Ku, 0)) - X
    for (std::size_t i = 0; i < root.size(); ++i) root[i] = 2.0 * std::sqrt(std::max(ku_new[i], 0.0)) - x[i];

    IterationRecord rec;
    rec.rel_change = norm(ku_new - ku) / norm_y;
    rec.rel_gap = norm(y - dr.point) / norm_y;
    rec.stat = transformed_statistic(root, sys, 1.0);
    rec.cost = tv_value(pr.u, cost);
    rec.dykstra_sweeps = dr.sweeps;
    rec.prox_iterations = pr.iterations;

    bool stop = stopping_check(rec, q_alpha, acfg);
    if (stop && dopts.tol > acfg.dykstra.tol) {
      dr = dykstra(proj_in, sets, acfg.dykstra);
      p = p_prev + (lin - dr.point) * (1.0 / lambda);
      rec.rel_gap = norm(y - dr.point) / norm_y;
      rec.dykstra_sweeps += dr.sweeps;
      stop = stopping_check(rec, q_alpha, acfg);
    }
    prev_gap = norm(lin - dr.point) / norm_y;

    u = std::move(pr.u);
    w = std::move(dr.point);
    ku = std::move(ku_new);
    report.history.push_back(rec);
    report.iterations = it;
    if (acfg.average_iterates) {
      u_sum += u;
      p_sum += p;
    }
    if (norm(u) > acfg.divergence_factor * norm_y) {
      report.status = SolveStatus::Diverged;
      break;
    }
    if (stop) {
      report.status = SolveStatus::Converged;
      report.converged = true;
      break;
    }
  }

  report.u_hat = std::move(u);
  report.v_hat = std::move(w);
  report.p_hat = std::move(p);
  if (acfg.average_iterates && report.iterations > 0) {
    const double inv = 1.0 / static_cast<double>(report.iterations);
    report.u_avg = u_sum * inv;
    report.p_avg = p_sum * inv;
  }
  return report;
}

}  // namespace smre
