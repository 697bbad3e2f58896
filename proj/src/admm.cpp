#include "smre/admm.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <ostream>

#include "smre/statistics.hpp"

namespace smre {

void AdmmConfig::validate(double norm_bound) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("AdmmConfig: lambda must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("AdmmConfig: alpha must lie in (0, 1)");
  if (zeta != 0.0 && !(zeta > norm_bound * norm_bound))
    throw std::invalid_argument("AdmmConfig: zeta must exceed |K|^2");
  if (!(tol_change > 0.0) || !(tol_gap > 0.0) || !(stat_slack > 0.0))
    throw std::invalid_argument("AdmmConfig: tolerances must be positive");
  if (max_outer < 1) throw std::invalid_argument("AdmmConfig: max_outer must be >= 1");
}

bool stopping_check(const IterationRecord& rec, double q_alpha, const AdmmConfig& cfg) {
  return rec.rel_change <= cfg.tol_change && rec.rel_gap <= cfg.tol_gap && rec.stat <= cfg.stat_slack * q_alpha;
}

namespace {

double required_q(const SubsetSystem& sys, const char* what) {
  if (!sys.calibrated() || !sys.q_alpha())
    throw StateError(std::string(what) + ": subset system is not calibrated");
  return *sys.q_alpha();
}

}  // namespace

SolveReport admm_solve(const ImageField& y, const LinearOperator& k, const SubsetSystem& sys, double sigma2,
                       const CostSpec& cost, const AdmmConfig& cfg) {
  const double q_alpha = required_q(sys, "admm_solve");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("admm_solve: sigma2 must be positive");
  if (y.rows() != sys.rows() || y.cols() != sys.cols())
    throw std::invalid_argument("admm_solve: data and system dimensions differ");
  cfg.validate(k.norm_bound());

  const std::size_t m = y.rows(), n = y.cols();
  const double zeta = cfg.effective_zeta(k.norm_bound());
  const double lambda = cfg.lambda;
  const double norm_y = std::max(norm(y), std::numeric_limits<double>::min());
  const double rms_scale = norm_y / std::sqrt(static_cast<double>(y.size()));

  const auto center = std::make_shared<const ImageField>(y);
  const auto sets = cylinders_for(sys, center, sigma2);

  SolveReport report;
  ImageField u(m, n), v(m, n), p(m, n), ku(m, n);
  ImageField u_sum(m, n), p_sum(m, n);
  TvProxSolver prox(cfg.prox);
  double prev_gap = std::numeric_limits<double>::infinity();

  for (std::size_t it = 1; it <= cfg.max_outer; ++it) {
    // (1) linearized primal step
    ImageField r = ku - v + p * lambda;
    ImageField f = u - k.adjoint(r) * (1.0 / zeta);
    ProxResult pr = prox.solve(f, lambda / zeta, cost);
    ImageField ku_new = k.apply(pr.u);

    // (2) slack: projection onto the intersection of cylinders
    const ImageField proj_in = ku_new + p * lambda;
    DykstraOptions dopts = cfg.dykstra;
    if (cfg.adaptive_inner_tol && std::isfinite(prev_gap)) dopts.tol = std::max(cfg.dykstra.tol, 0.1 * prev_gap * rms_scale);
    DykstraResult dr = dykstra(proj_in, sets, dopts);

    // (3) dual ascent
    const ImageField p_prev = p;
    ImageField gap_field = ku_new - dr.point;
    p = p_prev + gap_field * (1.0 / lambda);

    IterationRecord rec;
    rec.rel_change = norm(ku_new - ku) / norm_y;
    rec.rel_gap = norm(gap_field) / norm_y;
    rec.stat = transformed_statistic(ku_new - y, sys, sigma2);
    rec.cost = tv_value(pr.u, cost);
    rec.dykstra_sweeps = dr.sweeps;
    rec.prox_iterations = pr.iterations;

    bool stop = stopping_check(rec, q_alpha, cfg);
    if (stop && dopts.tol > cfg.dykstra.tol) {
      // Accept only with the slack projected at full accuracy.
      dr = dykstra(proj_in, sets, cfg.dykstra);
      gap_field = ku_new - dr.point;
      p = p_prev + gap_field * (1.0 / lambda);
      rec.rel_gap = norm(gap_field) / norm_y;
      rec.dykstra_sweeps += dr.sweeps;
      stop = stopping_check(rec, q_alpha, cfg);
    }
    prev_gap = rec.rel_gap;

    u = std::move(pr.u);
    v = std::move(dr.point);
    ku = std::move(ku_new);
    report.history.push_back(rec);
    report.iterations = it;
    if (cfg.average_iterates) {
      u_sum += u;
      p_sum += p;
    }

    if (norm(u) > cfg.divergence_factor * norm_y) {
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
  report.v_hat = std::move(v);
  report.p_hat = std::move(p);
  if (cfg.average_iterates && report.iterations > 0) {
    const double inv = 1.0 / static_cast<double>(report.iterations);
    report.u_avg = u_sum * inv;
    report.p_avg = p_sum * inv;
  }
  return report;
}

void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history) {
  out << "iter,rel_change,rel_gap,stat,J\n";
  const auto prec = out.precision(17);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    out << (i + 1) << ',' << h.rel_change << ',' << h.rel_gap << ',' << h.stat << ',' << h.cost << '\n';
  }
  out.precision(prec);
}

}  // namespace smre
