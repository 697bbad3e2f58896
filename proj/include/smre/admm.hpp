#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "smre/grid.hpp"
#include "smre/image.hpp"
#include "smre/operators.hpp"
#include "smre/projection.hpp"
#include "smre/prox.hpp"

namespace smre {

struct AdmmConfig {
  double lambda = 1e-3;
  /// Preconditioner; 0 selects 1.01 * |K|^2.
  double zeta = 0.0;
  double alpha = 0.9;
  double tol_change = 1e-3;
  double tol_gap = 1e-3;
  double stat_slack = 1.01;
  std::size_t max_outer = 5000;
  bool average_iterates = false;
  /// Divergence guard: abort once |u_k| > divergence_factor * |Y|.
  double divergence_factor = 1e6;

  /// Loosen the inner projection tolerance while the outer gap is large.
  bool adaptive_inner_tol = true;
  DykstraOptions dykstra{};
  ProxOptions prox{};

  /// Throws std::invalid_argument on out-of-range settings.
  void validate(double norm_bound) const;
  double effective_zeta(double norm_bound) const { return zeta > 0.0 ? zeta : 1.01 * norm_bound * norm_bound; }
};

/// Quantities entering the stopping rule for one outer iteration.
struct IterationRecord {
  double rel_change = 0.0;  // |K u_k - K u_{k-1}| / |Y|
  double rel_gap = 0.0;     // |K u_k - v_k| / |Y|
  double stat = 0.0;        // transformed statistic of the residual
  double cost = 0.0;        // J(u_k)
  std::size_t dykstra_sweeps = 0;
  std::size_t prox_iterations = 0;
};

enum class SolveStatus { Converged, MaxIterations, Diverged };

struct SolveReport {
  ImageField u_hat;
  ImageField v_hat;  // slack v (Gaussian) or w (Poisson)
  ImageField p_hat;
  std::optional<ImageField> u_avg;
  std::optional<ImageField> p_avg;
  std::size_t iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  std::vector<IterationRecord> history;
};

/// All three criteria hold (comparisons inclusive).
bool stopping_check(const IterationRecord& rec, double q_alpha, const AdmmConfig& cfg);

/// Inexact ADMM for  min J(u)  s.t.  T(Ku - Y) <= 1. Starts from u = v = p = 0.
SolveReport admm_solve(const ImageField& y, const LinearOperator& k, const SubsetSystem& sys, double sigma2,
                       const CostSpec& cost, const AdmmConfig& cfg = {});

/// `iter,rel_change,rel_gap,stat,J` with one row per iteration.
void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history);

}  // namespace smre
