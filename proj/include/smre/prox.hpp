#pragma once

#include <cstddef>
#include <optional>

#include "smre/image.hpp"
#include "smre/operators.hpp"

namespace smre {

/// Regularization functional J: isotropic total variation, optionally
/// augmented by gamma * sum u^2. `beta` smooths |grad u| to sqrt(|grad u|^2 + beta^2)
/// when J is evaluated.
struct CostSpec {
  enum class Kind { TV, TVplusL2 };

  static CostSpec tv(double beta = 0.0);
  static CostSpec tv_plus_l2(double gamma, double beta = 0.0);

  Kind kind = Kind::TV;
  double gamma = 0.0;
  double beta = 0.0;

  double l2_weight() const noexcept { return kind == Kind::TVplusL2 ? gamma : 0.0; }
};

/// Forward differences with a zero difference on the last row/column.
struct Gradient {
  ImageField dx;  // along columns
  ImageField dy;  // along rows
};

Gradient gradient(const ImageField& u);
/// Adjoint of `gradient` (minus the discrete divergence).
ImageField gradient_adjoint(const Gradient& g);

double tv_value(const ImageField& u, const CostSpec& cost);

struct ProxOptions {
  double inner_tol = 1e-5;
  std::size_t max_inner = 2000;
};

struct ProxResult {
  ImageField u;
  bool converged = false;
  std::size_t iterations = 0;
  /// Stopping measure at exit: duality gap over 1 + |objective| when a gap is
  /// available, else the larger of the relative objective decrease and the
  /// scaled primal-dual residual.
  double accuracy = 0.0;
};

/// argmin_u 1/2 |u - f|^2 + weight * J(u), by accelerated projected gradient
/// on the dual. Keeps the dual field between calls as a warm start.
///
/// The solver works on the unsmoothed TV (beta = 0); smoothing changes the
/// objective by at most weight * m * n * beta. Stops when the duality gap is
/// below inner_tol * (1 + objective at f).
class TvProxSolver {
 public:
  explicit TvProxSolver(ProxOptions opts = {}) : opts_(opts) {}
  ProxResult solve(const ImageField& f, double weight, const CostSpec& cost);
  void reset() { dual_.reset(); }

 private:
  ProxOptions opts_;
  std::optional<Gradient> dual_;
};

ProxResult prox_cost(const ImageField& f, double weight, const CostSpec& cost, const ProxOptions& opts = {});

/// A = diag(row_scale) o K. An empty row_scale means all ones.
struct ScaledOperator {
  LinearOperator op = LinearOperator::identity();
  ImageField row_scale;

  ImageField apply(const ImageField& u) const;
  ImageField adjoint(const ImageField& v) const;
  double norm_bound() const;
  bool is_plain_identity() const;
};

/// argmin_u 1/2 |A u - f|^2 + weight * J(u) by (accelerated) Chambolle-Pock
/// iterations, warm-started from the previous call.
///
/// For diagonal A with positive curvature everywhere the duality gap is
/// available and used for stopping. Otherwise both the relative objective
/// decrease over a 10-iteration window and the primal-dual residual must fall
/// below inner_tol.
class GeneralizedProxSolver {
 public:
  explicit GeneralizedProxSolver(ProxOptions opts = {}) : opts_(opts) {}
  ProxResult solve(const ImageField& f, const ScaledOperator& a, double weight, const CostSpec& cost);
  void reset();
  /// Starting point for the next solve (ignored on the plain-identity path).
  void set_primal(const ImageField& u) { u_ = u; }

 private:
  ProxResult solve_diagonal(const ImageField& f, const ImageField& d, double weight, const CostSpec& cost);
  ProxResult solve_general(const ImageField& f, const ScaledOperator& a, double weight, const CostSpec& cost);

  ProxOptions opts_;
  std::optional<ImageField> u_;
  std::optional<Gradient> z_;
  std::optional<ImageField> s_;
  TvProxSolver plain_{opts_};
};

ProxResult prox_generalized(const ImageField& f, const ScaledOperator& a, double weight, const CostSpec& cost,
                            const ProxOptions& opts = {}, const ImageField* warm_start = nullptr);

/// 1/2 |A u - f|^2 + weight * J(u) with J evaluated at the given cost's beta.
double generalized_objective(const ImageField& u, const ImageField& f, const ScaledOperator& a, double weight,
                             const CostSpec& cost);

/// Symmetric Bregman distance of the beta-smoothed TV.
double bregman_sym(const ImageField& u, const ImageField& v, double beta);

}  // namespace smre
