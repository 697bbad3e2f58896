#include "smre/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace smre {

CostSpec CostSpec::tv(double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("CostSpec: beta must be >= 0");
  return CostSpec{Kind::TV, 0.0, beta};
}

CostSpec CostSpec::tv_plus_l2(double gamma, double beta) {
  if (!(gamma >= 0.0) || !(beta >= 0.0)) throw std::invalid_argument("CostSpec: gamma and beta must be >= 0");
  return CostSpec{Kind::TVplusL2, gamma, beta};
}

Gradient gradient(const ImageField& u) {
  const std::size_t m = u.rows(), n = u.cols();
  Gradient g{ImageField(m, n), ImageField(m, n)};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double c = u(i, j);
      g.dx(i, j) = j + 1 < n ? u(i, j + 1) - c : 0.0;
      g.dy(i, j) = i + 1 < m ? u(i + 1, j) - c : 0.0;
    }
  return g;
}

ImageField gradient_adjoint(const Gradient& g) {
  const std::size_t m = g.dx.rows(), n = g.dx.cols();
  ImageField out(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      if (j + 1 < n) v -= g.dx(i, j);
      if (j > 0) v += g.dx(i, j - 1);
      if (i + 1 < m) v -= g.dy(i, j);
      if (i > 0) v += g.dy(i - 1, j);
      out(i, j) = v;
    }
  return out;
}

namespace {

double tv_of(const Gradient& g, double beta) {
  double total = 0.0;
  const double b2 = beta * beta;
  for (std::size_t k = 0; k < g.dx.size(); ++k) total += std::sqrt(g.dx[k] * g.dx[k] + g.dy[k] * g.dy[k] + b2);
  return total;
}

double squared_norm(const ImageField& u) { return dot(u, u); }

// Projects each (dx, dy) pair onto the disc of the given radius.
void project_discs(Gradient& z, double radius) {
  for (std::size_t k = 0; k < z.dx.size(); ++k) {
    const double nrm = std::hypot(z.dx[k], z.dy[k]);
    if (nrm > radius) {
      const double s = radius / nrm;
      z.dx[k] *= s;
      z.dy[k] *= s;
    }
  }
}

// sum |g| - <g, z> for |z| <= 1.
double tv_gap(const Gradient& g, const Gradient& z) {
  double gap = 0.0;
  for (std::size_t k = 0; k < g.dx.size(); ++k)
    gap += std::hypot(g.dx[k], g.dy[k]) - (g.dx[k] * z.dx[k] + g.dy[k] * z.dy[k]);
  return std::max(gap, 0.0);
}

bool dims_match(const Gradient& g, const ImageField& f) { return g.dx.same_shape(f); }

constexpr std::size_t kCheckEvery = 5;

}  // namespace

double tv_value(const ImageField& u, const CostSpec& cost) {
  double j = tv_of(gradient(u), cost.beta);
  if (cost.l2_weight() > 0.0) j += cost.l2_weight() * squared_norm(u);
  return j;
}

ProxResult TvProxSolver::solve(const ImageField& f, double weight, const CostSpec& cost) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw std::invalid_argument("prox_cost: weight must be >= 0");
  const std::size_t m = f.rows(), n = f.cols();
  if (weight == 0.0) return ProxResult{f, true, 0, 0.0};

  // J = TV + gamma |u|^2: fold the quadratic into the fidelity term.
  const double scale = 1.0 + 2.0 * weight * cost.l2_weight();
  const ImageField target = f * (1.0 / scale);
  const double w = weight / scale;

  const double objective_at_f = weight * (tv_of(gradient(f), 0.0) + cost.l2_weight() * squared_norm(f));
  const double tol_abs = opts_.inner_tol * (1.0 + objective_at_f);

  if (!dual_ || !dims_match(*dual_, f)) dual_ = Gradient{ImageField(m, n), ImageField(m, n)};
  Gradient& z = *dual_;
  Gradient r = z;
  double t = 1.0;
  const double step = 1.0 / (8.0 * w);

  auto primal_of = [&](const Gradient& dual) {
    ImageField u = gradient_adjoint(dual);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = target[k] - w * u[k];
    return u;
  };

  ProxResult result;
  for (std::size_t it = 0; it <= opts_.max_inner; ++it) {
    if (it % kCheckEvery == 0) {
      ImageField u = primal_of(z);
      const double gap = scale * w * tv_gap(gradient(u), z);
      result.u = std::move(u);
      result.accuracy = gap;
      result.iterations = it;
      if (gap <= tol_abs) {
        result.converged = true;
        return result;
      }
    }
    if (it == opts_.max_inner) break;

    const ImageField u = primal_of(r);
    const Gradient g = gradient(u);
    Gradient z_new{r.dx, r.dy};
    for (std::size_t k = 0; k < u.size(); ++k) {
      z_new.dx[k] += step * g.dx[k];
      z_new.dy[k] += step * g.dy[k];
    }
    project_discs(z_new, 1.0);
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double mom = (t - 1.0) / t_new;
    for (std::size_t k = 0; k < u.size(); ++k) {
      r.dx[k] = z_new.dx[k] + mom * (z_new.dx[k] - z.dx[k]);
      r.dy[k] = z_new.dy[k] + mom * (z_new.dy[k] - z.dy[k]);
    }
    z = std::move(z_new);
    t = t_new;
  }
  result.u = primal_of(z);
  result.accuracy = scale * w * tv_gap(gradient(result.u), z);
  result.iterations = opts_.max_inner;
  result.converged = result.accuracy <= tol_abs;
  return result;
}

ProxResult prox_cost(const ImageField& f, double weight, const CostSpec& cost, const ProxOptions& opts) {
  TvProxSolver solver(opts);
  return solver.solve(f, weight, cost);
}

ImageField ScaledOperator::apply(const ImageField& u) const {
  ImageField out = op.apply(u);
  if (!row_scale.empty()) {
    require_same_shape(out, row_scale, "ScaledOperator");
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= row_scale[k];
  }
  return out;
}

ImageField ScaledOperator::adjoint(const ImageField& v) const {
  if (row_scale.empty()) return op.adjoint(v);
  require_same_shape(v, row_scale, "ScaledOperator");
  ImageField tmp = v;
  for (std::size_t k = 0; k < tmp.size(); ++k) tmp[k] *= row_scale[k];
  return op.adjoint(tmp);
}

double ScaledOperator::norm_bound() const {
  double smax = 1.0;
  if (!row_scale.empty()) {
    smax = 0.0;
    for (double s : row_scale.values()) smax = std::max(smax, std::abs(s));
  }
  return smax * op.norm_bound();
}

bool ScaledOperator::is_plain_identity() const {
  if (op.kind() != LinearOperator::Kind::Identity) return false;
  return std::all_of(row_scale.values().begin(), row_scale.values().end(), [](double s) { return s == 1.0; });
}

double generalized_objective(const ImageField& u, const ImageField& f, const ScaledOperator& a, double weight,
                             const CostSpec& cost) {
  const ImageField r = a.apply(u) - f;
  return 0.5 * dot(r, r) + weight * tv_value(u, cost);
}

void GeneralizedProxSolver::reset() {
  u_.reset();
  z_.reset();
  s_.reset();
  plain_.reset();
}

ProxResult GeneralizedProxSolver::solve(const ImageField& f, const ScaledOperator& a, double weight,
                                        const CostSpec& cost) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw std::invalid_argument("prox_generalized: weight must be >= 0");
  if (a.is_plain_identity()) return plain_.solve(f, weight, cost);

  if (a.op.is_diagonal()) {
    ImageField d = a.row_scale.empty() ? ImageField(f.rows(), f.cols(), 1.0) : a.row_scale;
    require_same_shape(d, f, "prox_generalized");
    if (a.op.kind() == LinearOperator::Kind::Mask) {
      const ImageField& m = a.op.mask_field();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] *= m[k];
    }
    return solve_diagonal(f, d, weight, cost);
  }
  return solve_general(f, a, weight, cost);
}

ProxResult GeneralizedProxSolver::solve_diagonal(const ImageField& f, const ImageField& d, double weight,
                                                 const CostSpec& cost) {
  const std::size_t m = f.rows(), n = f.cols(), N = f.size();
  const double l2 = 2.0 * weight * cost.l2_weight();

  // Pixelwise curvature of G(u) = 1/2 (d u - f)^2 + weight * gamma * u^2.
  ImageField h(m, n);
  double mu = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < N; ++k) {
    h[k] = d[k] * d[k] + l2;
    mu = std::min(mu, h[k]);
  }
  const bool gap_available = mu > 0.0;

  if (weight == 0.0 && gap_available) {
    ImageField u(m, n);
    for (std::size_t k = 0; k < N; ++k) u[k] = d[k] * f[k] / h[k];
    u_ = u;
    return ProxResult{std::move(u), true, 0, 0.0};
  }

  if (!u_ || !u_->same_shape(f)) u_ = f;
  if (!z_ || !dims_match(*z_, f)) z_ = Gradient{ImageField(m, n), ImageField(m, n)};
  ImageField& u = *u_;
  Gradient& z = *z_;
  ImageField ubar = u;

  double tau = 0.99 / std::sqrt(8.0);
  double sigma = 0.99 / std::sqrt(8.0);
  const CostSpec tv_only = CostSpec::tv(0.0);

  auto primal = [&](const ImageField& x) {
    double p = weight * tv_value(x, tv_only);
    for (std::size_t k = 0; k < N; ++k) {
      const double r = d[k] * x[k] - f[k];
      p += 0.5 * r * r + 0.5 * l2 * x[k] * x[k];
    }
    return p;
  };
  auto duality_gap = [&]() {
    const ImageField q = gradient_adjoint(z);  // G*(-D^T z)
    double dual_conj = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const double a = d[k] * f[k] - q[k];
      dual_conj += a * a / (2.0 * h[k]) - 0.5 * f[k] * f[k];
    }
    return primal(u) + dual_conj;
  };

  ProxResult result;
  double last_objective = primal(u);
  for (std::size_t it = 1; it <= opts_.max_inner; ++it) {
    const Gradient g = gradient(ubar);
    for (std::size_t k = 0; k < N; ++k) {
      z.dx[k] += sigma * g.dx[k];
      z.dy[k] += sigma * g.dy[k];
    }
    project_discs(z, weight);
    const ImageField q = gradient_adjoint(z);
    ImageField u_old = u;
    for (std::size_t k = 0; k < N; ++k) u[k] = (u[k] - tau * q[k] + tau * d[k] * f[k]) / (1.0 + tau * h[k]);
    double theta = 1.0;
    if (gap_available) {
      theta = 1.0 / std::sqrt(1.0 + 2.0 * mu * tau);
      tau *= theta;
      sigma /= theta;
    }
    for (std::size_t k = 0; k < N; ++k) ubar[k] = u[k] + theta * (u[k] - u_old[k]);

    result.iterations = it;
    if (it % 10 != 0) continue;
    if (gap_available) {
      const double obj = primal(u);
      result.accuracy = std::max(duality_gap(), 0.0) / (1.0 + std::abs(obj));
      if (result.accuracy <= opts_.inner_tol) {
        result.converged = true;
        break;
      }
    } else {
      const double obj = primal(u);
      result.accuracy = std::abs(last_objective - obj) / std::max(std::abs(obj), 1e-300);
      last_objective = obj;
      if (result.accuracy <= opts_.inner_tol) {
        result.converged = true;
        break;
      }
    }
  }
  result.u = u;
  return result;
}

ProxResult GeneralizedProxSolver::solve_general(const ImageField& f, const ScaledOperator& a, double weight,
                                                const CostSpec& cost) {
  const std::size_t m = f.rows(), n = f.cols(), N = f.size();
  const double l2 = 2.0 * weight * cost.l2_weight();
  if (!u_ || !u_->same_shape(f)) u_ = a.adjoint(f);
  if (!z_ || !dims_match(*z_, f)) z_ = Gradient{ImageField(m, n), ImageField(m, n)};
  if (!s_ || !s_->same_shape(f)) s_ = ImageField(m, n);
  ImageField& u = *u_;
  Gradient& z = *z_;
  ImageField& s = *s_;
  ImageField ubar = u;

  const double an = a.norm_bound();
  const double lnorm = std::sqrt(an * an + 8.0);
  const double tau = 0.99 / lnorm;
  const double sigma = 0.99 / lnorm;

  ProxResult result;
  double last_objective = generalized_objective(u, f, a, weight, cost);
  const double f_scale = std::max(1.0, norm(f));
  for (std::size_t it = 1; it <= opts_.max_inner; ++it) {
    const bool check = it % 10 == 0;
    std::optional<ImageField> s_old;
    std::optional<Gradient> z_old;
    if (check) {
      s_old = s;
      z_old = z;
    }
    const ImageField au = a.apply(ubar);
    for (std::size_t k = 0; k < N; ++k) s[k] = (s[k] + sigma * (au[k] - f[k])) / (1.0 + sigma);
    const Gradient g = gradient(ubar);
    for (std::size_t k = 0; k < N; ++k) {
      z.dx[k] += sigma * g.dx[k];
      z.dy[k] += sigma * g.dy[k];
    }
    project_discs(z, weight);
    const ImageField q = a.adjoint(s) + gradient_adjoint(z);
    ImageField u_old = u;
    for (std::size_t k = 0; k < N; ++k) u[k] = (u[k] - tau * q[k]) / (1.0 + tau * l2);
    for (std::size_t k = 0; k < N; ++k) ubar[k] = 2.0 * u[k] - u_old[k];

    result.iterations = it;
    if (!check) continue;
    // Primal and dual residuals of the saddle-point iteration; small values
    // certify a fixed point where a flat objective alone does not.
    ImageField du = u_old - u, ds = *s_old - s;
    const Gradient dz{z_old->dx - z.dx, z_old->dy - z.dy};
    const ImageField pres = du * (1.0 / tau) - a.adjoint(ds) - gradient_adjoint(dz);
    const ImageField ares = a.apply(du);
    const Gradient gres = gradient(du);
    const double dres = std::sqrt(dot(ds * (1.0 / sigma) - ares, ds * (1.0 / sigma) - ares) +
                                  dot(dz.dx * (1.0 / sigma) - gres.dx, dz.dx * (1.0 / sigma) - gres.dx) +
                                  dot(dz.dy * (1.0 / sigma) - gres.dy, dz.dy * (1.0 / sigma) - gres.dy));
    const double residual = (norm(pres) + dres) / f_scale;
    const double obj = generalized_objective(u, f, a, weight, cost);
    const double change = std::abs(last_objective - obj) / std::max(std::abs(obj), 1e-300);
    last_objective = obj;
    result.accuracy = std::max(change, residual);
    if (result.accuracy <= opts_.inner_tol) {
      result.converged = true;
      break;
    }
  }
  result.u = u;
  return result;
}

ProxResult prox_generalized(const ImageField& f, const ScaledOperator& a, double weight, const CostSpec& cost,
                            const ProxOptions& opts, const ImageField* warm_start) {
  GeneralizedProxSolver solver(opts);
  if (warm_start) solver.set_primal(*warm_start);
  return solver.solve(f, a, weight, cost);
}

double bregman_sym(const ImageField& u, const ImageField& v, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("bregman_sym: beta must be positive");
  require_same_shape(u, v, "bregman_sym");
  const Gradient gu = gradient(u), gv = gradient(v);
  const double b2 = beta * beta;
  double total = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double nu = std::sqrt(gu.dx[k] * gu.dx[k] + gu.dy[k] * gu.dy[k] + b2);
    const double nv = std::sqrt(gv.dx[k] * gv.dx[k] + gv.dy[k] * gv.dy[k] + b2);
    total += (gu.dx[k] / nu - gv.dx[k] / nv) * (gu.dx[k] - gv.dx[k]) +
             (gu.dy[k] / nu - gv.dy[k] / nv) * (gu.dy[k] - gv.dy[k]);
  }
  return std::max(total, 0.0);
}

}  // namespace smre
