#pragma once

#include "smre/admm.hpp"
#include "smre/grid.hpp"
#include "smre/image.hpp"
#include "smre/operators.hpp"
#include "smre/prox.hpp"

namespace smre {

struct PoissonConfig {
  double delta = 0.01;
  double c_anscombe = 3.0 / 8.0;
  AdmmConfig admm{};

  void validate() const;
};

/// X = 2 sqrt(Y + c), pixelwise. Rejects negative counts.
ImageField anscombe(const ImageField& counts, double c = 3.0 / 8.0);

/// 3x3 box average (window clipped at the border).
ImageField box_smooth3(const ImageField& f);

/// Linearized ADMM for Poisson data: the constraint T(2 sqrt(Ku) - X) <= 1 is
/// relinearized around y_k = sqrt(max(K u_k, delta)) every outer iteration.
/// The report's v_hat holds the slack w. Residual variance after the
/// transform is taken as 1.
SolveReport poisson_admm(const ImageField& counts, const LinearOperator& k, const SubsetSystem& sys,
                         const CostSpec& cost, const PoissonConfig& cfg = {});

}  // namespace smre
