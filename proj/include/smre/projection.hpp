#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "smre/grid.hpp"
#include "smre/image.hpp"

namespace smre {

/// { v : sum_{S} (v - center)^2 <= radius2 }. A cylinder in R^{m x n}: the
/// pixels outside S are unconstrained.
struct Cylinder {
  PixelRect rect;
  std::shared_ptr<const ImageField> center;
  double radius2 = 1.0;
};

/// { v : v >= 0 pixelwise }.
struct NonnegOrthant {};

using ConvexSet = std::variant<Cylinder, NonnegOrthant>;

/// Euclidean projection onto the Gaussian constraint set C_S around Y with
/// radius^2 = sigma2 / c_S.
ImageField project_cylinder(const ImageField& v, const PixelRect& s, const ImageField& y, double c_s,
                            double sigma2);

ImageField project_orthant(const ImageField& v);

/// Projection onto { w : sum_S (w + offset - x)^2 <= radius2 }, i.e. the ball
/// around x - offset restricted to S.
ImageField project_shifted_cylinder(const ImageField& w, const PixelRect& s, const ImageField& x,
                                    const ImageField& offset, double radius2);

/// One cylinder per set of a calibrated system, radius^2 = sigma2 / c_S.
std::vector<ConvexSet> cylinders_for(const SubsetSystem& sys, std::shared_ptr<const ImageField> center,
                                     double sigma2);

struct DykstraOptions {
  double tol = 1e-6;
  std::size_t max_sweeps = 500;
  /// Sweep only sets that were violated or carry a correction; re-scan all
  /// sets every `rescan_every` sweeps and before accepting convergence.
  bool active_set = false;
  std::size_t rescan_every = 5;
};

struct DykstraResult {
  ImageField point;
  bool converged = false;
  std::size_t sweeps = 0;
  double max_change = 0.0;
};

/// Cyclic Dykstra iteration for the projection of v0 onto the intersection.
/// Stops once a full sweep moves no pixel by more than tol.
DykstraResult dykstra(const ImageField& v0, std::span<const ConvexSet> sets, const DykstraOptions& opts = {});

}  // namespace smre
