#include "smre/projection.hpp"

#include <algorithm>
#include <cmath>

namespace smre {

namespace {

template <class Fn>
void for_each_in(const PixelRect& r, std::size_t cols, Fn&& fn) {
  for (std::size_t i = r.top; i < r.top + r.height; ++i) {
    const std::size_t row = i * cols;
    for (std::size_t j = r.left; j < r.left + r.width; ++j) fn(row + j);
  }
}

// Ball projection of v|_S around center|_S, in place.
void ball_project_inplace(ImageField& v, const PixelRect& s, const ImageField& center, double radius2) {
  double ss = 0.0;
  for_each_in(s, v.cols(), [&](std::size_t k) {
    const double d = v[k] - center[k];
    ss += d * d;
  });
  if (ss <= radius2) return;
  const double scale = std::sqrt(radius2 / ss);
  for_each_in(s, v.cols(), [&](std::size_t k) { v[k] = center[k] + (v[k] - center[k]) * scale; });
}

void check_rect(const ImageField& v, const PixelRect& s, const char* what) {
  if (!s.fits(v.rows(), v.cols())) throw std::invalid_argument(std::string(what) + ": set outside the grid");
}

}  // namespace

ImageField project_cylinder(const ImageField& v, const PixelRect& s, const ImageField& y, double c_s,
                            double sigma2) {
  if (!(c_s > 0.0) || !(sigma2 > 0.0)) throw std::invalid_argument("project_cylinder: c_S and sigma2 must be positive");
  require_same_shape(v, y, "project_cylinder");
  check_rect(v, s, "project_cylinder");
  ImageField out = v;
  ball_project_inplace(out, s, y, sigma2 / c_s);
  return out;
}

ImageField project_orthant(const ImageField& v) {
  ImageField out = v;
  for (double& x : out.values()) x = std::max(x, 0.0);
  return out;
}

ImageField project_shifted_cylinder(const ImageField& w, const PixelRect& s, const ImageField& x,
                                    const ImageField& offset, double radius2) {
  if (!(radius2 > 0.0)) throw std::invalid_argument("project_shifted_cylinder: radius2 must be positive");
  require_same_shape(w, x, "project_shifted_cylinder");
  require_same_shape(w, offset, "project_shifted_cylinder");
  check_rect(w, s, "project_shifted_cylinder");
  ImageField out = w;
  ball_project_inplace(out, s, x - offset, radius2);
  return out;
}

std::vector<ConvexSet> cylinders_for(const SubsetSystem& sys, std::shared_ptr<const ImageField> center,
                                     double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("cylinders_for: sigma2 must be positive");
  if (center->rows() != sys.rows() || center->cols() != sys.cols())
    throw std::invalid_argument("cylinders_for: center and system dimensions differ");
  std::vector<ConvexSet> sets;
  sets.reserve(sys.size());
  for (std::size_t k = 0; k < sys.size(); ++k) sets.push_back(Cylinder{sys.set(k), center, sigma2 / sys.weight(k)});
  return sets;
}

namespace {

// Correction increments live in one flat buffer: |S| slots per cylinder,
// m*n slots for the orthant.
class DykstraWorkspace {
 public:
  DykstraWorkspace(std::span<const ConvexSet> sets, std::size_t rows, std::size_t cols)
      : sets_(sets), cols_(cols), offset_(sets.size() + 1, 0), nonzero_(sets.size(), 0) {
    for (std::size_t i = 0; i < sets.size(); ++i) {
      std::size_t len = rows * cols;
      if (const auto* c = std::get_if<Cylinder>(&sets[i])) {
        if (!c->rect.fits(rows, cols)) throw std::invalid_argument("dykstra: cylinder outside the grid");
        if (!c->center || c->center->rows() != rows || c->center->cols() != cols)
          throw std::invalid_argument("dykstra: cylinder center has wrong dimensions");
        if (!(c->radius2 > 0.0)) throw std::invalid_argument("dykstra: radius2 must be positive");
        len = c->rect.cardinality();
      }
      offset_[i + 1] = offset_[i] + len;
    }
    corr_.assign(offset_.back(), 0.0);
  }

  bool has_correction(std::size_t i) const { return nonzero_[i] != 0; }

  // Applies one Dykstra step for set i to x. Returns whether the set was
  // violated by x + correction.
  bool step(std::size_t i, ImageField& x) {
    double* inc = corr_.data() + offset_[i];
    if (const auto* c = std::get_if<Cylinder>(&sets_[i])) return step_cylinder(*c, inc, x, i);
    return step_orthant(inc, x, i);
  }

 private:
  bool step_cylinder(const Cylinder& c, double* inc, ImageField& x, std::size_t i) {
    const ImageField& center = *c.center;
    double ss = 0.0;
    std::size_t t = 0;
    for_each_in(c.rect, cols_, [&](std::size_t k) {
      x[k] += inc[t++];
      const double d = x[k] - center[k];
      ss += d * d;
    });
    if (ss <= c.radius2) {
      if (nonzero_[i]) std::fill(inc, inc + c.rect.cardinality(), 0.0);
      nonzero_[i] = 0;
      return false;
    }
    const double scale = std::sqrt(c.radius2 / ss);
    t = 0;
    for_each_in(c.rect, cols_, [&](std::size_t k) {
      const double y = x[k];
      x[k] = center[k] + (y - center[k]) * scale;
      inc[t++] = y - x[k];
    });
    nonzero_[i] = 1;
    return true;
  }

  bool step_orthant(double* inc, ImageField& x, std::size_t i) {
    bool violated = false;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double y = x[k] + inc[k];
      if (y < 0.0) {
        violated = true;
        x[k] = 0.0;
        inc[k] = y;
      } else {
        x[k] = y;
        inc[k] = 0.0;
      }
    }
    nonzero_[i] = violated ? 1 : 0;
    return violated;
  }

  std::span<const ConvexSet> sets_;
  std::size_t cols_;
  std::vector<std::size_t> offset_;
  std::vector<char> nonzero_;
  std::vector<double> corr_;
};

}  // namespace

DykstraResult dykstra(const ImageField& v0, std::span<const ConvexSet> sets, const DykstraOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("dykstra: tol must be positive");
  if (opts.max_sweeps < 1) throw std::invalid_argument("dykstra: max_sweeps must be >= 1");
  DykstraResult result{v0, false, 0, 0.0};
  if (sets.empty()) {
    result.converged = true;
    return result;
  }
  DykstraWorkspace ws(sets, v0.rows(), v0.cols());
  ImageField& x = result.point;
  ImageField before = x;
  if (sets.size() == 1) {
    // A single projection is already exact.
    ws.step(0, x);
    result.sweeps = 1;
    result.max_change = max_abs_diff(x, before);
    result.converged = true;
    return result;
  }

  std::vector<char> active(sets.size(), 1);
  const std::size_t rescan = std::max<std::size_t>(opts.rescan_every, 1);
  std::size_t since_full = 0;
  bool full = true;

  while (result.sweeps < opts.max_sweeps) {
    std::copy(x.data(), x.data() + x.size(), before.data());
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (!full && !active[i]) continue;
      const bool violated = ws.step(i, x);
      active[i] = violated || ws.has_correction(i);
    }
    ++result.sweeps;
    result.max_change = max_abs_diff(x, before);

    if (!opts.active_set) {
      if (result.max_change <= opts.tol) {
        result.converged = true;
        break;
      }
      continue;
    }
    // Active-set mode: convergence is only accepted on a full sweep.
    if (result.max_change <= opts.tol) {
      if (full) {
        result.converged = true;
        break;
      }
      full = true;
      since_full = 0;
      continue;
    }
    since_full = full ? 0 : since_full + 1;
    full = since_full + 1 >= rescan;
  }
  return result;
}

}  // namespace smre
