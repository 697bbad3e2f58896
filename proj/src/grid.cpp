#include "smre/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "smre/statistics.hpp"

namespace smre {

SubsetSystem::SubsetSystem(std::string system_id, std::size_t rows, std::size_t cols,
                           std::vector<PixelRect> sets)
    : id_(std::move(system_id)), rows_(rows), cols_(cols), sets_(std::move(sets)) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("SubsetSystem: grid dimensions must be positive");
  if (sets_.empty()) throw std::invalid_argument("SubsetSystem: system must contain at least one set");
  if (id_.empty() || id_.find_first_of(" \t\n|") != std::string::npos)
    throw std::invalid_argument("SubsetSystem: id must be a non-empty token without blanks or '|'");

  std::map<std::size_t, std::size_t> index_of;
  for (const auto& r : sets_) {
    if (!r.fits(rows, cols)) throw std::invalid_argument("SubsetSystem: set outside the grid");
    index_of.emplace(r.cardinality(), 0);
  }
  for (auto& [card, idx] : index_of) {
    idx = groups_.size();
    const auto m = fourth_root_moments(card);
    groups_.push_back({ScaleInfo{card, m.mu, m.sigma}, {}});
  }
  group_of_.resize(sets_.size());
  for (std::size_t k = 0; k < sets_.size(); ++k) {
    group_of_[k] = index_of[sets_[k].cardinality()];
    groups_[group_of_[k]].members.push_back(k);
  }
}

double SubsetSystem::weight(std::size_t k) const {
  if (!calibrated()) throw StateError("subset system '" + id_ + "' has no scale weights");
  return weights_[k];
}

SubsetSystem SubsetSystem::with_weights(std::vector<double> weights, std::optional<double> q_alpha) const {
  if (weights.size() != sets_.size()) throw std::invalid_argument("with_weights: one weight per set required");
  for (double c : weights)
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("with_weights: weights must be positive");
  SubsetSystem out = *this;
  out.weights_ = std::move(weights);
  out.q_alpha_ = q_alpha;
  return out;
}

SubsetSystem build_system_s0(std::size_t rows, std::size_t cols, std::size_t max_side) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("build_system_s0: grid dimensions must be positive");
  if (max_side < 1 || max_side > std::min(rows, cols))
    throw std::invalid_argument("build_system_s0: max_side must lie in [1, min(m, n)]");
  std::vector<PixelRect> sets;
  std::size_t count = 0;
  for (std::size_t s = 1; s <= max_side; ++s) count += (rows - s + 1) * (cols - s + 1);
  sets.reserve(count);
  for (std::size_t s = 1; s <= max_side; ++s)
    for (std::size_t i = 0; i + s <= rows; ++i)
      for (std::size_t j = 0; j + s <= cols; ++j) sets.push_back({i, j, s, s});
  return SubsetSystem("S0-" + std::to_string(max_side), rows, cols, std::move(sets));
}

SubsetSystem build_system_s2(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("build_system_s2: grid dimensions must be positive");
  const std::size_t extent = std::max(rows, cols);
  std::size_t top_level = 0;
  while ((std::size_t{1} << top_level) < extent) ++top_level;

  std::vector<PixelRect> sets;
  for (std::size_t l = 0; l <= top_level; ++l) {
    const std::size_t side = std::size_t{1} << l;
    for (std::size_t i = 0; i < rows; i += side)
      for (std::size_t j = 0; j < cols; j += side)
        sets.push_back({i, j, std::min(side, rows - i), std::min(side, cols - j)});
  }
  return SubsetSystem("S2", rows, cols, std::move(sets));
}

SubsetSystem build_system_global(std::size_t rows, std::size_t cols) {
  return SubsetSystem("global", rows, cols, {PixelRect{0, 0, rows, cols}});
}

SubsetSystem build_system_custom(std::size_t rows, std::size_t cols, std::vector<PixelRect> sets) {
  // FNV-1a over the set coordinates.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(rows);
  mix(cols);
  for (const auto& r : sets) {
    mix(r.top);
    mix(r.left);
    mix(r.height);
    mix(r.width);
  }
  std::ostringstream id;
  id << "custom-" << std::hex << h;
  return SubsetSystem(id.str(), rows, cols, std::move(sets));
}

template <class Fn>
void SummedAreaTable::build(const ImageField& f, Fn&& fn) {
  const std::size_t w = cols_ + 1;
  table_.assign((rows_ + 1) * w, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double row = 0.0;
    const double* src = f.data() + i * cols_;
    double* above = table_.data() + i * w;
    double* cur = table_.data() + (i + 1) * w;
    for (std::size_t j = 0; j < cols_; ++j) {
      row += fn(src[j]);
      cur[j + 1] = above[j + 1] + row;
    }
  }
}

SummedAreaTable::SummedAreaTable(const ImageField& f) : rows_(f.rows()), cols_(f.cols()) {
  build(f, [](double x) { return x; });
}

SummedAreaTable SummedAreaTable::of_squares(const ImageField& f) {
  SummedAreaTable t(f.rows(), f.cols());
  t.build(f, [](double x) { return x * x; });
  return t;
}

void write_system(std::ostream& out, const SubsetSystem& sys) {
  out << "SMRE-SYS v1 " << sys.id() << ' ' << sys.rows() << ' ' << sys.cols() << '\n';
  for (const auto& r : sys.sets()) out << r.top << ' ' << r.left << ' ' << r.height << ' ' << r.width << '\n';
}

SubsetSystem read_system(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_system: missing header");
  std::istringstream header(line);
  std::string magic, version, id;
  std::size_t rows = 0, cols = 0;
  if (!(header >> magic >> version >> id >> rows >> cols) || magic != "SMRE-SYS" || version != "v1")
    throw std::runtime_error("read_system: malformed header '" + line + "'");

  std::vector<PixelRect> sets;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    PixelRect r;
    if (!(ls >> r.top >> r.left >> r.height >> r.width))
      throw std::runtime_error("read_system: malformed set on line " + std::to_string(lineno));
    sets.push_back(r);
  }
  return SubsetSystem(id, rows, cols, std::move(sets));
}

}  // namespace smre
