#pragma once

#include <cstdint>
#include <random>

#include "smre/image.hpp"

namespace smre {

/// Name recorded alongside simulated quantiles; bump when the stream changes.
inline constexpr const char* kGeneratorName = "mt19937_64+seed_seq/polar-v1";

/// Standard-normal stream for one (seed, substream) pair.
///
/// Seeded through std::seed_seq and converted with the polar method, both of
/// which are fully specified, so the draws are identical on every platform.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t substream);

  double uniform();  // in (0, 1)
  double normal();

  /// Fills the field with i.i.d. N(0, 1) draws in row-major order.
  void fill(ImageField& f);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace smre
