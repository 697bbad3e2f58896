#include "smre/random.hpp"

#include <cmath>

namespace smre {

namespace {
std::seed_seq make_seq(std::uint64_t seed, std::uint64_t substream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32)};
}
}  // namespace

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t substream) {
  auto seq = make_seq(seed, substream);
  engine_.seed(seq);
}

double NormalStream::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double x, y, s;
  do {
    x = 2.0 * uniform() - 1.0;
    y = 2.0 * uniform() - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = y * scale;
  has_spare_ = true;
  return x * scale;
}

void NormalStream::fill(ImageField& f) {
  for (double& v : f.values()) v = normal();
}

}  // namespace smre
