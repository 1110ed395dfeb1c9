#include "gfbm/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

namespace gfbm {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  std::uint64_t state = master_seed;
  const std::uint64_t base = splitmix64(state);
  std::uint64_t mixed = base ^ (index * 0xD1B54A32D192ED03ULL);
  splitmix64(mixed);
  return splitmix64(mixed);
}

double standard_normal_quantile(double u) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double NormalStream::normal() { return standard_normal_quantile(uniform()); }

} // namespace gfbm
