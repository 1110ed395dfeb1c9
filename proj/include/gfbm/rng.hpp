#pragma once

#include <cstdint>
#include <random>

namespace gfbm {

/// One step of the splitmix64 generator; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seed of the independent substream `index` under `master_seed`.
std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

/// Standard normal variates by the inverse-CDF transform of 53-bit uniforms
/// drawn from a 64-bit Mersenne twister.
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
  }
  double normal();

private:
  std::mt19937_64 engine_;
};

/// Phi^{-1}(u) for u in (0, 1).
double standard_normal_quantile(double u);

} // namespace gfbm
