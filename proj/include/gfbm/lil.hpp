#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "gfbm/lowerclass.hpp"
#include "gfbm/simulate.hpp"

namespace gfbm {

enum class LilMode {
  Process,     // R(t_k) = M(t_k) (ln ln)^beta / t_k^H at t_k = 2^{-k} or 2^k
  FixedPoint,  // sup_{|h| <= r} |X(t+h) - X(t)| (ln ln 1/r)^beta / r^beta at r_k = 2^{-k}
};

struct LilOptions {
  Direction direction = Direction::Zero;
  ProcessTag tag = ProcessTag::X;
  LilMode mode = LilMode::Process;
  int k_min = 4;
  int k_max = 24;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t paths_per_seed = 50;
  int points_per_octave = 24;
  /// Octaves simulated below the smallest checkpoint so the running sup sees
  /// the path near 0.
  int lead_octaves = 8;
  double fixed_point_t = 1.0;
  int workers = 0;
};

struct LilSeedResult {
  std::uint64_t seed = 0;
  std::vector<double> minima;     // per path, min over k
  std::vector<int> argmin_k;
  /// Per checkpoint: median over paths of min_{k' <= k} R(t_{k'}).
  std::vector<double> running_min_median;
  double median = 0.0;
};

struct LilReport {
  LilOptions options;
  std::vector<int> ks;
  std::vector<double> checkpoints;
  std::vector<LilSeedResult> seeds;
  double median = 0.0;            // over all paths and seeds
  double smallest = 0.0;
  double largest = 0.0;
  double seed_median_spread = 0.0; // max - min of per-seed medians
  bool all_positive_finite = true;
  std::size_t grid_size = 0;

  nlohmann::json to_json() const;
};

/// Throws InvalidArgument unless 4 <= k_min <= k_max <= 24.
LilReport lil_statistic(const CovarianceOracle& oracle, const LilOptions& options);

double median_of(std::vector<double> values);

} // namespace gfbm
