#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfbm/covariance.hpp"

namespace gfbm {

enum class GridKind { Uniform, Geometric, Custom };

std::string_view to_string(GridKind kind) noexcept;
GridKind grid_kind_from_string(std::string_view name);

/// Strictly increasing positive time points; X(0) = 0 is implicit.
struct Grid {
  std::vector<double> points;
  GridKind kind = GridKind::Custom;
  double ratio = 0.0;  // geometric kind only

  std::size_t size() const noexcept { return points.size(); }
  double horizon() const { return points.back(); }
  /// Compact text form, e.g. "geometric:n=129:horizon=1:ratio=0.95".
  std::string descriptor() const;
};

inline constexpr std::size_t kMaxGridSize = 4096;

/// Uniform: t_k = k * horizon / n. Geometric: t_k = horizon * ratio^{n-k}.
/// A ratio of 0 for the geometric kind selects default_geometric_ratio(p) and
/// therefore needs params; use the overload below.
Grid build_grid(GridKind kind, int n, double horizon, double ratio = 0.0);
Grid build_grid(GridKind kind, int n, double horizon, double ratio, const GfbmParams& p);
Grid custom_grid(std::vector<double> points);

/// Smallest ratio r with (1 - r)^beta <= 1/8, so the coarsest panel's
/// Z-increment scale stays below horizon^H / 8.
double default_geometric_ratio(const GfbmParams& p);

enum class AssemblyMode {
  Auto,         // self-similar for geometric grids, direct otherwise
  Direct,       // one quadrature per unordered pair
  SelfSimilar,  // cov(t_i, t_j) = t_i^{2H} cov(1, t_j / t_i); geometric grids only
};

Eigen::MatrixXd assemble_covariance(const CovarianceOracle& oracle, const Grid& grid,
                                    ProcessTag tag = ProcessTag::X,
                                    AssemblyMode mode = AssemblyMode::Auto, int workers = 0);

/// Lower Cholesky factor with the jitter that made it succeed.
struct CovarianceFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
  int retries = 0;
};

/// Jitter schedule: 0, then 1e-12 * trace / n, times 10 per retry, at most
/// three retries. Throws FactorizationFailure with the smallest eigenvalue.
CovarianceFactor factorize_covariance(const Eigen::MatrixXd& covariance);

/// Worker count from GFBM_THREADS (unset or 0 means hardware concurrency).
int default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

/// Draws Gaussian paths L z in fixed-width batches. Path i uses the noise
/// substream substream_seed(master_seed, i), and every batch is computed
/// with the same column width, so results do not depend on the worker count.
class PathSampler {
public:
  static constexpr std::size_t kBatchWidth = 64;

  PathSampler(const CovarianceOracle& oracle, Grid grid, ProcessTag tag = ProcessTag::X,
              int workers = 0);
  PathSampler(Grid grid, CovarianceFactor factor, int workers = 0);

  const Grid& grid() const noexcept { return grid_; }
  const CovarianceFactor& factor() const noexcept { return factor_; }
  double jitter() const noexcept { return factor_.jitter; }
  int workers() const noexcept { return workers_; }

  /// consumer(first_path, block, count): block is grid.size() x kBatchWidth,
  /// its first `count` columns are paths first_path, ..., first_path+count-1.
  /// Calls may run concurrently; consumers must write to disjoint storage.
  using BatchConsumer = std::function<void(std::size_t, const Eigen::MatrixXd&, std::size_t)>;
  void stream(std::size_t n_paths, std::uint64_t master_seed, const BatchConsumer& consumer) const;

  /// Running sup of |X| at each checkpoint: result(i, k) = max_{t_j <= checkpoints[k]} |X_i(t_j)|.
  Eigen::MatrixXd running_sup_at(std::size_t n_paths, std::uint64_t master_seed,
                                 const std::vector<double>& checkpoints) const;

private:
  Grid grid_;
  CovarianceFactor factor_;
  int workers_;
};

struct PathEnsemble {
  Grid grid;
  double alpha = 0.0;
  double gamma = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t master_seed = 0;
  Eigen::MatrixXd values;  // n_paths x grid.size(), row per path
  double factor_jitter_used = 0.0;
};

PathEnsemble sample_ensemble(const CovarianceOracle& oracle, const Grid& grid, std::size_t n_paths,
                             std::uint64_t master_seed, int workers = 0,
                             ProcessTag tag = ProcessTag::X);

/// Per path, max |value| over grid points <= t. Returns zeros (and sets
/// *too_coarse when given) if t precedes the first grid point.
std::vector<double> running_sup(const PathEnsemble& ensemble, double t, bool* too_coarse = nullptr);

/// Header line then one row per path, 17 significant digits.
void write_ensemble_csv(const PathEnsemble& ensemble, const std::string& path);

} // namespace gfbm
