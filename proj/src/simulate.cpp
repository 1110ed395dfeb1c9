#include "gfbm/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include "gfbm/errors.hpp"
#include "gfbm/report.hpp"
#include "gfbm/rng.hpp"

namespace gfbm {

std::string_view to_string(GridKind kind) noexcept {
  switch (kind) {
    case GridKind::Uniform: return "uniform";
    case GridKind::Geometric: return "geometric";
    case GridKind::Custom: return "custom";
  }
  return "custom";
}

GridKind grid_kind_from_string(std::string_view name) {
  if (name == "uniform") return GridKind::Uniform;
  if (name == "geometric") return GridKind::Geometric;
  if (name == "custom") return GridKind::Custom;
  throw InvalidArgument("unknown grid kind '" + std::string(name) + "'");
}

std::string Grid::descriptor() const {
  std::ostringstream out;
  out << to_string(kind) << ":n=" << size() << ":horizon=" << format_number(points.empty() ? 0.0 : horizon());
  if (kind == GridKind::Geometric) out << ":ratio=" << format_number(ratio);
  return out.str();
}

double default_geometric_ratio(const GfbmParams& p) {
  return 1.0 - std::pow(8.0, -1.0 / p.beta());
}

Grid build_grid(GridKind kind, int n, double horizon, double ratio) {
  if (n < 2 || static_cast<std::size_t>(n) > kMaxGridSize)
    throw BadSize("grid size must lie in [2, " + std::to_string(kMaxGridSize) + "]");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive");
  Grid g;
  g.kind = kind;
  g.points.resize(static_cast<std::size_t>(n));
  switch (kind) {
    case GridKind::Uniform:
      for (int k = 1; k <= n; ++k) g.points[k - 1] = horizon * k / n;
      break;
    case GridKind::Geometric:
      if (!(ratio > 0.0 && ratio < 1.0)) throw BadRatio("geometric ratio must lie in (0, 1)");
      g.ratio = ratio;
      for (int k = 1; k <= n; ++k) g.points[k - 1] = horizon * std::pow(ratio, n - k);
      if (!(g.points.front() > 0.0)) throw BadRatio("geometric grid underflows to 0");
      break;
    case GridKind::Custom:
      throw InvalidArgument("use custom_grid for explicit points");
  }
  g.points.back() = horizon;
  return g;
}

Grid build_grid(GridKind kind, int n, double horizon, double ratio, const GfbmParams& p) {
  if (kind == GridKind::Geometric && ratio == 0.0) ratio = default_geometric_ratio(p);
  return build_grid(kind, n, horizon, ratio);
}

Grid custom_grid(std::vector<double> points) {
  if (points.size() < 2 || points.size() > kMaxGridSize) throw BadSize("grid size must lie in [2, 4096]");
  if (!(points.front() > 0.0)) throw InvalidArgument("grid points must be positive");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i] > points[i - 1])) throw NotMonotone("grid points must be strictly increasing");
  Grid g;
  g.points = std::move(points);
  g.kind = GridKind::Custom;
  return g;
}

int default_workers() {
  if (const char* env = std::getenv("GFBM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(std::min(v, 256L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 0) workers = default_workers();
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < n_threads; ++k) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Eigen::MatrixXd assemble_covariance(const CovarianceOracle& oracle, const Grid& grid, ProcessTag tag,
                                    AssemblyMode mode, int workers) {
  const std::size_t n = grid.size();
  if (n < 2) throw BadSize("grid needs at least two points");
  if (mode == AssemblyMode::Auto)
    mode = grid.kind == GridKind::Geometric ? AssemblyMode::SelfSimilar : AssemblyMode::Direct;
  Eigen::MatrixXd c(n, n);
  const auto& t = grid.points;

  if (mode == AssemblyMode::SelfSimilar) {
    if (grid.kind != GridKind::Geometric) throw InvalidArgument("self-similar assembly needs a geometric grid");
    const double two_h = 2.0 * oracle.params().h();
    std::vector<double> unit(n);
    parallel_for(n, workers, [&](std::size_t m) {
      unit[m] = oracle(tag, 1.0, std::pow(grid.ratio, -static_cast<double>(m)));
    });
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = std::pow(t[i], two_h);
      for (std::size_t j = i; j < n; ++j) c(i, j) = c(j, i) = scale * unit[j - i];
    }
    return c;
  }

  parallel_for(n, workers, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) c(i, j) = oracle(tag, t[i], t[j]);
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) c(i, j) = c(j, i);
  return c;
}

CovarianceFactor factorize_covariance(const Eigen::MatrixXd& covariance) {
  const auto n = covariance.rows();
  const double mean_diag = covariance.trace() / static_cast<double>(n);
  constexpr int kMaxRetries = 3;
  double jitter = 0.0;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    if (attempt > 0) jitter = attempt == 1 ? 1e-12 * mean_diag : jitter * 10.0;
    if (jitter > 1e-6 * mean_diag) break;
    Eigen::MatrixXd shifted = covariance;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter, attempt};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance, Eigen::EigenvaluesOnly);
  std::ostringstream msg;
  msg << "Cholesky failed after jitter " << jitter << "; smallest eigenvalue " << eig.eigenvalues()(0);
  throw FactorizationFailure(msg.str());
}

PathSampler::PathSampler(const CovarianceOracle& oracle, Grid grid, ProcessTag tag, int workers)
    : grid_(std::move(grid)), workers_(workers > 0 ? workers : default_workers()) {
  factor_ = factorize_covariance(assemble_covariance(oracle, grid_, tag, AssemblyMode::Auto, workers_));
}

PathSampler::PathSampler(Grid grid, CovarianceFactor factor, int workers)
    : grid_(std::move(grid)), factor_(std::move(factor)),
      workers_(workers > 0 ? workers : default_workers()) {
  if (factor_.lower.rows() != static_cast<Eigen::Index>(grid_.size()))
    throw BadSize("factor and grid sizes differ");
}

void PathSampler::stream(std::size_t n_paths, std::uint64_t master_seed,
                         const BatchConsumer& consumer) const {
  const std::size_t n = grid_.size();
  const std::size_t batches = (n_paths + kBatchWidth - 1) / kBatchWidth;
  parallel_for(batches, workers_, [&](std::size_t b) {
    const std::size_t first = b * kBatchWidth;
    const std::size_t count = std::min(kBatchWidth, n_paths - first);
    Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(n, kBatchWidth);
    for (std::size_t c = 0; c < count; ++c) {
      NormalStream normals(substream_seed(master_seed, first + c));
      for (std::size_t r = 0; r < n; ++r) noise(r, c) = normals.normal();
    }
    const Eigen::MatrixXd block = factor_.lower.triangularView<Eigen::Lower>() * noise;
    consumer(first, block, count);
  });
}

Eigen::MatrixXd PathSampler::running_sup_at(std::size_t n_paths, std::uint64_t master_seed,
                                            const std::vector<double>& checkpoints) const {
  const auto& t = grid_.points;
  std::vector<std::size_t> upto;
  for (double c : checkpoints) {
    if (c > grid_.horizon() * (1.0 + 1e-12)) throw OutOfRange("checkpoint beyond the grid horizon");
    upto.push_back(static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), c * (1.0 + 1e-12)) - t.begin()));
  }
  std::vector<std::size_t> order(checkpoints.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return upto[a] < upto[b]; });

  Eigen::MatrixXd out(n_paths, checkpoints.size());
  stream(n_paths, master_seed, [&](std::size_t first, const Eigen::MatrixXd& block, std::size_t count) {
    for (std::size_t c = 0; c < count; ++c) {
      double running = 0.0;
      std::size_t row = 0;
      for (std::size_t k : order) {
        for (; row < upto[k]; ++row) running = std::max(running, std::abs(block(row, c)));
        out(first + c, k) = running;
      }
    }
  });
  return out;
}

PathEnsemble sample_ensemble(const CovarianceOracle& oracle, const Grid& grid, std::size_t n_paths,
                             std::uint64_t master_seed, int workers, ProcessTag tag) {
  if (n_paths < 1) throw InvalidArgument("n_paths must be at least 1");
  PathSampler sampler(oracle, grid, tag, workers);
  PathEnsemble e;
  e.grid = grid;
  e.alpha = oracle.params().alpha();
  e.gamma = oracle.params().gamma();
  e.n_paths = n_paths;
  e.master_seed = master_seed;
  e.factor_jitter_used = sampler.jitter();
  e.values.resize(n_paths, grid.size());
  sampler.stream(n_paths, master_seed, [&](std::size_t first, const Eigen::MatrixXd& block, std::size_t count) {
    e.values.middleRows(first, count) = block.leftCols(count).transpose();
  });
  return e;
}

std::vector<double> running_sup(const PathEnsemble& ensemble, double t, bool* too_coarse) {
  const auto& pts = ensemble.grid.points;
  if (!(t > 0.0)) throw OutOfRange("running_sup needs t > 0");
  if (t > ensemble.grid.horizon()) throw OutOfRange("t exceeds the grid horizon");
  const auto upto = static_cast<Eigen::Index>(std::upper_bound(pts.begin(), pts.end(), t) - pts.begin());
  if (too_coarse) *too_coarse = upto == 0;
  std::vector<double> out(ensemble.n_paths, 0.0);
  if (upto == 0) return out;
  for (std::size_t i = 0; i < ensemble.n_paths; ++i)
    out[i] = ensemble.values.row(static_cast<Eigen::Index>(i)).head(upto).cwiseAbs().maxCoeff();
  return out;
}

void write_ensemble_csv(const PathEnsemble& e, const std::string& path) {
  std::ostringstream out;
  out << "# gfbm-ensemble v1, alpha=" << format_number(e.alpha) << ", gamma=" << format_number(e.gamma)
      << ", seed=" << e.master_seed << ", grid=" << e.grid.descriptor() << '\n';
  for (Eigen::Index i = 0; i < e.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.values.cols(); ++j) {
      if (j) out << ',';
      out << format_number(e.values(i, j));
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

} // namespace gfbm
