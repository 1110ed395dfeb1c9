#include "gfbm/lil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gfbm/errors.hpp"

namespace gfbm {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

namespace {

/// Per path R(t_k) for every checkpoint: rows are paths, columns checkpoints.
Eigen::MatrixXd process_statistics(const CovarianceOracle& oracle, const LilOptions& o, const std::vector<int>& ks,
                                   std::vector<double>& checkpoints, std::uint64_t seed, std::size_t& grid_size) {
  const GfbmParams& p = oracle.params();
  const bool zero = o.direction == Direction::Zero;
  // Top of the grid and number of octaves spanned.
  const double horizon = zero ? std::ldexp(1.0, -o.k_min) : std::ldexp(1.0, o.k_max);
  const int octaves = o.k_max - o.k_min + o.lead_octaves;
  const int n = octaves * o.points_per_octave + 1;
  const Grid grid = build_grid(GridKind::Geometric, n, horizon, std::exp2(-1.0 / o.points_per_octave));
  grid_size = grid.size();
  checkpoints.clear();
  for (int k : ks) checkpoints.push_back(zero ? std::ldexp(1.0, -k) : std::ldexp(1.0, k));
  const PathSampler sampler(oracle, grid, o.tag, o.workers);
  Eigen::MatrixXd sup = sampler.running_sup_at(o.paths_per_seed, seed, checkpoints);
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const double t = checkpoints[k];
    const double loglog = std::log(std::abs(std::log(t)));
    sup.col(static_cast<Eigen::Index>(k)) *= std::pow(loglog, p.beta()) / std::pow(t, p.h());
  }
  return sup;
}

Eigen::MatrixXd fixed_point_statistics(const CovarianceOracle& oracle, const LilOptions& o, const std::vector<int>& ks,
                                       std::vector<double>& checkpoints, std::uint64_t seed, std::size_t& grid_size) {
  const GfbmParams& p = oracle.params();
  const double t = o.fixed_point_t;
  const double widest = std::ldexp(1.0, -o.k_min);
  if (!(t > widest)) throw InvalidArgument("fixed-point LIL needs t > 2^{-k_min}");
  const int per_side = (o.k_max - o.k_min + o.lead_octaves) * o.points_per_octave + 1;
  std::vector<double> offsets(static_cast<std::size_t>(per_side));
  for (int j = 0; j < per_side; ++j) offsets[j] = widest * std::exp2(-static_cast<double>(j) / o.points_per_octave);
  std::vector<double> pts;
  for (double h : offsets) pts.push_back(t - h);
  pts.push_back(t);
  for (auto it = offsets.rbegin(); it != offsets.rend(); ++it) pts.push_back(t + *it);
  const Grid grid = custom_grid(pts);
  grid_size = grid.size();
  const auto centre = static_cast<Eigen::Index>(per_side);

  checkpoints.clear();
  for (int k : ks) checkpoints.push_back(std::ldexp(1.0, -k));
  const PathSampler sampler(oracle, grid, o.tag, o.workers);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(o.paths_per_seed), static_cast<Eigen::Index>(ks.size()));
  sampler.stream(o.paths_per_seed, seed, [&](std::size_t first, const Eigen::MatrixXd& block, std::size_t count) {
    for (std::size_t c = 0; c < count; ++c) {
      const auto col = static_cast<Eigen::Index>(c);
      const double x0 = block(centre, col);
      // Walk outwards from t, widest offsets last.
      double running = 0.0;
      int j = per_side - 1;
      for (std::size_t k = ks.size(); k-- > 0;) {
        const double r = checkpoints[k];
        for (; j >= 0 && offsets[static_cast<std::size_t>(j)] <= r * (1.0 + 1e-12); --j) {
          running = std::max(running, std::abs(block(j, col) - x0));
          running = std::max(running, std::abs(block(2 * centre - j, col) - x0));
        }
        const double loglog = std::log(std::log(1.0 / r));
        out(static_cast<Eigen::Index>(first + c), static_cast<Eigen::Index>(k)) =
            running * std::pow(loglog, p.beta()) / std::pow(r, p.beta());
      }
    }
  });
  return out;
}

} // namespace

LilReport lil_statistic(const CovarianceOracle& oracle, const LilOptions& o) {
  if (!(4 <= o.k_min && o.k_min <= o.k_max && o.k_max <= 24)) throw InvalidArgument("k_range must lie in [4, 24]");
  if (o.seeds.empty()) throw InvalidArgument("at least one seed is required");
  if (o.paths_per_seed < 1) throw InvalidArgument("paths_per_seed must be positive");
  if (o.points_per_octave < 1 || o.lead_octaves < 0) throw InvalidArgument("bad grid density");

  LilReport r;
  r.options = o;
  for (int k = o.k_min; k <= o.k_max; ++k) r.ks.push_back(k);

  std::vector<double> all;
  std::vector<double> seed_medians;
  for (std::uint64_t seed : o.seeds) {
    const Eigen::MatrixXd stats = o.mode == LilMode::Process
                                      ? process_statistics(oracle, o, r.ks, r.checkpoints, seed, r.grid_size)
                                      : fixed_point_statistics(oracle, o, r.ks, r.checkpoints, seed, r.grid_size);
    LilSeedResult s;
    s.seed = seed;
    const Eigen::Index K = stats.cols();
    // Increasing k always moves towards the limit point.
    Eigen::MatrixXd running(stats.rows(), K);
    for (Eigen::Index i = 0; i < stats.rows(); ++i) {
      double m = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (Eigen::Index k = 0; k < K; ++k) {
        if (stats(i, k) < m) {
          m = stats(i, k);
          arg = r.ks[static_cast<std::size_t>(k)];
        }
        running(i, k) = m;
      }
      s.minima.push_back(m);
      s.argmin_k.push_back(arg);
      if (!(std::isfinite(m) && m > 0.0)) r.all_positive_finite = false;
    }
    for (Eigen::Index k = 0; k < K; ++k) {
      std::vector<double> col(running.col(k).data(), running.col(k).data() + running.rows());
      s.running_min_median.push_back(median_of(col));
    }
    s.median = median_of(s.minima);
    seed_medians.push_back(s.median);
    all.insert(all.end(), s.minima.begin(), s.minima.end());
    r.seeds.push_back(std::move(s));
  }
  r.median = median_of(all);
  r.smallest = *std::min_element(all.begin(), all.end());
  r.largest = *std::max_element(all.begin(), all.end());
  r.seed_median_spread = *std::max_element(seed_medians.begin(), seed_medians.end()) -
                         *std::min_element(seed_medians.begin(), seed_medians.end());
  return r;
}

nlohmann::json LilReport::to_json() const {
  nlohmann::json seeds_json = nlohmann::json::array();
  for (const auto& s : seeds)
    seeds_json.push_back({{"seed", s.seed}, {"median", s.median}, {"running_min_median", s.running_min_median}});
  return {{"direction", to_string(options.direction)},
          {"process", to_string(options.tag)},
          {"mode", options.mode == LilMode::Process ? "process" : "fixed-point"},
          {"k_min", options.k_min},
          {"k_max", options.k_max},
          {"paths_per_seed", options.paths_per_seed},
          {"grid_size", grid_size},
          {"median", median},
          {"smallest", smallest},
          {"largest", largest},
          {"seed_median_spread", seed_median_spread},
          {"all_positive_finite", all_positive_finite},
          {"exploratory", options.tag == ProcessTag::Y},
          {"seeds", seeds_json}};
}

} // namespace gfbm
