#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace gfbm {

/// Every knob of every subcommand. Flags bind to these fields, a JSON config
/// file pre-populates them, and the manifest echoes the effective values.
struct RunConfig {
  std::string subcommand;

  double alpha = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  bool fbm_limit = false;
  bool paper_defaults = false;
  std::uint64_t seed = 1;
  std::string output_dir;
  double rel_tol = 1e-10;

  // cov
  double s = 1.0;
  double t = 1.0;
  std::string process = "X";
  bool lamperti = false;

  // simulate / smallball grids
  std::string grid = "uniform";
  int grid_n = 1025;
  double grid_ratio = 0.0;
  double horizon = 1.0;
  std::size_t paths = 10000;

  // smallball
  std::vector<double> thetas{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  bool refine = false;

  // classify
  std::string model = "kappa=1,beta=0.5";
  std::string empirical;  // smallball.csv to use instead of the model
  double beta = 0.0;      // index for the empirical table; 0 means the params' beta
  std::string family = "f-lambda";
  std::string lambda_grid = "0.25:4:16";
  double lambda = 0.0;    // > 0: evaluate this single lambda instead of a grid
  std::string direction = "zero";

  // sequences
  std::string variant = "sufficiency";
  double L = 0.0;         // 0 selects 2H + 1
  int terms = 200;
  double c = 1.0;         // constant family
  double eps = 0.1;
  double b = 1.0;
  long long band_n = 100000;
  double k1 = 1.0;

  // lil
  std::string mode = "process";
  int k_min = 4;
  int k_max = 24;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t paths_per_seed = 50;
  int points_per_octave = 24;
  double fixed_point_t = 1.0;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

/// Runs a subcommand and returns the process exit code:
/// 0 success, 1 numerical or I/O failure, 2 invalid arguments.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, char** argv);

} // namespace gfbm
