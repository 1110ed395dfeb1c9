#include "gfbm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gfbm/covariance.hpp"
#include "gfbm/errors.hpp"
#include "gfbm/lil.hpp"
#include "gfbm/lowerclass.hpp"
#include "gfbm/report.hpp"
#include "gfbm/simulate.hpp"
#include "gfbm/smallball.hpp"

#ifndef GFBM_VERSION
#define GFBM_VERSION "0.0.0"
#endif

namespace gfbm {

namespace fs = std::filesystem;

#define GFBM_CONFIG_FIELDS(X)                                                                            \
  X(subcommand) X(alpha) X(gamma) X(fbm_limit) X(paper_defaults) X(seed) X(output_dir) X(rel_tol) X(s)   \
  X(t) X(process) X(lamperti) X(grid) X(grid_n) X(grid_ratio) X(horizon) X(paths) X(thetas) X(refine)   \
  X(model) X(empirical) X(beta) X(family) X(lambda_grid) X(lambda) X(direction) X(variant) X(L) X(terms) \
  X(c) X(eps) X(b) X(band_n) X(k1) X(mode) X(k_min) X(k_max) X(seeds) X(paths_per_seed)                 \
  X(points_per_octave) X(fixed_point_t)

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
#define GFBM_PUT(name) j[#name] = name;
  GFBM_CONFIG_FIELDS(GFBM_PUT)
#undef GFBM_PUT
  j["schema"] = "gfbm-config-v1";
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  RunConfig c;
  try {
#define GFBM_GET(name) \
  if (auto it = j.find(#name); it != j.end() && !it->is_null()) it->get_to(c.name);
    GFBM_CONFIG_FIELDS(GFBM_GET)
#undef GFBM_GET
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  return c;
}

namespace {

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::vector<std::string> files;
  std::vector<std::uint64_t> seeds;
};

GfbmParams params_of(const RunConfig& c) {
  double alpha = c.alpha, gamma = c.gamma;
  if (c.paper_defaults) {
    alpha = 0.2;
    gamma = 0.1;
  }
  if (std::isnan(alpha) || std::isnan(gamma))
    throw InvalidArgument("--alpha and --gamma are required (or pass --paper-defaults)");
  return derive_indices(alpha, gamma, c.fbm_limit);
}

SmallBallModel parse_model(const std::string& spec) {
  double kappa = std::nan(""), beta = std::nan("");
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("model entries look like kappa=1,beta=0.5");
    const std::string key = item.substr(0, eq);
    double value;
    try {
      value = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("model value for '" + key + "' is not a number");
    }
    if (key == "kappa") kappa = value;
    else if (key == "beta") beta = value;
    else throw InvalidArgument("unknown model key '" + key + "'");
  }
  if (std::isnan(kappa) || std::isnan(beta)) throw InvalidArgument("model needs kappa and beta");
  return SmallBallModel(kappa, beta);
}

std::vector<double> parse_lambda_grid(const std::string& spec) {
  double lo, hi;
  int n;
  char c1, c2;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':')
    throw InvalidArgument("lambda grid looks like lo:hi:count");
  return log_grid(lo, hi, n);
}

std::vector<SmallBallEstimate> read_smallball_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("theta,horizon,n_paths,hits", 0) != 0) throw InvalidArgument(path + " is not a smallball.csv file");
  std::vector<SmallBallEstimate> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 10) throw InvalidArgument("malformed smallball row: " + line);
    SmallBallEstimate e;
    e.theta = std::stod(f[0]);
    e.horizon = std::stod(f[1]);
    e.n_paths = std::stoull(f[2]);
    e.hits = std::stoull(f[3]);
    e.p_hat = std::stod(f[4]);
    e.ci_low = std::stod(f[5]);
    e.ci_high = std::stod(f[6]);
    e.grid_n = std::stoull(f[7]);
    e.grid_kind = grid_kind_from_string(f[8]);
    e.seed = std::stoull(f[9]);
    out.push_back(e);
  }
  return out;
}

fs::path ensure_dir(const RunConfig& c) {
  const fs::path dir = c.output_dir.empty() ? fs::path("gfbm-out") : fs::path(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::string config_digest(const RunConfig& c) { return sha256_hex(c.to_json().dump()); }

void finish(Context& ctx, const fs::path& dir) {
  RunManifest m;
  m.tool_version = GFBM_VERSION;
  m.config = ctx.cfg.to_json();
  m.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  m.seeds = ctx.seeds;
  write_manifest(dir, m, ctx.files);
}

void emit(Context& ctx, const fs::path& dir, const std::string& name, const std::string& content) {
  write_text_file(dir / name, content);
  ctx.files.push_back(name);
}

// ---------------------------------------------------------------------------

void run_cov(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const GfbmParams p = params_of(c);
  const CovarianceOracle oracle(p, c.rel_tol);
  const ProcessTag tag = process_tag_from_string(c.process);
  const double value = oracle(tag, c.s, c.t);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", value);
  ctx.out << buf << '\n';

  if (c.lamperti) {
    const std::vector<double> grid{1, 2, 3, 4, 5, 6, 7, 8};
    const LampertiFit fit = fit_lamperti_decay(oracle, grid);
    ctx.out << "lamperti slope " << format_number(fit.slope) << " (kappa5 " << format_number(p.kappa5()) << ")"
            << (fit.non_positive ? " [NonPositiveAutocov: positive prefix only]" : "") << '\n';
    if (!c.output_dir.empty()) {
      const fs::path dir = ensure_dir(c);
      CsvTable table{"t,r", {}};
      for (std::size_t i = 0; i < fit.t.size(); ++i) table.rows.push_back({format_number(fit.t[i]), format_number(fit.r[i])});
      write_csv(dir / "lamperti.csv", table);
      ctx.files.push_back("lamperti.csv");
      SvgChart chart{"Lamperti autocovariance", "t", "r(t)", false, true, {{"r(t)", fit.t, fit.r, false}}, config_digest(c)};
      emit(ctx, dir, "lamperti.svg", render_svg(chart));
    }
  }
  if (!c.output_dir.empty()) {
    const fs::path dir = ensure_dir(c);
    write_csv(dir / "cov.csv", {"process,s,t,value", {{c.process, format_number(c.s), format_number(c.t), format_number(value)}}});
    ctx.files.push_back("cov.csv");
    finish(ctx, dir);
  }
}

GridSpec grid_spec_of(const RunConfig& c) {
  return GridSpec{grid_kind_from_string(c.grid), c.grid_n, c.grid_ratio};
}

void run_simulate(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const GfbmParams p = params_of(c);
  const CovarianceOracle oracle(p, c.rel_tol);
  const Grid grid = grid_spec_of(c).build(c.horizon, p);
  const PathEnsemble e = sample_ensemble(oracle, grid, c.paths, c.seed, 0, process_tag_from_string(c.process));
  const fs::path dir = ensure_dir(c);
  write_ensemble_csv(e, (dir / "ensemble.csv").string());
  ctx.files.push_back("ensemble.csv");
  ctx.seeds.push_back(c.seed);
  finish(ctx, dir);
  ctx.out << "simulated " << e.n_paths << " paths on " << grid.descriptor() << " (jitter "
          << format_number(e.factor_jitter_used) << ") -> " << (dir / "ensemble.csv").string() << '\n';
}

CsvTable smallball_table(const std::vector<SmallBallEstimate>& estimates) {
  CsvTable t{"theta,horizon,n_paths,hits,p_hat,ci_low,ci_high,grid_n,grid_kind,seed", {}};
  for (const auto& e : estimates)
    t.rows.push_back({format_number(e.theta), format_number(e.horizon), std::to_string(e.n_paths),
                      std::to_string(e.hits), format_number(e.p_hat), format_number(e.ci_low),
                      format_number(e.ci_high), std::to_string(e.grid_n), std::string(to_string(e.grid_kind)),
                      std::to_string(e.seed)});
  return t;
}

void run_smallball(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const GfbmParams p = params_of(c);
  const CovarianceOracle oracle(p, c.rel_tol);
  const GridSpec spec = grid_spec_of(c);
  std::vector<SmallBallEstimate> estimates;
  if (c.refine) {
    for (double th : c.thetas) estimates.push_back(estimate_phi_refined(oracle, th, c.horizon, spec, c.paths, c.seed).back());
  } else {
    estimates = estimate_phi_curve(oracle, c.thetas, c.horizon, spec, c.paths, c.seed);
  }
  ctx.seeds.push_back(c.seed);
  const fs::path dir = ensure_dir(c);
  write_csv(dir / "smallball.csv", smallball_table(estimates));
  ctx.files.push_back("smallball.csv");

  nlohmann::json fit_json{{"beta", p.beta()}, {"predicted_slope", 1.0 / p.beta()}};
  try {
    const ExponentFit fit = fit_small_ball_exponent(estimates);
    fit_json["slope"] = fit.slope;
    fit_json["stderr"] = fit.stderr_slope;
    fit_json["log_kappa_intercept"] = fit.intercept;
    fit_json["points_used"] = fit.points_used;
    ctx.out << "small-ball exponent " << format_number(fit.slope) << " +/- " << format_number(fit.stderr_slope)
            << " (1/beta = " << format_number(1.0 / p.beta()) << ")\n";
  } catch (const InsufficientSpread& e) {
    fit_json["error"] = e.what();
    ctx.out << "small-ball exponent not fitted: " << e.what() << '\n';
  }
  emit(ctx, dir, "smallball_fit.json", fit_json.dump(2) + '\n');

  SvgSeries s{"-log p_hat", {}, {}, false};
  for (const auto& e : estimates) {
    if (e.hits == 0 || e.hits == e.n_paths) continue;
    s.x.push_back(1.0 / e.theta);
    s.y.push_back(-std::log(e.p_hat));
  }
  if (!s.x.empty())
    emit(ctx, dir, "smallball.svg",
         render_svg({"Small-ball rate", "1/theta", "-log phi", true, true, {s}, config_digest(c)}));
  finish(ctx, dir);
  for (const auto& e : estimates)
    ctx.out << "theta=" << format_number(e.theta) << " p_hat=" << format_number(e.p_hat) << " ["
            << format_number(e.ci_low) << ", " << format_number(e.ci_high) << "]" << '\n';
}

PhiSource phi_source_of(const RunConfig& c) {
  if (!c.empirical.empty()) {
    double beta = c.beta;
    if (!(beta > 0.0)) beta = params_of(c).beta();
    return PhiSource::empirical(read_smallball_csv(c.empirical), beta);
  }
  return PhiSource::model(parse_model(c.model));
}

void run_classify(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  if (c.family != "f-lambda") throw InvalidArgument("classify supports --family f-lambda");
  const PhiSource phi = phi_source_of(c);
  const Direction dir_kind = direction_from_string(c.direction);
  nlohmann::json doc;
  if (c.lambda > 0.0) {
    const auto v = evaluate_criterion(TestFunction::f_lambda(c.lambda, 0.5, phi.beta()), phi, dir_kind);
    doc = v.to_json();
    doc["lambda"] = c.lambda;
    ctx.out << "lambda=" << format_number(c.lambda) << " -> " << to_string(v.decision) << '\n';
  } else {
    const auto r = classify_lambda_threshold(phi, dir_kind, parse_lambda_grid(c.lambda_grid));
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& [lambda, d] : r.verdicts) verdicts.push_back({{"lambda", lambda}, {"decision", to_string(d)}});
    doc = {{"schema", "lowerclass-v1"},
           {"kind", "lambda_threshold"},
           {"direction", to_string(dir_kind)},
           {"phi_source", phi.description()},
           {"flip_lambda", r.flip_lambda},
           {"last_finite", r.last_finite},
           {"log_step", r.log_step},
           {"verdicts", verdicts}};
    if (std::isfinite(r.analytic)) doc["analytic_threshold"] = r.analytic;
    ctx.out << "flip at lambda=" << format_number(r.flip_lambda) << " (last finite " << format_number(r.last_finite);
    if (std::isfinite(r.analytic)) ctx.out << ", analytic " << format_number(r.analytic);
    ctx.out << ")\n";
  }
  if (!c.output_dir.empty()) {
    const fs::path dir = ensure_dir(c);
    emit(ctx, dir, "classify.json", doc.dump(2) + '\n');
    finish(ctx, dir);
  }
}

void run_sequences(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const GfbmParams p = params_of(c);
  const Direction d = direction_from_string(c.direction);
  const double L = c.L > 0.0 ? c.L : 2.0 * p.h() + 1.0;
  TestFunction xi = c.family == "constant"   ? TestFunction::constant(c.c, p.h())
                    : c.family == "f-lambda" ? TestFunction::f_lambda(c.lambda > 0.0 ? c.lambda : 1.0, p.h(), p.beta())
                                             : throw InvalidArgument("sequences supports --family f-lambda|constant");
  SequenceVariant variant;
  if (c.variant == "sufficiency") variant = SequenceVariant::Sufficiency;
  else if (c.variant == "necessity") variant = SequenceVariant::Necessity;
  else throw InvalidArgument("variant must be sufficiency or necessity");

  const SequenceReport seq = lower_class_sequences(p, xi, L, d, c.terms, variant);
  const CoveringReport cover = covering_sequence(p, c.b, c.eps, c.band_n);
  nlohmann::json doc{{"schema", "lowerclass-v1"},
                     {"test_function", xi.to_json()},
                     {"sequence", seq.to_json()},
                     {"covering", cover.to_json()},
                     {"k1", c.k1}};
  nlohmann::json k_json = nlohmann::json::array();
  for (double term : seq.terms) {
    const KIndex k = k_index(p, xi, term, c.k1);
    k_json.push_back({{"t", term}, {"k", k.k}, {"N_k", std::isfinite(k.n_k) ? nlohmann::json(k.n_k) : nlohmann::json("inf")},
                      {"negative_ratio", k.negative_ratio}});
  }
  doc["k_index"] = k_json;
  const fs::path dir = ensure_dir(c);
  emit(ctx, dir, "sequences.json", doc.dump(2) + '\n');
  finish(ctx, dir);
  ctx.out << seq.terms.size() << " terms (" << seq.stop_reason << "), last " << format_number(seq.terms.back())
          << ", monotone " << (seq.monotone ? "yes" : "no") << ", max u-residual "
          << format_number(seq.max_u_residual()) << "; L_eps " << cover.l_eps << ", a_n band ["
          << format_number(cover.band_low) << ", " << format_number(cover.band_high) << "]\n";
}

void run_lil(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const GfbmParams p = params_of(c);
  const CovarianceOracle oracle(p, c.rel_tol);
  LilOptions o;
  o.direction = direction_from_string(c.direction);
  o.tag = process_tag_from_string(c.process);
  if (c.mode == "process") o.mode = LilMode::Process;
  else if (c.mode == "fixed-point") o.mode = LilMode::FixedPoint;
  else throw InvalidArgument("mode must be process or fixed-point");
  o.k_min = c.k_min;
  o.k_max = c.k_max;
  o.seeds = c.seeds;
  o.paths_per_seed = c.paths_per_seed;
  o.points_per_octave = c.points_per_octave;
  o.fixed_point_t = c.fixed_point_t;
  const LilReport r = lil_statistic(oracle, o);
  ctx.seeds = c.seeds;

  const fs::path dir = ensure_dir(c);
  CsvTable table{"seed,path,min_statistic,argmin_k", {}};
  SvgChart chart{"Chung statistic: running minimum (median over paths)", "k", "R", false, false, {}, config_digest(c)};
  for (const auto& s : r.seeds) {
    for (std::size_t i = 0; i < s.minima.size(); ++i)
      table.rows.push_back({std::to_string(s.seed), std::to_string(i), format_number(s.minima[i]),
                            std::to_string(s.argmin_k[i])});
    SvgSeries series{"seed " + std::to_string(s.seed), {}, s.running_min_median, true};
    for (int k : r.ks) series.x.push_back(k);
    chart.series.push_back(std::move(series));
  }
  write_csv(dir / "lil_minima.csv", table);
  ctx.files.push_back("lil_minima.csv");
  emit(ctx, dir, "lil_minima.svg", render_svg(chart));
  emit(ctx, dir, "lil.json", r.to_json().dump(2) + '\n');
  finish(ctx, dir);
  ctx.out << "median of per-path minima " << format_number(r.median) << " (range " << format_number(r.smallest)
          << " .. " << format_number(r.largest) << ")" << (o.tag == ProcessTag::Y ? " [exploratory]" : "") << '\n';
}

std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

} // namespace

int run_command(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> kSubcommands{"cov", "simulate", "smallball", "classify", "sequences", "lil"};
  try {
    Context ctx{RunConfig{}, out, err};
    std::vector<std::string> args = raw_args;
    if (const std::string path = find_config_path(args); !path.empty()) {
      std::ifstream in(path);
      if (!in) throw InvalidArgument("cannot read config " + path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("config " + path + " is not valid JSON: " + e.what());
      }
      ctx.cfg = RunConfig::from_json(j);
      const bool has_sub = std::any_of(args.begin(), args.end(), [](const std::string& a) {
        return std::find(kSubcommands.begin(), kSubcommands.end(), a) != kSubcommands.end();
      });
      if (!has_sub && !ctx.cfg.subcommand.empty()) args.insert(args.begin(), ctx.cfg.subcommand);
    }
    RunConfig& c = ctx.cfg;

    CLI::App app{"Numerical laboratory for generalized fractional Brownian motion", "gfbm"};
    app.set_version_flag("--version", GFBM_VERSION);
    app.fallthrough();
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config; flags given on the command line override it");
    app.add_option("--alpha", c.alpha, "Kernel exponent alpha");
    app.add_option("--gamma", c.gamma, "Singularity exponent gamma");
    app.add_flag("--fbm-limit", c.fbm_limit, "Admit gamma = 0 (fractional / standard Brownian motion)");
    app.add_flag("--paper-defaults", c.paper_defaults, "Use (alpha, gamma) = (0.2, 0.1)");
    app.add_option("--seed", c.seed, "Master seed");
    app.add_option("--output-dir", c.output_dir, "Directory for CSV, SVG, JSON and manifest output");
    app.add_option("--rel-tol", c.rel_tol, "Quadrature relative tolerance");

    auto* cov = app.add_subcommand("cov", "Covariance of X, Y or Z at (s, t)");
    cov->add_option("--s", c.s, "First time")->capture_default_str();
    cov->add_option("--t", c.t, "Second time")->capture_default_str();
    cov->add_option("--process", c.process, "X, Y or Z")->capture_default_str();
    cov->add_flag("--lamperti", c.lamperti, "Also fit the Lamperti autocovariance decay over t in [1, 8]");

    auto add_grid = [&](CLI::App* sub) {
      sub->add_option("--grid", c.grid, "uniform or geometric")->capture_default_str();
      sub->add_option("--grid-n", c.grid_n, "Number of grid points")->capture_default_str();
      sub->add_option("--grid-ratio", c.grid_ratio, "Geometric ratio (0 = default rule)")->capture_default_str();
      sub->add_option("--horizon", c.horizon, "Last grid point")->capture_default_str();
      sub->add_option("--paths", c.paths, "Number of paths")->capture_default_str();
    };
    auto* sim = app.add_subcommand("simulate", "Sample a path ensemble and write it as CSV");
    add_grid(sim);
    sim->add_option("--process", c.process, "X, Y or Z")->capture_default_str();

    auto* sb = app.add_subcommand("smallball", "Estimate phi(theta) = P(M(1) <= theta) and fit its exponent");
    add_grid(sb);
    sb->add_option("--thetas", c.thetas, "Thresholds")->delimiter(',');
    sb->add_flag("--refine", c.refine, "Double the grid until the estimate settles (at most three times)");

    auto* cl = app.add_subcommand("classify", "Integral criterion for f_lambda and its lambda threshold");
    cl->add_option("--model", c.model, "kappa=..,beta=..")->capture_default_str();
    cl->add_option("--empirical", c.empirical, "smallball.csv to interpolate instead of the model");
    cl->add_option("--beta", c.beta, "Index for the empirical table (default: from --alpha)");
    cl->add_option("--family", c.family, "Test-function family")->capture_default_str();
    cl->add_option("--lambda-grid", c.lambda_grid, "lo:hi:count, log-spaced")->capture_default_str();
    cl->add_option("--lambda", c.lambda, "Classify a single lambda");
    cl->add_option("--direction", c.direction, "zero or infinity")->capture_default_str();

    auto* sq = app.add_subcommand("sequences", "Lower-class sequence constructions and the covering sequence");
    sq->add_option("--direction", c.direction, "zero or infinity")->capture_default_str();
    sq->add_option("--variant", c.variant, "sufficiency or necessity")->capture_default_str();
    sq->add_option("--family", c.family, "f-lambda or constant")->capture_default_str();
    sq->add_option("--lambda", c.lambda, "lambda for f-lambda (default 1)");
    sq->add_option("--c", c.c, "Value of the constant family")->capture_default_str();
    sq->add_option("--L", c.L, "Constant L > 2H (default 2H + 1)");
    sq->add_option("--terms", c.terms, "Maximum number of terms")->capture_default_str();
    sq->add_option("--eps", c.eps, "Covering radius")->capture_default_str();
    sq->add_option("--b", c.b, "Covering interval end")->capture_default_str();
    sq->add_option("--band-n", c.band_n, "Terms used for the a_n band")->capture_default_str();
    sq->add_option("--k1", c.k1, "K1 used in N_k")->capture_default_str();

    auto* lil = app.add_subcommand("lil", "Chung-type LIL statistic on dyadic checkpoints");
    lil->add_option("--direction", c.direction, "zero or infinity")->capture_default_str();
    lil->add_option("--process", c.process, "X, Z, or Y (exploratory)")->capture_default_str();
    lil->add_option("--mode", c.mode, "process or fixed-point")->capture_default_str();
    lil->add_option("--k-min", c.k_min)->capture_default_str();
    lil->add_option("--k-max", c.k_max)->capture_default_str();
    lil->add_option("--seeds", c.seeds, "Seeds")->delimiter(',');
    lil->add_option("--paths-per-seed", c.paths_per_seed)->capture_default_str();
    lil->add_option("--points-per-octave", c.points_per_octave)->capture_default_str();
    lil->add_option("--fixed-point-t", c.fixed_point_t)->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      std::ostringstream o, eo;
      const int code = app.exit(e, o, eo);
      out << o.str();
      err << eo.str();
      return code == 0 ? 0 : 2;
    }

    for (CLI::App* sub : app.get_subcommands()) c.subcommand = sub->get_name();
    if (c.paper_defaults) {
      c.alpha = 0.2;
      c.gamma = 0.1;
    }
    if (c.subcommand == "cov") run_cov(ctx);
    else if (c.subcommand == "simulate") run_simulate(ctx);
    else if (c.subcommand == "smallball") run_smallball(ctx);
    else if (c.subcommand == "classify") run_classify(ctx);
    else if (c.subcommand == "sequences") run_sequences(ctx);
    else if (c.subcommand == "lil") run_lil(ctx);
    return 0;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args, std::cout, std::cerr);
}

} // namespace gfbm
