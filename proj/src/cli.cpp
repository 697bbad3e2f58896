#include "smre/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "smre/admm.hpp"
#include "smre/image_io.hpp"
#include "smre/poisson.hpp"
#include "smre/quantile_cache.hpp"
#include "smre/statistics.hpp"

namespace smre {

namespace {

std::size_t parse_size(const std::string& s, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
  return static_cast<std::size_t>(v);
}

double parse_real(const std::string& s, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
  return v;
}

void require_file(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string("missing ") + what);
  if (!std::filesystem::is_regular_file(p)) throw std::runtime_error(std::string(what) + " '" + p.string() + "' not found");
}

bool is_poisson(const RunConfig& cfg) {
  if (cfg.noise == "poisson") return true;
  if (cfg.noise == "gaussian") return false;
  throw std::invalid_argument("--noise must be gaussian or poisson");
}

double gaussian_sigma2(const RunConfig& cfg) {
  if (!cfg.sigma) throw std::invalid_argument("--sigma is required for Gaussian noise");
  if (!(*cfg.sigma > 0.0)) throw std::invalid_argument("--sigma must be positive");
  return *cfg.sigma * *cfg.sigma;
}

CostSpec cost_of(const RunConfig& cfg) {
  if (cfg.gamma > 0.0) return CostSpec::tv_plus_l2(cfg.gamma, cfg.beta);
  if (cfg.gamma < 0.0) throw std::invalid_argument("--gamma must be >= 0");
  return CostSpec::tv(cfg.beta);
}

/// q_alpha from the cache, or simulated and appended when allowed.
QuantileRecord obtain_quantile(const RunConfig& cfg, const SubsetSystem& sys, std::ostream& log) {
  std::optional<QuantileCache> cache;
  if (!cfg.qcache.empty()) cache.emplace(cfg.qcache);
  if (cache) {
    if (auto hit = cache->lookup(sys.rows(), sys.cols(), sys.id(), cfg.alpha, cfg.trials, cfg.seed)) {
      log << "quantile: cache hit q_alpha=" << hit->q_alpha << '\n';
      return *hit;
    }
  }
  if (cfg.no_simulate)
    throw std::runtime_error("quantile cache miss for " + sys.id() + " and simulation is disabled (--no-simulate)");
  log << "quantile: simulating " << cfg.trials << " trials on " << sys.rows() << 'x' << sys.cols() << ' ' << sys.id()
      << '\n';
  QuantileRecord rec = simulate_quantile(sys, cfg.alpha, cfg.trials, cfg.seed);
  log << "quantile: q_alpha=" << rec.q_alpha << '\n';
  if (cache) cache->append(rec);
  return rec;
}

void write_output(const ImageField& u, const std::filesystem::path& path, bool counts) {
  if (path.empty()) return;
  const ImageFormat fmt = format_for_path(path);
  if (counts && fmt != ImageFormat::RawFloat) {
    // Counts go out at 16 bits unscaled, matching how Poisson input is read.
    write_image(u * (1.0 / 65535.0), path, fmt, 65535);
  } else {
    write_image(u, path, fmt);
  }
}

int run_calibrate(const RunConfig& cfg, std::ostream& log) {
  std::size_t m = 0, n = 0;
  if (!cfg.input.empty()) {
    require_file(cfg.input, "input image");
    const ImageField y = read_image(cfg.input, true);
    m = y.rows();
    n = y.cols();
  } else if (cfg.rows && cfg.cols) {
    m = *cfg.rows;
    n = *cfg.cols;
  } else {
    throw std::invalid_argument("calibrate needs --input or both --rows and --cols");
  }
  const SubsetSystem sys = parse_system(cfg.system, m, n);
  const QuantileRecord rec = obtain_quantile(cfg, sys, log);
  if (!cfg.output.empty()) {
    if (format_for_path(cfg.output) == ImageFormat::RawFloat) {
      // Per-set weights as a 1 x |S| field.
      const SubsetSystem cal = assign_weights(sys, rec);
      write_image(ImageField(1, cal.size(), cal.weights()), cfg.output, ImageFormat::RawFloat);
    } else {
      std::ofstream out(cfg.output, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open '" + cfg.output.string() + "' for writing");
      out << format_cache_line(rec) << '\n';
    }
  }
  return kExitConverged;
}

int run_solve(const RunConfig& cfg, std::ostream& log) {
  require_file(cfg.input, "input image");
  const bool poisson = is_poisson(cfg);
  ImageField y = read_image(cfg.input, poisson);
  const LinearOperator k = parse_operator(cfg.op);

  using Kind = LinearOperator::Kind;
  if (cfg.command == "denoise" && k.kind() != Kind::Identity)
    throw std::invalid_argument("denoise expects --op identity");
  if (cfg.command == "deconvolve" && k.kind() != Kind::GaussianConvolution)
    throw std::invalid_argument("deconvolve expects --op gauss:...");
  if (cfg.command == "inpaint" && k.kind() != Kind::Mask) throw std::invalid_argument("inpaint expects --op mask:<path>");
  if (k.kind() == Kind::Mask) {
    if (!k.mask_field().same_shape(y)) throw std::invalid_argument("mask and input dimensions differ");
    y = k.apply(y);  // occluded samples carry no information
  }

  const SubsetSystem raw = parse_system(cfg.system, y.rows(), y.cols());
  const QuantileRecord rec = obtain_quantile(cfg, raw, log);
  const SubsetSystem sys = assign_weights(raw, rec);
  const CostSpec cost = cost_of(cfg);

  AdmmConfig acfg;
  acfg.lambda = cfg.lambda;
  acfg.zeta = cfg.zeta;
  acfg.tol_change = cfg.tol;
  acfg.tol_gap = cfg.tol;
  acfg.max_outer = cfg.max_iter;

  SolveReport report;
  if (poisson) {
    PoissonConfig pcfg;
    pcfg.delta = cfg.delta;
    pcfg.c_anscombe = cfg.anscombe_c;
    pcfg.admm = acfg;
    report = poisson_admm(y, k, sys, cost, pcfg);
  } else {
    report = admm_solve(y, k, sys, gaussian_sigma2(cfg), cost, acfg);
  }

  write_output(report.u_hat, cfg.output, poisson);
  if (!cfg.history.empty()) {
    std::ofstream h(cfg.history, std::ios::trunc);
    if (!h) throw std::runtime_error("cannot open '" + cfg.history.string() + "' for writing");
    write_history_csv(h, report.history);
  }
  const auto& last = report.history.back();
  log << cfg.command << ": " << report.iterations << " iterations, stat=" << last.stat
      << " q_alpha=" << rec.q_alpha << " J=" << last.cost << ' '
      << (report.status == SolveStatus::Converged   ? "converged"
          : report.status == SolveStatus::Diverged ? "diverged"
                                                   : "iteration limit reached")
      << '\n';
  return report.converged ? kExitConverged : kExitNotConverged;
}

int run_diagnose(const RunConfig& cfg, std::ostream& log) {
  require_file(cfg.input, "input image");
  require_file(cfg.recon, "reconstruction (--recon)");
  const bool poisson = is_poisson(cfg);
  const ImageField y = read_image(cfg.input, poisson);
  const ImageField u = read_image(cfg.recon, poisson);
  require_same_shape(y, u, "diagnose");
  const LinearOperator k = parse_operator(cfg.op);
  const SubsetSystem raw = parse_system(cfg.system, y.rows(), y.cols());
  const QuantileRecord rec = obtain_quantile(cfg, raw, log);
  const SubsetSystem sys = assign_weights(raw, rec);

  ImageField residual = k.apply(u);
  double sigma2 = 1.0;
  if (poisson) {
    const ImageField x = anscombe(y, cfg.anscombe_c);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = 2.0 * std::sqrt(std::max(residual[i], 0.0)) - x[i];
  } else {
    residual -= k.kind() == LinearOperator::Kind::Mask ? k.apply(y) : y;
    sigma2 = gaussian_sigma2(cfg);
  }
  const ImageField mask = diagnose_violations(residual, sys, sigma2, cfg.scale);
  const double marked = sum(mask);
  log << "diagnose: stat=" << transformed_statistic(residual, sys, sigma2) << " q_alpha=" << rec.q_alpha
      << " marked pixels=" << marked << '\n';
  if (!cfg.output.empty()) write_image(mask, cfg.output);
  return kExitConverged;
}

}  // namespace

SubsetSystem parse_system(const std::string& spec, std::size_t rows, std::size_t cols) {
  if (spec == "s2") return build_system_s2(rows, cols);
  if (spec == "global") return build_system_global(rows, cols);
  if (spec.rfind("s0:", 0) == 0) return build_system_s0(rows, cols, parse_size(spec.substr(3), "S0 side"));
  if (spec.rfind("custom:", 0) == 0) {
    const std::filesystem::path p = spec.substr(7);
    require_file(p, "custom system file");
    std::ifstream in(p);
    SubsetSystem sys = read_system(in);
    if (sys.rows() != rows || sys.cols() != cols)
      throw std::invalid_argument("custom system dimensions do not match the image");
    return sys;
  }
  throw std::invalid_argument("unknown --system '" + spec + "' (expected s0:<maxL>, s2, global, custom:<path>)");
}

LinearOperator parse_operator(const std::string& spec) {
  if (spec == "identity") return LinearOperator::identity();
  if (spec.rfind("mask:", 0) == 0) {
    const std::filesystem::path p = spec.substr(5);
    require_file(p, "mask image");
    return LinearOperator::mask(read_image(p));
  }
  if (spec.rfind("gauss:", 0) == 0) {
    std::optional<double> std_px, fwhm, pitch;
    std::string rest = spec.substr(6);
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      const std::string kv = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("bad operator parameter '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const double val = parse_real(kv.substr(eq + 1), key.c_str());
      if (key == "std") std_px = val;
      else if (key == "fwhm_nm") fwhm = val;
      else if (key == "pitch_nm") pitch = val;
      else throw std::invalid_argument("unknown operator parameter '" + key + "'");
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (std_px && !fwhm && !pitch) return LinearOperator::gaussian(*std_px);
    if (!std_px && fwhm && pitch) return LinearOperator::gaussian(fwhm_to_std_px(*fwhm, *pitch));
    throw std::invalid_argument("gauss operator needs std=<px> or fwhm_nm=<f>,pitch_nm=<p>");
  }
  throw std::invalid_argument("unknown --op '" + spec + "'");
}

int run(const RunConfig& cfg, std::ostream& log) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("--alpha must lie in (0, 1)");
  if (cfg.trials < 1) throw std::invalid_argument("--trials must be >= 1");
  if (cfg.command == "calibrate") return run_calibrate(cfg, log);
  if (cfg.command == "denoise" || cfg.command == "deconvolve" || cfg.command == "inpaint") return run_solve(cfg, log);
  if (cfg.command == "diagnose") return run_diagnose(cfg, log);
  throw std::invalid_argument("unknown command '" + cfg.command + "'");
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Statistical multiresolution estimation for images"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.add_option("command", cfg.command, "calibrate | denoise | deconvolve | inpaint | diagnose")
      ->required()
      ->check(CLI::IsMember({"calibrate", "denoise", "deconvolve", "inpaint", "diagnose"}));
  app.add_option("-i,--input", cfg.input, "input image (PGM or .f32)");
  app.add_option("-o,--out", cfg.output, "output image, or calibration record for calibrate");
  app.add_option("--history", cfg.history, "per-iteration CSV");
  app.add_option("--recon", cfg.recon, "reconstruction checked by diagnose");
  app.add_option("--rows", cfg.rows, "grid rows for calibrate without input");
  app.add_option("--cols", cfg.cols, "grid columns for calibrate without input");
  app.add_option("--scale", cfg.scale, "diagnose: only sets of this cardinality");
  app.add_option("--noise", cfg.noise, "gaussian | poisson")->check(CLI::IsMember({"gaussian", "poisson"}));
  app.add_option("--sigma", cfg.sigma, "Gaussian noise standard deviation (image units)");
  app.add_option("--op", cfg.op, "identity | gauss:std=<px> | gauss:fwhm_nm=<f>,pitch_nm=<p> | mask:<path>");
  app.add_option("--system", cfg.system, "s0:<maxL> | s2 | global | custom:<path>");
  app.add_option("--alpha", cfg.alpha, "confidence level");
  app.add_option("--trials", cfg.trials, "Monte-Carlo trials for the quantile");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--qcache", cfg.qcache, "quantile cache file")->envname("SMRE_QCACHE");
  app.add_flag("--no-simulate", cfg.no_simulate, "fail on a quantile cache miss");
  app.add_option("--lambda", cfg.lambda, "ADMM step size");
  app.add_option("--zeta", cfg.zeta, "linearization constant (0: 1.01 |K|^2)");
  app.add_option("--tol", cfg.tol, "relative change and gap tolerance");
  app.add_option("--max-iter", cfg.max_iter, "outer iteration limit");
  app.add_option("--delta", cfg.delta, "Poisson linearization floor");
  app.add_option("--anscombe-c", cfg.anscombe_c, "Anscombe constant (3/8 or 1/4)");
  app.add_option("--gamma", cfg.gamma, "L2 weight added to TV");
  app.add_option("--beta", cfg.beta, "TV smoothing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }
  try {
    return run(cfg, err);
  } catch (const std::exception& e) {
    err << "smre: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace smre
