#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "smre/grid.hpp"
#include "smre/operators.hpp"

namespace smre {

/// Everything one batch command needs. Defaults are the library defaults; the
/// command line and an optional key=value file fill in the rest.
struct RunConfig {
  std::string command;  // calibrate | denoise | deconvolve | inpaint | diagnose
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path history;
  std::filesystem::path recon;  // diagnose: reconstruction to check
  std::optional<std::size_t> rows, cols;  // calibrate without an input image
  std::optional<std::size_t> scale;       // diagnose: restrict to one |S|

  std::string noise = "gaussian";
  std::optional<double> sigma;
  std::string op = "identity";
  std::string system = "s2";
  double alpha = 0.9;
  std::size_t trials = 5000;
  std::uint64_t seed = 1;
  std::filesystem::path qcache;
  bool no_simulate = false;

  double lambda = 1e-3;
  double zeta = 0.0;  // 0 picks 1.01 |K|^2
  double tol = 1e-3;
  std::size_t max_iter = 5000;
  double delta = 0.01;
  double anscombe_c = 3.0 / 8.0;
  double gamma = 0.0;
  double beta = 0.0;
};

enum ExitCode : int { kExitConverged = 0, kExitUsage = 1, kExitNotConverged = 2 };

/// "s0:<maxL>", "s2", "global" or "custom:<path>" for an m x n grid.
SubsetSystem parse_system(const std::string& spec, std::size_t rows, std::size_t cols);

/// "identity", "gauss:std=<px>", "gauss:fwhm_nm=<f>,pitch_nm=<p>" or
/// "mask:<path>".
LinearOperator parse_operator(const std::string& spec);

/// Executes one command. Progress goes to `log`; failures throw.
int run(const RunConfig& cfg, std::ostream& log);

/// Parses argv, runs, and maps exceptions to exit code 1.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smre
