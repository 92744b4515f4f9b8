#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fracecon/model.hpp"
#include "fracecon/paths.hpp"

namespace fracecon {

/// Memory processes recovered from a log-output series.
struct MemoryEstimate {
  TimeGrid grid{1.0, 1};
  std::vector<double> dw_hat;      // N recovered increments
  std::vector<double> Lambda_hat;  // N+1 levels, starts at 0
  std::vector<double> lambda_hat;
};

/// Sequential recursion: each recovered increment removes the drift implied
/// by the memory level built so far, then the kernel sums are extended by
/// one step. O(N^2). Throws std::invalid_argument if Z.size() != N+1 or Z
/// has non-finite entries.
MemoryEstimate estimate_memory(std::span<const double> Z, const TimeGrid& grid,
                               const ModelParams& params);

/// Reference schemes driven by the true increments.
struct EulerReference {
  std::vector<double> Lambda_tilde;  // kernel sums over dw
  std::vector<double> lambda_tilde;
  std::vector<double> Z_tilde;       // drift uses the supplied exact Lambda
  std::vector<double> Q;             // drift uses Lambda_tilde
};

/// Without `exact_Lambda`, Z_tilde is driven by Lambda_tilde as well (and so
/// equals Q). exact_Lambda, if given, must hold N+1 levels.
EulerReference euler_reference(std::span<const double> dw, const TimeGrid& grid,
                               const ModelParams& params,
                               std::optional<std::span<const double>> exact_Lambda = std::nullopt,
                               double Z0 = 0.0);

/// Coefficients of the one-step log-output increment written as an affine
/// form in the increments: Z_{n+1} - Z_n = a[0] + sum_{k=0}^{n} a[k+1] dw[k].
/// Returns a vector of length n+2.
std::vector<double> increment_coefficients(std::size_t n, const TimeGrid& grid,
                                           const ModelParams& params);

struct ConvergenceReport {
  std::vector<std::size_t> factors;       // coarse factors, descending
  std::vector<double> dt_values;          // strictly decreasing
  std::vector<double> max_errors_Lambda;  // median over seeds of the sup error
  std::vector<double> max_errors_lambda;
  std::vector<std::vector<double>> seed_errors_Lambda;  // [factor][seed]
  std::vector<std::vector<double>> seed_errors_lambda;
  double rate_Lambda = 0.0;  // log-log slopes, factor 1 excluded
  double rate_lambda = 0.0;
  double fitted_rate = 0.0;  // min of the two
  std::size_t seeds = 0;
};

/// Pathwise error study: per seed, simulate on the fine grid (oracle memory
/// and Euler log output), subsample Z to each coarse grid, run the estimator
/// and record sup errors at coarse nodes. Throws std::invalid_argument if a
/// factor does not divide N_fine or fewer than two factors exceed 1.
ConvergenceReport convergence_study(const ModelParams& params, double T, std::size_t N_fine,
                                    std::vector<std::size_t> coarse_factors, std::size_t seeds,
                                    std::uint64_t base_seed = 1);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace fracecon
