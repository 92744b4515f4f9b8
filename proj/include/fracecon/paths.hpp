#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fracecon/model.hpp"

namespace fracecon {

/// Uniform grid 0 = t_0 < ... < t_N = T with dt = T/N <= 1.
class TimeGrid {
 public:
  TimeGrid(double T, std::size_t N);

  double horizon() const { return T_; }
  std::size_t steps() const { return N_; }
  double dt() const { return dt_; }
  /// t_n = n dt, with t_N pinned to T.
  double node(std::size_t n) const;
  std::vector<double> nodes() const;
  /// The grid with R times as many steps over the same horizon.
  TimeGrid refine(std::size_t R) const { return TimeGrid(T_, N_ * R); }

 private:
  double T_;
  std::size_t N_;
  double dt_;
};

/// Kernel weights on lag m = 0..count: factor * (m dt + eps)^exponent.
std::vector<double> kernel_weights(double dt, std::size_t count, double epsilon, double exponent,
                                   double factor);

/// Weights of the three Ito kernels on one grid: w^H (exponent h, factor
/// sqrt(2H)), Lambda (h-1, sqrt(2H) h) and lambda (h-2, sqrt(2H) h (h-1)).
struct MemoryKernels {
  std::vector<double> fbm;
  std::vector<double> Lambda;
  std::vector<double> lambda;

  MemoryKernels(double dt, std::size_t count, const ModelParams& params);
};

/// sum_{k<n} w[n-k] dw[k]: the left-endpoint kernel sum at node n, where
/// dw[k] is the increment over [t_k, t_{k+1}].
double kernel_sum(std::span<const double> weights, std::span<const double> dw, std::size_t n);

/// N independent N(0, dt) increments, reproducible from seed (see NormalRng).
std::vector<double> simulate_brownian(const TimeGrid& grid, std::uint64_t seed);

struct MemoryPaths {
  std::vector<double> Lambda;  // N+1 levels, Lambda[0] = 0
  std::vector<double> lambda;
};

/// Quadrature oracle for the memory processes on `grid`, from increments on
/// the R-fold refinement. Kernel evaluated at the left endpoint of each fine
/// subinterval. Throws std::invalid_argument if dw_fine.size() != N R.
MemoryPaths memory_exact(const TimeGrid& grid, std::span<const double> dw_fine, std::size_t R,
                         const ModelParams& params);

/// Same quadrature for the approximate fBm w^H itself.
std::vector<double> approx_fbm(const TimeGrid& grid, std::span<const double> dw_fine,
                               std::size_t R, const ModelParams& params);

/// Terminal values only (O(N) instead of O(N^2)).
struct TerminalMemory {
  double fbm = 0.0;
  double Lambda = 0.0;
  double lambda = 0.0;
};
TerminalMemory memory_terminal(const TimeGrid& grid, std::span<const double> dw,
                               const ModelParams& params);

struct OutputPath {
  std::vector<double> Z;      // log output
  std::vector<double> D_hat;  // exp(Z)
};

/// Euler scheme for the log output driven by the memory level at the left
/// node, started from Z0. Returns N+1 levels.
std::vector<double> euler_log_output(const TimeGrid& grid, std::span<const double> dw,
                                     std::span<const double> Lambda, const ModelParams& params,
                                     double Z0 = 0.0);

/// euler_log_output from Z_0 = ln(D0), plus D_hat = exp(Z).
OutputPath simulate_output(const TimeGrid& grid, std::span<const double> dw,
                           std::span<const double> Lambda, const ModelParams& params,
                           double D0 = 1.0);

struct PathBundle {
  TimeGrid grid{1.0, 1};
  std::uint64_t seed = 0;
  std::size_t refinement = 1;
  std::vector<double> dw;  // N increments
  std::vector<double> w;   // N+1 levels
  std::vector<double> Lambda;
  std::vector<double> lambda;
  std::vector<double> Z;
  std::vector<double> D_hat;
};

/// Simulates on the R-fold refinement of `grid` (Brownian increments, memory,
/// Euler log output) and restricts everything to the nodes of `grid`.
PathBundle simulate_paths(const TimeGrid& grid, const ModelParams& params, std::uint64_t seed,
                          std::size_t R = 1, double D0 = 1.0);

/// Fine-grid simulation pieces, shared with the convergence study.
struct FinePaths {
  std::vector<double> dw;
  std::vector<double> Lambda;  // every fine node
  OutputPath output;
};
FinePaths simulate_fine(const TimeGrid& fine, const ModelParams& params, std::uint64_t seed,
                        double D0 = 1.0);

/// Header `t,dw,w,Lambda,lambda,Z,D_hat`; dw empty on the t_0 row.
void write_paths_csv(std::ostream& out, const PathBundle& bundle);

}  // namespace fracecon
