#include "fracecon/paths.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fracecon/csv.hpp"
#include "fracecon/rng.hpp"

namespace fracecon {

TimeGrid::TimeGrid(double T, std::size_t N) : T_(T), N_(N), dt_(0.0) {
  if (!(T > 0) || !std::isfinite(T)) throw std::invalid_argument("TimeGrid: horizon must be positive");
  if (N == 0) throw std::invalid_argument("TimeGrid: need at least one step");
  dt_ = T / static_cast<double>(N);
  if (dt_ > 1.0) throw std::invalid_argument("TimeGrid: dt = T/N must not exceed 1");
}

double TimeGrid::node(std::size_t n) const {
  return n == N_ ? T_ : static_cast<double>(n) * dt_;
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> t(N_ + 1);
  for (std::size_t n = 0; n <= N_; ++n) t[n] = node(n);
  return t;
}

std::vector<double> kernel_weights(double dt, std::size_t count, double epsilon, double exponent,
                                   double factor) {
  std::vector<double> w(count + 1);
  for (std::size_t m = 0; m <= count; ++m)
    w[m] = factor * std::pow(static_cast<double>(m) * dt + epsilon, exponent);
  return w;
}

MemoryKernels::MemoryKernels(double dt, std::size_t count, const ModelParams& params) {
  const double h = params.H - 0.5;
  const double root = std::sqrt(2.0 * params.H);
  fbm = kernel_weights(dt, count, params.epsilon, h, root);
  Lambda = kernel_weights(dt, count, params.epsilon, h - 1.0, root * h);
  lambda = kernel_weights(dt, count, params.epsilon, h - 2.0, root * h * (h - 1.0));
}

double kernel_sum(std::span<const double> w, std::span<const double> dw, std::size_t n) {
  // Four interleaved partial sums; the order is fixed so results are
  // reproducible, and the compiler can keep them in vector lanes.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const double* wp = w.data();
  const double* dp = dw.data();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += wp[n - k] * dp[k];
    s1 += wp[n - k - 1] * dp[k + 1];
    s2 += wp[n - k - 2] * dp[k + 2];
    s3 += wp[n - k - 3] * dp[k + 3];
  }
  for (; k < n; ++k) s0 += wp[n - k] * dp[k];
  return (s0 + s1) + (s2 + s3);
}

std::vector<double> simulate_brownian(const TimeGrid& grid, std::uint64_t seed) {
  NormalRng rng(seed);
  const double sd = std::sqrt(grid.dt());
  std::vector<double> dw(grid.steps());
  for (auto& x : dw) x = sd * rng.normal();
  return dw;
}

namespace {

void check_refinement(const TimeGrid& grid, std::span<const double> dw_fine, std::size_t R) {
  if (R == 0) throw std::invalid_argument("refinement factor must be at least 1");
  if (dw_fine.size() != grid.steps() * R)
    throw std::invalid_argument("fine increments (" + std::to_string(dw_fine.size()) +
                                ") do not match " + std::to_string(R) + "-fold refinement of " +
                                std::to_string(grid.steps()) + " steps");
}

}  // namespace

MemoryPaths memory_exact(const TimeGrid& grid, std::span<const double> dw_fine, std::size_t R,
                         const ModelParams& params) {
  check_refinement(grid, dw_fine, R);
  const TimeGrid fine = grid.refine(R);
  const std::size_t N = grid.steps();
  const MemoryKernels kern(fine.dt(), fine.steps(), params);
  MemoryPaths out{std::vector<double>(N + 1, 0.0), std::vector<double>(N + 1, 0.0)};
  for (std::size_t n = 1; n <= N; ++n) {
    out.Lambda[n] = kernel_sum(kern.Lambda, dw_fine, n * R);
    out.lambda[n] = kernel_sum(kern.lambda, dw_fine, n * R);
  }
  return out;
}

std::vector<double> approx_fbm(const TimeGrid& grid, std::span<const double> dw_fine,
                               std::size_t R, const ModelParams& params) {
  check_refinement(grid, dw_fine, R);
  const TimeGrid fine = grid.refine(R);
  const std::vector<double> w = kernel_weights(fine.dt(), fine.steps(), params.epsilon,
                                               params.H - 0.5, std::sqrt(2.0 * params.H));
  std::vector<double> out(grid.steps() + 1, 0.0);
  for (std::size_t n = 1; n <= grid.steps(); ++n) out[n] = kernel_sum(w, dw_fine, n * R);
  return out;
}

TerminalMemory memory_terminal(const TimeGrid& grid, std::span<const double> dw,
                               const ModelParams& params) {
  if (dw.size() != grid.steps()) throw std::invalid_argument("memory_terminal: length mismatch");
  const MemoryKernels kern(grid.dt(), grid.steps(), params);
  const std::size_t N = grid.steps();
  return {kernel_sum(kern.fbm, dw, N), kernel_sum(kern.Lambda, dw, N),
          kernel_sum(kern.lambda, dw, N)};
}

std::vector<double> euler_log_output(const TimeGrid& grid, std::span<const double> dw,
                                     std::span<const double> Lambda, const ModelParams& params,
                                     double Z0) {
  const std::size_t N = grid.steps();
  if (dw.size() != N) throw std::invalid_argument("simulate_output: need N increments");
  if (Lambda.size() < N) throw std::invalid_argument("simulate_output: Lambda not aligned with grid");
  if (!std::isfinite(Z0)) throw std::invalid_argument("simulate_output: non-finite initial level");

  const DerivedParams d = derive_constants(params);
  const double base_drift = params.mu_D - d.var_scale * params.sigma_D * params.sigma_D;
  const double diffusion = d.vol_scale * params.sigma_D;
  const double dt = grid.dt();

  std::vector<double> Z(N + 1);
  Z[0] = Z0;
  for (std::size_t n = 0; n < N; ++n) {
    if (!std::isfinite(dw[n]) || !std::isfinite(Lambda[n]))
      throw std::invalid_argument("simulate_output: non-finite input at step " + std::to_string(n));
    Z[n + 1] = Z[n] + (base_drift + params.sigma_D * Lambda[n]) * dt + diffusion * dw[n];
  }
  return Z;
}

OutputPath simulate_output(const TimeGrid& grid, std::span<const double> dw,
                           std::span<const double> Lambda, const ModelParams& params, double D0) {
  if (!(D0 > 0) || !std::isfinite(D0)) throw std::invalid_argument("simulate_output: D0 must be positive");
  OutputPath out;
  out.Z = euler_log_output(grid, dw, Lambda, params, std::log(D0));
  out.D_hat.resize(out.Z.size());
  for (std::size_t n = 0; n < out.Z.size(); ++n) out.D_hat[n] = std::exp(out.Z[n]);
  return out;
}

FinePaths simulate_fine(const TimeGrid& fine, const ModelParams& params, std::uint64_t seed,
                        double D0) {
  FinePaths f;
  f.dw = simulate_brownian(fine, seed);
  const MemoryKernels kern(fine.dt(), fine.steps(), params);
  f.Lambda.assign(fine.steps() + 1, 0.0);
  for (std::size_t n = 1; n <= fine.steps(); ++n) f.Lambda[n] = kernel_sum(kern.Lambda, f.dw, n);
  f.output = simulate_output(fine, f.dw, f.Lambda, params, D0);
  return f;
}

PathBundle simulate_paths(const TimeGrid& grid, const ModelParams& params, std::uint64_t seed,
                          std::size_t R, double D0) {
  if (R == 0) throw std::invalid_argument("refinement factor must be at least 1");
  const TimeGrid fine = grid.refine(R);
  FinePaths f = simulate_fine(fine, params, seed, D0);
  const MemoryKernels kern(fine.dt(), fine.steps(), params);

  const std::size_t N = grid.steps();
  PathBundle b;
  b.grid = grid;
  b.seed = seed;
  b.refinement = R;
  b.dw.assign(N, 0.0);
  b.w.assign(N + 1, 0.0);
  b.Lambda.assign(N + 1, 0.0);
  b.lambda.assign(N + 1, 0.0);
  b.Z.assign(N + 1, 0.0);
  b.D_hat.assign(N + 1, 0.0);
  b.Z[0] = f.output.Z[0];
  b.D_hat[0] = f.output.D_hat[0];
  for (std::size_t n = 0; n < N; ++n) {
    double inc = 0.0;
    for (std::size_t j = n * R; j < (n + 1) * R; ++j) inc += f.dw[j];
    b.dw[n] = inc;
    b.w[n + 1] = b.w[n] + inc;
    b.Lambda[n + 1] = f.Lambda[(n + 1) * R];
    b.lambda[n + 1] = kernel_sum(kern.lambda, f.dw, (n + 1) * R);
    b.Z[n + 1] = f.output.Z[(n + 1) * R];
    b.D_hat[n + 1] = f.output.D_hat[(n + 1) * R];
  }
  return b;
}

void write_paths_csv(std::ostream& out, const PathBundle& b) {
  out << "t,dw,w,Lambda,lambda,Z,D_hat\n";
  for (std::size_t n = 0; n <= b.grid.steps(); ++n) {
    out << format_real(b.grid.node(n)) << ',';
    if (n > 0) out << format_real(b.dw[n - 1]);
    out << ',' << format_real(b.w[n]) << ',' << format_real(b.Lambda[n]) << ','
        << format_real(b.lambda[n]) << ',' << format_real(b.Z[n]) << ','
        << format_real(b.D_hat[n]) << '\n';
  }
}

}  // namespace fracecon
