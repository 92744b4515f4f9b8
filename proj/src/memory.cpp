#include "fracecon/memory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fracecon/parallel.hpp"

namespace fracecon {

MemoryEstimate estimate_memory(std::span<const double> Z, const TimeGrid& grid,
                               const ModelParams& params) {
  const std::size_t N = grid.steps();
  if (Z.size() != N + 1)
    throw std::invalid_argument("estimate_memory: expected " + std::to_string(N + 1) +
                                " log-output values, got " + std::to_string(Z.size()));
  for (std::size_t n = 0; n <= N; ++n)
    if (!std::isfinite(Z[n]))
      throw std::invalid_argument("estimate_memory: non-finite Z at index " + std::to_string(n));
  if (!(params.sigma_D > 0)) throw std::invalid_argument("estimate_memory: sigma_D must be positive");

  const DerivedParams d = derive_constants(params);
  const double base_drift = params.mu_D - d.var_scale * params.sigma_D * params.sigma_D;
  const double diffusion = d.vol_scale * params.sigma_D;
  const double dt = grid.dt();
  const MemoryKernels kern(dt, N, params);

  MemoryEstimate est;
  est.grid = grid;
  est.dw_hat.assign(N, 0.0);
  est.Lambda_hat.assign(N + 1, 0.0);
  est.lambda_hat.assign(N + 1, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    const double drift = (base_drift + params.sigma_D * est.Lambda_hat[n]) * dt;
    est.dw_hat[n] = (Z[n + 1] - Z[n] - drift) / diffusion;
    est.Lambda_hat[n + 1] = kernel_sum(kern.Lambda, est.dw_hat, n + 1);
    est.lambda_hat[n + 1] = kernel_sum(kern.lambda, est.dw_hat, n + 1);
  }
  return est;
}

EulerReference euler_reference(std::span<const double> dw, const TimeGrid& grid,
                               const ModelParams& params,
                               std::optional<std::span<const double>> exact_Lambda, double Z0) {
  const std::size_t N = grid.steps();
  if (dw.size() != N)
    throw std::invalid_argument("euler_reference: expected " + std::to_string(N) +
                                " increments, got " + std::to_string(dw.size()));
  if (exact_Lambda && exact_Lambda->size() != N + 1)
    throw std::invalid_argument("euler_reference: exact Lambda must have N+1 levels");

  const MemoryKernels kern(grid.dt(), N, params);
  EulerReference ref;
  ref.Lambda_tilde.assign(N + 1, 0.0);
  ref.lambda_tilde.assign(N + 1, 0.0);
  for (std::size_t n = 1; n <= N; ++n) {
    ref.Lambda_tilde[n] = kernel_sum(kern.Lambda, dw, n);
    ref.lambda_tilde[n] = kernel_sum(kern.lambda, dw, n);
  }
  ref.Q = euler_log_output(grid, dw, ref.Lambda_tilde, params, Z0);
  if (exact_Lambda) {
    ref.Z_tilde = euler_log_output(grid, dw, *exact_Lambda, params, Z0);
  } else {
    ref.Z_tilde = ref.Q;
  }
  return ref;
}

std::vector<double> increment_coefficients(std::size_t n, const TimeGrid& grid,
                                           const ModelParams& params) {
  if (n >= grid.steps()) throw std::invalid_argument("increment_coefficients: step out of range");
  const DerivedParams d = derive_constants(params);
  const double dt = grid.dt();
  const double root = std::sqrt(2.0 * params.H);
  std::vector<double> a(n + 2);
  a[0] = (params.mu_D - d.var_scale * params.sigma_D * params.sigma_D) * dt;
  for (std::size_t k = 0; k < n; ++k) {
    const double lag = static_cast<double>(n - k) * dt;
    a[k + 1] = root * d.h * std::pow(lag + params.epsilon, d.h - 1.0) * params.sigma_D * dt;
  }
  a[n + 1] = d.vol_scale * params.sigma_D;
  return a;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two points");
  const std::size_t m = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= m;
  my /= m;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

double median(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  if (v.size() % 2) return v[m];
  const double hi = v[m];
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + m));
}

}  // namespace

ConvergenceReport convergence_study(const ModelParams& params, double T, std::size_t N_fine,
                                    std::vector<std::size_t> factors, std::size_t seeds,
                                    std::uint64_t base_seed) {
  if (factors.empty()) throw std::invalid_argument("convergence: no coarse factors");
  if (seeds == 0) throw std::invalid_argument("convergence: need at least one seed");
  std::sort(factors.begin(), factors.end(), std::greater<>());
  if (std::adjacent_find(factors.begin(), factors.end()) != factors.end())
    throw std::invalid_argument("convergence: duplicate coarse factor");
  for (std::size_t c : factors)
    if (c == 0 || N_fine % c != 0)
      throw std::invalid_argument("convergence: factor " + std::to_string(c) + " does not divide N_fine = " +
                                  std::to_string(N_fine));
  if (std::count_if(factors.begin(), factors.end(), [](std::size_t c) { return c > 1; }) < 2)
    throw std::invalid_argument("convergence: need at least two factors greater than 1 to fit a rate");

  const TimeGrid fine(T, N_fine);
  std::size_t stride = 0;
  for (std::size_t c : factors) stride = std::gcd(stride, c);

  const std::size_t F = factors.size();
  ConvergenceReport rep;
  rep.factors = factors;
  rep.seeds = seeds;
  rep.seed_errors_Lambda.assign(F, std::vector<double>(seeds));
  rep.seed_errors_lambda.assign(F, std::vector<double>(seeds));

  const MemoryKernels kern(fine.dt(), N_fine, params);
  parallel_for(seeds, [&](std::size_t s) {
    const FinePaths f = simulate_fine(fine, params, base_seed + s);
    // The oracle lambda is only needed on nodes shared by the coarse grids.
    std::vector<double> lambda_fine(N_fine + 1, 0.0);
    for (std::size_t n = stride; n <= N_fine; n += stride)
      lambda_fine[n] = kernel_sum(kern.lambda, f.dw, n);

    for (std::size_t j = 0; j < F; ++j) {
      const std::size_t c = factors[j];
      const TimeGrid coarse(T, N_fine / c);
      std::vector<double> Z(coarse.steps() + 1);
      for (std::size_t n = 0; n <= coarse.steps(); ++n) Z[n] = f.output.Z[n * c];
      const MemoryEstimate est = estimate_memory(Z, coarse, params);
      double eL = 0.0, el = 0.0;
      for (std::size_t n = 1; n <= coarse.steps(); ++n) {
        eL = std::max(eL, std::abs(f.Lambda[n * c] - est.Lambda_hat[n]));
        el = std::max(el, std::abs(lambda_fine[n * c] - est.lambda_hat[n]));
      }
      rep.seed_errors_Lambda[j][s] = eL;
      rep.seed_errors_lambda[j][s] = el;
    }
  });

  std::vector<double> fit_dt, fit_L, fit_l;
  for (std::size_t j = 0; j < F; ++j) {
    const double dt = fine.dt() * static_cast<double>(factors[j]);
    rep.dt_values.push_back(dt);
    rep.max_errors_Lambda.push_back(median(rep.seed_errors_Lambda[j]));
    rep.max_errors_lambda.push_back(median(rep.seed_errors_lambda[j]));
    if (factors[j] > 1) {
      fit_dt.push_back(dt);
      fit_L.push_back(rep.max_errors_Lambda.back());
      fit_l.push_back(rep.max_errors_lambda.back());
    }
  }
  rep.rate_Lambda = loglog_slope(fit_dt, fit_L);
  rep.rate_lambda = loglog_slope(fit_dt, fit_l);
  rep.fitted_rate = std::min(rep.rate_Lambda, rep.rate_lambda);
  return rep;
}

}  // namespace fracecon
