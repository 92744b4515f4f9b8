#include "fracecon/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracecon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kScanStep = 1e-3;
constexpr double kBisectTol = 1e-12;
constexpr double kTieTol = 1e-12;

double checked(double v, const char* formula) {
  if (!std::isfinite(v)) throw SolverError(formula, "non-finite value");
  return v;
}

void check_params(const ModelParams& params) {
  const ValidationReport rep = validate(params);
  if (!rep.ok()) throw std::invalid_argument(rep.describe());
}

// Second-order memory terms shared by r and mu_y:
// theta lambda q + H h^2 eps^{2h-2} theta ((theta - 1) q^2 + q2).
double curvature(double theta, const StateBlocks& b, const ModelParams& params) {
  const double h = b.d.h, q = b.phi.ratio1, q2 = b.phi.ratio2;
  const double scale = b.d.var_scale * h * h / (params.epsilon * params.epsilon);
  return theta * b.state.lambda * q + scale * theta * ((theta - 1.0) * q * q + q2);
}

// 2H h eps^{2h-1} theta q.
double drift_tilt(double theta, const StateBlocks& b, const ModelParams& params) {
  return 2.0 * b.d.var_scale * b.d.h / params.epsilon * theta * b.phi.ratio1;
}

void fill_consumption(EquilibriumResult& e, const StateBlocks& b) {
  e.c_coeff_C = b.a_C;
  e.c_coeff_M = b.a_M;
}

}  // namespace

int region_code(Region r) { return static_cast<int>(r); }

std::string region_name(Region r) {
  switch (r) {
    case Region::nonexistent: return "nonexistent";
    case Region::one: return "1";
    case Region::two: return "2";
    case Region::three: return "3";
    case Region::four: return "4";
    case Region::boundary: return "boundary";
  }
  return "?";
}

SolverError::SolverError(const std::string& formula, const std::string& detail)
    : std::runtime_error(formula + ": " + detail), formula_(formula) {}

PriceInputs EquilibriumResult::prices() const {
  return {r, mu, sigma, D_over_S, D_over_W_C, S_over_W_C, S_over_W_M};
}

StateBlocks state_blocks(const MarketState& s, const ModelParams& params,
                         const AdjustmentFns& fns) {
  if (!(s.y >= 0.0 && s.y <= 1.0)) throw std::invalid_argument("consumption share y must lie in [0, 1]");
  if (!std::isfinite(s.lambda)) throw std::invalid_argument("lambda must be finite");
  StateBlocks b;
  b.state = s;
  b.d = derive_constants(params);
  b.phi = fns(s.Lambda);
  if (!(b.phi.value > 0) || !std::isfinite(b.phi.ratio1) || !std::isfinite(b.phi.ratio2))
    throw SolverError("adjustment function", "varphi must be positive with finite ratios");
  b.a_C = checked(std::pow(params.rho, 1.0 / b.d.delta_C) * std::pow(b.phi.value, b.d.theta_C),
                  "consumption coefficient a_C");
  b.a_M = checked(std::pow(params.rho, 1.0 / b.d.delta_M) * std::pow(b.phi.value, b.d.theta_M),
                  "consumption coefficient a_M");
  const double y = s.y;
  b.A = (1.0 - y) / b.a_C + y / b.a_M;
  b.L = params.net_output_share();
  b.Sigma = params.sigma_D - b.d.h / params.epsilon * b.phi.ratio1 *
                                 (b.d.theta_C * (1.0 - y) + b.d.theta_M * y);
  b.u = (1.0 - y) / (b.d.delta_C * b.a_C);
  b.v = y / (b.d.delta_M * b.a_M);
  return b;
}

double x_star(double n_C, double k, double p) {
  return std::min((1.0 - n_C) / k, (1.0 - p) * n_C);
}

double objective_C(double n, const PriceInputs& pr, double Lambda, const ModelParams& params) {
  const DerivedParams d = derive_constants(params);
  const double x = x_star(n, params.k, params.p);
  const double excess = pr.mu - pr.r + (1.0 - x) * pr.D_over_S + pr.sigma * Lambda;
  const double risk = pr.S_over_W_C * pr.sigma;
  return n * pr.S_over_W_C * excess + x * pr.D_over_W_C -
         0.5 * params.k * x * x * pr.D_over_W_C - d.var_scale * d.delta_C * risk * risk * n * n;
}

PartialPolicies partial_policies(const PriceInputs& pr, const MarketState& s,
                                 const ModelParams& params) {
  return partial_policies(pr, s, params, AdjustmentFns::exponential(params));
}

PartialPolicies partial_policies(const PriceInputs& pr, const MarketState& s,
                                 const ModelParams& params, const AdjustmentFns& fns) {
  check_params(params);
  const DerivedParams d = derive_constants(params);
  const VarphiValue phi = fns(s.Lambda);
  const double p = params.p, k = params.k;
  const double base = pr.mu - pr.r + pr.sigma * s.Lambda;
  const double quad_C = 2.0 * d.var_scale * d.delta_C * pr.S_over_W_C * pr.sigma * pr.sigma;

  PartialPolicies out;
  out.c_coeff_C = std::pow(params.rho, 1.0 / d.delta_C) * std::pow(phi.value, d.theta_C);
  out.c_coeff_M = std::pow(params.rho, 1.0 / d.delta_M) * std::pow(phi.value, d.theta_M);

  const double den1 = quad_C + (2.0 * (1.0 - p) + k * (1.0 - p) * (1.0 - p)) * pr.D_over_S;
  const double den2 = quad_C - pr.D_over_S / k;
  out.candidates = {(base + (2.0 - p) * pr.D_over_S) / den1,
                    (base + (1.0 - 1.0 / k) * pr.D_over_S) / den2, 1.0 / (1.0 + (1.0 - p) * k),
                    1.0};
  out.available = {den1 != 0.0, den2 != 0.0, true, true};

  double best = -kInf;
  for (int i = 0; i < 4; ++i) {
    const double n = out.candidates[i];
    if (!std::isfinite(n) || n < 0.0 || n > 1.0) out.available[i] = false;
    out.J_values[i] = out.available[i] ? objective_C(n, pr, s.Lambda, params) : kNaN;
    if (out.available[i] && out.J_values[i] > best + kTieTol) {
      best = out.J_values[i];
      out.chosen = i + 1;
    }
  }
  if (out.chosen == 0) throw SolverError("controlling holding", "no admissible candidate");
  out.n_C = out.candidates[out.chosen - 1];
  out.x_star = x_star(out.n_C, k, p);
  const double quad_M = 2.0 * d.var_scale * d.delta_M * pr.S_over_W_M * pr.sigma * pr.sigma;
  out.n_M = (base + (1.0 - out.x_star) * pr.D_over_S) / quad_M;
  return out;
}

double fixed_point_g(double n, const StateBlocks& b, const ModelParams& params) {
  const double n2 = b.u / (b.u + b.v);
  const double n3 = 1.0 / (1.0 + (1.0 - params.p) * params.k);
  const double B = n * b.a_C + (1.0 - n) * b.a_M;
  const double coef = (1.0 - params.p) * b.L / (2.0 * b.d.var_scale) * b.state.y /
                      (b.d.delta_M * b.a_M);
  return -n + n2 + n2 * (1.0 - n / n3) * coef * B * B / (b.Sigma * b.Sigma);
}

namespace {

RegionCandidates candidates_from_blocks(const StateBlocks& b, const ModelParams& params) {
  RegionCandidates c;
  const double n2 = b.u / (b.u + b.v);
  const double n3 = 1.0 / (1.0 + (1.0 - params.p) * params.k);
  c.n = {kNaN, n2, n3, 1.0};
  c.available = {false, std::isfinite(n2) && n2 >= 0.0 && n2 <= 1.0, true, true};

  if (b.Sigma == 0.0) return c;  // g undefined; region 1 unavailable
  if (params.p == 1.0) {
    c.n[0] = n2;
    c.n1_roots = {n2};
    c.available[0] = c.available[1];
    return c;
  }
  auto g = [&](double n) { return fixed_point_g(n, b, params); };
  c.g0 = checked(g(0.0), "region-1 fixed point g(0)");
  c.g1 = checked(g(1.0), "region-1 fixed point g(1)");
  if (!(c.g0 >= 0.0 && c.g1 <= 0.0))
    throw SolverError("region-1 fixed point", "bracket g(0) >= 0 >= g(1) violated (g(0) = " +
                                                  std::to_string(c.g0) + ", g(1) = " +
                                                  std::to_string(c.g1) + ")");
  const int steps = static_cast<int>(std::lround(1.0 / kScanStep));
  double lo = 0.0, glo = c.g0;
  for (int i = 1; i <= steps; ++i) {
    const double hi = i == steps ? 1.0 : i * kScanStep;
    const double ghi = i == steps ? c.g1 : checked(g(hi), "region-1 fixed point g(n)");
    if (glo == 0.0) {
      c.n1_roots.push_back(lo);
    } else if ((glo < 0.0) != (ghi < 0.0) && ghi != 0.0) {
      double a = lo, fa = glo, z = hi;
      while (z - a > kBisectTol) {
        const double mid = 0.5 * (a + z);
        const double fm = g(mid);
        if (fm == 0.0) {
          a = z = mid;
          break;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
          a = mid;
          fa = fm;
        } else {
          z = mid;
        }
      }
      c.n1_roots.push_back(0.5 * (a + z));
    }
    lo = hi;
    glo = ghi;
  }
  if (glo == 0.0) c.n1_roots.push_back(1.0);
  if (c.n1_roots.empty())
    throw SolverError("region-1 fixed point", "no sign change found despite a valid bracket");
  c.n[0] = c.n1_roots.front();
  c.available[0] = true;
  return c;
}

}  // namespace

RegionCandidates region_candidates(const MarketState& state, const ModelParams& params) {
  return region_candidates(state, params, AdjustmentFns::exponential(params));
}

RegionCandidates region_candidates(const MarketState& state, const ModelParams& params,
                                   const AdjustmentFns& fns) {
  check_params(params);
  if (!(state.y > 0.0 && state.y < 1.0))
    throw std::invalid_argument("region candidates need y strictly inside (0, 1)");
  return candidates_from_blocks(state_blocks(state, params, fns), params);
}

EquilibriumResult equilibrium_at(double n, double x, const StateBlocks& b,
                                 const ModelParams& params) {
  const DerivedParams& d = b.d;
  const double y = b.state.y, Lam = b.state.Lambda;
  const double vol = d.vol_scale;
  const double k = params.k;

  EquilibriumResult e;
  e.state = b.state;
  e.exists = true;
  e.n_C = n;
  e.n_M = 1.0 - n;
  e.x_star = x;
  fill_consumption(e, b);

  e.D_over_S = b.L / b.A;
  e.D_over_W_C = b.L * b.a_C / (1.0 - y);
  e.S_over_W_C = b.A * b.a_C / (1.0 - y);
  e.S_over_W_M = b.A * b.a_M / y;

  const double B = n * b.a_C + (1.0 - n) * b.a_M;
  e.sigma = checked(b.Sigma / (B * b.A), "sigma (stock volatility)");
  e.kappa = checked(vol * d.delta_M * b.a_M * (1.0 - n) * b.Sigma / (y * B), "kappa (Sharpe ratio)");

  const double bracket_C = 1.0 - y + y * b.a_C / b.a_M;
  const double bracket_M = y + (1.0 - y) * b.a_M / b.a_C;
  const double r = params.mu_D + params.sigma_D * Lam - params.l_C * b.a_C - params.l_M * b.a_M -
                   n * e.sigma * (vol * e.kappa + drift_tilt(d.theta_C, b, params)) * bracket_C -
                   (1.0 - n) * e.sigma * (vol * e.kappa + drift_tilt(d.theta_M, b, params)) * bracket_M +
                   (1.0 - y) * (b.a_C - curvature(d.theta_C, b, params)) +
                   y * (b.a_M - curvature(d.theta_M, b, params)) -
                   (x - 0.5 * k * x * x) * b.L * b.a_C - 0.5 * k * x * x * b.L * b.a_M;
  e.r = checked(r, "r (interest rate)");
  e.mu = checked(e.r - e.sigma * Lam + vol * e.kappa * e.sigma - (1.0 - x) * b.L / b.A,
                 "mu (stock mean-return)");

  const double tilt_M = d.h / params.epsilon * b.phi.ratio1;
  e.sigma_y = checked(y * (e.kappa / (vol * d.delta_M) + d.theta_M * tilt_M - params.sigma_D),
                      "sigma_y (consumption-share volatility)");
  const double mu_y =
      -e.sigma_y * (Lam + 2.0 * d.var_scale * params.sigma_D) + params.l_M * b.a_M +
      0.5 * k * x * x * b.L * b.a_M +
      y * (e.r - params.mu_D - params.sigma_D * Lam + e.kappa * e.kappa / d.delta_M +
           vol * tilt_M * d.theta_M * e.kappa / d.delta_M - b.a_M + curvature(d.theta_M, b, params));
  e.mu_y = checked(mu_y, "mu_y (consumption-share drift)");
  derived_quantities(e, params);
  return e;
}

void derived_quantities(EquilibriumResult& e, const ModelParams& params) {
  const DerivedParams d = derive_constants(params);
  e.mu_H = e.mu + e.sigma * e.state.Lambda;
  e.sigma_H = d.vol_scale * e.sigma;
  e.mu_G = e.mu_H + (1.0 - e.x_star) * e.D_over_S;
}

EquilibriumResult equilibrium(const MarketState& state, const ModelParams& params) {
  return equilibrium(state, params, AdjustmentFns::exponential(params));
}

EquilibriumResult equilibrium(const MarketState& state, const ModelParams& params,
                              const AdjustmentFns& fns) {
  check_params(params);
  if (!(state.y >= 0.0 && state.y <= 1.0))
    throw std::invalid_argument("consumption share y must lie in [0, 1]");
  if (state.y == 0.0 || state.y == 1.0) return boundary_equilibrium(state, params, fns);

  const StateBlocks b = state_blocks(state, params, fns);
  RegionCandidates cand = candidates_from_blocks(b, params);

  // Among several region-1 roots keep the one with the largest J_C under
  // its own region-1 prices.
  if (cand.n1_roots.size() > 1) {
    double best = -kInf;
    for (double root : cand.n1_roots) {
      const EquilibriumResult e = equilibrium_at(root, x_star(root, params.k, params.p), b, params);
      const double J = objective_C(root, e.prices(), state.Lambda, params);
      if (J > best) {
        best = J;
        cand.n[0] = root;
      }
    }
  }

  std::array<EquilibriumResult, 4> res;
  std::array<bool, 4> consistent{};
  std::array<std::array<double, 4>, 4> J{};
  for (auto& row : J) row.fill(kNaN);
  for (int j = 0; j < 4; ++j) {
    if (!cand.available[j]) continue;
    const double n = cand.n[j];
    res[j] = equilibrium_at(n, x_star(n, params.k, params.p), b, params);
    const PriceInputs pr = res[j].prices();
    double best = -kInf;
    for (int i = 0; i < 4; ++i) {
      if (!cand.available[i]) continue;
      J[j][i] = objective_C(cand.n[i], pr, state.Lambda, params);
      best = std::max(best, J[j][i]);
    }
    consistent[j] = J[j][j] >= best - kTieTol * std::max(1.0, std::abs(best));
  }

  int pick = -1;
  for (int j = 0; j < 4; ++j)
    if (consistent[j]) {
      pick = j;
      break;
    }
  // Tied regions that share the same holding describe one equilibrium; it
  // is reported as region 2 (the full-protection form).
  if (pick >= 0 && pick != 1 && consistent[1] && std::abs(cand.n[pick] - cand.n[1]) <= kBisectTol)
    pick = 1;

  EquilibriumResult out;
  if (pick < 0) {
    out.state = state;
    out.exists = false;
    out.region = Region::nonexistent;
    for (double* f : {&out.n_C, &out.n_M, &out.x_star, &out.r, &out.mu, &out.sigma, &out.kappa,
                      &out.mu_y, &out.sigma_y, &out.D_over_S, &out.D_over_W_C, &out.S_over_W_C,
                      &out.S_over_W_M, &out.mu_H, &out.sigma_H, &out.mu_G})
      *f = kNaN;
    fill_consumption(out, b);
  } else {
    out = res[pick];
    out.region = static_cast<Region>(pick + 1);
  }
  out.candidates = cand.n;
  out.available = cand.available;
  out.self_consistent = consistent;
  out.J_tables = J;
  out.n1_roots = cand.n1_roots;
  return out;
}

EquilibriumResult benchmark_equilibrium(const MarketState& state, const ModelParams& params) {
  return benchmark_equilibrium(state, params, AdjustmentFns::exponential(params));
}

EquilibriumResult benchmark_equilibrium(const MarketState& state, const ModelParams& params,
                                        const AdjustmentFns& fns) {
  ModelParams bench = params;
  bench.p = 1.0;
  check_params(bench);
  if (!(state.y >= 0.0 && state.y <= 1.0))
    throw std::invalid_argument("consumption share y must lie in [0, 1]");
  if (state.y == 0.0 || state.y == 1.0) return boundary_equilibrium(state, bench, fns, 2);
  const StateBlocks b = state_blocks(state, bench, fns);
  const double nB = b.u / (b.u + b.v);
  EquilibriumResult e = equilibrium_at(nB, 0.0, b, bench);
  e.region = Region::two;
  return e;
}

EquilibriumResult boundary_equilibrium(const MarketState& state, const ModelParams& params,
                                       std::optional<int> branch_hint) {
  return boundary_equilibrium(state, params, AdjustmentFns::exponential(params), branch_hint);
}

EquilibriumResult boundary_equilibrium(const MarketState& state, const ModelParams& params,
                                       const AdjustmentFns& fns, std::optional<int> branch_hint) {
  check_params(params);
  if (state.y != 0.0 && state.y != 1.0)
    throw std::invalid_argument("boundary equilibrium needs y = 0 or y = 1");
  if (branch_hint && *branch_hint != 2 && *branch_hint != 4)
    throw std::invalid_argument("boundary branch hint must be 2 or 4");

  const StateBlocks b = state_blocks(state, params, fns);
  const DerivedParams& d = b.d;
  const double vol = d.vol_scale, Lam = state.Lambda;
  const bool at_zero = state.y == 0.0;
  const double theta = at_zero ? d.theta_C : d.theta_M;
  const double delta = at_zero ? d.delta_C : d.delta_M;
  const double a = at_zero ? b.a_C : b.a_M;

  EquilibriumResult e;
  e.state = state;
  e.exists = true;
  e.region = Region::boundary;
  e.n_C = at_zero ? 1.0 : 0.0;
  e.n_M = 1.0 - e.n_C;
  e.x_star = 0.0;
  fill_consumption(e, b);
  e.D_over_S = b.L * a;
  e.D_over_W_C = at_zero ? b.L * b.a_C : kInf;
  e.S_over_W_C = at_zero ? 1.0 : kInf;
  e.S_over_W_M = at_zero ? kInf : 1.0;

  e.sigma = checked(params.sigma_D - d.h / params.epsilon * b.phi.ratio1 * theta, "sigma (boundary)");
  int branch = 2;
  if (at_zero) {
    if (branch_hint) {
      branch = *branch_hint;
    } else if (params.p < 1.0) {
      MarketState near = state;
      near.y = 1e-4;
      const EquilibriumResult inner = equilibrium(near, params, fns);
      branch = inner.region == Region::four ? 4 : 2;
    }
    e.boundary_branch = branch;
  }
  e.kappa = branch == 4 ? 0.0 : vol * delta * e.sigma;

  e.r = checked(params.mu_D + params.sigma_D * Lam - params.l_C * b.a_C - params.l_M * b.a_M -
                    e.sigma * (vol * e.kappa + drift_tilt(theta, b, params)) + a -
                    curvature(theta, b, params),
                "r (boundary)");
  e.mu = checked(e.r - e.sigma * Lam + vol * e.kappa * e.sigma - b.L * a, "mu (boundary)");
  e.sigma_y = 0.0;
  if (at_zero) {
    e.mu_y = params.l_M * b.a_M;
  } else {
    const double tilt_M = d.h / params.epsilon * b.phi.ratio1;
    e.mu_y = checked(e.r - params.mu_D - params.sigma_D * Lam + e.kappa * e.kappa / d.delta_M +
                         params.l_M * b.a_M + vol * tilt_M * d.theta_M * e.kappa / d.delta_M -
                         b.a_M + curvature(d.theta_M, b, params),
                     "mu_y (boundary)");
  }
  derived_quantities(e, params);
  return e;
}

BenchmarkDifferences benchmark_differences(const MarketState& state, const ModelParams& params,
                                           const EquilibriumResult& eq,
                                           const EquilibriumResult& bench) {
  return benchmark_differences(state, params, AdjustmentFns::exponential(params), eq, bench);
}

BenchmarkDifferences benchmark_differences(const MarketState& state, const ModelParams& params,
                                           const AdjustmentFns& fns, const EquilibriumResult& eq,
                                           const EquilibriumResult& bench) {
  const StateBlocks b = state_blocks(state, params, fns);
  const double y = state.y;
  const double gap = eq.n_C - bench.n_C;
  const double B = eq.n_C * b.a_C + (1.0 - eq.n_C) * b.a_M;
  const double mix = (1.0 - y) / b.d.delta_C + y / b.d.delta_M;
  BenchmarkDifferences out;
  out.d_sigma = bench.sigma * (b.a_M - b.a_C) * gap / B;
  out.d_kappa = -b.d.vol_scale * b.a_C * b.Sigma * gap / (mix * B * bench.n_M);
  out.d_sigma_y = y * out.d_kappa / (b.d.vol_scale * b.d.delta_M);
  return out;
}

PathEquilibrium path_equilibrium(const PathBundle& paths, std::span<const double> y,
                                 const ModelParams& params) {
  const std::size_t N = paths.grid.steps();
  if (y.size() != 1 && y.size() != N + 1)
    throw std::invalid_argument("path equilibrium: need one consumption share or one per node");
  PathEquilibrium out;
  out.states.reserve(N + 1);
  double integral = 0.0;
  for (std::size_t n = 0; n <= N; ++n) {
    const MarketState s{y.size() == 1 ? y[0] : y[n], paths.Lambda[n], paths.lambda[n]};
    EquilibriumResult e = equilibrium(s, params);
    if (n > 0) integral += out.states.back().r * paths.grid.dt();
    const double W_C = (1.0 - s.y) * paths.D_hat[n] / e.c_coeff_C;
    double S;
    if (s.y == 1.0) {
      S = paths.D_hat[n] / e.c_coeff_M;
    } else {
      S = W_C * e.S_over_W_C;
    }
    const double b_C = std::exp(-integral) * (W_C - e.n_C * S);
    out.W_C.push_back(W_C);
    out.S.push_back(S);
    out.b_C.push_back(b_C);
    out.b_M.push_back(-b_C);
    out.states.push_back(std::move(e));
  }
  return out;
}

}  // namespace fracecon
