#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fracecon/equilibrium.hpp"
#include "fracecon/model.hpp"
#include "fracecon/paths.hpp"

namespace fracecon::testing {

/// Equal-preference economy with H = p = 1/2 where no equilibrium exists.
inline ModelParams nonexistence_params() {
  ModelParams p;
  p.H = 0.5;
  p.p = 0.5;
  p.gamma_C = p.gamma_M = 2.0;
  p.alpha_C = p.alpha_M = 1.0;
  p.k = 2.0;
  p.rho = 0.01;
  p.sigma_D = 0.01;
  p.l_C = 0.45;
  p.l_M = 0.5;
  p.beta1 = 0.0;
  return p;
}

inline bool close_abs(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= tol;
}

inline bool close_rel(double a, double b, double tol) {
  if (a == b) return true;
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

using Field = std::pair<const char*, double EquilibriumResult::*>;

inline const std::vector<Field>& result_fields() {
  static const std::vector<Field> fields{
      {"n_C", &EquilibriumResult::n_C},
      {"n_M", &EquilibriumResult::n_M},
      {"x_star", &EquilibriumResult::x_star},
      {"r", &EquilibriumResult::r},
      {"mu", &EquilibriumResult::mu},
      {"sigma", &EquilibriumResult::sigma},
      {"kappa", &EquilibriumResult::kappa},
      {"mu_y", &EquilibriumResult::mu_y},
      {"sigma_y", &EquilibriumResult::sigma_y},
      {"D_over_S", &EquilibriumResult::D_over_S},
      {"D_over_W_C", &EquilibriumResult::D_over_W_C},
      {"S_over_W_C", &EquilibriumResult::S_over_W_C},
      {"S_over_W_M", &EquilibriumResult::S_over_W_M},
      {"c_coeff_C", &EquilibriumResult::c_coeff_C},
      {"c_coeff_M", &EquilibriumResult::c_coeff_M},
      {"mu_H", &EquilibriumResult::mu_H},
      {"sigma_H", &EquilibriumResult::sigma_H},
      {"mu_G", &EquilibriumResult::mu_G},
  };
  return fields;
}

/// Names of the fields (and region) where a and b differ by more than tol.
inline std::vector<std::string> field_mismatches(const EquilibriumResult& a,
                                                 const EquilibriumResult& b, double tol) {
  std::vector<std::string> out;
  if (a.region != b.region) out.push_back("region");
  if (a.exists != b.exists) out.push_back("exists");
  for (const auto& [name, member] : result_fields())
    if (!close_abs(a.*member, b.*member, tol)) out.push_back(name);
  return out;
}

/// Clearing, diversion and Sharpe identities of one existing equilibrium.
inline std::vector<std::string> invariant_violations(const EquilibriumResult& e,
                                                     const ModelParams& params, double tol) {
  std::vector<std::string> out;
  if (!e.exists) return out;
  if (std::abs(e.n_C + e.n_M - 1.0) > tol) out.push_back("n_C + n_M = 1");
  if (e.x_star < 0.0 || e.x_star > (1.0 - params.p) * e.n_C + tol) out.push_back("x* bounds");
  if (e.region != Region::boundary &&
      std::abs(e.x_star - x_star(e.n_C, params.k, params.p)) > tol)
    out.push_back("x* = min branch");
  if (params.p == 1.0 && e.x_star != 0.0) out.push_back("x* = 0 at p = 1");

  const double y = e.state.y;
  const double L = params.net_output_share();
  if (y > 0.0 && y < 1.0) {
    const double share_C = L * e.c_coeff_C / e.D_over_W_C;
    const double share_M = L * e.c_coeff_M / (e.D_over_S * e.S_over_W_M);
    if (std::abs(share_C - (1.0 - y)) > tol || std::abs(share_M - y) > tol ||
        std::abs(share_C + share_M - 1.0) > tol)
      out.push_back("consumption shares");
    if (!close_rel(e.S_over_W_C * e.D_over_S, e.D_over_W_C, tol)) out.push_back("S/W_C D/S = D/W_C");
  }

  const DerivedParams d = derive_constants(params);
  const double excess = e.mu - e.r + (1.0 - e.x_star) * e.D_over_S + e.sigma * e.state.Lambda;
  const double kappa = excess / (d.vol_scale * e.sigma);
  if (!(std::abs(kappa - e.kappa) <= tol * std::max(1.0, std::abs(e.kappa))))
    out.push_back("Sharpe consistency");

  if (!close_rel(e.sigma_H, d.vol_scale * e.sigma, tol) ||
      !close_abs(e.mu_H, e.mu + e.sigma * e.state.Lambda, tol) ||
      !close_abs(e.mu_G, e.mu_H + (1.0 - e.x_star) * e.D_over_S, tol))
    out.push_back("derived quantities");
  return out;
}

/// Deterministic log-output paths of the memory-sign study on [0, T].
inline std::vector<double> sign_study_path(int which, const TimeGrid& grid) {
  std::vector<double> Z(grid.steps() + 1);
  for (std::size_t n = 0; n <= grid.steps(); ++n) {
    const double t = grid.node(n);
    switch (which) {
      case 1: Z[n] = 0.015 + 0.02 * (t - 0.5); break;
      case 2: Z[n] = 0.015 - 0.02 * (t - 0.5); break;
      default: Z[n] = 0.015; break;
    }
  }
  return Z;
}

}  // namespace fracecon::testing
