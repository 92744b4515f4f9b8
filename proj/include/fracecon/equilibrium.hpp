#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracecon/model.hpp"
#include "fracecon/paths.hpp"

namespace fracecon {

/// Sufficient statistics at one instant.
struct MarketState {
  double y = 0.5;        // minority consumption share
  double Lambda = 0.0;   // memory level
  double lambda = 0.0;
};

/// Region labels. Boundary marks the explicit y in {0, 1} formulas.
enum class Region : int { nonexistent = 0, one = 1, two = 2, three = 3, four = 4, boundary = 5 };

int region_code(Region r);
std::string region_name(Region r);

/// Raised when an intermediate quantity is not finite or an internal
/// consistency check fails. what() names the formula involved.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& formula, const std::string& detail);
  const std::string& formula() const { return formula_; }

 private:
  std::string formula_;
};

/// Prices and wealth ratios a shareholder takes as given.
struct PriceInputs {
  double r = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double D_over_S = 0.0;
  double D_over_W_C = 0.0;
  double S_over_W_C = 0.0;
  double S_over_W_M = 0.0;
};

struct EquilibriumResult {
  MarketState state;
  Region region = Region::nonexistent;
  bool exists = false;

  double n_C = 0.0, n_M = 0.0, x_star = 0.0;
  double r = 0.0, mu = 0.0, sigma = 0.0, kappa = 0.0;
  double mu_y = 0.0, sigma_y = 0.0;
  double D_over_S = 0.0, D_over_W_C = 0.0, S_over_W_C = 0.0, S_over_W_M = 0.0;
  double c_coeff_C = 0.0, c_coeff_M = 0.0;  // consumption-to-wealth ratios
  double mu_H = 0.0, sigma_H = 0.0, mu_G = 0.0;

  // Diagnostics of the region search (interior states only).
  std::array<double, 4> candidates{};
  std::array<bool, 4> available{};
  std::array<bool, 4> self_consistent{};
  std::array<std::array<double, 4>, 4> J_tables{};  // [region prices][candidate]
  std::vector<double> n1_roots;
  int boundary_branch = 0;  // 2 or 4 at y = 0, 0 otherwise

  PriceInputs prices() const;
};

/// Composite state-dependent building blocks shared by every formula.
struct StateBlocks {
  MarketState state;
  DerivedParams d;
  VarphiValue phi;
  double a_C = 0.0, a_M = 0.0;  // rho^{1/delta_i} varphi^{theta_i}
  double A = 0.0;               // (1-y)/a_C + y/a_M
  double L = 0.0;               // 1 - l_C - l_M
  double Sigma = 0.0;           // sigma_D - (h/eps) q (theta_C (1-y) + theta_M y)
  double u = 0.0, v = 0.0;      // (1-y)/(delta_C a_C), y/(delta_M a_M)
};

StateBlocks state_blocks(const MarketState& state, const ModelParams& params,
                         const AdjustmentFns& fns);

double x_star(double n_C, double k, double p);

/// J_C for holding n with diversion x*(n), under fixed prices.
double objective_C(double n, const PriceInputs& prices, double Lambda, const ModelParams& params);

struct PartialPolicies {
  double c_coeff_C = 0.0, c_coeff_M = 0.0;
  std::array<double, 4> candidates{};
  std::array<bool, 4> available{};
  std::array<double, 4> J_values{};
  int chosen = 0;  // 1..4
  double n_C = 0.0, n_M = 0.0, x_star = 0.0;
};

/// Optimal policies of both shareholders at given prices. A candidate whose
/// denominator vanishes or that falls outside [0, 1] is flagged unavailable.
PartialPolicies partial_policies(const PriceInputs& prices, const MarketState& state,
                                 const ModelParams& params);
PartialPolicies partial_policies(const PriceInputs& prices, const MarketState& state,
                                 const ModelParams& params, const AdjustmentFns& fns);

struct RegionCandidates {
  std::array<double, 4> n{};
  std::array<bool, 4> available{};
  std::vector<double> n1_roots;  // every bracketed zero of g on [0, 1]
  double g0 = 0.0, g1 = 0.0;
};

/// The fixed-point function whose zeros are the region-1 holdings.
double fixed_point_g(double n, const StateBlocks& b, const ModelParams& params);

/// Candidate holdings of the four regions. Region 1 is solved by a sign scan
/// of g at step 1e-3 followed by bisection to 1e-12 on each bracket.
RegionCandidates region_candidates(const MarketState& state, const ModelParams& params);
RegionCandidates region_candidates(const MarketState& state, const ModelParams& params,
                                   const AdjustmentFns& fns);

/// Equilibrium quantities with holding n and diversion x imposed.
EquilibriumResult equilibrium_at(double n, double x, const StateBlocks& b,
                                 const ModelParams& params);

/// Full equilibrium with region selection. y in {0, 1} is routed to
/// boundary_equilibrium. Nonexistence is reported through exists = false.
EquilibriumResult equilibrium(const MarketState& state, const ModelParams& params);
EquilibriumResult equilibrium(const MarketState& state, const ModelParams& params,
                              const AdjustmentFns& fns);

/// Full-protection economy (x = 0), labelled region 2. y in {0, 1} gives the
/// boundary result on branch 2.
EquilibriumResult benchmark_equilibrium(const MarketState& state, const ModelParams& params);
EquilibriumResult benchmark_equilibrium(const MarketState& state, const ModelParams& params,
                                        const AdjustmentFns& fns);

/// Limits y -> 0+ and y -> 1-. At y = 0 the Sharpe ratio depends on the
/// region holding near zero: branch_hint 2 or 4. Without a hint, p = 1 uses
/// 2; otherwise the region of the interior solve at y = 1e-4 is inherited
/// (4 if that region is 4, else 2).
EquilibriumResult boundary_equilibrium(const MarketState& state, const ModelParams& params,
                                       std::optional<int> branch_hint = std::nullopt);
EquilibriumResult boundary_equilibrium(const MarketState& state, const ModelParams& params,
                                       const AdjustmentFns& fns,
                                       std::optional<int> branch_hint = std::nullopt);

struct BenchmarkDifferences {
  double d_sigma = 0.0;
  double d_kappa = 0.0;
  double d_sigma_y = 0.0;
};

/// Closed-form gaps to the benchmark driven by the excess concentration
/// n_C - n_C^B.
BenchmarkDifferences benchmark_differences(const MarketState& state, const ModelParams& params,
                                           const EquilibriumResult& eq,
                                           const EquilibriumResult& bench);
BenchmarkDifferences benchmark_differences(const MarketState& state, const ModelParams& params,
                                           const AdjustmentFns& fns, const EquilibriumResult& eq,
                                           const EquilibriumResult& bench);

/// Fills mu_H = mu + sigma Lambda, sigma_H = sqrt(2H) eps^h sigma and
/// mu_G = mu_H + (1 - x*) D/S.
void derived_quantities(EquilibriumResult& eq, const ModelParams& params);

/// Equilibrium along a simulated path with a given consumption-share series
/// (one value, or one per node). Bond holdings use the left-point integral
/// of r along the path.
struct PathEquilibrium {
  std::vector<EquilibriumResult> states;
  std::vector<double> W_C, S, b_C, b_M;
};
PathEquilibrium path_equilibrium(const PathBundle& paths, std::span<const double> y,
                                 const ModelParams& params);

}  // namespace fracecon
