#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fracecon/equilibrium.hpp"
#include "fracecon/model.hpp"

namespace fracecon {

/// Everything a CLI run needs besides the subcommand.
struct RunConfig {
  ModelParams params;

  // path commands
  double T = 1.0;
  std::size_t N = 1000;
  std::size_t refinement = 1;
  double D0 = 1.0;
  std::uint64_t seed = 1;

  // comparative statics
  double y_start = 0.0;
  double y_stop = 1.0;
  double y_step = 0.01;
  std::vector<double> p_list{1.0, 0.9, 0.6};
  std::vector<double> Lambda_list{-5.0, 0.0, 5.0};
  double lambda = 0.0;

  // convergence study
  std::size_t n_fine = 1u << 15;
  std::vector<std::size_t> factors{8, 16, 32};
  std::size_t seeds = 50;

  std::vector<double> y_grid() const;
  /// Throws std::invalid_argument on an empty grid, non-positive step or
  /// invalid model parameters.
  void check() const;
};

/// Applies `key = value` entries (model fields plus the run keys T, N,
/// refinement, D0, seed, y_start, y_stop, y_step, p_list, Lambda_list,
/// lambda, n_fine, factors, seeds). Unknown keys throw.
RunConfig run_config_from_entries(const std::map<std::string, std::string>& entries,
                                  RunConfig base = {});

struct SweepRow {
  double y = 0.0, p = 0.0, Lambda = 0.0;
  EquilibriumResult result;
  std::string error;  // non-empty if the solve failed
};

/// Cross product ordered by p, then Lambda, then y. Failures are captured
/// per row.
std::vector<SweepRow> run_sweep(const RunConfig& config);

extern const char* const kSweepHeader;
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// The CSV cells for one equilibrium (price cells empty when it does not exist).
std::vector<std::string> equilibrium_cells(double y, double p, double Lambda,
                                           const EquilibriumResult* e);

/// Writes fig03.csv .. fig14.csv and figures_manifest.txt into dir. Returns
/// the file names written.
std::vector<std::string> write_figure_files(const std::filesystem::path& dir,
                                            const RunConfig& config,
                                            const std::vector<SweepRow>& rows);

}  // namespace fracecon
