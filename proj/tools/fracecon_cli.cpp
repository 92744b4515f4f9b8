#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "fracecon/config.hpp"
#include "fracecon/csv.hpp"
#include "fracecon/equilibrium.hpp"
#include "fracecon/memory.hpp"
#include "fracecon/paths.hpp"
#include "fracecon/sweep.hpp"

using namespace fracecon;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Raised for I/O and other failures that are not the user's input.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::string out_path;
  std::optional<std::int64_t> seed;
};

void log_stage(const std::string& msg) { std::cerr << "[fracecon] " << msg << '\n'; }

RunConfig load_config(const Globals& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg = run_config_from_entries(load_key_values(g.config_path));
  if (g.seed) cfg.seed = static_cast<std::uint64_t>(*g.seed);
  const ValidationReport rep = validate(cfg.params);
  for (const auto& w : rep.warnings) log_stage("warning: " + w.field + ": " + w.message);
  if (!rep.ok()) throw std::invalid_argument(rep.describe());
  return cfg;
}

// Output goes to --out if given, otherwise to standard output.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw RuntimeFailure("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool to_stdout() const { return !file_; }
  void close(const std::string& path) {
    if (file_) {
      file_->close();
      if (!*file_) throw RuntimeFailure("failed writing '" + path + "'");
    } else {
      std::cout.flush();
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int cmd_simulate(const Globals& g, std::size_t refinement_flag) {
  RunConfig cfg = load_config(g);
  if (refinement_flag) cfg.refinement = refinement_flag;
  cfg.check();
  const TimeGrid grid(cfg.T, cfg.N);
  log_stage("simulating " + std::to_string(cfg.N) + " steps, refinement " +
            std::to_string(cfg.refinement) + ", seed " + std::to_string(cfg.seed));
  const PathBundle b = simulate_paths(grid, cfg.params, cfg.seed, cfg.refinement, cfg.D0);
  Sink sink(g.out_path);
  write_paths_csv(sink.stream(), b);
  sink.close(g.out_path);
  return 0;
}

int cmd_estimate(const Globals& g, const std::string& input, bool summary) {
  RunConfig cfg = load_config(g);
  std::ifstream in(input, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open input file '" + input + "'");
  const CsvTable table = read_csv(in);
  const auto& t = table.column("t");
  const auto& Z = table.column("Z");
  if (t.size() < 2) throw std::invalid_argument("estimate: need at least two rows");
  const std::size_t N = t.size() - 1;
  for (std::size_t i = 0; i <= N; ++i)
    if (!std::isfinite(t[i]) || !std::isfinite(Z[i]))
      throw std::invalid_argument("estimate: line " + std::to_string(i + 2) + ": missing or non-finite value");
  const double dt = (t[N] - t[0]) / static_cast<double>(N);
  if (!(dt > 0)) throw std::invalid_argument("estimate: times must increase");
  for (std::size_t i = 1; i <= N; ++i)
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * dt)
      throw std::invalid_argument("estimate: line " + std::to_string(i + 2) +
                                  ": time grid is not uniform");

  const TimeGrid grid(t[N] - t[0], N);
  log_stage("estimating memory on " + std::to_string(N) + " steps");
  const MemoryEstimate est = estimate_memory(Z, grid, cfg.params);

  if (!summary || !g.out_path.empty()) {
    Sink sink(g.out_path);
    auto& out = sink.stream();
    out << "t,dw_hat,Lambda_hat,lambda_hat\n";
    for (std::size_t n = 0; n <= N; ++n) {
      out << format_real(t[n]) << ',';
      if (n > 0) out << format_real(est.dw_hat[n - 1]);
      out << ',' << format_real(est.Lambda_hat[n]) << ',' << format_real(est.lambda_hat[n]) << '\n';
    }
    sink.close(g.out_path);
  }
  if (summary) {
    const double LT = est.Lambda_hat[N];
    const char* cls = std::abs(LT) <= 1e-12 ? "none" : (LT > 0 ? "good" : "bad");
    std::cout << "Lambda_T=" << format_real(LT) << " lambda_T=" << format_real(est.lambda_hat[N])
              << " memory=" << cls << '\n';
  }
  return 0;
}

void print_block(std::ostream& os, const EquilibriumResult& e, const ModelParams& params) {
  os << "# y=" << format_real(e.state.y) << " p=" << format_real(params.p)
     << " Lambda=" << format_real(e.state.Lambda) << " lambda=" << format_real(e.state.lambda) << '\n';
  if (e.exists) {
    os << "# region " << region_name(e.region);
    if (e.boundary_branch) os << " (Sharpe branch of region " << e.boundary_branch << ")";
    os << "\n# n_C=" << format_real(e.n_C) << " x_star=" << format_real(e.x_star)
       << " r=" << format_real(e.r) << " mu=" << format_real(e.mu)
       << " sigma=" << format_real(e.sigma) << " kappa=" << format_real(e.kappa) << '\n';
  } else {
    os << "# no equilibrium: no region is self-consistent\n";
  }
  if (e.region != Region::boundary) {
    os << "# candidates n1..n4:";
    for (int i = 0; i < 4; ++i) os << ' ' << (e.available[i] ? format_real(e.candidates[i]) : "n/a");
    os << '\n';
    for (int j = 0; j < 4; ++j) {
      if (!e.available[j]) continue;
      os << "# J_C under region-" << j + 1 << " prices:";
      for (int i = 0; i < 4; ++i) os << ' ' << (e.available[i] ? format_real(e.J_tables[j][i]) : "n/a");
      os << (e.self_consistent[j] ? "  (self-consistent)" : "") << '\n';
    }
  }
}

int cmd_equilibrium(const Globals& g, double y, std::optional<double> p, double Lambda,
                    double lambda, std::optional<int> branch) {
  RunConfig cfg = load_config(g);
  if (p) cfg.params.p = *p;
  const ValidationReport rep = validate(cfg.params);
  if (!rep.ok()) throw std::invalid_argument(rep.describe());
  if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("--y must lie in [0, 1]");
  const MarketState state{y, Lambda, lambda};
  const EquilibriumResult e = (y == 0.0 || y == 1.0)
                                  ? boundary_equilibrium(state, cfg.params, branch)
                                  : equilibrium(state, cfg.params);
  Sink sink(g.out_path);
  sink.stream() << kSweepHeader << '\n';
  write_row(sink.stream(), equilibrium_cells(y, cfg.params.p, Lambda, &e));
  sink.close(g.out_path);
  print_block(std::cout, e, cfg.params);
  return 0;
}

int cmd_sweep(const Globals& g, const std::string& figures_dir) {
  RunConfig cfg = load_config(g);
  cfg.check();
  const auto ys = cfg.y_grid();
  log_stage("sweeping " + std::to_string(ys.size() * cfg.p_list.size() * cfg.Lambda_list.size()) +
            " states");
  const auto rows = run_sweep(cfg);
  std::size_t failed = 0, missing = 0;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      ++failed;
      log_stage("y=" + format_real(row.y) + " p=" + format_real(row.p) +
                " Lambda=" + format_real(row.Lambda) + ": " + row.error);
    } else if (!row.result.exists) {
      ++missing;
    }
  }
  if (failed || missing)
    log_stage(std::to_string(failed) + " failed rows, " + std::to_string(missing) +
              " rows without equilibrium");
  Sink sink(g.out_path);
  write_sweep_csv(sink.stream(), rows);
  sink.close(g.out_path);
  if (!figures_dir.empty()) {
    try {
      const auto files = write_figure_files(figures_dir, cfg, rows);
      log_stage("wrote " + std::to_string(files.size()) + " figure files to " + figures_dir);
    } catch (const std::filesystem::filesystem_error& ex) {
      throw RuntimeFailure(ex.what());
    }
  }
  return 0;
}

int cmd_convergence(const Globals& g, const std::vector<std::size_t>& factors,
                    std::optional<std::size_t> seeds, std::optional<std::size_t> n_fine) {
  RunConfig cfg = load_config(g);
  if (!factors.empty()) cfg.factors = factors;
  if (seeds) cfg.seeds = *seeds;
  if (n_fine) cfg.n_fine = *n_fine;
  log_stage("convergence study: N_fine=" + std::to_string(cfg.n_fine) + ", " +
            std::to_string(cfg.seeds) + " seeds");
  const ConvergenceReport rep =
      convergence_study(cfg.params, cfg.T, cfg.n_fine, cfg.factors, cfg.seeds, cfg.seed);
  Sink sink(g.out_path);
  auto& out = sink.stream();
  out << "dt,median_err_Lambda,median_err_lambda\n";
  for (std::size_t i = 0; i < rep.dt_values.size(); ++i)
    write_row(out, {format_real(rep.dt_values[i]), format_real(rep.max_errors_Lambda[i]),
                    format_real(rep.max_errors_lambda[i])});
  sink.close(g.out_path);
  std::cout << "# fitted_rate=" << format_real(rep.fitted_rate)
            << " rate_Lambda=" << format_real(rep.rate_Lambda)
            << " rate_lambda=" << format_real(rep.rate_lambda) << " seeds=" << rep.seeds << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate fractional economy: paths, memory estimation and equilibrium"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::int64_t seed_value = 0;
  app.add_option("--config", g.config_path, "key = value parameter file");
  app.add_option("--out", g.out_path, "output file (default: standard output)");
  auto* seed_opt = app.add_option("--seed", seed_value, "random seed");

  auto* sim = app.add_subcommand("simulate", "simulate Brownian, memory and output paths");
  std::size_t refinement = 0;
  sim->add_option("--refinement", refinement, "simulate on an R-fold finer grid")
      ->check(CLI::PositiveNumber);

  auto* est = app.add_subcommand("estimate", "recover memory processes from a t,Z file");
  std::string input;
  bool summary = false;
  est->add_option("--input", input, "CSV with header t,Z")->required();
  est->add_flag("--summary", summary, "print terminal values and memory classification");

  auto* eq = app.add_subcommand("equilibrium", "equilibrium at one state");
  double y = 0.5, Lambda = 0.0, lambda = 0.0, p_value = 0.0;
  int branch_value = 0;
  eq->add_option("--y", y, "minority consumption share")->required();
  auto* p_opt = eq->add_option("--p", p_value, "investor protection (overrides config)");
  eq->add_option("--Lambda", Lambda, "memory level");
  eq->add_option("--lambda", lambda, "second memory level");
  auto* branch_opt = eq->add_option("--branch", branch_value, "Sharpe branch at y = 0 (2 or 4)");

  auto* sw = app.add_subcommand("sweep", "comparative statics over (y, p, Lambda)");
  std::string figures;
  sw->add_option("--figures", figures, "directory for per-figure files");

  auto* conv = app.add_subcommand("convergence", "pathwise error of the memory estimator");
  std::vector<std::size_t> factors;
  std::size_t seeds = 0, n_fine = 0;
  conv->add_option("--factors", factors, "coarse factors")->delimiter(',');
  auto* seeds_opt = conv->add_option("--seeds", seeds, "number of seeds");
  auto* fine_opt = conv->add_option("--n-fine", n_fine, "fine grid steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    if (*sim) return cmd_simulate(g, refinement);
    if (*est) return cmd_estimate(g, input, summary);
    if (*eq)
      return cmd_equilibrium(g, y, *p_opt ? std::optional<double>(p_value) : std::nullopt, Lambda,
                             lambda, *branch_opt ? std::optional<int>(branch_value) : std::nullopt);
    if (*sw) return cmd_sweep(g, figures);
    if (*conv)
      return cmd_convergence(g, factors, *seeds_opt ? std::optional<std::size_t>(seeds) : std::nullopt,
                             *fine_opt ? std::optional<std::size_t>(n_fine) : std::nullopt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}
