#include "fracecon/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "fracecon/config.hpp"
#include "fracecon/csv.hpp"
#include "fracecon/parallel.hpp"

namespace fracecon {

std::vector<double> RunConfig::y_grid() const {
  if (!(y_step > 0) || !std::isfinite(y_step)) throw std::invalid_argument("y_step must be positive");
  if (y_stop < y_start) throw std::invalid_argument("y_stop must not be below y_start");
  const auto count = static_cast<std::size_t>(std::floor((y_stop - y_start) / y_step + 1e-9)) + 1;
  std::vector<double> ys(count);
  for (std::size_t i = 0; i < count; ++i) ys[i] = y_start + static_cast<double>(i) * y_step;
  if (std::abs(ys.back() - y_stop) <= 1e-9 * y_step) ys.back() = y_stop;
  return ys;
}

void RunConfig::check() const {
  const ValidationReport rep = validate(params);
  if (!rep.ok()) throw std::invalid_argument(rep.describe());
  const auto ys = y_grid();
  if (ys.front() < 0.0 || ys.back() > 1.0) throw std::invalid_argument("y grid must lie in [0, 1]");
  if (p_list.empty() || Lambda_list.empty()) throw std::invalid_argument("sweep lists must be non-empty");
  for (double p : p_list)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p_list entries must lie in [0, 1]");
  if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
  if (N == 0 || refinement == 0) throw std::invalid_argument("N and refinement must be positive");
  if (!(T > 0)) throw std::invalid_argument("T must be positive");
  if (!(D0 > 0)) throw std::invalid_argument("D0 must be positive");
}

namespace {

std::size_t positive_size(const std::string& text, const char* what) {
  const auto v = parse_int(text, what);
  if (v <= 0) throw std::invalid_argument(std::string(what) + " must be positive");
  return static_cast<std::size_t>(v);
}

}  // namespace

RunConfig run_config_from_entries(const std::map<std::string, std::string>& entries,
                                  RunConfig base) {
  std::map<std::string, std::string> rest;
  base.params = params_from_entries(entries, base.params, &rest);
  for (const auto& [key, value] : rest) {
    if (key == "T") base.T = parse_real(value, key);
    else if (key == "N") base.N = positive_size(value, "N");
    else if (key == "refinement") base.refinement = positive_size(value, "refinement");
    else if (key == "D0") base.D0 = parse_real(value, key);
    else if (key == "seed") base.seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "y_start") base.y_start = parse_real(value, key);
    else if (key == "y_stop") base.y_stop = parse_real(value, key);
    else if (key == "y_step") base.y_step = parse_real(value, key);
    else if (key == "p_list") base.p_list = parse_real_list(value, key);
    else if (key == "Lambda_list") base.Lambda_list = parse_real_list(value, key);
    else if (key == "lambda") base.lambda = parse_real(value, key);
    else if (key == "n_fine") base.n_fine = positive_size(value, "n_fine");
    else if (key == "seeds") base.seeds = positive_size(value, "seeds");
    else if (key == "factors") {
      base.factors.clear();
      for (auto f : parse_int_list(value, key)) {
        if (f <= 0) throw std::invalid_argument("factors must be positive");
        base.factors.push_back(static_cast<std::size_t>(f));
      }
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  return base;
}

std::vector<SweepRow> run_sweep(const RunConfig& config) {
  config.check();
  const auto ys = config.y_grid();
  std::vector<SweepRow> rows;
  rows.reserve(config.p_list.size() * config.Lambda_list.size() * ys.size());
  for (double p : config.p_list)
    for (double L : config.Lambda_list)
      for (double y : ys) rows.push_back({y, p, L, {}, {}});

  parallel_for(rows.size(), [&](std::size_t i) {
    SweepRow& row = rows[i];
    ModelParams params = config.params;
    params.p = row.p;
    try {
      row.result = equilibrium({row.y, row.Lambda, config.lambda}, params);
    } catch (const std::exception& ex) {
      row.error = ex.what();
      row.result = {};
      row.result.state = {row.y, row.Lambda, config.lambda};
    }
  });
  return rows;
}

const char* const kSweepHeader =
    "y,p,Lambda,region,n_C,n_M,x_star,r,mu,sigma,kappa,mu_y,sigma_y,mu_H,sigma_H,mu_G,D_over_S,exists";

std::vector<std::string> equilibrium_cells(double y, double p, double Lambda,
                                           const EquilibriumResult* e) {
  std::vector<std::string> cells{format_real(y), format_real(p), format_real(Lambda)};
  const bool ok = e && e->exists;
  cells.push_back(ok ? std::to_string(region_code(e->region)) : "0");
  const double vals[] = {ok ? e->n_C : 0,    ok ? e->n_M : 0,     ok ? e->x_star : 0,
                         ok ? e->r : 0,      ok ? e->mu : 0,      ok ? e->sigma : 0,
                         ok ? e->kappa : 0,  ok ? e->mu_y : 0,    ok ? e->sigma_y : 0,
                         ok ? e->mu_H : 0,   ok ? e->sigma_H : 0, ok ? e->mu_G : 0,
                         ok ? e->D_over_S : 0};
  for (double v : vals) cells.push_back(ok ? format_real(v) : std::string());
  cells.push_back(ok ? "1" : "0");
  return cells;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& row : rows)
    write_row(out, equilibrium_cells(row.y, row.p, row.Lambda,
                                     row.error.empty() ? &row.result : nullptr));
}

namespace {

struct FigureSpec {
  int number;
  const char* quantity;
  bool panels_by_Lambda;  // series by p inside each Lambda panel
  double (*get)(const EquilibriumResult&);
};

const FigureSpec kFigures[] = {
    {3, "n_C", true, [](const EquilibriumResult& e) { return e.n_C; }},
    {4, "n_C", false, [](const EquilibriumResult& e) { return e.n_C; }},
    {5, "x_star", true, [](const EquilibriumResult& e) { return e.x_star; }},
    {6, "x_star", false, [](const EquilibriumResult& e) { return e.x_star; }},
    {7, "sigma_H", true, [](const EquilibriumResult& e) { return e.sigma_H; }},
    {8, "sigma_H", false, [](const EquilibriumResult& e) { return e.sigma_H; }},
    {9, "mu_H", true, [](const EquilibriumResult& e) { return e.mu_H; }},
    {10, "mu_H", false, [](const EquilibriumResult& e) { return e.mu_H; }},
    {11, "mu_G", true, [](const EquilibriumResult& e) { return e.mu_G; }},
    {12, "mu_G", false, [](const EquilibriumResult& e) { return e.mu_G; }},
    {13, "r", true, [](const EquilibriumResult& e) { return e.r; }},
    {14, "r", false, [](const EquilibriumResult& e) { return e.r; }},
};

}  // namespace

std::vector<std::string> write_figure_files(const std::filesystem::path& dir,
                                            const RunConfig& config,
                                            const std::vector<SweepRow>& rows) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  std::ofstream manifest(dir / "figures_manifest.txt");
  if (!manifest) throw std::runtime_error("cannot write figure manifest in '" + dir.string() + "'");
  manifest << "# one file per figure; x axis y, one panel per value of the panel column,\n"
              "# one series per value of the series column; empty value = no equilibrium\n";

  for (const auto& fig : kFigures) {
    char name[16];
    std::snprintf(name, sizeof name, "fig%02d.csv", fig.number);
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error(std::string("cannot write ") + name);
    const char* panel = fig.panels_by_Lambda ? "Lambda" : "p";
    const char* series = fig.panels_by_Lambda ? "p" : "Lambda";
    out << panel << ',' << series << ",y," << fig.quantity << '\n';
    const auto& outer = fig.panels_by_Lambda ? config.Lambda_list : config.p_list;
    const auto& inner = fig.panels_by_Lambda ? config.p_list : config.Lambda_list;
    for (double a : outer)
      for (double b : inner)
        for (const auto& row : rows) {
          const double pv = fig.panels_by_Lambda ? row.Lambda : row.p;
          const double sv = fig.panels_by_Lambda ? row.p : row.Lambda;
          if (pv != a || sv != b) continue;
          const bool ok = row.error.empty() && row.result.exists;
          write_row(out, {format_real(a), format_real(b), format_real(row.y),
                          ok ? format_real(fig.get(row.result)) : std::string()});
        }
    manifest << name << ": " << fig.quantity << " against y; panels by " << panel
             << ", series by " << series << '\n';
    written.push_back(name);
  }
  written.push_back("figures_manifest.txt");
  return written;
}

}  // namespace fracecon
