#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fracecon/csv.hpp"
#include "fracecon/paths.hpp"
#include "fracecon/rng.hpp"

using namespace fracecon;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_SUITE("rng") {

TEST_CASE("seeded streams are reproducible and distinct") {
  NormalRng a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differs = differs || x != c.normal();
  }
  CHECK(differs);
}

TEST_CASE("uniforms lie in [0, 1)") {
  NormalRng r(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("first draws are pinned") {
  // Guards the documented bit stream against accidental changes.
  NormalRng r(1);
  const double first = r.normal();
  NormalRng again(1);
  CHECK(again.normal() == first);
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

}  // TEST_SUITE

TEST_SUITE("paths") {

TEST_CASE("time grid") {
  const TimeGrid g(1.0, 3);
  CHECK(g.dt() == doctest::Approx(1.0 / 3.0));
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(3) == 1.0);
  const auto t = g.nodes();
  CHECK(t.size() == 4);
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
  CHECK(g.refine(4).steps() == 12);
  CHECK(g.refine(4).horizon() == 1.0);
  CHECK_THROWS_AS(TimeGrid(0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(5.0, 2), std::invalid_argument);  // dt > 1
  CHECK_NOTHROW(TimeGrid(2.0, 2));
}

TEST_CASE("brownian increments have the right moments") {
  const TimeGrid g(100.0, 100000);  // dt = 1e-3
  const auto dw = simulate_brownian(g, 11);
  REQUIRE(dw.size() == 100000);
  CHECK(dw == simulate_brownian(g, 11));
  const double n = static_cast<double>(dw.size()), dt = g.dt();
  const double mean = std::accumulate(dw.begin(), dw.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : dw) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1);
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(dt / n));
  CHECK(std::abs(var - dt) <= 5.0 * dt * std::sqrt(2.0 / (n - 1)));
}

TEST_CASE("kernel weights and sums") {
  const auto w = kernel_weights(0.5, 2, 0.1, -0.5, 2.0);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == doctest::Approx(2.0 / std::sqrt(0.1)));
  CHECK(w[2] == doctest::Approx(2.0 / std::sqrt(1.1)));
  const std::vector<double> dw{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const std::vector<double> ones(7, 1.0);
  CHECK(kernel_sum(ones, dw, 0) == 0.0);
  CHECK(kernel_sum(ones, dw, 6) == 21.0);
  const std::vector<double> lag{0.0, 1.0, 10.0, 100.0, 1000.0, 1e4, 1e5};
  // node 3: w[3] dw[0] + w[2] dw[1] + w[1] dw[2]
  CHECK(kernel_sum(lag, dw, 3) == 100.0 + 20.0 + 3.0);
  CHECK(kernel_sum(lag, dw, 5) == 1e4 + 2e3 + 300.0 + 40.0 + 5.0);
}

TEST_CASE("kernel signs follow h") {
  for (double H : {0.35, 0.65}) {
    ModelParams p;
    p.H = H;
    const MemoryKernels k(0.01, 50, p);
    for (double v : k.Lambda) CHECK((H > 0.5 ? v > 0 : v < 0));
    for (double v : k.fbm) CHECK(v > 0);
  }
}

TEST_CASE("memory vanishes without memory") {
  ModelParams p;
  p.H = 0.5;
  const TimeGrid g(1.0, 50);
  const auto dw = simulate_brownian(g.refine(4), 5);
  const MemoryPaths m = memory_exact(g, dw, 4, p);
  for (double v : m.Lambda) CHECK(v == 0.0);
  for (double v : m.lambda) CHECK(v == 0.0);
  const PathBundle b = simulate_paths(g, p, 5, 2);
  for (double v : b.Lambda) CHECK(v == 0.0);
  for (double v : b.lambda) CHECK(v == 0.0);
}

TEST_CASE("quadrature oracle shape and refinement checks") {
  const ModelParams p;
  const TimeGrid g(1.0, 20);
  const auto dw = simulate_brownian(g.refine(3), 2);
  const MemoryPaths m = memory_exact(g, dw, 3, p);
  CHECK(m.Lambda.size() == 21);
  CHECK(m.Lambda[0] == 0.0);
  CHECK(m.lambda[0] == 0.0);
  CHECK_THROWS_AS(memory_exact(g, dw, 2, p), std::invalid_argument);
  CHECK_THROWS_AS(memory_exact(g, dw, 0, p), std::invalid_argument);
  CHECK_THROWS_AS(approx_fbm(g, dw, 4, p), std::invalid_argument);

  const TimeGrid fine = g.refine(3);
  const TerminalMemory t = memory_terminal(fine, dw, p);
  CHECK(t.Lambda == m.Lambda.back());
  CHECK(t.lambda == m.lambda.back());
  CHECK(t.fbm == approx_fbm(g, dw, 3, p).back());
}

TEST_CASE("quadrature oracle converges under refinement") {
  const ModelParams p;
  const TimeGrid g(1.0, 16);
  std::vector<double> d1, d2;
  for (std::uint64_t s = 1; s <= 50; ++s) {
    const auto dw = simulate_brownian(g.refine(64), s);
    // Refinements R = 16, 32, 64 of the same Brownian path.
    auto coarsen = [&](std::size_t R) {
      std::vector<double> out(16 * R, 0.0);
      const std::size_t ratio = 64 / R;
      for (std::size_t i = 0; i < dw.size(); ++i) out[i / ratio] += dw[i];
      return memory_exact(g, out, R, p).Lambda;
    };
    const auto a = coarsen(16), b = coarsen(32), c = coarsen(64);
    double e1 = 0, e2 = 0;
    for (std::size_t n = 0; n < a.size(); ++n) {
      e1 = std::max(e1, std::abs(a[n] - b[n]));
      e2 = std::max(e2, std::abs(b[n] - c[n]));
    }
    d1.push_back(e1);
    d2.push_back(e2);
  }
  CHECK(median(d2) < median(d1));
}

TEST_CASE("discrete variance of the memory level") {
  const ModelParams p;
  const TimeGrid g(1.0, 200);
  const MemoryKernels k(g.dt(), g.steps(), p);
  double theory = 0.0;
  for (std::size_t m = 1; m <= g.steps(); ++m) theory += k.Lambda[m] * k.Lambda[m] * g.dt();
  const int seeds = 10000;
  double s2 = 0, s4 = 0;
  for (int s = 0; s < seeds; ++s) {
    const auto dw = simulate_brownian(g, 1000 + s);
    const double L = kernel_sum(k.Lambda, dw, g.steps());
    s2 += L * L;
    s4 += L * L * L * L;
  }
  const double var = s2 / seeds;
  const double se = std::sqrt((s4 / seeds - var * var) / seeds);
  CHECK(std::abs(var - theory) <= 4.0 * se);
}

TEST_CASE("output without noise or memory grows at the drift") {
  ModelParams p;
  p.H = 0.5;
  p.sigma_D = 1e-300;  // effectively noise free
  const TimeGrid g(1.0, 10);
  const std::vector<double> dw(10, 0.0), L(11, 0.0);
  const OutputPath o = simulate_output(g, dw, L, p, 2.0);
  for (std::size_t n = 0; n <= 10; ++n) {
    CHECK(o.Z[n] == doctest::Approx(std::log(2.0) + p.mu_D * g.node(n)).epsilon(1e-14));
    CHECK(o.D_hat[n] == doctest::Approx(std::exp(o.Z[n])));
  }
}

TEST_CASE("memoryless output is the log-normal Euler scheme") {
  ModelParams p;
  p.H = 0.5;
  const TimeGrid g(1.0, 100);
  const auto dw = simulate_brownian(g, 4);
  const std::vector<double> L(101, 0.0);
  const auto Z = euler_log_output(g, dw, L, p);
  double z = 0.0;
  for (std::size_t n = 0; n < 100; ++n) {
    z += (p.mu_D - 0.5 * p.sigma_D * p.sigma_D) * g.dt() + p.sigma_D * dw[n];
    CHECK(Z[n + 1] == doctest::Approx(z).epsilon(1e-12));
  }
}

TEST_CASE("output input validation") {
  const ModelParams p;
  const TimeGrid g(1.0, 4);
  const std::vector<double> dw(4, 0.0), L(5, 0.0), short_dw(3, 0.0);
  CHECK_THROWS_AS(simulate_output(g, short_dw, L, p), std::invalid_argument);
  CHECK_THROWS_AS(simulate_output(g, dw, L, p, 0.0), std::invalid_argument);
  std::vector<double> bad = dw;
  bad[2] = NAN;
  CHECK_THROWS_AS(simulate_output(g, bad, L, p), std::invalid_argument);
}

TEST_CASE("terminal log output has the predicted mean") {
  const ModelParams p;
  const DerivedParams d = derive_constants(p);
  const TimeGrid g(1.0, 100);
  const int seeds = 10000;
  double s1 = 0, s2 = 0;
  for (int s = 0; s < seeds; ++s) {
    const PathBundle b = simulate_paths(g, p, 500 + s);
    s1 += b.Z.back();
    s2 += b.Z.back() * b.Z.back();
  }
  const double mean = s1 / seeds;
  const double se = std::sqrt((s2 / seeds - mean * mean) / seeds);
  const double expected = p.mu_D - d.var_scale * p.sigma_D * p.sigma_D;
  CHECK(std::abs(mean - expected) <= 4.0 * se);
}

TEST_CASE("path bundle contract") {
  const ModelParams p;
  const TimeGrid g(1.0, 50);
  const PathBundle b = simulate_paths(g, p, 9, 4, 3.0);
  CHECK(b.dw.size() == 50);
  for (const auto* v : {&b.w, &b.Lambda, &b.lambda, &b.Z, &b.D_hat}) CHECK(v->size() == 51);
  CHECK(b.w[0] == 0.0);
  CHECK(b.Lambda[0] == 0.0);
  CHECK(b.lambda[0] == 0.0);
  CHECK(b.D_hat[0] == doctest::Approx(3.0));
  for (double x : b.D_hat) CHECK(x > 0.0);
  for (std::size_t n = 0; n < 50; ++n) CHECK(b.w[n + 1] - b.w[n] == doctest::Approx(b.dw[n]));

  // Restriction of the fine simulation to coarse nodes.
  const TimeGrid fine = g.refine(4);
  const FinePaths f = simulate_fine(fine, p, 9, 3.0);
  const MemoryPaths m = memory_exact(g, f.dw, 4, p);
  for (std::size_t n = 0; n <= 50; ++n) {
    CHECK(b.Lambda[n] == m.Lambda[n]);
    CHECK(b.lambda[n] == m.lambda[n]);
    CHECK(b.Z[n] == f.output.Z[4 * n]);
  }
  CHECK_THROWS_AS(simulate_paths(g, p, 9, 0), std::invalid_argument);
}

TEST_CASE("path csv") {
  const ModelParams p;
  const PathBundle b = simulate_paths(TimeGrid(1.0, 5), p, 3);
  std::ostringstream os;
  write_paths_csv(os, b);
  const std::string text = os.str();
  CHECK(text.rfind("t,dw,w,Lambda,lambda,Z,D_hat\n0,,0,0,0,0,1\n", 0) == 0);
  std::istringstream is(text);
  const CsvTable t = read_csv(is);
  CHECK(t.rows() == 6);
  CHECK(std::isnan(t.column("dw")[0]));
  for (std::size_t n = 1; n <= 5; ++n) {
    CHECK(t.column("dw")[n] == b.dw[n - 1]);  // 17 digits round-trip exactly
    CHECK(t.column("Lambda")[n] == b.Lambda[n]);
  }
  CHECK(t.column("t")[5] == 1.0);
}

}  // TEST_SUITE

TEST_SUITE("csv") {

TEST_CASE("number formatting") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(INFINITY) == "inf");
  CHECK(format_real(-INFINITY) == "-inf");
  CHECK(format_real(NAN) == "nan");
}

TEST_CASE("reader") {
  std::istringstream ok("a,b\n1,\n2,inf\n");
  const CsvTable t = read_csv(ok);
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  CHECK(t.rows() == 2);
  CHECK(std::isnan(t.column("b")[0]));
  CHECK(std::isinf(t.column("b")[1]));
  CHECK_THROWS_AS(t.column("c"), std::invalid_argument);

  std::istringstream ragged("a,b\n1,2\n3\n");
  try {
    read_csv(ragged);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream junk("a\n1x\n");
  CHECK_THROWS_AS(read_csv(junk), std::invalid_argument);
}

}  // TEST_SUITE
