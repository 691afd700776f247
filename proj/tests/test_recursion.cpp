#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "yosida/errors.hpp"
#include "yosida/recursion.hpp"

using namespace yosida;

namespace {
constexpr double pi = std::numbers::pi;

SolverConfig bench_config() {
  SolverConfig c;
  c.grid = GridSpec{-30, 30, 5e-3, 1};
  c.extension = LeftExtension::periodic(2 * pi);
  c.tol_outer = 1e-6;
  c.n_max = 25;
  c.threads = 4;
  return c;
}

std::shared_ptr<DiagonalOperator> bench() { return catalog::delay_linear(-1.0, 0.5, pi, Forcing::cosine(), -1.0); }

/// Harmonic balance for u' = -2u + 0.5 u(t - pi) + cos t, solved here as a
/// 2x2 linear system for u = A cos t + B sin t.
std::pair<double, double> harmonic_balance() {
  // u(t - pi) = -u(t):  -A sin + B cos = -2.5 (A cos + B sin) + cos
  //   cos: B = -2.5 A + 1,   sin: -A = -2.5 B
  const double a11 = 2.5, a12 = 1.0, a21 = -1.0, a22 = 2.5;  // [2.5 1; -1 2.5][A B]^T = [1 0]^T
  const double det = a11 * a22 - a12 * a21;
  return {(1.0 * a22 - a12 * 0.0) / det, (a11 * 0.0 - a21 * 1.0) / det};
}
}  // namespace

TEST_CASE("harmonic balance reference") {
  const auto [A, B] = harmonic_balance();
  CHECK(A == doctest::Approx(10.0 / 29.0));
  CHECK(B == doctest::Approx(4.0 / 29.0));
}

TEST_CASE("benchmark recursion") {
  const auto op = bench();
  const auto cfg = bench_config();
  const auto res = run_recursion(*op, GridFunction(cfg.grid, cfg.extension), cfg);
  const auto& r = res.report;
  CHECK(r.converged);
  CHECK(r.steps.size() <= 25);
  CHECK(r.bounds.outer_ratio == doctest::Approx(0.5));
  CHECK(r.measured_outer_ratio <= 0.55);
  CHECK_FALSE(r.ratio_flag);
  const auto [A, B] = harmonic_balance();
  double err = 0.0;
  for (std::size_t i = cfg.grid.first_node_at_or_after(cfg.trim_start()); i < res.solution.size(); ++i) {
    const double t = cfg.grid.node_time(i);
    err = std::max(err, std::fabs(res.solution.value(i, 0) - (A * std::cos(t) + B * std::sin(t))));
  }
  CHECK(err <= 5e-3);
  // Every Picard factor stays below q + 0.05.
  for (const auto& s : r.steps) {
    for (std::size_t i = 0; i < s.picard_factor.size(); ++i) {
      CHECK(s.picard_factor[i] <= 1.0 / (1.0 + cfg.lambda_schedule[i]) + 0.05);
    }
  }
  std::ostringstream kv;
  r.write_kv(kv);
  CHECK(kv.str().find("measured_outer_ratio = ") != std::string::npos);
  CHECK(kv.str().find("step.1.diff = ") != std::string::npos);
}

TEST_CASE("history-free operators converge after one step") {
  auto op = catalog::affine_forced(-1.0, Forcing::cosine(), -1.0);
  auto cfg = bench_config();
  cfg.extension = {};
  const auto res = run_recursion(*op, GridFunction(cfg.grid), cfg);
  REQUIRE(res.report.steps.size() == 2);
  // Only the Picard start differs between the two steps.
  CHECK(res.report.steps[1].diff <= 10 * cfg.tol_picard);
  CHECK(res.report.converged_index == 1);
}

TEST_CASE("gate refuses before solving") {
  auto op = catalog::delay_linear(-1.0, 2.0, 1.0, Forcing::cosine(), -1.0);
  auto cfg = bench_config();
  CHECK_THROWS_AS(run_recursion(*op, GridFunction(cfg.grid, cfg.extension), cfg), HypothesisError);
  auto mod = catalog::modulated_linear(-1.0, 0.3, 2.0, Forcing::cosine(), -1.0);
  mod->mutable_constants().L_g = 1.0;
  CHECK_THROWS_AS(run_recursion(*mod, GridFunction(cfg.grid), cfg), HypothesisError);
}

TEST_CASE("without the gate a constructed operator diverges") {
  // A x = 1.5 x(t - 1), omega = -1: constants grow by 1.5 per outer step.
  auto op = catalog::delay_linear(0.0, 1.5, 1.0, Forcing{}, -1.0);
  auto cfg = bench_config();
  cfg.grid = GridSpec{-20, 20, 0.01, 1};
  cfg.extension = {};
  cfg.enforce_gate = false;
  cfg.n_max = 6;
  try {
    run_recursion(*op, GridFunction::constant(cfg.grid, {1.0}), cfg);
    FAIL("expected non-convergence");
  } catch (const OuterConvergenceError& e) {
    const auto& steps = e.report().steps;
    REQUIRE(steps.size() == 6);
    CHECK(steps.back().ratio >= 1.0);
  }
}

TEST_CASE("start independence") {
  const auto op = bench();
  const auto cfg = bench_config();
  const auto zero = GridFunction(cfg.grid);
  const auto ten = GridFunction::constant(cfg.grid, {10.0});
  const auto r = check_start_independence(*op, zero, ten, cfg);
  CHECK(r.gap <= 1e-5);
  CHECK(r.bound_violations == 0);
  CHECK(r.bound == doctest::Approx(0.5 * 0.0125 / 1.0125 + 0.5));
  for (std::size_t i = 1; i < r.ratios.size(); ++i) {
    if (r.f[i - 1] > 1e-8) CHECK(r.ratios[i] <= r.bound + 1e-9);
  }
  const auto same = check_start_independence(*op, zero, zero, cfg);
  CHECK(same.gap == 0.0);
}

TEST_CASE("lambda Cauchy tables") {
  auto cfg = bench_config();
  cfg.extension = LeftExtension::periodic(2 * pi);
  auto affine = catalog::affine_forced(-1.0, Forcing::cosine(), -1.0);
  const auto t = lambda_cauchy_table(*affine, GridFunction(cfg.grid, cfg.extension), cfg);
  CHECK(t.monotone);
  REQUIRE(t.diffs.size() == 4);
  // First order in lambda: halving lambda halves the difference.
  for (std::size_t i = 1; i < t.diffs.size(); ++i) CHECK(t.diffs[i] / t.diffs[i - 1] == doctest::Approx(0.5).epsilon(0.1));

  auto eq = catalog::linear_scalar(-1.0, 1.0, -1.0);
  const auto e = lambda_cauchy_table(*eq, GridFunction::constant(cfg.grid, {0.5}), cfg);
  for (double d : e.diffs) CHECK(d <= 1e-9);
}

TEST_CASE("warm start and worker count do not change the result") {
  const auto op = bench();
  auto cfg = bench_config();
  cfg.grid = GridSpec{-30, 30, 1e-2, 1};
  const auto psi = GridFunction(cfg.grid);
  cfg.threads = 1;
  const auto cold1 = run_recursion(*op, psi, cfg);
  cfg.threads = 4;
  const auto cold4 = run_recursion(*op, psi, cfg);
  CHECK(sup_distance(cold1.solution, cold4.solution) == 0.0);
  REQUIRE(cold1.report.steps.size() == cold4.report.steps.size());
  for (std::size_t i = 0; i < cold1.report.steps.size(); ++i) {
    CHECK(cold1.report.steps[i].diff == cold4.report.steps[i].diff);
  }
  cfg.warm_start = true;
  const auto warm = run_recursion(*op, psi, cfg);
  CHECK(sup_distance(warm.solution, cold1.solution) <= 10 * cfg.tol_picard);
}

TEST_CASE("solver configuration validation") {
  const auto op = bench();
  auto cfg = bench_config();
  cfg.lambda_schedule = {0.1, 0.2};
  CHECK_THROWS_AS(cfg.validate(op->constants()), ParameterError);
  cfg.lambda_schedule = {1.5, 0.1};
  CHECK_THROWS_AS(cfg.validate(op->constants()), ParameterError);
  cfg = bench_config();
  cfg.burn_in = 100;
  CHECK_THROWS_AS(cfg.validate(op->constants()), ParameterError);
  cfg = bench_config();
  auto bad = GridFunction::constant(cfg.grid, {std::nan("")});
  CHECK_THROWS_AS(run_recursion(*op, bad, cfg), ParameterError);
}
