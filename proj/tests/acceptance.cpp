// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <sys/wait.h>
#include <unistd.h>

#include "yosida/checks.hpp"
#include "yosida/errors.hpp"
#include "yosida/qualitative.hpp"
#include "yosida/recursion.hpp"
#include "yosida/scenario.hpp"
#include "yosida/volterra.hpp"

using namespace yosida;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
const fs::path kScenarios = YOSIDA_SCENARIO_DIR;

const std::vector<std::string> kAdmitted = {"benchmark",         "antiperiodic", "quasi_periodic", "cubic_delay",
                                            "distributed_delay", "shrinkage",    "modulated",      "system"};

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Loaded {
  Scenario s;
  std::shared_ptr<Operator> op;
  SolverConfig cfg;
  GridFunction psi;
};

Loaded load(const std::string& name) {
  Loaded l;
  l.s = load_scenario(kScenarios / (name + ".json"));
  l.op = build_operator(l.s);
  l.cfg = build_solver_config(l.s, l.op->dim());
  l.psi = build_start(l.s, l.op->dim());
  return l;
}

// The benchmark solve is shared by several criteria.
const RecursionResult& benchmark() {
  static const RecursionResult r = [] {
    const auto b = load("benchmark");
    return run_recursion(*b.op, b.psi, b.cfg);
  }();
  return r;
}

Outcome volterra_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridSpec g{-50.0, 50.0, 1e-3, 1};
  double worst = 0.0;
  std::size_t negative = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    VolterraProblem p;
    p.f = random_piecewise_linear(g, 1.0, 1000 + i);
    const auto r = resolvent_solve(p);
    const auto q = picard_solve(p, 1e-10, 8);
    worst = std::max(worst, sup_distance(r, q.u));
    for (std::size_t k = 0; k < r.size(); ++k) negative += r.value(k, 0) < 0.0;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-8 && negative == 0 && secs < 30.0,
          fmt::format("sup gap {:.3g}, {} negative values, {:.1f} s", worst, negative, secs)};
}

Outcome yosida_closed_forms() {
  const GridSpec g{-40.0, 10.0, 1e-3, 1};
  const auto e = GridFunction::sample_scalar(g, [](double t) { return std::exp(0.3 * t); });
  const auto lin = GridFunction::sample_scalar(g, [](double t) { return t; });
  const std::vector<double> schedule{0.2, 0.1, 0.05, 0.025, 0.0125};
  std::string detail;
  bool pass = true;
  double lin_err = 0.0;
  for (double lambda : schedule) {
    const auto d = yosida_derivative(e, lambda);
    const auto dl = yosida_derivative(lin, lambda);
    double rel = 0.0;
    for (std::size_t i = g.first_node_at_or_after(-20.0); i < d.size(); ++i) {
      const double t = g.node_time(i);
      const double want = 0.3 * std::exp(0.3 * t) / (1.0 + 0.3 * lambda);
      rel = std::max(rel, std::fabs(d.value(i, 0) - want) / want);
      lin_err = std::max(lin_err, std::fabs(dl.value(i, 0) - 1.0));
    }
    pass = pass && rel <= 1e-6;
    detail += fmt::format("rel({})={:.2g} ", lambda, rel);
  }
  pass = pass && lin_err <= 1e-8;
  return {pass, detail + fmt::format("linear err {:.2g}", lin_err)};
}

Outcome picard_contraction() {
  bool pass = true;
  double worst = -1.0;
  std::string where;
  for (const auto& name : kAdmitted) {
    const auto l = load(name);
    OuterRecursion rec(*l.op, l.psi, l.cfg);
    for (int n = 0; n < 2; ++n) {
      const auto& step = rec.advance();
      const double w = l.op->constants().omega;
      for (std::size_t i = 0; i < step.picard_factor.size(); ++i) {
        const double lambda = l.cfg.lambda_schedule[i];
        const double excess = step.picard_factor[i] - (1.0 / (1.0 - lambda * w) + 0.05);
        if (excess > worst) {
          worst = excess;
          where = fmt::format("{} lambda {}", name, lambda);
        }
        pass = pass && excess <= 0.0;
      }
    }
  }
  return {pass, fmt::format("{} scenarios, largest factor minus bound {:.3g} ({})", kAdmitted.size(), worst, where)};
}

Outcome outer_rate() {
  const auto& r = benchmark().report;
  double worst = 0.0;
  for (std::size_t i = 1; i < r.steps.size(); ++i) worst = std::max(worst, r.steps[i].ratio);
  return {r.converged && r.converged_index <= 25 && worst <= 0.55 && r.seconds < 120.0,
          fmt::format("max ratio {:.4f}, converged at n = {}, {:.1f} s", worst, r.converged_index, r.seconds)};
}

Outcome benchmark_reference() {
  const auto& u = benchmark().solution;
  const auto& g = u.grid();
  double err = 0.0;
  for (std::size_t i = g.first_node_at_or_after(g.t_min + 10.0); i < u.size(); ++i) {
    const double t = g.node_time(i);
    if (t > g.t_max - 10.0) break;
    err = std::max(err, std::fabs(u.value(i, 0) - (10.0 * std::cos(t) + 4.0 * std::sin(t)) / 29.0));
  }
  return {err <= 5e-3, fmt::format("sup error {:.3g}", err)};
}

Outcome start_independence() {
  const auto b = load("benchmark");
  const auto ten = GridFunction::constant(b.cfg.grid, {10.0}, b.cfg.extension);
  const auto r = check_start_independence(*b.op, GridFunction(b.cfg.grid, b.cfg.extension), ten, b.cfg);
  return {r.gap <= 1e-5, fmt::format("final gap {:.3g} after {} steps, {} bound violations", r.gap, r.steps,
                                     r.bound_violations)};
}

Outcome integral_residual() {
  const auto b = load("benchmark");
  IntegralResidualOptions o;
  o.n_samples = 200;
  o.t_from = b.cfg.trim_start();
  o.seed = b.s.seed;
  const auto r = integral_solution_residual(benchmark().solution, *b.op, o);
  return {r.max_violation() <= 1e-4,
          fmt::format("max violation {:.3g} (trajectory {:.3g}, probes {:.3g})", r.max_violation(),
                      r.max_violation_trajectory, r.max_violation_probe)};
}

Outcome periodicity() {
  const double per = periodicity_residual(benchmark().solution, 2 * pi, benchmark().solution.grid().t_min + 10.0);
  const auto a = load("antiperiodic");
  const auto res = run_recursion(*a.op, a.psi, a.cfg);
  const double anti = antiperiodicity_residual(res.solution, pi, a.cfg.trim_start());
  return {per <= 5e-3 && anti <= 5e-3, fmt::format("periodic {:.3g}, antiperiodic {:.3g}", per, anti)};
}

Outcome lipschitz_uniformity() {
  const auto b = load("benchmark");
  OuterRecursion rec(*b.op, b.psi, b.cfg);
  const double tol = b.cfg.tol_outer.value_or(1e-6);
  while (rec.n() < b.cfg.n_max && (rec.n() < 2 || rec.steps().back().diff > tol)) rec.advance();
  double lo = 1e300, hi = 0.0;
  std::string detail;
  for (std::size_t i = 0; i < rec.last_solves().size(); ++i) {
    const double L = lipschitz_estimate(rec.last_solves()[i], b.cfg.trim_start()).adjacent;
    lo = std::min(lo, L);
    hi = std::max(hi, L);
    detail += fmt::format("{:.4f} ", L);
  }
  const double spread = (hi - lo) / lo;
  return {spread <= 0.10, detail + fmt::format("spread {:.2f}%", 100 * spread)};
}

Outcome samplers() {
  SamplerConfig sc;
  sc.n_samples = 10000;
  std::size_t admitted_violations = 0;
  for (const auto& name : kAdmitted) {
    const auto l = load(name);
    admitted_violations += check_dissipativity(*l.op, sc).violations + check_control_inequality(*l.op, sc).violations +
                           history_lipschitz_check(*l.op, sc).violations;
  }
  auto caught = [&](const std::string& name) {
    const auto l = load(name);
    return check_dissipativity(*l.op, sc).violations + check_control_inequality(*l.op, sc).violations +
           history_lipschitz_check(*l.op, sc).violations;
  };
  const std::size_t expansive = caught("expansive_control");
  const std::size_t under = caught("under_declared");
  return {admitted_violations == 0 && expansive >= 1 && under >= 1,
          fmt::format("{} violations over {} operators; controls: expansive {}, under-declared {}",
                      admitted_violations, kAdmitted.size(), expansive, under)};
}

Outcome gate() {
  const fs::path out = fs::temp_directory_path() / fmt::format("yosida-acceptance-gate-{}", ::getpid());
  fs::remove_all(out);
  const std::string cmd = fmt::format("\"{}\" solve \"{}\" --out \"{}\" > /dev/null 2>&1", YOSIDA_CLI,
                                      (kScenarios / "gate_refusal.json").string(), out.string());
  const int rc = std::system(cmd.c_str());
  const int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  const bool solved = fs::exists(out / "trajectory.csv");
  fs::remove_all(out);

  // Lipschitz-kind refusal: L_g at -omega.
  auto mod = catalog::modulated_linear(-1.0, 0.3, 2.0, Forcing::cosine(), -1.0);
  mod->mutable_constants().L_g = 1.0;
  bool lg_refused = false;
  try {
    enforce_hypotheses(*mod);
  } catch (const HypothesisError&) {
    lg_refused = true;
  }
  return {code == 3 && !solved && lg_refused,
          fmt::format("exit code {}, trajectory written: {}, L_g kind refused: {}", code, solved, lg_refused)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"volterra oracle equivalence", volterra_oracle},
      {"yosida derivative closed forms", yosida_closed_forms},
      {"picard contraction", picard_contraction},
      {"outer geometric rate", outer_rate},
      {"benchmark reference", benchmark_reference},
      {"start independence", start_independence},
      {"integral solution residual", integral_residual},
      {"periodicity", periodicity},
      {"lipschitz uniformity", lipschitz_uniformity},
      {"assumption samplers", samplers},
      {"hypothesis gate", gate},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failed += !o.pass;
    fmt::print("{} {:2} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
