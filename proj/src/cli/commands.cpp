#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include "json.hpp"

#include "yosida/checks.hpp"
#include "yosida/errors.hpp"
#include "yosida/qualitative.hpp"
#include "yosida/scenario.hpp"
#include "yosida/simd.hpp"
#include "yosida/volterra.hpp"

#ifndef YOSIDA_VERSION
#define YOSIDA_VERSION "unknown"
#endif

namespace yosida {

namespace fs = std::filesystem;

namespace {

/// Output directory plus the list of files written, for the manifest.
class RunDir {
 public:
  RunDir(fs::path dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
    fs::create_directories(dir_);
  }

  const fs::path& path() const { return dir_; }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", (dir_ / name).string()));
    outputs_.push_back(name);
    return f;
  }

  void failure(ExitCode code, const std::string& reason, const std::string& message) {
    auto f = open("failure.txt");
    fmt::print(f, "reason = {}\nexit_code = {}\nmessage = {}\n", reason, static_cast<int>(code), message);
  }

  void manifest(const Scenario& s, const std::string& hash) {
    nlohmann::json m;
    m["command"] = command_;
    m["scenario"] = s.name;
    m["config_hash"] = hash;
    m["version"] = YOSIDA_VERSION;
    m["seed"] = s.seed;
    m["threads"] = s.threads;
    m["simd_backend"] = std::string(simd::backend_name(simd::active_backend()));
    std::vector<std::string> outs = outputs_;
    std::ranges::sort(outs);
    m["outputs"] = outs;
    std::ofstream f(dir_ / "manifest.json");
    f << m.dump(2) << "\n";
  }

 private:
  fs::path dir_;
  std::string command_;
  std::vector<std::string> outputs_;
};

struct Loaded {
  Scenario scenario;
  std::string hash;
};

/// Loads the scenario and applies the command-line overrides.
Loaded load(const fs::path& file, const RunOptions& opt) {
  Loaded l{load_scenario(file), {}};
  l.hash = config_hash(l.scenario);
  if (opt.seed) l.scenario.seed = *opt.seed;
  if (opt.threads) {
    if (*opt.threads == 0) throw ConfigError("--threads must be at least 1");
    l.scenario.threads = *opt.threads;
  }
  return l;
}

ExitCode config_failure(const fs::path& file, const RunOptions& opt, const std::string& command,
                        const std::string& message, std::ostream& log) {
  fmt::print(log, "error: config: {}\n", message);
  // Without a parsed scenario only an explicit directory is known.
  std::optional<fs::path> dir = opt.out_dir;
  if (!dir) {
    if (const char* env = std::getenv("YOSIDA_OUT_DIR"); env && *env) dir = fs::path(env);
  }
  if (dir) {
    try {
      RunDir out(*dir, command);
      out.failure(ExitCode::config_error, "config_error", message);
      Scenario placeholder;
      placeholder.name = file.stem().string();
      out.manifest(placeholder, "");
    } catch (const std::exception&) {
      // Nothing more to report.
    }
  }
  return ExitCode::config_error;
}

double trimmed_from(const Scenario& s) { return s.grid.t_min + s.burn_in; }

/// `solve_error` bounds the distance of u to the limit solution; the
/// integral-residual allowance adds it twice (it enters both |u - x| terms).
QualitativeReport qualitative(const Scenario& s, const GridFunction& u, const Operator& op,
                              double solve_error, std::vector<std::string>& failures) {
  QualitativeReport q;
  const double from = trimmed_from(s);
  q.bound = u.sup_norm(from, s.grid.t_max);
  q.lipschitz = lipschitz_estimate(u, from, 1.0);
  q.modulus = continuity_modulus(u, from, 1.0);
  for (const auto& c : s.checks) {
    switch (c.kind) {
      case CheckSpec::Kind::periodicity:
        q.periodic.emplace_back(c.period, periodicity_residual(u, c.period, from));
        break;
      case CheckSpec::Kind::antiperiodicity:
        q.antiperiodic.emplace_back(c.period, antiperiodicity_residual(u, c.period, from));
        break;
      case CheckSpec::Kind::almost_period:
        q.scan = almost_period_scan(u, c.epsilon, c.s_max, c.ds, from, s.threads);
        if (q.scan->hits.size() < 2) failures.push_back("almost-period scan found no nonzero hit");
        break;
      case CheckSpec::Kind::integral_residual: {
        IntegralResidualOptions o;
        o.n_samples = c.samples;
        o.seed = s.seed;
        o.t_from = from;
        o.delta_max = c.delta_max;
        o.solve_tol = s.tol_picard + 2.0 * solve_error;
        q.integral = integral_solution_residual(u, op, o);
        if (q.integral->violations > 0) {
          failures.push_back(fmt::format("integral-solution residual: {} violations", q.integral->violations));
        }
        break;
      }
      case CheckSpec::Kind::lipschitz:
        q.lipschitz = lipschitz_estimate(u, from, c.horizon);
        break;
      case CheckSpec::Kind::modulus:
        q.modulus = continuity_modulus(u, from, c.horizon);
        break;
    }
  }
  return q;
}

void print_check(std::ostream& os, const CheckReport& r) {
  fmt::print(os, "[{}] {}\n", r.passed() ? (r.vacuous ? "VACUOUS PASS" : "PASS") : "FAIL", r.summary());
  for (const auto& [k, v] : r.extras) fmt::print(os, "    {} = {:.6g}\n", k, v);
  for (const auto& n : r.notes) fmt::print(os, "    note: {}\n", n);
}

}  // namespace

ExitCode cmd_solve(const fs::path& file, const RunOptions& opt, std::ostream& log) {
  Loaded l;
  try {
    l = load(file, opt);
  } catch (const ConfigError& e) {
    return config_failure(file, opt, "solve", e.what(), log);
  }
  const Scenario& s = l.scenario;
  RunDir out(resolve_output_dir(s, opt), "solve");
  auto finish = [&](ExitCode code, const std::string& reason, const std::string& msg) {
    fmt::print(log, "error: {}: {}\n", reason, msg);
    out.failure(code, reason, msg);
    out.manifest(s, l.hash);
    return code;
  };

  std::shared_ptr<Operator> op;
  GridFunction psi;
  SolverConfig cfg;
  try {
    op = build_operator(s);
    psi = build_start(s, op->dim());
    cfg = build_solver_config(s, op->dim());
  } catch (const std::exception& e) {
    return finish(ExitCode::config_error, "config_error", e.what());
  }

  RecursionResult res;
  try {
    res = run_recursion(*op, psi, cfg);
  } catch (const HypothesisError& e) {
    return finish(ExitCode::gate_refused, "hypothesis_gate", e.what());
  } catch (const OuterConvergenceError& e) {
    auto f = out.open("convergence_report.txt");
    e.report().write_text(f);
    auto kv = out.open("convergence_report.kv");
    e.report().write_kv(kv);
    return finish(ExitCode::nonconvergence, "outer_nonconvergence", e.what());
  } catch (const ConvergenceError& e) {
    return finish(ExitCode::nonconvergence, "picard_nonconvergence", e.what());
  } catch (const ParameterError& e) {
    return finish(ExitCode::config_error, "config_error", e.what());
  }

  {
    auto f = out.open("trajectory.csv");
    res.solution.write_csv(f);
  }
  {
    auto f = out.open("trajectory_richardson.csv");
    res.extrapolated.write_csv(f);
  }
  {
    auto f = out.open("convergence_report.txt");
    res.report.write_text(f);
    auto kv = out.open("convergence_report.kv");
    res.report.write_kv(kv);
  }

  std::vector<std::string> failures;
  QualitativeReport q;
  try {
    q = qualitative(s, res.solution, *op, res.report.richardson_shift, failures);
  } catch (const ParameterError& e) {
    return finish(ExitCode::config_error, "config_error", fmt::format("checks: {}", e.what()));
  }
  {
    auto f = out.open("qualitative_report.txt");
    q.write_text(f);
    for (const auto& m : failures) fmt::print(f, "failed: {}\n", m);
  }
  if (q.scan) {
    auto f = out.open("scan.csv");
    q.scan->write_csv(f);
  }
  fmt::print(log, "solved {} in {} outer steps ({:.2f} s); outputs in {}\n", s.name, res.report.steps.size(),
             res.report.seconds, out.path().string());
  if (!failures.empty()) {
    return finish(ExitCode::check_failed, "check_failed", fmt::format("{}", fmt::join(failures, "; ")));
  }
  out.manifest(s, l.hash);
  return ExitCode::ok;
}

ExitCode cmd_verify(const fs::path& file, const RunOptions& opt, std::ostream& log) {
  Loaded l;
  try {
    l = load(file, opt);
  } catch (const ConfigError& e) {
    return config_failure(file, opt, "verify", e.what(), log);
  }
  const Scenario& s = l.scenario;
  RunDir out(resolve_output_dir(s, opt), "verify");

  std::shared_ptr<Operator> op;
  try {
    op = build_operator(s);
  } catch (const std::exception& e) {
    fmt::print(log, "error: config_error: {}\n", e.what());
    out.failure(ExitCode::config_error, "config_error", e.what());
    out.manifest(s, l.hash);
    return ExitCode::config_error;
  }

  SamplerConfig sc;
  sc.n_samples = s.verify.samples;
  sc.seed = s.seed;
  sc.lambda_min = s.verify.lambda_min;
  sc.lambda_max = s.verify.lambda_max;
  sc.t_range = s.verify.t_range;
  sc.state_scale = s.verify.state_scale;

  std::vector<CheckReport> reports{check_dissipativity(*op, sc), check_control_inequality(*op, sc),
                                   history_lipschitz_check(*op, sc)};
  bool ok = std::ranges::all_of(reports, [](const CheckReport& r) { return r.passed(); });

  auto f = out.open("assumptions_report.txt");
  fmt::print(f, "operator: {}\nsamples per check: {}\nseed: {}\n\n", op->name(), sc.n_samples, sc.seed);
  for (const auto& r : reports) print_check(f, r);

  if (auto why = hypothesis_violation(op->constants())) {
    fmt::print(f, "[INFO] existence hypotheses not met: {}\n", *why);
  }
  if (s.verify.iterate_inequality && s.verify.samples > 0) {
    // Two starts on the scenario grid: the configured one and a random
    // trigonometric profile.
    try {
      const GridFunction psi = build_start(s, op->dim());
      std::mt19937_64 rng(s.seed ^ 0x9e3779b97f4a7c15ULL);
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      State amp(op->dim()), freq(op->dim()), shift(op->dim());
      for (std::size_t c = 0; c < op->dim(); ++c) {
        amp[c] = 2.0 * U(rng);
        freq[c] = 1.0 + U(rng);
        shift[c] = U(rng);
      }
      GridSpec g = s.grid;
      g.dim = op->dim();
      const GridFunction phi = GridFunction::sample(
          g,
          [&](double t) {
            State x(amp.size());
            for (std::size_t c = 0; c < x.size(); ++c) x[c] = shift[c] + amp[c] * std::sin(freq[c] * t);
            return x;
          },
          s.extension);
      PicardOptions po;
      po.tol = s.tol_picard;
      po.threads = s.threads;
      for (double lambda : {s.lambda_schedule.front(), s.lambda_schedule.back()}) {
        const auto r = verify_iterate_inequality(*op, psi, phi, lambda, trimmed_from(s), po);
        fmt::print(f,
                   "[{}] iterate inequality lambda={}: {} samples, violations {} (running form {}), "
                   "max excess {:.3e}, running {:.3e}, slack {:.3e}\n",
                   r.passed() ? "PASS" : "FAIL", lambda, r.samples, r.violations, r.running_violations,
                   r.max_excess, r.max_running_excess, r.slack);
        ok = ok && r.passed();
      }
    } catch (const std::exception& e) {
      fmt::print(f, "[FAIL] iterate inequality not evaluated: {}\n", e.what());
      ok = false;
    }
  }
  f.close();

  for (const auto& r : reports) print_check(log, r);
  if (!ok) {
    out.failure(ExitCode::check_failed, "assumption_violations", "see assumptions_report.txt");
    out.manifest(s, l.hash);
    fmt::print(log, "verify: violations found; report in {}\n", out.path().string());
    return ExitCode::check_failed;
  }
  out.manifest(s, l.hash);
  fmt::print(log, "verify: all checks passed; report in {}\n", out.path().string());
  return ExitCode::ok;
}

ExitCode cmd_oracle(const fs::path& file, const RunOptions& opt, std::ostream& log) {
  Loaded l;
  try {
    l = load(file, opt);
  } catch (const ConfigError& e) {
    return config_failure(file, opt, "oracle", e.what(), log);
  }
  const Scenario& s = l.scenario;
  const OracleSpec& o = s.oracle;
  RunDir out(resolve_output_dir(s, opt), "oracle");
  if (!(0.0 < o.alpha && o.alpha < o.beta)) {
    const auto msg = fmt::format("need 0 < alpha < beta (alpha={}, beta={})", o.alpha, o.beta);
    fmt::print(log, "error: config_error: {}\n", msg);
    out.failure(ExitCode::config_error, "config_error", msg);
    out.manifest(s, l.hash);
    return ExitCode::config_error;
  }

  GridSpec g = s.grid;
  g.dim = 1;
  std::vector<std::pair<std::string, GridFunction>> cases;
  if (o.f) {
    const Forcing f = *o.f;
    cases.emplace_back("f", GridFunction::sample_scalar(g, [&](double t) { return f(t); }));
  }
  for (std::size_t i = 0; i < o.random_cases; ++i) {
    cases.emplace_back(fmt::format("random[{}]", i), random_piecewise_linear(g, o.knot_spacing, s.seed + i));
  }
  if (cases.empty()) {
    fmt::print(log, "error: config_error: oracle needs f or random_cases > 0\n");
    out.failure(ExitCode::config_error, "config_error", "oracle needs f or random_cases > 0");
    out.manifest(s, l.hash);
    return ExitCode::config_error;
  }

  const double from = trimmed_from(s);
  const std::size_t first = g.first_node_at_or_after(from);
  auto rep = out.open("oracle_report.txt");
  fmt::print(rep, "alpha {} beta {} tol {} refine {}\n", o.alpha, o.beta, o.tol, o.refine);
  bool ok = true;
  double worst = 0.0;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& [label, f] = cases[k];
    VolterraProblem p{f, o.alpha, o.beta};
    GridFunction ur, up;
    VolterraPicardResult pr;
    try {
      ur = resolvent_solve(p);
      pr = picard_solve(p, o.tol, o.refine);
    } catch (const ParameterError& e) {
      out.failure(ExitCode::config_error, "config_error", e.what());
      out.manifest(s, l.hash);
      fmt::print(log, "error: config_error: {}\n", e.what());
      return ExitCode::config_error;
    }
    const double gap = sup_distance(ur, pr.u, first);
    worst = std::max(worst, gap);
    // Positivity: f >= 0 must give Rf >= 0.
    const auto fv = f.component(0);
    const bool nonneg = std::ranges::all_of(fv, [](double x) { return x >= 0.0; });
    std::size_t negatives = 0;
    if (nonneg) {
      const auto rv = ur.component(0);
      negatives = static_cast<std::size_t>(std::ranges::count_if(rv, [](double x) { return x < 0.0; }));
    }
    const auto rv = ur.component(0);
    const auto [lo, hi] = std::ranges::minmax(rv.subspan(first));
    const bool pass = gap <= o.agreement && negatives == 0;
    ok = ok && pass;
    fmt::print(rep, "[{}] {}: sup gap {:.3e} (picard {} sweeps, bound {:.1e}), u in [{:.10g}, {:.10g}]{}\n",
               pass ? "PASS" : "FAIL", label, gap, pr.iterations, pr.error_bound, lo, hi,
               nonneg ? fmt::format(", positivity violations {}", negatives) : std::string{});
    fmt::print(log, "{}: u in [{:.10g}, {:.10g}], resolvent vs Picard gap {:.3e}\n", label, lo, hi, gap);
    if (k == 0) {
      auto csv = out.open("oracle.csv");
      csv << "t,f,resolvent,picard\n";
      for (std::size_t i = 0; i < ur.size(); ++i) {
        fmt::print(csv, "{:.17g},{:.17g},{:.17g},{:.17g}\n", g.node_time(i), f.value(i, 0), ur.value(i, 0),
                   pr.u.value(i, 0));
      }
    }
  }
  fmt::print(rep, "worst gap {:.3e} (agreement threshold {:.1e})\n", worst, o.agreement);
  rep.close();
  if (!ok) {
    out.failure(ExitCode::check_failed, "oracle_disagreement", fmt::format("worst gap {:.3e}", worst));
    out.manifest(s, l.hash);
    return ExitCode::check_failed;
  }
  out.manifest(s, l.hash);
  return ExitCode::ok;
}

}  // namespace yosida
