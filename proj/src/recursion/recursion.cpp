#include "yosida/recursion.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "yosida/errors.hpp"

namespace yosida {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool has_double_step(const std::vector<double>& s) {
  return s.size() >= 2 && std::fabs(s[s.size() - 2] - 2.0 * s.back()) <= 1e-12 * s.back();
}

GridFunction ingest_start(const GridFunction& psi, const SolverConfig& cfg, const Operator& op) {
  if (!(psi.grid() == cfg.grid)) throw ParameterError("start function is not on the solver grid");
  if (psi.dim() != op.dim()) throw ParameterError("start function dimension does not match the operator");
  if (!psi.all_finite()) throw ParameterError("start function has non-finite values");
  GridFunction u = psi;
  u.set_extension(cfg.extension);
  return u;
}

}  // namespace

void SolverConfig::validate(const OperatorConstants& c) const {
  grid.validate();
  if (lambda_schedule.empty()) throw ParameterError("lambda schedule is empty");
  for (std::size_t i = 0; i < lambda_schedule.size(); ++i) {
    const double l = lambda_schedule[i];
    if (!(l > 0.0)) throw ParameterError(fmt::format("lambda {} is not positive", l));
    if (c.omega < 0.0 && !(l < 1.0 / -c.omega)) {
      throw ParameterError(fmt::format("lambda {} is not below 1/|omega| = {}", l, 1.0 / -c.omega));
    }
    if (i > 0 && !(l < lambda_schedule[i - 1])) {
      throw ParameterError("lambda schedule must be strictly decreasing");
    }
  }
  if (n_max == 0) throw ParameterError("n_max must be positive");
  if (tol_outer && !(*tol_outer > 0.0)) throw ParameterError("tol_outer must be positive");
  if (!(tol_picard > 0.0)) throw ParameterError("tol_picard must be positive");
  if (!(burn_in >= 0.0) || !(burn_in < grid.t_max - grid.t_min)) {
    throw ParameterError("burn-in must be nonnegative and shorter than the grid");
  }
  if (threads == 0) throw ParameterError("threads must be positive");
}

void enforce_hypotheses(const Operator& op) {
  if (auto why = hypothesis_violation(op.constants())) {
    throw HypothesisError(fmt::format("operator '{}' refused: {}", op.name(), *why));
  }
}

OuterRecursion::OuterRecursion(const Operator& op, GridFunction psi, const SolverConfig& cfg)
    : op_(op), cfg_(cfg), current_(std::move(psi)) {
  current_.set_extension(cfg.extension);
}

const OuterStep& OuterRecursion::advance() {
  const auto t0 = Clock::now();
  const auto& sched = cfg_.lambda_schedule;
  const std::size_t L = sched.size();
  const bool warm = cfg_.warm_start && solves_.size() == L;

  std::vector<PicardState> out(L);
  auto solve = [&](std::size_t i, unsigned threads) {
    PicardOptions opt;
    opt.tol = cfg_.tol_picard;
    opt.threads = threads;
    opt.initial = warm ? &solves_[i] : nullptr;
    out[i] = solve_T_lambda(op_, current_, sched[i], opt);
  };

  if (!cfg_.warm_start && cfg_.threads > 1 && L > 1) {
    // Independent solves: spread the schedule over workers, one solve each
    // at a time. Every solve is single-threaded, so results match the
    // sequential path exactly.
    const unsigned workers = std::min<unsigned>(cfg_.threads, static_cast<unsigned>(L));
    std::vector<std::exception_ptr> errors(L);
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t i = w; i < L; i += workers) {
            try {
              solve(i, 1);
            } catch (...) {
              errors[i] = std::current_exception();
            }
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t i = 0; i < L; ++i) solve(i, cfg_.threads);
  }

  OuterStep st;
  st.n = steps_.size() + 1;
  solves_.clear();
  for (std::size_t i = 0; i < L; ++i) {
    st.picard_iterations.push_back(out[i].iterations);
    st.picard_factor.push_back(out[i].measured_factor);
    st.picard_nonmonotone.push_back(out[i].nonmonotone);
    solves_.push_back(std::move(out[i].iterate));
  }
  for (std::size_t i = 0; i + 1 < L; ++i) st.lambda_cauchy.push_back(sup_distance(solves_[i], solves_[i + 1]));
  st.diff = sup_distance(solves_.back(), current_);
  if (!steps_.empty() && steps_.back().diff > 0.0) st.ratio = st.diff / steps_.back().diff;
  current_ = solves_.back();
  st.seconds = seconds_since(t0);
  steps_.push_back(std::move(st));
  return steps_.back();
}

RecursionResult run_recursion(const Operator& op, const GridFunction& psi, const SolverConfig& cfg) {
  const auto t0 = Clock::now();
  if (cfg.enforce_gate) enforce_hypotheses(op);
  cfg.validate(op.constants());
  OuterRecursion rec(op, ingest_start(psi, cfg, op), cfg);

  ConvergenceReport rep;
  rep.operator_name = op.name();
  rep.lambda_schedule = cfg.lambda_schedule;
  if (op.constants().omega < 0.0) rep.bounds = theoretical_bounds(op.constants(), cfg.lambda_min());

  double tol = cfg.tol_outer.value_or(0.0);
  for (std::size_t n = 1; n <= cfg.n_max; ++n) {
    const OuterStep& st = rec.advance();
    if (n == 1 && !cfg.tol_outer) tol = 1e-6 * (1.0 + rec.current().sup_norm());
    // Ratios of differences at the Picard error level carry no signal.
    if (n >= 3 && rec.steps()[n - 2].diff > 10.0 * cfg.tol_picard) {
      rep.measured_outer_ratio = std::max(rep.measured_outer_ratio, st.ratio);
    }
    if (n >= 2 && st.diff <= tol) {
      rep.converged = true;
      rep.converged_index = n - 1;
      break;
    }
  }
  rep.tol_outer = tol;
  rep.steps = rec.steps();
  rep.ratio_flag = rep.measured_outer_ratio > rep.bounds.outer_ratio + 0.05;
  if (rep.ratio_flag) {
    rep.notes.push_back(fmt::format("measured outer ratio {:.4f} exceeds K0/(-omega) = {:.4f} + 0.05",
                                    rep.measured_outer_ratio, rep.bounds.outer_ratio));
  }

  RecursionResult res;
  res.solution = rec.current();
  const auto& solves = rec.last_solves();
  res.second = solves.size() >= 2 ? solves[solves.size() - 2] : res.solution;
  if (has_double_step(cfg.lambda_schedule)) {
    res.extrapolated = 2.0 * res.solution - res.second;
    rep.richardson_shift = sup_distance_from(res.extrapolated, res.solution, cfg.trim_start());
  } else {
    res.extrapolated = res.solution;
    rep.notes.emplace_back("Richardson value unavailable: schedule does not end in (2 lambda, lambda)");
  }
  rep.final_sup = res.solution.sup_norm(cfg.trim_start(), cfg.grid.t_max);
  rep.notes.emplace_back(
      "limit is an integral solution for B(t) = A(t, u_t) with control h~ = (h^omega, k, u_t) "
      "and L = L1^omega + L2(|u|) + K0");
  rep.seconds = seconds_since(t0);
  res.report = std::move(rep);
  if (!res.report.converged) {
    std::vector<double> trace;
    for (const auto& s : res.report.steps) trace.push_back(s.diff);
    throw OuterConvergenceError(
        fmt::format("outer recursion did not reach {:.3e} within {} steps (last diff {:.3e})", tol,
                    cfg.n_max, trace.empty() ? 0.0 : trace.back()),
        std::move(trace), res.report);
  }
  return res;
}

StartIndependence check_start_independence(const Operator& op, const GridFunction& psi,
                                           const GridFunction& phi, const SolverConfig& cfg) {
  if (cfg.enforce_gate) enforce_hypotheses(op);
  cfg.validate(op.constants());
  OuterRecursion a(op, ingest_start(psi, cfg, op), cfg);
  OuterRecursion b(op, ingest_start(phi, cfg, op), cfg);

  StartIndependence out;
  out.bound = theoretical_bounds(op.constants(), cfg.lambda_min()).lambda_ratio;
  const double q = 1.0 / (1.0 - cfg.lambda_min() * op.constants().omega);
  const double slack = 2.0 * cfg.tol_picard * (1.0 + 1.0 / (1.0 - q));
  double tol = cfg.tol_outer.value_or(0.0);
  double prev = sup_distance(a.current(), b.current());
  for (std::size_t n = 1; n <= cfg.n_max; ++n) {
    const double da = a.advance().diff;
    const double db = b.advance().diff;
    if (n == 1 && !cfg.tol_outer) {
      tol = 1e-6 * (1.0 + std::max(a.current().sup_norm(), b.current().sup_norm()));
    }
    const double f = sup_distance(a.current(), b.current());
    out.f.push_back(f);
    out.ratios.push_back(prev > 0.0 ? f / prev : 0.0);
    if (f > out.bound * prev + slack) ++out.bound_violations;
    prev = f;
    out.steps = n;
    if (n >= 2 && da <= tol && db <= tol) break;
  }
  out.gap = sup_distance_from(a.current(), b.current(), cfg.trim_start());
  return out;
}

LambdaCauchyTable lambda_cauchy_table(const Operator& op, const GridFunction& psi,
                                      const SolverConfig& cfg, std::size_t n) {
  if (n == 0) throw ParameterError("lambda_cauchy_table: n starts at 1");
  if (cfg.enforce_gate) enforce_hypotheses(op);
  cfg.validate(op.constants());
  OuterRecursion rec(op, ingest_start(psi, cfg, op), cfg);
  for (std::size_t k = 0; k < n; ++k) rec.advance();
  LambdaCauchyTable t;
  t.n = n;
  t.lambdas = cfg.lambda_schedule;
  t.diffs = rec.steps().back().lambda_cauchy;
  for (std::size_t i = 1; i < t.diffs.size(); ++i) {
    if (t.diffs[i] > t.diffs[i - 1]) t.monotone = false;
  }
  return t;
}

void ConvergenceReport::write_text(std::ostream& os) const {
  fmt::print(os, "operator: {}\n", operator_name);
  fmt::print(os, "lambda schedule: {}\n", fmt::join(lambda_schedule, ", "));
  fmt::print(os, "theoretical outer ratio K0/(-omega): {:.6g}\n", bounds.outer_ratio);
  fmt::print(os, "theoretical lambda ratio at lambda_min: {:.6g}\n", bounds.lambda_ratio);
  fmt::print(os, "Picard q at lambda_min: {:.6g}\n", bounds.picard_q);
  fmt::print(os, "tol_outer: {:.3e}\n", tol_outer);
  fmt::print(os, "converged: {} (outer index {})\n", converged ? "yes" : "no", converged_index);
  fmt::print(os, "measured outer ratio (n >= 2): {:.6g}\n", measured_outer_ratio);
  fmt::print(os, "Richardson shift on trimmed window: {:.3e}\n", richardson_shift);
  fmt::print(os, "sup |u| on trimmed window: {:.6g}\n", final_sup);
  fmt::print(os, "wall clock: {:.2f} s\n\n", seconds);
  fmt::print(os, "{:>4} {:>12} {:>10} {:>9}  lambda-Cauchy diffs | Picard sweeps | Picard factors\n", "n",
             "diff", "ratio", "seconds");
  for (const auto& s : steps) {
    fmt::print(os, "{:>4} {:>12.4e} {:>10.4f} {:>9.2f}  {:.3e} | {} | {:.4f}\n", s.n, s.diff, s.ratio,
               s.seconds, fmt::join(s.lambda_cauchy, " "), fmt::join(s.picard_iterations, " "),
               fmt::join(s.picard_factor, " "));
  }
  for (const auto& n : notes) fmt::print(os, "note: {}\n", n);
}

void ConvergenceReport::write_kv(std::ostream& os) const {
  fmt::print(os, "operator = {}\n", operator_name);
  fmt::print(os, "lambda_schedule = {}\n", fmt::join(lambda_schedule, ","));
  fmt::print(os, "bound.outer_ratio = {:.17g}\n", bounds.outer_ratio);
  fmt::print(os, "bound.lambda_ratio = {:.17g}\n", bounds.lambda_ratio);
  fmt::print(os, "bound.picard_q = {:.17g}\n", bounds.picard_q);
  fmt::print(os, "tol_outer = {:.17g}\n", tol_outer);
  fmt::print(os, "converged = {}\n", converged);
  fmt::print(os, "converged_index = {}\n", converged_index);
  fmt::print(os, "measured_outer_ratio = {:.17g}\n", measured_outer_ratio);
  fmt::print(os, "ratio_flag = {}\n", ratio_flag);
  fmt::print(os, "richardson_shift = {:.17g}\n", richardson_shift);
  fmt::print(os, "final_sup = {:.17g}\n", final_sup);
  fmt::print(os, "steps = {}\n", steps.size());
  for (const auto& s : steps) {
    fmt::print(os, "step.{}.diff = {:.17g}\n", s.n, s.diff);
    fmt::print(os, "step.{}.ratio = {:.17g}\n", s.n, s.ratio);
    fmt::print(os, "step.{}.lambda_cauchy = {:.17g}\n", s.n, fmt::join(s.lambda_cauchy, ","));
    fmt::print(os, "step.{}.picard_iterations = {}\n", s.n, fmt::join(s.picard_iterations, ","));
    fmt::print(os, "step.{}.picard_factor = {:.17g}\n", s.n, fmt::join(s.picard_factor, ","));
  }
}

}  // namespace yosida
