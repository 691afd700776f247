#include "yosida/checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "yosida/errors.hpp"

namespace yosida {

namespace {

constexpr std::size_t kHistorySteps = 64;

class Sampler {
 public:
  Sampler(const Operator& op, const SamplerConfig& cfg) : op_(op), cfg_(cfg), rng_(cfg.seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  bool coin(double p) { return uniform(0.0, 1.0) < p; }

  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }

  double time() { return uniform(-cfg_.t_range, cfg_.t_range); }

  State state(double scale) {
    State x(op_.dim());
    for (double& v : x) v = uniform(-scale, scale);
    return x;
  }

  State state() {
    // Mix of wide samples and samples close to the origin, where the
    // multivalued entries have their corner.
    return state(coin(0.2) ? 0.05 * cfg_.state_scale : cfg_.state_scale);
  }

  State near(const State& x, double spread) {
    State y = x;
    for (double& v : y) v += uniform(-spread, spread);
    return y;
  }

  /// Random trigonometric polynomial on [-depth, 0], sampled on a grid.
  GridFunction history() {
    const double depth = op_.constants().window.depth;
    GridSpec g{-depth, 0.0, depth / static_cast<double>(kHistorySteps), op_.dim()};
    GridFunction f(g);
    const double scale = cfg_.state_scale * (coin(0.2) ? 0.1 : 1.0);
    for (std::size_t c = 0; c < op_.dim(); ++c) {
      const double c0 = uniform(-scale, scale);
      double amp[3], freq[3], phase[3];
      for (int k = 0; k < 3; ++k) {
        amp[k] = uniform(0.0, scale) / 3.0;
        freq[k] = uniform(0.0, 3.0);
        phase[k] = uniform(0.0, 2.0 * std::numbers::pi);
      }
      auto col = f.component(c);
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double s = g.node_time(i);
        double v = c0;
        for (int k = 0; k < 3; ++k) v += amp[k] * std::sin(freq[k] * s + phase[k]);
        col[i] = v;
      }
    }
    return f;
  }

  GridFunction perturbed(const GridFunction& f, double spread) {
    GridFunction out = f;
    for (std::size_t c = 0; c < out.dim(); ++c) {
      for (double& v : out.component(c)) v += uniform(-spread, spread);
    }
    return out;
  }

  double lambda() { return log_uniform(cfg_.lambda_min, cfg_.lambda_max); }

 private:
  const Operator& op_;
  const SamplerConfig& cfg_;
  std::mt19937_64 rng_;
};

State sub(const State& a, const State& b) {
  State d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

State axpy(double s, const State& x, const State& y) {
  State d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = s * x[i] + y[i];
  return d;
}

double forcing_gap(const VectorForcing& f, double t1, double t2, NormKind kind) {
  if (f.empty()) return 0.0;
  return distance(eval(f, t1), eval(f, t2), kind);
}

void record(CheckReport& r, double excess, double scale, double tol) {
  r.max_violation = r.samples == 1 ? excess : std::max(r.max_violation, excess);
  if (excess > tol * (1.0 + scale)) ++r.violations;
}

void finish(CheckReport& r) {
  if (r.samples == 0) {
    r.vacuous = true;
    r.notes.emplace_back("no samples requested: vacuous pass");
  }
}

}  // namespace

std::string CheckReport::summary() const {
  std::string s = fmt::format("{}: {} samples, {} violations, max violation {:.3e}, max ratio {:.6g}",
                              name, samples, violations, max_violation, max_ratio);
  if (vacuous) s += " (vacuous)";
  return s;
}

CheckReport check_dissipativity(const Operator& op, const SamplerConfig& cfg) {
  CheckReport r;
  r.name = "dissipativity";
  Sampler smp(op, cfg);
  const NormKind kind = NormKind::euclidean;
  const auto window = op.constants().window;
  for (std::size_t n = 0; n < cfg.n_samples; ++n) {
    const double t = smp.time();
    const GridFunction hist = smp.history();
    const HistorySegment phi(hist, 0.0, window);
    const double lambda = smp.lambda();
    const State z1 = smp.state();
    const State z2 = smp.coin(0.3) ? smp.near(z1, 0.1) : smp.state();
    ++r.samples;
    const double dz = distance(z1, z2, kind);
    try {
      const State x1 = resolvent(op, t, phi, lambda, z1);
      const State x2 = resolvent(op, t, phi, lambda, z2);
      const double dx = distance(x1, x2, kind);
      record(r, dx - dz, dz, cfg.tol);
      if (dz > 0.0) r.max_ratio = std::max(r.max_ratio, dx / dz);
    } catch (const ConvergenceError& e) {
      ++r.violations;
      r.max_violation = std::max(r.max_violation, std::numeric_limits<double>::infinity());
      if (r.notes.size() < 5) r.notes.push_back(fmt::format("lambda = {:.4g}: {}", lambda, e.what()));
    }
  }
  finish(r);
  return r;
}

CheckReport check_control_inequality(const Operator& op, const SamplerConfig& cfg) {
  CheckReport r;
  r.name = "control_inequality";
  Sampler smp(op, cfg);
  const auto& k = op.constants();
  const NormKind kind = NormKind::euclidean;
  const bool lip = k.kind == AssumptionKind::lipschitz;
  const double w = k.omega;

  std::size_t perturbed_violations = 0, unscaled_violations = 0;
  double perturbed_max = -std::numeric_limits<double>::infinity();
  double unscaled_max = -std::numeric_limits<double>::infinity();
  double plain_max = -std::numeric_limits<double>::infinity();

  for (std::size_t n = 0; n < cfg.n_samples; ++n) {
    const double t1 = smp.time();
    double t2 = t1;
    if (!smp.coin(0.25)) t2 = smp.coin(0.5) ? t1 + smp.uniform(-0.5, 0.5) : smp.time();

    const GridFunction h1 = smp.history();
    const GridFunction h2 = smp.coin(0.25) ? h1 : (smp.coin(0.5) ? smp.perturbed(h1, 0.2) : smp.history());
    const HistorySegment phi1(h1, 0.0, k.window);
    const HistorySegment phi2(h2, 0.0, k.window);
    const double lambda = smp.lambda();
    const double probe = smp.log_uniform(kDefaultProbeLambda, 1.0);

    GraphPair p1 = graph_pair(op, t1, phi1, smp.state(), probe);
    GraphPair p2;
    if (smp.coin(0.3)) {
      // Resolvent-matched pair: x2 - lambda y2 = x1 - lambda y1, so the
      // first term on the right vanishes and only the control terms remain.
      const State z = axpy(-lambda, p1.y, p1.x);
      try {
        p2.x = resolvent(op, t2, phi2, lambda, z);
      } catch (const ConvergenceError&) {
        p2 = graph_pair(op, t2, phi2, smp.near(p1.x, 0.5), probe);
      }
      if (p2.y.empty()) {
        p2.y.resize(op.dim());
        for (std::size_t i = 0; i < p2.y.size(); ++i) p2.y[i] = (p2.x[i] - z[i]) / lambda;
      }
    } else {
      p2 = graph_pair(op, t2, phi2, smp.coin(0.3) ? smp.near(p1.x, 0.5) : smp.state(), probe);
    }
    ++r.samples;

    const double dx = distance(p1.x, p2.x, kind);
    const double dE = history_distance(phi1, phi2);
    const double phi2_norm = phi2.norm();
    const double x2_norm = norm(p2.x, kind);
    const double dh = forcing_gap(k.h, t1, t2, kind);
    const double dk = forcing_gap(k.k, t1, t2, kind);
    const double dg = lip ? forcing_gap(k.g, t1, t2, kind) : 0.0;
    const double L1 = k.L1(x2_norm);
    const double L2 = k.L2(phi2_norm);
    const double scale = dx + lambda * (norm(p1.y, kind) + norm(p2.y, kind));

    const double resid = norm(sub(sub(p1.x, p2.x), axpy(lambda, sub(p1.y, p2.y), State(op.dim()))), kind);
    const double rhs = resid + lambda * dh * L1 + lambda * dk * L2 + k.K0 * lambda * dE +
                       lambda * dg * norm(p2.y, kind);
    plain_max = std::max(plain_max, dx - rhs);
    record(r, dx - rhs, scale, cfg.tol);

    // Same pairs viewed as elements of A + omega I.
    const State y1w = axpy(w, p1.x, p1.y);
    const State y2w = axpy(w, p2.x, p2.y);
    const double resid_w = norm(sub(sub(p1.x, p2.x), axpy(lambda, sub(y1w, y2w), State(op.dim()))), kind);
    const double hw = dh + std::fabs(w) * dg;
    const double L1w = L1 + x2_norm;
    const double common = resid_w + lambda * hw * L1w + lambda * dg * norm(y2w, kind) + k.K0 * lambda * dE;
    const double rhs_w = common + lambda * dk * L2 + lambda * w * dx;
    const double rhs_u = common + dk * L2 + w * dx;
    const double scale_w = dx + lambda * (norm(y1w, kind) + norm(y2w, kind));
    perturbed_max = std::max(perturbed_max, dx - rhs_w);
    unscaled_max = std::max(unscaled_max, dx - rhs_u);
    if (dx - rhs_w > cfg.tol * (1.0 + scale_w)) {
      ++perturbed_violations;
      ++r.violations;
    }
    if (dx - rhs_u > cfg.tol * (1.0 + scale_w)) ++unscaled_violations;
  }
  if (r.samples > 0) {
    r.max_violation = std::max(plain_max, perturbed_max);
    r.extras["plain_max_violation"] = plain_max;
    r.extras["perturbed_max_violation"] = perturbed_max;
    r.extras["perturbed_violations"] = static_cast<double>(perturbed_violations);
    r.extras["unscaled_max_violation"] = unscaled_max;
    r.extras["unscaled_violations"] = static_cast<double>(unscaled_violations);
  }
  r.notes.emplace_back(lip ? "kind: bounded Lipschitz g, h, k" : "kind: uniformly continuous h, k");
  finish(r);
  return r;
}

CheckReport history_lipschitz_check(const Operator& op, const SamplerConfig& cfg) {
  CheckReport r;
  r.name = "history_lipschitz";
  Sampler smp(op, cfg);
  const auto& k = op.constants();
  const NormKind kind = NormKind::euclidean;
  const double w = k.omega;
  const double lambda_cap = w < 0.0 ? std::min(cfg.lambda_max, 1.0 / -w) : cfg.lambda_max;
  for (std::size_t n = 0; n < cfg.n_samples; ++n) {
    const double t = smp.time();
    const GridFunction h1 = smp.history();
    const GridFunction h2 = smp.coin(0.1) ? h1 : (smp.coin(0.5) ? smp.perturbed(h1, 0.2) : smp.history());
    const HistorySegment phi1(h1, 0.0, k.window);
    const HistorySegment phi2(h2, 0.0, k.window);
    const double lambda = smp.log_uniform(cfg.lambda_min, lambda_cap * (1.0 - 1e-9));
    const State z = smp.state();
    ++r.samples;
    const State x1 = resolvent_omega(op, t, phi1, lambda, z, w);
    const State x2 = resolvent_omega(op, t, phi2, lambda, z, w);
    const double d = distance(x1, x2, kind);
    const double dE = history_distance(phi1, phi2);
    const double factor = lambda / (1.0 - lambda * w);
    record(r, d - k.K0 * factor * dE, norm(z, kind), cfg.tol);
    if (dE > 0.0) r.max_ratio = std::max(r.max_ratio, d / (factor * dE));
  }
  r.extras["declared_K0"] = k.K0;
  finish(r);
  return r;
}

}  // namespace yosida
