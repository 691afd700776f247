#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "yosida/errors.hpp"
#include "yosida/operators.hpp"
#include "yosida/simd.hpp"

namespace yosida {

namespace {

constexpr double kHistoryTailEps = 1e-13;

bool is_constant(const Forcing& f) {
  return f.table_t().empty() &&
         std::ranges::all_of(f.terms(), [](const Forcing::Term& t) {
           return t.kind == Forcing::Term::Kind::constant || t.amplitude == 0.0;
         });
}

double history_depth(const DiagonalSpec& s) {
  if (s.history_depth > 0.0) return s.history_depth;
  switch (s.coupling) {
    case HistoryCoupling::point:
      return s.delay;
    case HistoryCoupling::distributed:
      return std::log(1.0 / kHistoryTailEps) / s.kappa;
    case HistoryCoupling::none:
      break;
  }
  return 1.0;
}

// Per-component bound form of J_lambda^omega over all nodes:
//   x_i = R(p z_i + q_i) with R the scalar law resolvent at mu*theta_i.
class DiagonalNodeResolvent final : public NodeResolvent {
 public:
  DiagonalNodeResolvent(const DiagonalOperator& op, const GridFunction& psi, double lambda,
                        double omega)
      : n_(psi.size()) {
    const auto& spec = op.spec();
    const auto& g = psi.grid();
    const double shift = 1.0 - lambda * omega;
    if (!(lambda > 0.0) || !(shift > 0.0)) {
      throw ParameterError("bind: need lambda > 0 and 1 - lambda*omega > 0");
    }
    p_ = 1.0 / shift;
    mu_ = lambda / shift;

    comps_.resize(spec.components.size());
    std::vector<double> hist(n_, 0.0);
    for (std::size_t c = 0; c < comps_.size(); ++c) {
      const ComponentLaw& law = spec.components[c];
      Comp& k = comps_[c];
      k.law = law;
      k.q.assign(n_, 0.0);

      if (spec.coupling == HistoryCoupling::point && law.b != 0.0) {
        for (std::size_t i = 0; i < n_; ++i) hist[i] = psi.eval_component(g.node_time(i) - spec.delay, c);
      } else if (spec.coupling == HistoryCoupling::distributed && law.b != 0.0) {
        exp_average_nodes(psi, c, spec.kappa, kHistoryTailEps, hist);
      } else {
        std::ranges::fill(hist, 0.0);
      }
      for (std::size_t i = 0; i < n_; ++i) {
        k.q[i] = mu_ * (law.b * hist[i] + law.h(g.node_time(i)));
      }

      k.theta_constant = is_constant(law.theta);
      if (k.theta_constant) {
        k.theta.assign(1, law.theta(0.0));
      } else {
        k.theta.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) k.theta[i] = law.theta(g.node_time(i));
      }
      k.s.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        const double th = k.theta_constant ? k.theta[0] : k.theta[i];
        const double d = 1.0 - mu_ * th * law.a;
        if (!(d > 0.0)) {
          throw ConvergenceError(
              fmt::format("operator '{}' has no resolvent at mu = {} (1 - mu*theta*a = {})",
                          op.name(), mu_, d),
              {});
        }
        k.s[i] = 1.0 / d;
      }
      k.linear = law.gamma == 0.0 && law.c == 0.0;
      k.shrink = law.gamma == 0.0 && law.c > 0.0 && k.theta_constant;
    }
  }

  void apply(const GridFunction& z, GridFunction& out, std::size_t begin,
             std::size_t end) const override {
    if (begin >= end) return;
    const auto& kt = simd::kernels();
    const std::size_t len = end - begin;
    for (std::size_t c = 0; c < comps_.size(); ++c) {
      const Comp& k = comps_[c];
      const double* zc = z.component(c).data() + begin;
      double* oc = out.component(c).data() + begin;
      if (k.linear) {
        kt.affine_map(zc, k.q.data() + begin, k.s.data() + begin, p_, oc, len);
      } else if (k.shrink) {
        kt.shrink_map(zc, k.q.data() + begin, k.s.data() + begin, p_,
                      mu_ * k.theta[0] * k.law.c, oc, len);
      } else {
        for (std::size_t j = 0; j < len; ++j) {
          const std::size_t i = begin + j;
          const double th = k.theta_constant ? k.theta[0] : k.theta[i];
          const double m = mu_ * th;
          oc[j] = scalar_law_resolvent(p_ * zc[j] + k.q[i], m * k.law.a, m * k.law.gamma,
                                       m * k.law.c);
        }
      }
    }
  }

 private:
  struct Comp {
    ComponentLaw law;
    std::vector<double> q;
    std::vector<double> s;
    std::vector<double> theta;
    bool theta_constant = true;
    bool linear = true;
    bool shrink = false;
  };

  std::size_t n_;
  double p_ = 1.0;
  double mu_ = 0.0;
  std::vector<Comp> comps_;
};

void validate(const DiagonalSpec& s) {
  if (s.components.empty()) throw ParameterError("diagonal operator needs at least one component");
  for (const auto& law : s.components) {
    if (law.a > 0.0 && !s.allow_expansive) {
      throw ParameterError(fmt::format("'{}': a = {} > 0 is not dissipative", s.name, law.a));
    }
    if (law.gamma < 0.0 || law.c < 0.0) {
      throw ParameterError(fmt::format("'{}': gamma and c must be nonnegative", s.name));
    }
    if (!(law.theta.lower_bound() > 0.0)) {
      throw ParameterError(fmt::format("'{}': modulation theta must stay positive", s.name));
    }
  }
  if (s.coupling == HistoryCoupling::point && !(s.delay > 0.0)) {
    throw ParameterError("point delay needs r > 0");
  }
  if (s.coupling == HistoryCoupling::distributed && !(s.kappa > 0.0)) {
    throw ParameterError("distributed delay needs kappa > 0");
  }
}

}  // namespace

double scalar_law_resolvent(double w, double mu_a, double mu_gamma, double mu_c, double tol) {
  const double d = 1.0 - mu_a;
  if (!(d > 0.0)) {
    throw ConvergenceError(
        fmt::format("scalar resolvent: x - mu*A(x) is not increasing (1 - mu*a = {})", d), {});
  }
  const double mag = std::fabs(w);
  if (mag <= mu_c) return 0.0;
  const double target = mag - mu_c;
  if (mu_gamma == 0.0) return std::copysign(target / d, w);

  // Solve mu_gamma y^3 + d y = target for y > 0. The left side is convex and
  // increasing on y >= 0, so Newton from the upper bracket end decreases
  // monotonically to the root; bisection guards against roundoff stalls.
  double lo = 0.0;
  double hi = std::min(target / d, std::cbrt(target / mu_gamma));
  double y = hi;
  for (int it = 0; it < 200; ++it) {
    const double f = mu_gamma * y * y * y + d * y - target;
    if (f > 0.0) hi = y; else lo = y;
    const double fp = 3.0 * mu_gamma * y * y + d;
    double next = y - f / fp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - y) <= tol * (1.0 + std::fabs(y)) || hi - lo <= tol * (1.0 + hi)) {
      return std::copysign(next, w);
    }
    y = next;
  }
  throw ConvergenceError(
      fmt::format("scalar resolvent did not converge: bracket [{}, {}] for target {}", lo, hi, target),
      {hi - lo});
}

DiagonalOperator::DiagonalOperator(DiagonalSpec spec)
    : Operator(spec.components.size(), (validate(spec), catalog::derive_constants(spec))),
      spec_(std::move(spec)) {}

State DiagonalOperator::history_term(const HistorySegment& phi) const {
  State h(dim(), 0.0);
  for (std::size_t c = 0; c < dim(); ++c) {
    if (spec_.components[c].b == 0.0) continue;
    switch (spec_.coupling) {
      case HistoryCoupling::none:
        break;
      case HistoryCoupling::point:
        h[c] = phi.eval_component(-spec_.delay, c);
        break;
      case HistoryCoupling::distributed:
        h[c] = exp_average_window(phi, c, spec_.kappa);
        break;
    }
  }
  return h;
}

void DiagonalOperator::resolvent(double t, const HistorySegment& phi, double lambda,
                                 std::span<const double> z, std::span<double> out) const {
  if (!(lambda > 0.0)) throw ParameterError("resolvent: lambda must be positive");
  const State hist = history_term(phi);
  for (std::size_t c = 0; c < dim(); ++c) {
    const ComponentLaw& law = spec_.components[c];
    const double m = lambda * law.theta(t);
    const double w = z[c] + lambda * (law.b * hist[c] + law.h(t));
    out[c] = scalar_law_resolvent(w, m * law.a, m * law.gamma, m * law.c);
  }
}

bool DiagonalOperator::single_valued() const {
  return std::ranges::all_of(spec_.components, [](const ComponentLaw& l) { return l.c == 0.0; });
}

void DiagonalOperator::evaluate(double t, const HistorySegment& phi, std::span<const double> x,
                                std::span<double> out) const {
  if (!single_valued()) Operator::evaluate(t, phi, x, out);
  const State hist = history_term(phi);
  for (std::size_t c = 0; c < dim(); ++c) {
    const ComponentLaw& law = spec_.components[c];
    const double xc = x[c];
    out[c] = law.theta(t) * (law.a * xc - law.gamma * xc * xc * xc) + law.b * hist[c] + law.h(t);
  }
}

std::unique_ptr<NodeResolvent> DiagonalOperator::bind(const GridFunction& psi, double lambda,
                                                      double omega) const {
  if (psi.dim() != dim()) throw ParameterError("bind: history dimension mismatch");
  return std::make_unique<DiagonalNodeResolvent>(*this, psi, lambda, omega);
}

namespace catalog {

OperatorConstants derive_constants(const DiagonalSpec& spec) {
  OperatorConstants k;
  k.omega = spec.omega;
  const std::size_t d = spec.components.size();
  k.h.resize(d);
  k.k.assign(d, Forcing{});
  k.g.assign(d, Forcing{});

  double K0 = 0.0;
  double h_bound_sq = 0.0;
  bool modulated = false;
  for (std::size_t c = 0; c < d; ++c) {
    const auto& law = spec.components[c];
    if (spec.coupling != HistoryCoupling::none) K0 = std::max(K0, std::fabs(law.b));
    k.h[c] = law.h;
    h_bound_sq += law.h.bound() * law.h.bound();
    if (!is_constant(law.theta)) modulated = true;
  }
  k.K0 = K0;
  k.L_h = lipschitz(k.h);
  k.L1 = [](double) { return 1.0; };
  k.L2 = [](double) { return 0.0; };

  switch (spec.coupling) {
    case HistoryCoupling::none:
    case HistoryCoupling::point:
      k.window = HistoryWindow::finite(spec.coupling == HistoryCoupling::point ? spec.delay : 1.0);
      break;
    case HistoryCoupling::distributed:
      k.window = HistoryWindow::infinite(history_depth(spec));
      break;
  }

  if (modulated) {
    // A(t) = theta(t) F + R(t, phi): comparing graphs at t1 and t2 costs
    // |theta1 - theta2| / theta_min (|y2| + |R2|), so g = k = theta/theta_min
    // and L2(s) = K0 s + sup|h|.
    k.kind = AssumptionKind::lipschitz;
    for (std::size_t c = 0; c < d; ++c) {
      const auto& theta = spec.components[c].theta;
      const Forcing scaled = theta.scaled(1.0 / theta.lower_bound());
      k.g[c] = scaled;
      k.k[c] = scaled;
    }
    k.L_g = lipschitz(k.g);
    k.L_k = k.L_g;
    const double h_bound = std::sqrt(h_bound_sq);
    k.L2 = [K0, h_bound](double s) { return K0 * s + h_bound; };
  }
  return k;
}

std::shared_ptr<DiagonalOperator> linear_scalar(double a, double c, double omega) {
  DiagonalSpec s;
  s.name = "linear_scalar";
  s.components = {ComponentLaw{.a = a, .h = Forcing::constant(c)}};
  s.omega = omega;
  return std::make_shared<DiagonalOperator>(s);
}

std::shared_ptr<DiagonalOperator> affine_forced(double a, Forcing h, double omega) {
  DiagonalSpec s;
  s.name = "affine_forced";
  s.components = {ComponentLaw{.a = a, .h = std::move(h)}};
  s.omega = omega;
  return std::make_shared<DiagonalOperator>(s);
}

std::shared_ptr<DiagonalOperator> delay_linear(double a, double b, double r, Forcing h,
                                               double omega) {
  DiagonalSpec s;
  s.name = "delay_linear";
  s.components = {ComponentLaw{.a = a, .b = b, .h = std::move(h)}};
  s.coupling = HistoryCoupling::point;
  s.delay = r;
  s.omega = omega;
  return std::make_shared<DiagonalOperator>(s);
}

std::shared_ptr<DiagonalOperator> delay_cubic(double a, double b, double r, Forcing h,
                                              double omega) {
  DiagonalSpec s;
  s.name = "delay_cubic";
  s.components = {ComponentLaw{.a = a, .gamma = 1.0, .b = b, .h = std::move(h)}};
  s.coupling = HistoryCoupling::point;
  s.delay = r;
  s.omega = omega;
  return std::make_shared<DiagonalOperator>(s);
}

std::shared_ptr<DiagonalOperator> delay_distributed(double a, double b, double kappa, Forcing h,
                                                    double omega) {
  DiagonalSpec s;
  s.name = "delay_distributed";
  s.components = {ComponentLaw{.a = a, .b = b, .h = std::move(h)}};
  s.coupling = HistoryCoupling::distributed;
  s.kappa = kappa;
  s.omega = omega;
  return std::make_shared<DiagonalOperator>(s);
}

std::shared_ptr<DiagonalOperator> shrinkage_multivalued(double c, double a, double omega,
                                                        Forcing h) {
  DiagonalSpec s;
  s.name = "shrinkage_multivalued";
  s.components = {ComponentLaw{.a = a, .c = c, .h = std::move(h)}};
  s.omega = omega;
  return std::make_shared<DiagonalOperator>(s);
}

std::shared_ptr<DiagonalOperator> modulated_linear(double a, double eps, double nu, Forcing h,
                                                   double omega) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ParameterError("modulated_linear: need 0 <= eps < 1");
  DiagonalSpec s;
  s.name = "modulated_linear";
  Forcing theta = Forcing::constant(1.0);
  if (eps > 0.0) theta = theta + Forcing::sine(eps, nu);
  s.components = {ComponentLaw{.a = a, .h = std::move(h), .theta = theta}};
  s.omega = omega;
  return std::make_shared<DiagonalOperator>(s);
}

std::shared_ptr<DiagonalOperator> diagonal_system(std::vector<ComponentLaw> laws,
                                                  HistoryCoupling coupling, double delay,
                                                  double omega) {
  DiagonalSpec s;
  s.name = "diagonal_system";
  s.components = std::move(laws);
  s.coupling = coupling;
  if (coupling == HistoryCoupling::distributed) {
    s.kappa = delay;
  } else {
    s.delay = delay;
  }
  s.omega = omega;
  return std::make_shared<DiagonalOperator>(s);
}

std::shared_ptr<DiagonalOperator> expansive_control(double a, double omega) {
  DiagonalSpec s;
  s.name = "expansive_control";
  ComponentLaw law;
  law.a = a;
  s.components = {law};
  s.omega = omega;
  s.allow_expansive = true;
  return std::make_shared<DiagonalOperator>(s);
}

}  // namespace catalog
}  // namespace yosida
