#include <cmath>

#include <fmt/format.h>

#include "yosida/errors.hpp"
#include "yosida/operators.hpp"

namespace yosida {

namespace {

class GenericNodeResolvent final : public NodeResolvent {
 public:
  GenericNodeResolvent(const Operator& op, const GridFunction& psi, double lambda, double omega)
      : op_(op), psi_(psi), lambda_(lambda), omega_(omega) {}

  void apply(const GridFunction& z, GridFunction& out, std::size_t begin,
             std::size_t end) const override {
    const auto& g = psi_.grid();
    for (std::size_t i = begin; i < end; ++i) {
      const double t = g.node_time(i);
      const HistorySegment seg(psi_, t, op_.constants().window);
      const State zi = z.node(i);
      out.set_node(i, resolvent_omega(op_, t, seg, lambda_, zi, omega_));
    }
  }

 private:
  const Operator& op_;
  const GridFunction& psi_;
  double lambda_;
  double omega_;
};

}  // namespace

Operator::Operator(std::size_t dim, OperatorConstants constants)
    : dim_(dim), constants_(std::move(constants)) {
  if (dim_ == 0) throw ParameterError("operator dimension must be positive");
}

void Operator::evaluate(double, const HistorySegment&, std::span<const double>,
                        std::span<double>) const {
  throw ParameterError("operator '" + name() + "' is multivalued; use apply_selection");
}

std::unique_ptr<NodeResolvent> Operator::bind(const GridFunction& psi, double lambda,
                                              double omega) const {
  return std::make_unique<GenericNodeResolvent>(*this, psi, lambda, omega);
}

State resolvent(const Operator& op, double t, const HistorySegment& phi, double lambda,
                std::span<const double> z) {
  if (!(lambda > 0.0)) throw ParameterError("resolvent: lambda must be positive");
  if (z.size() != op.dim()) throw ParameterError("resolvent: dimension mismatch");
  State out(op.dim());
  op.resolvent(t, phi, lambda, z, out);
  return out;
}

State resolvent_omega(const Operator& op, double t, const HistorySegment& phi, double lambda,
                      std::span<const double> z) {
  return resolvent_omega(op, t, phi, lambda, z, op.constants().omega);
}

State resolvent_omega(const Operator& op, double t, const HistorySegment& phi, double lambda,
                      std::span<const double> z, double omega) {
  const double shift = 1.0 - lambda * omega;
  if (!(lambda > 0.0) || !(shift > 0.0)) {
    throw ParameterError(
        fmt::format("resolvent_omega: need lambda > 0 and 1 - lambda*omega > 0 (lambda={}, omega={})",
                    lambda, omega));
  }
  State scaled(z.begin(), z.end());
  for (double& v : scaled) v /= shift;
  return resolvent(op, t, phi, lambda / shift, scaled);
}

State apply_selection(const Operator& op, double t, const HistorySegment& phi,
                      std::span<const double> x, double lambda_probe) {
  State y(op.dim());
  if (op.single_valued()) {
    op.evaluate(t, phi, x, y);
    return y;
  }
  const State jx = resolvent(op, t, phi, lambda_probe, x);
  for (std::size_t c = 0; c < y.size(); ++c) y[c] = (jx[c] - x[c]) / lambda_probe;
  return y;
}

GraphPair graph_pair(const Operator& op, double t, const HistorySegment& phi,
                     std::span<const double> x, double lambda_probe) {
  GraphPair p;
  if (op.single_valued()) {
    p.x.assign(x.begin(), x.end());
    p.y.resize(op.dim());
    op.evaluate(t, phi, x, p.y);
    return p;
  }
  p.x = resolvent(op, t, phi, lambda_probe, x);
  p.y.resize(op.dim());
  for (std::size_t c = 0; c < p.y.size(); ++c) p.y[c] = (p.x[c] - x[c]) / lambda_probe;
  return p;
}

std::optional<std::string> hypothesis_violation(const OperatorConstants& c) {
  if (!(c.omega < 0.0)) return fmt::format("omega = {} is not negative", c.omega);
  if (c.K0 < 0.0) return fmt::format("K0 = {} is negative", c.K0);
  if (c.kind == AssumptionKind::uniform_continuous) {
    if (!(c.K0 < -c.omega)) return fmt::format("K0 = {} >= -omega = {}", c.K0, -c.omega);
  } else {
    const double m = std::max(c.K0, c.L_g);
    if (!(m < -c.omega)) {
      return fmt::format("max(K0, L_g) = max({}, {}) >= -omega = {}", c.K0, c.L_g, -c.omega);
    }
  }
  return std::nullopt;
}

}  // namespace yosida
