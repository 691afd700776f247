#pragma once

// m-dissipative operator families A(t, phi) on X = R^d, their resolvents
// J_lambda = (I - lambda A)^{-1} and omega-shifted resolvents, and the
// catalog of concrete operators used by the solver and its tests.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "yosida/core.hpp"

namespace yosida {

/// Sum of constant / sine / cosine terms plus an optional piecewise-linear
/// table (held constant outside its range). The zero function by default.
class Forcing {
 public:
  struct Term {
    enum class Kind { constant, sin, cos };
    Kind kind = Kind::constant;
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;

    bool operator==(const Term&) const = default;
  };

  Forcing() = default;
  static Forcing constant(double c);
  static Forcing cosine(double amplitude = 1.0, double frequency = 1.0, double phase = 0.0);
  static Forcing sine(double amplitude = 1.0, double frequency = 1.0, double phase = 0.0);
  static Forcing table(std::vector<double> t, std::vector<double> x);

  Forcing& add(Term term);
  Forcing operator+(const Forcing& o) const;
  Forcing scaled(double s) const;

  double operator()(double t) const;

  /// Upper bound on the Lipschitz constant.
  double lipschitz() const;
  /// Upper bound on sup |f|.
  double bound() const;
  /// Lower bound on inf f.
  double lower_bound() const;
  bool is_zero() const;

  const std::vector<Term>& terms() const { return terms_; }
  const std::vector<double>& table_t() const { return table_t_; }
  const std::vector<double>& table_x() const { return table_x_; }

  bool operator==(const Forcing&) const = default;

 private:
  std::vector<Term> terms_;
  std::vector<double> table_t_;
  std::vector<double> table_x_;
};

/// One forcing per state component.
using VectorForcing = std::vector<Forcing>;

State eval(const VectorForcing& f, double t);
double lipschitz(const VectorForcing& f);

enum class AssumptionKind {
  uniform_continuous,  ///< bounded uniformly continuous h, k; no g term
  lipschitz,           ///< bounded Lipschitz g, h, k
};

/// Declared constants of the family A(t, phi) + omega I.
struct OperatorConstants {
  double omega = -1.0;
  double K0 = 0.0;
  AssumptionKind kind = AssumptionKind::uniform_continuous;
  HistoryWindow window = HistoryWindow::finite(1.0);
  VectorForcing h;
  VectorForcing k;
  VectorForcing g;
  std::function<double(double)> L1 = [](double) { return 1.0; };
  std::function<double(double)> L2 = [](double) { return 0.0; };
  double L_h = 0.0;
  double L_k = 0.0;
  double L_g = 0.0;
};

/// Resolvents J_lambda^omega(t_i, psi_{t_i}) bound to every node of a grid
/// for a fixed lambda and history source psi.
class NodeResolvent {
 public:
  virtual ~NodeResolvent() = default;
  /// out(t_i) = J(t_i, psi_{t_i}) z(t_i) for nodes i in [begin, end).
  virtual void apply(const GridFunction& z, GridFunction& out, std::size_t begin,
                     std::size_t end) const = 0;
};

class Operator {
 public:
  virtual ~Operator() = default;

  virtual std::string name() const = 0;
  std::size_t dim() const { return dim_; }
  const OperatorConstants& constants() const { return constants_; }
  OperatorConstants& mutable_constants() { return constants_; }

  /// x = J_lambda(t, phi) z, i.e. the unique x with z in x - lambda A(t, phi) x.
  virtual void resolvent(double t, const HistorySegment& phi, double lambda,
                         std::span<const double> z, std::span<double> out) const = 0;

  /// Single-valued entries can be evaluated directly.
  virtual bool single_valued() const { return false; }
  virtual void evaluate(double t, const HistorySegment& phi, std::span<const double> x,
                        std::span<double> out) const;

  /// Binds J_lambda^omega to all nodes of psi's grid (history drawn from
  /// psi). The default evaluates resolvent() node by node.
  virtual std::unique_ptr<NodeResolvent> bind(const GridFunction& psi, double lambda,
                                              double omega) const;

 protected:
  Operator(std::size_t dim, OperatorConstants constants);

 private:
  std::size_t dim_;
  OperatorConstants constants_;
};

State resolvent(const Operator& op, double t, const HistorySegment& phi, double lambda,
                std::span<const double> z);

/// J_lambda^omega x = J_{lambda/(1 - lambda omega)}(x / (1 - lambda omega)),
/// with omega taken from the operator constants unless given.
State resolvent_omega(const Operator& op, double t, const HistorySegment& phi, double lambda,
                      std::span<const double> z);
State resolvent_omega(const Operator& op, double t, const HistorySegment& phi, double lambda,
                      std::span<const double> z, double omega);

inline constexpr double kDefaultProbeLambda = 1e-4;

/// An element y of A(t, phi) x: direct evaluation for single-valued
/// operators, otherwise the Yosida selection (J_p x - x)/p.
State apply_selection(const Operator& op, double t, const HistorySegment& phi,
                      std::span<const double> x, double lambda_probe = kDefaultProbeLambda);

/// A pair [x', y] that lies exactly on the graph of A(t, phi): x' = x and
/// y = A x for single-valued operators, otherwise x' = J_p x and
/// y = (J_p x - x)/p.
struct GraphPair {
  State x;
  State y;
};
GraphPair graph_pair(const Operator& op, double t, const HistorySegment& phi,
                     std::span<const double> x, double lambda_probe = kDefaultProbeLambda);

// ---------------------------------------------------------------------------
// Catalog

/// Per-component law of a diagonal operator:
///   A(t, phi)x_c = theta(t) (a x_c - gamma x_c^3 - c Sign(x_c)) + b H_c(phi) + h(t)
/// where H is either the point delay phi_c(-r) or the distributed delay
/// kappa * int_0^inf e^{-kappa s} phi_c(-s) ds.
struct ComponentLaw {
  double a = -1.0;
  double gamma = 0.0;
  double c = 0.0;
  double b = 0.0;
  Forcing h;
  Forcing theta = Forcing::constant(1.0);

  bool operator==(const ComponentLaw&) const = default;
};

enum class HistoryCoupling { none, point, distributed };

struct DiagonalSpec {
  std::string name = "diagonal";
  std::vector<ComponentLaw> components;
  HistoryCoupling coupling = HistoryCoupling::none;
  double delay = 1.0;          ///< r for point delay
  double kappa = 1.0;          ///< rate for distributed delay
  double history_depth = 0.0;  ///< truncation depth R_hist (0: derived)
  double omega = -1.0;
  /// Allows a > 0 (expansive negative control).
  bool allow_expansive = false;
};

/// The catalog's general diagonal family; every named constructor below
/// returns one of these with the declared constants filled in.
class DiagonalOperator final : public Operator {
 public:
  explicit DiagonalOperator(DiagonalSpec spec);

  std::string name() const override { return spec_.name; }
  const DiagonalSpec& spec() const { return spec_; }

  void resolvent(double t, const HistorySegment& phi, double lambda, std::span<const double> z,
                 std::span<double> out) const override;
  bool single_valued() const override;
  void evaluate(double t, const HistorySegment& phi, std::span<const double> x,
                std::span<double> out) const override;
  std::unique_ptr<NodeResolvent> bind(const GridFunction& psi, double lambda,
                                      double omega) const override;

  /// History term H_c(phi) for all components.
  State history_term(const HistorySegment& phi) const;

 private:
  DiagonalSpec spec_;
};

/// Solves mu*gamma*x^3 + (1 - mu*a) x + mu*c*Sign(x) ∋ w for x (the scalar
/// resolvent of a monotone law). Safeguarded Newton with bisection fallback.
double scalar_law_resolvent(double w, double mu_a, double mu_gamma, double mu_c, double tol = 1e-15);

namespace catalog {

/// A x = a x + c, a <= 0.
std::shared_ptr<DiagonalOperator> linear_scalar(double a, double c, double omega);
/// A(t) x = a x + h(t).
std::shared_ptr<DiagonalOperator> affine_forced(double a, Forcing h, double omega);
/// A(t, phi) x = a x + b phi(-r) + h(t).
std::shared_ptr<DiagonalOperator> delay_linear(double a, double b, double r, Forcing h, double omega);
/// A(t, phi) x = -x^3 + a x + b phi(-r) + h(t).
std::shared_ptr<DiagonalOperator> delay_cubic(double a, double b, double r, Forcing h, double omega);
/// A(t, phi) x = a x + b kappa int_0^inf e^{-kappa s} phi(-s) ds + h(t) (infinite delay).
std::shared_ptr<DiagonalOperator> delay_distributed(double a, double b, double kappa, Forcing h,
                                                    double omega);
/// A x = -c Sign(x) + a x (+ h(t)); multivalued at 0.
std::shared_ptr<DiagonalOperator> shrinkage_multivalued(double c, double a, double omega,
                                                        Forcing h = {});
/// A(t) x = theta(t) a x + h(t), theta = 1 + eps sin(nu t); Lipschitz-kind
/// constants with g = theta / (1 - eps).
std::shared_ptr<DiagonalOperator> modulated_linear(double a, double eps, double nu, Forcing h,
                                                   double omega);
/// Diagonal system of independent components sharing one coupling.
std::shared_ptr<DiagonalOperator> diagonal_system(std::vector<ComponentLaw> laws,
                                                  HistoryCoupling coupling, double delay,
                                                  double omega);
/// A x = +a x, a > 0: not dissipative (negative control).
std::shared_ptr<DiagonalOperator> expansive_control(double a, double omega);

/// Declared constants for a diagonal spec (K0 = max |b|, L1 = 1, ...).
OperatorConstants derive_constants(const DiagonalSpec& spec);

}  // namespace catalog

/// K0 < -omega (uniform-continuity kind) or max{K0, L_g} < -omega
/// (Lipschitz kind), and omega < 0. Returns the reason when violated.
std::optional<std::string> hypothesis_violation(const OperatorConstants& c);

}  // namespace yosida
