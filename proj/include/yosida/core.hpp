#pragma once

// Time grids, sampled X-valued functions on them, history segments, norms
// and the upper bracket [y, x]_+ of the state norm.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace yosida {

/// A point of the state space X = R^d.
using State = std::vector<double>;

enum class NormKind { euclidean, max };

double norm(std::span<const double> x, NormKind kind);
double distance(std::span<const double> a, std::span<const double> b, NormKind kind);

/// One-sided directional derivative of the norm at x in direction y:
/// lim_{h->0+} (|x + h y| - |x|) / h.
double upper_bracket(std::span<const double> y, std::span<const double> x, NormKind kind);

/// Uniform grid t_min, t_min + dt, ..., t_max over X = R^dim.
struct GridSpec {
  double t_min = 0.0;
  double t_max = 1.0;
  double dt = 0.1;
  std::size_t dim = 1;
  NormKind norm = NormKind::euclidean;

  /// Throws ParameterError unless t_min < t_max, dt > 0 and the span is an
  /// integer number (>= 1) of steps.
  void validate() const;

  std::size_t nodes() const;
  double node_time(std::size_t i) const { return t_min + static_cast<double>(i) * dt; }

  /// Index of the first node with t_i >= t (clamped to the grid).
  std::size_t first_node_at_or_after(double t) const;

  bool operator==(const GridSpec&) const = default;
};

/// How a grid function is continued to t < t_min.
struct LeftExtension {
  enum class Kind { constant, periodic };
  Kind kind = Kind::constant;
  double period = 0.0;

  static LeftExtension constant() { return {}; }
  static LeftExtension periodic(double T) { return {Kind::periodic, T}; }

  bool operator==(const LeftExtension&) const = default;
};

/// Piecewise-linear function on a uniform grid, continued to the left by the
/// extension rule. Values are stored component-major so that each component
/// is a contiguous array.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(GridSpec grid, LeftExtension ext = {});

  static GridFunction constant(GridSpec grid, const State& c, LeftExtension ext = {});
  static GridFunction sample(GridSpec grid, const std::function<State(double)>& fn,
                             LeftExtension ext = {});
  static GridFunction sample_scalar(GridSpec grid, const std::function<double(double)>& fn,
                                    LeftExtension ext = {});

  const GridSpec& grid() const { return grid_; }
  const LeftExtension& extension() const { return ext_; }
  void set_extension(LeftExtension ext);
  std::size_t size() const { return n_; }
  std::size_t dim() const { return grid_.dim; }

  std::span<double> component(std::size_t c) { return {values_.data() + c * n_, n_}; }
  std::span<const double> component(std::size_t c) const {
    return {values_.data() + c * n_, n_};
  }

  double value(std::size_t i, std::size_t c) const { return values_[c * n_ + i]; }
  double& value(std::size_t i, std::size_t c) { return values_[c * n_ + i]; }
  State node(std::size_t i) const;
  void set_node(std::size_t i, std::span<const double> x);

  /// Value at any t <= t_max (interpolation, then the extension rule).
  State eval(double t) const;
  double eval_component(double t, std::size_t c) const;

  /// Value of the extension sampled on the lattice t_min + j*dt, j may be
  /// negative.
  double lattice_value(std::ptrdiff_t j, std::size_t c) const;

  /// Exact sup of |f| over [a, b] for the piecewise-linear representative.
  double sup_norm(double a, double b) const;
  /// max over all nodes.
  double sup_norm() const;

  bool all_finite() const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

  /// CSV: header `t,x1,...,xd`, one row per node, 17 significant digits.
  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;
  static GridFunction read_csv(std::istream& is, LeftExtension ext = {});

 private:
  double node_norm(std::size_t i) const;
  double sup_nodes(std::size_t lo, std::size_t hi) const;
  double sup_data(double a, double b) const;

  GridSpec grid_{};
  LeftExtension ext_{};
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// max over nodes i >= first_node of |a(t_i) - b(t_i)|; grids must match.
double sup_distance(const GridFunction& a, const GridFunction& b, std::size_t first_node = 0);

/// max over nodes with t_i >= t_from.
double sup_distance_from(const GridFunction& a, const GridFunction& b, double t_from);

/// Window I = [-r, 0] (finite delay) or (-inf, 0] truncated at depth R_hist.
struct HistoryWindow {
  enum class Kind { finite, infinite };
  Kind kind = Kind::finite;
  double depth = 1.0;

  static HistoryWindow finite(double r);
  static HistoryWindow infinite(double truncation_depth);

  bool operator==(const HistoryWindow&) const = default;
};

struct HistoryNorm {
  double value = 0.0;
  /// For truncated infinite windows: how much larger the sup over all of the
  /// represented past can be than `value`. Zero for finite windows.
  double truncation_bound = 0.0;
};

/// The view u_t : s -> u(t + s), s in the window. Non-owning; the source must
/// outlive the segment.
class HistorySegment {
 public:
  HistorySegment(const GridFunction& source, double anchor, HistoryWindow window);

  const GridFunction& source() const { return *source_; }
  double anchor() const { return anchor_; }
  const HistoryWindow& window() const { return window_; }

  /// u(anchor + s), s in [-depth, 0].
  State eval(double s) const;
  double eval_component(double s, std::size_t c) const;

  /// sup-type E-norm over the (truncated) window.
  double norm() const { return norm_report().value; }
  HistoryNorm norm_report() const;

 private:
  const GridFunction* source_;
  double anchor_;
  HistoryWindow window_;
};

/// sup over the window of |a(t + s) - b(t + s)|, both sources on the same grid.
double history_distance(const HistorySegment& a, const HistorySegment& b);

/// Exact integrals of a normalized exponential kernel rate*exp(-rate*tau)
/// against the linear interpolant over one step of length h. `decay` is
/// exp(-rate*h); `w_far`/`w_near` weight the node farther from / nearer to
/// the evaluation time.
struct ExpStepWeights {
  double decay = 0.0;
  double w_far = 0.0;
  double w_near = 0.0;
};

ExpStepWeights exp_step_weights(double rate, double h);

/// rate * int_0^inf e^{-rate tau} f_c(t - tau) dtau at every node, computed
/// exactly for the piecewise-linear representative by a first-order
/// recurrence. Values left of t_min come from the extension rule; there the
/// kernel is cut at ln(1/tail_eps)/rate and the remaining mass is put on the
/// farthest sampled value.
void exp_average_nodes(const GridFunction& f, std::size_t c, double rate, double tail_eps,
                       std::span<double> out);

/// The same average at a single time t <= t_max (direct truncated sum).
double exp_average_at(const GridFunction& f, std::size_t c, double rate, double t,
                      double tail_eps);

/// Average over a history window only: s in [-depth, 0], remaining kernel
/// mass placed on phi(-depth).
double exp_average_window(const HistorySegment& phi, std::size_t c, double rate);

}  // namespace yosida
