#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "yosida/core.hpp"
#include "yosida/errors.hpp"
#include "yosida/simd.hpp"

namespace yosida {

namespace {
constexpr double kNodeTol = 1e-9;
}

void GridSpec::validate() const {
  if (!std::isfinite(t_min) || !std::isfinite(t_max) || !(t_min < t_max)) {
    throw ParameterError("grid: need finite t_min < t_max");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("grid: need dt > 0");
  if (dim == 0) throw ParameterError("grid: dim must be positive");
  const double steps = (t_max - t_min) / dt;
  if (std::fabs(steps - std::round(steps)) > kNodeTol * std::max(1.0, steps)) {
    throw ParameterError(fmt::format("grid: (t_max - t_min)/dt = {} is not an integer", steps));
  }
  if (std::round(steps) < 1.0) throw ParameterError("grid: need at least two nodes");
}

std::size_t GridSpec::nodes() const {
  return static_cast<std::size_t>(std::llround((t_max - t_min) / dt)) + 1;
}

std::size_t GridSpec::first_node_at_or_after(double t) const {
  if (t <= t_min) return 0;
  const double u = (t - t_min) / dt;
  const double k = std::ceil(u - kNodeTol);
  return std::min(static_cast<std::size_t>(k), nodes() - 1);
}

GridFunction::GridFunction(GridSpec grid, LeftExtension ext) : grid_(grid) {
  grid_.validate();
  n_ = grid_.nodes();
  values_.assign(n_ * grid_.dim, 0.0);
  set_extension(ext);
}

void GridFunction::set_extension(LeftExtension ext) {
  if (ext.kind == LeftExtension::Kind::periodic) {
    if (!(ext.period > 0.0) || ext.period > grid_.t_max - grid_.t_min + kNodeTol) {
      throw ParameterError("periodic extension needs 0 < T <= t_max - t_min");
    }
  }
  ext_ = ext;
}

GridFunction GridFunction::constant(GridSpec grid, const State& c, LeftExtension ext) {
  GridFunction f(grid, ext);
  if (c.size() != f.dim()) throw ParameterError("constant: dimension mismatch");
  for (std::size_t k = 0; k < f.dim(); ++k) std::ranges::fill(f.component(k), c[k]);
  return f;
}

GridFunction GridFunction::sample(GridSpec grid, const std::function<State(double)>& fn,
                                  LeftExtension ext) {
  GridFunction f(grid, ext);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const State x = fn(grid.node_time(i));
    if (x.size() != f.dim()) throw ParameterError("sample: dimension mismatch");
    f.set_node(i, x);
  }
  return f;
}

GridFunction GridFunction::sample_scalar(GridSpec grid, const std::function<double(double)>& fn,
                                         LeftExtension ext) {
  if (grid.dim != 1) throw ParameterError("sample_scalar: grid must be one-dimensional");
  GridFunction f(grid, ext);
  auto v = f.component(0);
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = fn(grid.node_time(i));
  return f;
}

State GridFunction::node(std::size_t i) const {
  State x(dim());
  for (std::size_t c = 0; c < dim(); ++c) x[c] = value(i, c);
  return x;
}

void GridFunction::set_node(std::size_t i, std::span<const double> x) {
  for (std::size_t c = 0; c < dim(); ++c) value(i, c) = x[c];
}

double GridFunction::eval_component(double t, std::size_t c) const {
  const double tol = kNodeTol * grid_.dt;
  if (!(t <= grid_.t_max + tol)) {
    throw OutOfRangeError(fmt::format("eval: t = {} beyond t_max = {}", t, grid_.t_max));
  }
  if (t < grid_.t_min) {
    if (ext_.kind == LeftExtension::Kind::constant) return value(0, c);
    const double T = ext_.period;
    double shifted = t + std::ceil((grid_.t_min - t) / T) * T;
    if (shifted < grid_.t_min) shifted += T;
    return eval_component(std::min(shifted, grid_.t_max), c);
  }
  const double u = (t - grid_.t_min) / grid_.dt;
  std::size_t i = static_cast<std::size_t>(u);
  if (i >= n_ - 1) return value(n_ - 1, c);
  const double frac = u - static_cast<double>(i);
  const double a = value(i, c);
  const double b = value(i + 1, c);
  return a + frac * (b - a);
}

State GridFunction::eval(double t) const {
  State x(dim());
  for (std::size_t c = 0; c < dim(); ++c) x[c] = eval_component(t, c);
  return x;
}

double GridFunction::lattice_value(std::ptrdiff_t j, std::size_t c) const {
  if (j >= 0) return value(static_cast<std::size_t>(j), c);
  if (ext_.kind == LeftExtension::Kind::constant) return value(0, c);
  return eval_component(grid_.t_min + static_cast<double>(j) * grid_.dt, c);
}

double GridFunction::node_norm(std::size_t i) const {
  if (dim() == 1) return std::fabs(value(i, 0));
  State x = node(i);
  return norm(x, grid_.norm);
}

double GridFunction::sup_nodes(std::size_t lo, std::size_t hi) const {
  if (lo > hi) return 0.0;
  if (dim() == 1) return simd::kernels().max_abs(values_.data() + lo, hi - lo + 1);
  double m = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) m = std::max(m, node_norm(i));
  return m;
}

// [a, b] inside [t_min, t_max]: norms are convex along each linear piece, so
// the sup is attained at an endpoint or at an interior node.
double GridFunction::sup_data(double a, double b) const {
  double m = std::max(norm(eval(a), grid_.norm), norm(eval(b), grid_.norm));
  const std::size_t lo = grid_.first_node_at_or_after(a);
  const double ub = (b - grid_.t_min) / grid_.dt;
  const auto hi_raw = static_cast<std::ptrdiff_t>(std::floor(ub + kNodeTol));
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(hi_raw, static_cast<std::ptrdiff_t>(n_) - 1);
  if (hi >= static_cast<std::ptrdiff_t>(lo)) {
    m = std::max(m, sup_nodes(lo, static_cast<std::size_t>(hi)));
  }
  return m;
}

double GridFunction::sup_norm(double a, double b) const {
  if (!(a <= b)) throw ParameterError("sup_norm: empty interval");
  if (!(b <= grid_.t_max + kNodeTol * grid_.dt)) {
    throw OutOfRangeError("sup_norm: interval extends beyond t_max");
  }
  b = std::min(b, grid_.t_max);
  double m = 0.0;
  if (b >= grid_.t_min) m = sup_data(std::max(a, grid_.t_min), b);
  if (a < grid_.t_min) {
    const double ext_hi = std::min(b, grid_.t_min);
    if (ext_.kind == LeftExtension::Kind::constant) {
      m = std::max(m, node_norm(0));
    } else {
      const double T = ext_.period;
      const double len = ext_hi - a;
      if (len >= T) {
        m = std::max(m, sup_data(grid_.t_min, std::min(grid_.t_min + T, grid_.t_max)));
      } else {
        double a_shift = a + std::ceil((grid_.t_min - a) / T) * T;
        if (a_shift < grid_.t_min) a_shift += T;
        const double b_shift = a_shift + len;
        const double top = std::min(grid_.t_min + T, grid_.t_max);
        if (b_shift <= top) {
          m = std::max(m, sup_data(std::min(a_shift, top), std::min(b_shift, top)));
        } else {
          m = std::max(m, sup_data(std::min(a_shift, top), top));
          m = std::max(m, sup_data(grid_.t_min, std::min(b_shift - T, top)));
        }
      }
    }
  }
  return m;
}

double GridFunction::sup_norm() const { return n_ == 0 ? 0.0 : sup_nodes(0, n_ - 1); }

bool GridFunction::all_finite() const {
  return std::ranges::all_of(values_, [](double v) { return std::isfinite(v); });
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  if (!(grid_ == o.grid_)) throw ParameterError("grid mismatch in +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  if (!(grid_ == o.grid_)) throw ParameterError("grid mismatch in -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

void GridFunction::write_csv(std::ostream& os) const {
  std::string line = "t";
  for (std::size_t c = 0; c < dim(); ++c) line += fmt::format(",x{}", c + 1);
  os << line << '\n';
  for (std::size_t i = 0; i < n_; ++i) {
    line = fmt::format("{:.17g}", grid_.node_time(i));
    for (std::size_t c = 0; c < dim(); ++c) line += fmt::format(",{:.17g}", value(i, c));
    os << line << '\n';
  }
}

void GridFunction::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_csv(os);
}

GridFunction GridFunction::read_csv(std::istream& is, LeftExtension ext) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t", 0) != 0) {
    throw ParameterError("read_csv: missing `t,...` header");
  }
  const auto dim = static_cast<std::size_t>(std::ranges::count(line, ','));
  if (dim == 0) throw ParameterError("read_csv: no state columns");

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != dim + 1) throw ParameterError("read_csv: ragged row");
    times.push_back(row[0]);
    rows.emplace_back(row.begin() + 1, row.end());
  }
  if (times.size() < 2) throw ParameterError("read_csv: need at least two rows");
  GridSpec grid{times.front(), times.back(),
                (times.back() - times.front()) / static_cast<double>(times.size() - 1), dim};
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::fabs(times[i] - grid.node_time(i)) > 1e-6 * grid.dt) {
      throw ParameterError("read_csv: grid is not uniform");
    }
  }
  GridFunction f(grid, ext);
  for (std::size_t i = 0; i < rows.size(); ++i) f.set_node(i, rows[i]);
  return f;
}

double sup_distance(const GridFunction& a, const GridFunction& b, std::size_t first_node) {
  if (!(a.grid() == b.grid())) throw ParameterError("sup_distance: grid mismatch");
  const std::size_t n = a.size();
  if (first_node >= n) return 0.0;
  const std::size_t len = n - first_node;
  const auto& k = simd::kernels();
  if (a.dim() == 1) {
    return k.max_abs_diff(a.component(0).data() + first_node, b.component(0).data() + first_node,
                          len);
  }
  if (a.grid().norm == NormKind::max) {
    double m = 0.0;
    for (std::size_t c = 0; c < a.dim(); ++c) {
      m = std::max(m, k.max_abs_diff(a.component(c).data() + first_node,
                                     b.component(c).data() + first_node, len));
    }
    return m;
  }
  std::vector<double> acc(len, 0.0);
  for (std::size_t c = 0; c < a.dim(); ++c) {
    k.accumulate_sq_diff(a.component(c).data() + first_node, b.component(c).data() + first_node,
                         acc.data(), len);
  }
  return std::sqrt(std::max(0.0, k.max_value(acc.data(), len)));
}

double sup_distance_from(const GridFunction& a, const GridFunction& b, double t_from) {
  return sup_distance(a, b, a.grid().first_node_at_or_after(t_from));
}

}  // namespace yosida
