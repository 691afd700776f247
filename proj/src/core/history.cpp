#include <algorithm>
#include <cmath>

#include "yosida/core.hpp"
#include "yosida/errors.hpp"

namespace yosida {

HistoryWindow HistoryWindow::finite(double r) {
  if (!(r > 0.0)) throw ParameterError("finite history window needs r > 0");
  return {Kind::finite, r};
}

HistoryWindow HistoryWindow::infinite(double truncation_depth) {
  if (!(truncation_depth > 0.0)) throw ParameterError("infinite history window needs R_hist > 0");
  return {Kind::infinite, truncation_depth};
}

HistorySegment::HistorySegment(const GridFunction& source, double anchor, HistoryWindow window)
    : source_(&source), anchor_(anchor), window_(window) {}

State HistorySegment::eval(double s) const {
  if (s > 0.0 || s < -window_.depth * (1.0 + 1e-12)) {
    throw OutOfRangeError("history segment evaluated outside its window");
  }
  return source_->eval(anchor_ + s);
}

double HistorySegment::eval_component(double s, std::size_t c) const {
  return source_->eval_component(anchor_ + s, c);
}

HistoryNorm HistorySegment::norm_report() const {
  const double lo = anchor_ - window_.depth;
  HistoryNorm out;
  out.value = source_->sup_norm(lo, anchor_);
  if (window_.kind == HistoryWindow::Kind::finite) return out;

  // Everything further back than the truncation depth that the source can
  // still represent.
  const auto& g = source_->grid();
  double remainder = 0.0;
  if (source_->extension().kind == LeftExtension::Kind::constant) {
    remainder = lo > g.t_min ? source_->sup_norm(g.t_min, lo) : 0.0;
  } else {
    const double T = source_->extension().period;
    remainder = source_->sup_norm(g.t_min, std::min(g.t_min + T, g.t_max));
    if (lo > g.t_min) remainder = std::max(remainder, source_->sup_norm(g.t_min, lo));
  }
  out.truncation_bound = std::max(0.0, remainder - out.value);
  return out;
}

double history_distance(const HistorySegment& a, const HistorySegment& b) {
  if (!(a.source().grid() == b.source().grid()) || !(a.window() == b.window())) {
    throw ParameterError("history_distance: incompatible segments");
  }
  // Same anchors: the difference is itself a grid function, so the exact
  // piecewise-linear sup applies.
  if (a.anchor() == b.anchor() && a.source().extension() == b.source().extension()) {
    GridFunction d = a.source() - b.source();
    return HistorySegment(d, a.anchor(), a.window()).norm();
  }
  // Different anchors: sample on the finer of the two lattices.
  const auto& g = a.source().grid();
  const double depth = a.window().depth;
  const auto steps = static_cast<std::size_t>(std::ceil(depth / g.dt));
  double m = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double s = -std::min(depth, static_cast<double>(k) * g.dt);
    m = std::max(m, distance(a.eval(s), b.eval(s), g.norm));
  }
  return m;
}

}  // namespace yosida
