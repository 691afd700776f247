#include <algorithm>
#include <cmath>

#include "yosida/errors.hpp"
#include "yosida/operators.hpp"

namespace yosida {

Forcing Forcing::constant(double c) {
  Forcing f;
  if (c != 0.0) f.add({Term::Kind::constant, c, 0.0, 0.0});
  return f;
}

Forcing Forcing::cosine(double amplitude, double frequency, double phase) {
  Forcing f;
  f.add({Term::Kind::cos, amplitude, frequency, phase});
  return f;
}

Forcing Forcing::sine(double amplitude, double frequency, double phase) {
  Forcing f;
  f.add({Term::Kind::sin, amplitude, frequency, phase});
  return f;
}

Forcing Forcing::table(std::vector<double> t, std::vector<double> x) {
  if (t.size() != x.size() || t.size() < 2) {
    throw ParameterError("forcing table needs matching t/x columns with >= 2 rows");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw ParameterError("forcing table times must increase");
  }
  Forcing f;
  f.table_t_ = std::move(t);
  f.table_x_ = std::move(x);
  return f;
}

Forcing& Forcing::add(Term term) {
  terms_.push_back(term);
  return *this;
}

Forcing Forcing::operator+(const Forcing& o) const {
  if (!table_t_.empty() && !o.table_t_.empty()) {
    throw ParameterError("cannot add two tabulated forcings");
  }
  Forcing r = *this;
  for (const auto& t : o.terms_) r.terms_.push_back(t);
  if (r.table_t_.empty()) {
    r.table_t_ = o.table_t_;
    r.table_x_ = o.table_x_;
  }
  return r;
}

Forcing Forcing::scaled(double s) const {
  Forcing r = *this;
  for (auto& t : r.terms_) t.amplitude *= s;
  for (auto& x : r.table_x_) x *= s;
  return r;
}

double Forcing::operator()(double t) const {
  double v = 0.0;
  for (const auto& term : terms_) {
    switch (term.kind) {
      case Term::Kind::constant:
        v += term.amplitude;
        break;
      case Term::Kind::sin:
        v += term.amplitude * std::sin(term.frequency * t + term.phase);
        break;
      case Term::Kind::cos:
        v += term.amplitude * std::cos(term.frequency * t + term.phase);
        break;
    }
  }
  if (!table_t_.empty()) {
    if (t <= table_t_.front()) {
      v += table_x_.front();
    } else if (t >= table_t_.back()) {
      v += table_x_.back();
    } else {
      const auto it = std::ranges::upper_bound(table_t_, t);
      const auto i = static_cast<std::size_t>(it - table_t_.begin()) - 1;
      const double frac = (t - table_t_[i]) / (table_t_[i + 1] - table_t_[i]);
      v += table_x_[i] + frac * (table_x_[i + 1] - table_x_[i]);
    }
  }
  return v;
}

double Forcing::lipschitz() const {
  double l = 0.0;
  for (const auto& term : terms_) {
    if (term.kind != Term::Kind::constant) l += std::fabs(term.amplitude * term.frequency);
  }
  double slope = 0.0;
  for (std::size_t i = 1; i < table_t_.size(); ++i) {
    slope = std::max(slope, std::fabs(table_x_[i] - table_x_[i - 1]) / (table_t_[i] - table_t_[i - 1]));
  }
  return l + slope;
}

double Forcing::bound() const {
  double b = 0.0;
  for (const auto& term : terms_) b += std::fabs(term.amplitude);
  double tb = 0.0;
  for (double x : table_x_) tb = std::max(tb, std::fabs(x));
  return b + tb;
}

double Forcing::lower_bound() const {
  double lb = 0.0;
  for (const auto& term : terms_) {
    lb += term.kind == Term::Kind::constant ? term.amplitude : -std::fabs(term.amplitude);
  }
  if (!table_x_.empty()) lb += *std::ranges::min_element(table_x_);
  return lb;
}

bool Forcing::is_zero() const {
  return std::ranges::all_of(terms_, [](const Term& t) { return t.amplitude == 0.0; }) &&
         std::ranges::all_of(table_x_, [](double x) { return x == 0.0; });
}

State eval(const VectorForcing& f, double t) {
  State x(f.size());
  for (std::size_t c = 0; c < f.size(); ++c) x[c] = f[c](t);
  return x;
}

double lipschitz(const VectorForcing& f) {
  double s = 0.0;
  for (const auto& fc : f) s += fc.lipschitz() * fc.lipschitz();
  return std::sqrt(s);
}

}  // namespace yosida
