#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "yosida/checks.hpp"
#include "yosida/operators.hpp"

using namespace yosida;
using testing::Gen;

namespace {
constexpr double pi = std::numbers::pi;

SamplerConfig samples(std::size_t n, std::uint64_t seed = 1) {
  SamplerConfig c;
  c.n_samples = n;
  c.seed = seed;
  return c;
}

std::vector<std::shared_ptr<Operator>> admitted() {
  ComponentLaw l1, l2;
  l1.a = -1.0;
  l1.b = 0.3;
  l1.h = Forcing::cosine();
  l2.a = -0.5;
  l2.gamma = 1.0;
  l2.c = 0.2;
  l2.b = 0.2;
  l2.h = Forcing::sine(1.5);
  return {catalog::linear_scalar(-1.0, 0.5, -1.0),
          catalog::affine_forced(-2.0, Forcing::cosine(), -1.0),
          catalog::delay_linear(-1.0, 0.5, pi, Forcing::cosine(), -1.0),
          catalog::delay_cubic(-1.0, 0.4, 1.0, Forcing::sine(2.0), -1.0),
          catalog::delay_distributed(-1.0, 0.5, 2.0, Forcing::cosine(), -1.0),
          catalog::shrinkage_multivalued(0.5, -1.0, -1.0, Forcing::cosine(2.0)),
          catalog::modulated_linear(-1.0, 0.3, 2.0, Forcing::cosine(), -1.0),
          catalog::diagonal_system({l1, l2}, HistoryCoupling::point, 2.0, -1.0)};
}
}  // namespace

TEST_CASE("admitted catalog operators pass all samplers") {
  for (const auto& op : admitted()) {
    CAPTURE(op->name());
    const auto d = check_dissipativity(*op, samples(2000));
    const auto c = check_control_inequality(*op, samples(2000, 2));
    const auto h = history_lipschitz_check(*op, samples(2000, 3));
    CHECK(d.passed());
    CHECK(c.passed());
    CHECK(h.passed());
    CHECK(d.samples == 2000);
    CHECK_FALSE(d.vacuous);
  }
}

TEST_CASE("expansive operator fails dissipativity") {
  auto op = catalog::expansive_control(1.0, -1.0);
  const auto r = check_dissipativity(*op, samples(1000));
  CHECK_FALSE(r.passed());
  CHECK(r.violations >= 1);
}

TEST_CASE("under-declared K0 is caught") {
  auto op = catalog::delay_linear(-1.0, 0.5, 1.0, Forcing::cosine(), -1.0);
  op->mutable_constants().K0 = 0.0;
  CHECK_FALSE(check_control_inequality(*op, samples(2000)).passed());
  CHECK_FALSE(history_lipschitz_check(*op, samples(2000)).passed());
  CHECK(check_dissipativity(*op, samples(2000)).passed());
}

TEST_CASE("zero samples give a flagged vacuous pass") {
  auto op = catalog::expansive_control(1.0, -1.0);
  const auto r = check_dissipativity(*op, samples(0));
  CHECK(r.passed());
  CHECK(r.vacuous);
  CHECK(r.summary().find("vacuous") != std::string::npos);
}

TEST_CASE("history bound of the benchmark") {
  auto op = catalog::delay_linear(-1.0, 0.5, pi, Forcing::cosine(), -1.0);
  const auto r = history_lipschitz_check(*op, samples(3000));
  CHECK(r.passed());
  // Empirical K never exceeds K0 = 0.5.
  CHECK(r.max_ratio <= 0.5 + 1e-12);
  CHECK(r.max_ratio > 0.4);
  auto free = catalog::affine_forced(-1.0, Forcing::cosine(), -1.0);
  CHECK(history_lipschitz_check(*free, samples(500)).max_ratio == 0.0);
}

TEST_CASE("benchmark control inequality by hand") {
  // |x1 - x2 - l(y1 - y2)| >= (1 + l)|x1 - x2| - 0.5 l |phi1 - phi2| - l |cos t1 - cos t2|
  // with y_i = A(t_i, phi_i) x_i; checked on independent samples.
  Gen g(17);
  auto op = catalog::delay_linear(-1.0, 0.5, pi, Forcing::cosine(), -1.0);
  const GridSpec gs{-40, 40, 0.01, 1};
  for (int k = 0; k < 500; ++k) {
    auto p1 = GridFunction::sample_scalar(gs, testing::random_trig(g));
    auto p2 = GridFunction::sample_scalar(gs, testing::random_trig(g));
    const double t1 = g.uniform(-30, 40), t2 = g.uniform(-30, 40), lam = g.log_uniform(1e-3, 10);
    const double x1 = g.uniform(-3, 3), x2 = g.uniform(-3, 3);
    const HistorySegment s1(p1, t1, op->constants().window), s2(p2, t2, op->constants().window);
    State y1(1), y2(1);
    op->evaluate(t1, s1, State{x1}, y1);
    op->evaluate(t2, s2, State{x2}, y2);
    const double lhs = std::fabs(x1 - x2 - lam * (y1[0] - y2[0]));
    const double rhs = (1 + lam) * std::fabs(x1 - x2) - 0.5 * lam * history_distance(s1, s2) -
                       lam * std::fabs(std::cos(t1) - std::cos(t2));
    CHECK(lhs >= rhs - 1e-12);
  }
}
