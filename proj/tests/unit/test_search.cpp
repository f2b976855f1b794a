#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "mi2p/errors.hpp"
#include "mi2p/search.hpp"

using namespace mi2p;

namespace {

// Test-only reference: deterministic three-point direct search (keeps the
// best of {x - eta s, x, x + eta s} on exact values).
Point stp_reference(const QuadraticObjective& obj, Point x, double eta,
                    std::size_t iters, std::uint64_t seed) {
  const DirectionDistribution sphere{DirectionKind::UnitSphere, obj.dim()};
  for (std::size_t t = 0; t < iters; ++t) {
    RngStream rng = RngStream::derive(seed, 0, t, StreamPurpose::Direction);
    const auto s = sample_direction(sphere, rng);
    const Point xp = added(x, eta, s.vector);
    const Point xm = added(x, -eta, s.vector);
    const double f0 = obj.full_value(x);
    const double fp = obj.full_value(xp);
    const double fm = obj.full_value(xm);
    if (fp <= f0 && fp <= fm) {
      x = xp;
    } else if (fm <= f0) {
      x = xm;
    }
  }
  return x;
}

// f + c objective wrapper for the scale-equivariance property.
class ShiftedObjective final : public FiniteSumObjective {
 public:
  ShiftedObjective(const FiniteSumObjective& base, double shift)
      : base_(base), shift_(shift) {}
  std::size_t components() const override { return base_.components(); }
  std::size_t dim() const override { return base_.dim(); }
  double component_value(std::size_t i, const Point& x) const override {
    return base_.component_value(i, x) + shift_;
  }
  void component_gradient(std::size_t i, const Point& x,
                          Point& out) const override {
    base_.component_gradient(i, x, out);
  }

 private:
  const FiniteSumObjective& base_;
  double shift_;
};

}  // namespace

TEST_CASE("srs_step follows the sign rule") {
  // M+ = 0.5 < M- = 1.0: sign(-0.5) = -1, so the step is +eta s.
  // Realized with a one-component objective whose value is lower at x+.
  class TiltedObjective final : public FiniteSumObjective {
   public:
    std::size_t components() const override { return 1; }
    std::size_t dim() const override { return 1; }
    double component_value(std::size_t, const Point& x) const override {
      return x[0] > 0.0 ? 0.5 : 1.0;
    }
    void component_gradient(std::size_t, const Point&,
                            Point& out) const override {
      out.assign(1, 0.0);
    }
  } obj;
  const DirectionDistribution coord{DirectionKind::SignedCoordinate, 1};
  ExactEstimator estimator;
  RunOptions options;
  options.seed = 5;
  SearchState state = init_search_state(Point{0.0}, 0.25, obj, options);
  srs_step(state, coord, estimator, obj, options);
  // s = +-e1; either way the accepted point has x > 0 (value 0.5).
  CHECK(state.x[0] != 0.0);
  CHECK(obj.full_value(state.x) == 0.5);
  CHECK(state.t == 1);
  CHECK(state.trace.size() == 2);
}

TEST_CASE("srs_step on the exact quadratic moves downhill") {
  // f(x) = ||x||^2 via diagonal (2, 2). At x = (1, 0) with s = e1 and
  // eta = 0.1: f(x+) = 1.21 > f(x-) = 0.81, so the update is x - eta s.
  RngStream ctor(1);
  QuadraticObjective obj(Point{2.0, 2.0}, 0.0, 2, ctor);
  const Point x{1.0, 0.0};
  const Point s{1.0, 0.0};
  const double eta = 0.1;
  const Point xp = added(x, eta, s);
  const Point xm = added(x, -eta, s);
  CHECK(obj.full_value(xp) == doctest::Approx(1.21));
  CHECK(obj.full_value(xm) == doctest::Approx(0.81));
  const int sign = obj.full_value(xp) - obj.full_value(xm) >= 0 ? +1 : -1;
  const Point x1 = added(x, -eta * sign, s);
  CHECK(x1[0] == doctest::Approx(0.9));
  CHECK(x1[1] == 0.0);
}

TEST_CASE("ties move to the minus point") {
  // Constant objective: M+ = M- always, sign(0) := +1.
  class ConstantObjective final : public FiniteSumObjective {
   public:
    std::size_t components() const override { return 1; }
    std::size_t dim() const override { return 2; }
    double component_value(std::size_t, const Point&) const override {
      return 3.0;
    }
    void component_gradient(std::size_t, const Point&,
                            Point& out) const override {
      out.assign(2, 0.0);
    }
  } obj;
  const DirectionDistribution sphere{DirectionKind::UnitSphere, 2};
  ExactEstimator estimator;
  RunOptions options;
  options.seed = 6;
  SearchState state = init_search_state(zeros(2), 0.5, obj, options);
  RngStream dir_rng = RngStream::derive(6, 0, 0, StreamPurpose::Direction);
  const auto s = sample_direction(sphere, dir_rng);
  srs_step(state, sphere, estimator, obj, options);
  CHECK(state.trace.back().step_sign == +1);
  const Point expected = added(zeros(2), -0.5, s.vector);
  CHECK(state.x == expected);
}

TEST_CASE("non-finite estimates abort with a numerical error") {
  class OverflowingObjective final : public FiniteSumObjective {
   public:
    std::size_t components() const override { return 1; }
    std::size_t dim() const override { return 2; }
    double component_value(std::size_t, const Point& x) const override {
      return dot(x, x) == 0.0 ? 0.0
                              : std::numeric_limits<double>::infinity();
    }
    void component_gradient(std::size_t, const Point&,
                            Point& out) const override {
      out.assign(2, 0.0);
    }
  } obj;
  const DirectionDistribution sphere{DirectionKind::UnitSphere, 2};
  ExactEstimator estimator;
  RunOptions options;
  options.seed = 99;
  SearchState state = init_search_state(zeros(2), 0.1, obj, options);
  CHECK_THROWS_AS(srs_step(state, sphere, estimator, obj, options),
                  NumericalError);
}

TEST_CASE("run with T=0 returns only the initial record") {
  RngStream ctor(2);
  QuadraticObjective obj(Point{1.0, 1.0}, 0.0, 2, ctor);
  const DirectionDistribution sphere{DirectionKind::UnitSphere, 2};
  ExactEstimator estimator;
  Plan plan;
  plan.eta = 0.1;
  plan.iterations = 0;
  const auto trace = run_search(Point{1.0, 1.0}, plan, sphere, estimator, obj,
                                StopRule{}, RunOptions{});
  REQUIRE(trace.size() == 1);
  CHECK(trace.front().f_true == doctest::Approx(1.0));
  CHECK(trace.front().queries == 0);
}

TEST_CASE("exact-estimator run reaches 1% of the initial value") {
  RngStream ctor(3);
  QuadraticObjective obj(Point{1.0, 1.0}, 0.0, 2, ctor);
  const DirectionDistribution sphere{DirectionKind::UnitSphere, 2};
  ExactEstimator estimator;
  Plan plan;
  plan.eta = 0.05;
  plan.iterations = 2000;
  RunOptions options;
  options.seed = 7;
  const Point x0{1.0, 1.0};
  const double f0 = obj.full_value(x0);
  const auto trace =
      run_search(x0, plan, sphere, estimator, obj, StopRule{}, options);
  CHECK(trace.size() == 2001);
  CHECK(trace.back().f_true <= 0.01 * f0);
  // Independent reference: the three-point method reaches the same region.
  const Point stp = stp_reference(obj, x0, 0.05, 2000, 8);
  CHECK(obj.full_value(stp) <= 0.01 * f0);
}

TEST_CASE("identical seeds produce bit-identical traces") {
  RngStream ctor(4);
  QuadraticObjective obj(Point(4, 1.0), 0.3, 32, ctor);
  const DirectionDistribution sphere{DirectionKind::UnitSphere, 4};
  Plan plan;
  plan.eta = 0.05;
  plan.iterations = 200;
  RunOptions options;
  options.seed = 11;
  options.trial = 2;
  MinibatchEstimator est_a(4), est_b(4);
  const auto trace_a = run_search(Point(4, 1.0), plan, sphere, est_a, obj,
                                  StopRule{}, options);
  const auto trace_b = run_search(Point(4, 1.0), plan, sphere, est_b, obj,
                                  StopRule{}, options);
  REQUIRE(trace_a.size() == trace_b.size());
  for (std::size_t i = 0; i < trace_a.size(); ++i) {
    CHECK(trace_a[i].f_true == trace_b[i].f_true);
    CHECK(trace_a[i].queries == trace_b[i].queries);
    CHECK(trace_a[i].step_sign == trace_b[i].step_sign);
  }
}

TEST_CASE("every step moves exactly eta") {
  RngStream ctor(5);
  QuadraticObjective obj(Point(3, 1.0), 0.0, 2, ctor);
  const DirectionDistribution sphere{DirectionKind::UnitSphere, 3};
  ExactEstimator estimator;
  RunOptions options;
  options.seed = 12;
  SearchState state = init_search_state(Point(3, 1.0), 0.07, obj, options);
  Point prev = state.x;
  for (int t = 0; t < 50; ++t) {
    srs_step(state, sphere, estimator, obj, options);
    Point diff = state.x;
    axpy(-1.0, prev, diff);
    CHECK(norm2(diff) == doctest::Approx(0.07).epsilon(1e-12));
    prev = state.x;
  }
}

TEST_CASE("adding a constant to the objective leaves the trajectory unchanged") {
  RngStream ctor(6);
  QuadraticObjective base(Point(4, 1.0), 0.4, 32, ctor);
  ShiftedObjective shifted(base, 2.5);
  const DirectionDistribution sphere{DirectionKind::UnitSphere, 4};
  Plan plan;
  plan.eta = 0.05;
  plan.iterations = 300;
  RunOptions options;
  options.seed = 13;
  MinibatchEstimator est_a(4), est_b(4);
  const auto trace_a = run_search(Point(4, 1.0), plan, sphere, est_a, base,
                                  StopRule{}, options);
  const auto trace_b = run_search(Point(4, 1.0), plan, sphere, est_b, shifted,
                                  StopRule{}, options);
  REQUIRE(trace_a.size() == trace_b.size());
  for (std::size_t i = 0; i < trace_a.size(); ++i) {
    CHECK(trace_a[i].step_sign == trace_b[i].step_sign);
    CHECK(trace_a[i].f_true + 2.5 ==
          doctest::Approx(trace_b[i].f_true).epsilon(1e-12));
  }
}

TEST_CASE("helper with delta=0 reproduces the exact trajectory bit for bit") {
  RngStream ctor(7);
  QuadraticObjective obj(Point(5, 1.0), 0.0, 8, ctor);
  const DirectionDistribution sphere{DirectionKind::UnitSphere, 5};
  Plan plan;
  plan.eta = 0.05;
  plan.iterations = 500;
  RunOptions options;
  options.seed = 14;
  ExactEstimator exact;
  HelperEstimator helper(HelperSpec{0.0, HelperMode::AdditiveUniform});
  const auto trace_a = run_search(Point(5, 1.0), plan, sphere, exact, obj,
                                  StopRule{}, options);
  const auto trace_b = run_search(Point(5, 1.0), plan, sphere, helper, obj,
                                  StopRule{}, options);
  REQUIRE(trace_a.size() == trace_b.size());
  for (std::size_t i = 0; i < trace_a.size(); ++i) {
    CHECK(trace_a[i].f_true == trace_b[i].f_true);
    CHECK(trace_a[i].step_sign == trace_b[i].step_sign);
  }
}

TEST_CASE("one-step expected descent obeys the lemma bound") {
  RngStream ctor(8);
  QuadraticObjective obj(Point(10, 1.0), 0.0, 8, ctor);
  const DirectionDistribution sphere{DirectionKind::UnitSphere, 10};
  const double eta = 0.01;
  RngStream mu_rng(15);
  Point e1(10, 0.0);
  e1[0] = 1.0;
  const double mu = estimate_mu(sphere, e1, 100000, mu_rng);
  RngStream xr(16);
  Point x(10, 0.0);
  for (double& v : x) v = xr.normal();
  Point grad(10, 0.0);
  obj.full_gradient(x, grad);
  const double fx = obj.full_value(x);
  const int reps = 10000;
  double acc = 0.0, acc_sq = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng = RngStream::derive(17, rep, 0, StreamPurpose::Direction);
    const auto s = sample_direction(sphere, rng);
    const double fp = obj.full_value(added(x, eta, s.vector));
    const double fm = obj.full_value(added(x, -eta, s.vector));
    const double f1 = fp - fm >= 0 ? fm : fp;
    acc += f1 - fx;
    acc_sq += (f1 - fx) * (f1 - fx);
  }
  const double mean = acc / reps;
  const double sd = std::sqrt(std::max(0.0, acc_sq / reps - mean * mean));
  const double se = sd / std::sqrt(static_cast<double>(reps));
  const double bound = -0.5 * mu * eta * norm2(grad) + 0.5 * 1.0 * eta * eta;
  CHECK(mean <= bound + 3.0 * se);
}

TEST_CASE("planner: helper regime drops the delta term at delta=0") {
  TheoryConstants c;
  c.dim = 30;
  c.l0 = 1.0;
  c.l1 = 2.0;
  c.f0 = 1.0;
  c.mu_d = mu_fallback(30);
  const Plan with_delta = plan_parameters(PlanRegime::Helper, c, 0.1, 0, 1e-6);
  const Plan without = plan_parameters(PlanRegime::Helper, c, 0.1, 0, 0.0);
  // With a tiny positive delta the sqrt(2 delta / L0) candidate binds.
  CHECK(with_delta.eta == doctest::Approx(std::sqrt(2e-6)));
  const double t = static_cast<double>(without.iterations);
  const double expected =
      std::min(c.mu_d / c.l1, std::sqrt(c.f0 / (c.l0 * t)));
  CHECK(without.eta == doctest::Approx(expected));
}

TEST_CASE("planner: finite-sum epoch formula") {
  TheoryConstants c;
  c.dim = 30;
  c.l0 = 1.0;
  c.l1 = 0.5;
  c.g = 1.0;
  c.f0 = 1.0;
  c.mu_d = mu_fallback(30);
  const Plan plan = plan_parameters(PlanRegime::FiniteSumVR, c, 0.1, 1000000);
  // kappa = n eps^2 / (d G^2) = 1e6 * 0.01 / 30 = 333.3...,
  // m* = min(kappa^(1/3), kappa^(1/2)) = 6.93..., floored to 6.
  CHECK(plan.epoch_len == 6);
  CHECK(plan.batch ==
        static_cast<std::uint64_t>(
            std::ceil(30.0 * 36.0 * 1.0 / 0.01)));
  CHECK(plan.calls_estimate ==
        doctest::Approx(vr_calls(plan.iterations, 6, plan.batch, 1000000)));
}

TEST_CASE("planner: closed-form epoch is near the brute-force optimum") {
  RngStream rng(18);
  for (int rep = 0; rep < 20; ++rep) {
    TheoryConstants c;
    c.dim = 2 + rng.uniform_index(199);
    c.l0 = rng.uniform(0.1, 5.0);
    c.l1 = rng.uniform(0.0, 2.0);
    c.g = rng.uniform(0.1, 5.0);
    c.f0 = rng.uniform(0.1, 10.0);
    c.mu_d = mu_fallback(c.dim);
    const std::size_t n =
        static_cast<std::size_t>(1e4 + rng.uniform() * 1e7);
    const double eps = rng.uniform(0.05, 0.5);
    Plan plan;
    try {
      plan = plan_parameters(PlanRegime::FiniteSumVR, c, eps, n);
    } catch (const ConfigError&) {
      continue;
    }
    // Brute force over feasible integer m.
    double best = -1.0;
    for (std::uint64_t m = 1; m <= 1000; ++m) {
      const double b = vr_batch_for_epoch(m, c, eps);
      if (b > static_cast<double>(n) && m > 1) break;
      const double calls = vr_calls(
          plan.iterations, m,
          static_cast<std::uint64_t>(std::max(
              1.0, std::ceil(std::min(b, static_cast<double>(n))))),
          n);
      if (best < 0.0 || calls < best) best = calls;
    }
    CHECK(plan.calls_estimate <= 2.0 * best + 1e-9);
  }
}

TEST_CASE("planner caps are enforced across regimes") {
  RngStream rng(19);
  for (int rep = 0; rep < 50; ++rep) {
    TheoryConstants c;
    c.dim = 2 + rng.uniform_index(63);
    c.l0 = rng.uniform(0.01, 4.0);
    c.l1 = rng.uniform(0.01, 4.0);
    c.g = rng.uniform(0.1, 4.0);
    c.sigma0 = rng.uniform(0.0, 2.0);
    c.sigma1 = rng.uniform(0.01, 2.0);
    c.f0 = rng.uniform(0.1, 5.0);
    c.mu_d = mu_fallback(c.dim);
    const double eps = rng.uniform(0.05, 0.5);
    const double delta = rng.uniform(0.0, 0.01);

    const Plan avg = plan_parameters(PlanRegime::AvgSmooth, c, eps, 0);
    CHECK(avg.eta <= c.mu_d / c.l1 + 1e-12);

    const Plan sample = plan_parameters(PlanRegime::SampleSmooth, c, eps, 0);
    CHECK(sample.eta <= c.mu_d / (5.0 * c.l1) + 1e-12);
    CHECK(sample.eta <=
          c.mu_d * std::sqrt(static_cast<double>(sample.batch)) /
                  (32.0 * std::sqrt(2.0) * c.l1) +
              1e-12);

    const Plan vr = plan_parameters(PlanRegime::FiniteSumVR, c, eps, 100000);
    CHECK(vr.eta <= c.mu_d / (5.0 * c.l1) + 1e-12);

    const Plan helper = plan_parameters(PlanRegime::Helper, c, eps, 0, delta);
    CHECK(helper.eta <= c.mu_d / c.l1 + 1e-12);
  }
}

TEST_CASE("planner rejects nonpositive epsilon") {
  TheoryConstants c;
  c.dim = 4;
  c.l0 = 1.0;
  c.mu_d = 0.5;
  c.f0 = 1.0;
  CHECK_THROWS_AS(plan_parameters(PlanRegime::AvgSmooth, c, 0.0, 0),
                  ConfigError);
  CHECK_THROWS_AS(plan_parameters(PlanRegime::AvgSmooth, c, -1.0, 0),
                  ConfigError);
}

TEST_CASE("planner falls back when b(m) exceeds n") {
  TheoryConstants c;
  c.dim = 100;
  c.l0 = 1.0;
  c.l1 = 0.0;
  c.g = 10.0;
  c.f0 = 1.0;
  c.mu_d = mu_fallback(100);
  // kappa = n eps^2 / (d G^2) tiny: no feasible m.
  const Plan plan = plan_parameters(PlanRegime::FiniteSumVR, c, 0.01, 100);
  CHECK(plan.epoch_len == 1);
  CHECK(plan.batch == 100);
  bool noted = false;
  for (const auto& note : plan.notes) {
    if (note.find("m=1") != std::string::npos) noted = true;
  }
  CHECK(noted);
}
