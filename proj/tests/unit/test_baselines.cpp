#include <cmath>

#include "doctest.h"
#include "mi2p/baselines.hpp"
#include "mi2p/errors.hpp"

using namespace mi2p;

namespace {

// All components equal <c, x>: finite differences are exact on linear f.
class LinearObjective final : public FiniteSumObjective {
 public:
  explicit LinearObjective(Point c) : c_(std::move(c)) {}
  std::size_t components() const override { return 3; }
  std::size_t dim() const override { return c_.size(); }
  double component_value(std::size_t, const Point& x) const override {
    return dot(c_, x);
  }
  void component_gradient(std::size_t, const Point&, Point& out) const override {
    out = c_;
  }

 private:
  Point c_;
};

}  // namespace

TEST_CASE("rsgf is exact on linear objectives") {
  const Point c{0.7, -1.3, 0.4};
  LinearObjective obj(c);
  SmoothingParams params;
  params.mu_fd = 0.05;
  params.step = 0.1;
  // Replay the stream to recover the sampled direction u.
  RngStream replay = RngStream::derive(3, 0, 0, StreamPurpose::Batch);
  const DirectionDistribution sphere{DirectionKind::UnitSphere, 3};
  const auto u = sample_direction(sphere, replay);
  RngStream rng = RngStream::derive(3, 0, 0, StreamPurpose::Batch);
  const Point x{1.0, 2.0, 3.0};
  const BaselineStep step =
      rsgf_step(x, obj, obj.components(), params, rng, /*full_enum=*/true);
  // g = <c, u> u exactly.
  const double cu = dot(c, u.vector);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(step.x[j] ==
          doctest::Approx(x[j] - params.step * cu * u.vector[j]).epsilon(1e-9));
  }
  CHECK(step.queries == 2 * obj.components());
}

TEST_CASE("rsgf slope arithmetic in one dimension") {
  // f(x) = x^2 via the half-quadratic with diagonal 2.
  RngStream ctor(1);
  QuadraticObjective obj(Point{2.0}, 0.0, 1, ctor);
  SmoothingParams params;
  params.mu_fd = 0.1;
  params.step = 1.0;
  // Find a stream whose d=1 sphere draw is +1.
  bool found = false;
  for (std::uint64_t seed = 0; seed < 32 && !found; ++seed) {
    RngStream replay = RngStream::derive(seed, 0, 0, StreamPurpose::Batch);
    const DirectionDistribution sphere{DirectionKind::UnitSphere, 1};
    if (sample_direction(sphere, replay).vector[0] > 0.0) {
      RngStream rng = RngStream::derive(seed, 0, 0, StreamPurpose::Batch);
      const BaselineStep step = rsgf_step(Point{1.0}, obj, 1, params, rng,
                                          /*full_enum=*/true);
      // g = ((1.21 - 1) / 0.1) = 2.1, so x <- 1 - 2.1.
      CHECK(step.x[0] == doctest::Approx(1.0 - 2.1).epsilon(1e-9));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("rsgf mean direction aligns with the gradient") {
  RngStream ctor(2);
  QuadraticObjective obj(Point(5, 1.0), 0.0, 4, ctor);
  SmoothingParams params;
  params.mu_fd = 1e-3;
  params.step = 1.0;
  RngStream xr(3);
  Point x(5, 0.0);
  for (double& v : x) v = xr.normal();
  Point grad(5, 0.0);
  obj.full_gradient(x, grad);
  Point mean_g(5, 0.0);
  const int reps = 100000;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng = RngStream::derive(5, rep, 0, StreamPurpose::Batch);
    const BaselineStep step = rsgf_step(x, obj, 4, params, rng, false);
    // Recover g from the applied displacement.
    for (std::size_t j = 0; j < 5; ++j) mean_g[j] += (x[j] - step.x[j]);
  }
  const double cosine =
      dot(mean_g, grad) / (norm2(mean_g) * norm2(grad));
  CHECK(cosine >= 0.99);
}

TEST_CASE("zocd recovers the gradient of quadratics to machine precision") {
  RngStream ctor(4);
  QuadraticObjective obj(Point{1.0, 1.0}, 0.0, 5, ctor);
  SmoothingParams params;
  params.mu_fd = 0.1;
  params.step = 1.0;
  RngStream rng(6);
  const Point x{1.0, 2.0};
  const BaselineStep step =
      zocd_step(x, obj, obj.components(), params, rng, /*full_enum=*/true);
  // Central differences are exact on quadratics: g = (1, 2).
  CHECK(step.x[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(step.x[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("zocd query cost is 2 b d") {
  RngStream ctor(7);
  QuadraticObjective obj(Point{1.0, 1.0}, 0.3, 64, ctor);
  SmoothingParams params;
  params.mu_fd = 0.1;
  params.step = 0.01;
  RngStream rng(8);
  const BaselineStep step = zocd_step(Point{1.0, 2.0}, obj, 5, params, rng);
  CHECK(step.queries == 2 * 5 * 2);
}

TEST_CASE("zocd error shrinks at second order on the logistic") {
  const std::vector<Point> rows = {{1.0, 0.5, -0.2}, {-0.3, 1.2, 0.7},
                                   {0.8, -0.7, 0.1}, {-1.1, -0.2, -0.9}};
  const std::vector<double> labels = {1, -1, 1, -1};
  const auto obj = make_logistic(rows, labels, 0.0);
  const Point x{0.4, -0.6, 0.2};
  Point grad(3, 0.0);
  obj->full_gradient(x, grad);
  auto error_at = [&](double mu) {
    SmoothingParams params;
    params.mu_fd = mu;
    params.step = 1.0;
    RngStream rng(9);
    const BaselineStep step =
        zocd_step(x, *obj, obj->components(), params, rng, true);
    Point g(3, 0.0);
    for (std::size_t j = 0; j < 3; ++j) g[j] = x[j] - step.x[j];
    axpy(-1.0, grad, g);
    return norm2(g);
  };
  const double ratio = error_at(0.2) / error_at(0.1);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.30));
}

TEST_CASE("baseline runs respect the query budget contract") {
  RngStream ctor(10);
  QuadraticObjective obj(Point(4, 1.0), 0.3, 32, ctor);
  SmoothingParams params;
  params.mu_fd = 0.01;
  params.step = 0.05;
  StopRule stop;
  stop.max_queries = 1000;
  RunOptions options;
  options.seed = 11;
  const auto trace_rsgf = run_baseline(BaselineKind::Rsgf, Point(4, 1.0), obj,
                                       5, params, stop, options);
  // Each iteration adds exactly 2b queries.
  for (std::size_t i = 1; i < trace_rsgf.size(); ++i) {
    CHECK(trace_rsgf[i].queries - trace_rsgf[i - 1].queries == 10);
  }
  CHECK(trace_rsgf.back().queries >= 1000);
  CHECK(trace_rsgf.back().queries < 1000 + 10);

  const auto trace_zocd = run_baseline(BaselineKind::Zocd, Point(4, 1.0), obj,
                                       5, params, stop, options);
  for (std::size_t i = 1; i < trace_zocd.size(); ++i) {
    CHECK(trace_zocd[i].queries - trace_zocd[i - 1].queries == 2 * 5 * 4);
  }
}

TEST_CASE("baseline parameter validation") {
  RngStream ctor(12);
  QuadraticObjective obj(Point{1.0}, 0.0, 1, ctor);
  RngStream rng(13);
  SmoothingParams bad;
  bad.mu_fd = 0.0;
  bad.step = 0.1;
  CHECK_THROWS_AS(rsgf_step(Point{0.0}, obj, 1, bad, rng), ConfigError);
  bad.mu_fd = 0.1;
  bad.step = 0.0;
  CHECK_THROWS_AS(zocd_step(Point{0.0}, obj, 1, bad, rng), ConfigError);
}
