#include <cmath>
#include <vector>

#include "doctest.h"
#include "mi2p/directions.hpp"
#include "mi2p/errors.hpp"

using namespace mi2p;

namespace {

// Quadrature oracle for E|cos(theta)|, theta uniform on the circle.
double circle_abs_cos() {
  const int steps = 200000;
  double acc = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double theta =
        (static_cast<double>(k) + 0.5) / steps * 2.0 * M_PI;
    acc += std::abs(std::cos(theta));
  }
  return acc / steps;
}

}  // namespace

TEST_CASE("unit sphere samples have norm one") {
  const auto dist = make_distribution(DirectionKind::UnitSphere, 30);
  RngStream rng(1);
  for (int k = 0; k < 100; ++k) {
    const auto s = sample_direction(dist, rng);
    CHECK(std::abs(norm2(s.vector) - 1.0) < 1e-12);
  }
}

TEST_CASE("signed coordinate samples are +-e_i") {
  const auto dist = make_distribution(DirectionKind::SignedCoordinate, 4);
  RngStream rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto s = sample_direction(dist, rng);
    int nonzero = 0;
    for (double v : s.vector) {
      if (v != 0.0) {
        ++nonzero;
        CHECK((v == 1.0 || v == -1.0));
      }
    }
    CHECK(nonzero == 1);
  }
}

TEST_CASE("normalized gaussian has unit second moment") {
  const auto dist = make_distribution(DirectionKind::NormalizedGaussian, 8);
  RngStream rng(3);
  double acc = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const auto s = sample_direction(dist, rng);
    acc += dot(s.vector, s.vector);
  }
  CHECK(acc / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("E||s||^2 = 1 for all three distributions") {
  RngStream rng(4);
  for (auto kind : {DirectionKind::UnitSphere, DirectionKind::NormalizedGaussian,
                    DirectionKind::SignedCoordinate}) {
    const auto dist = make_distribution(kind, 16);
    double acc = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
      const auto s = sample_direction(dist, rng);
      acc += dot(s.vector, s.vector);
    }
    CHECK(acc / n == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("estimate_mu is exactly 1 in dimension 1") {
  const auto dist = make_distribution(DirectionKind::UnitSphere, 1);
  RngStream rng(5);
  const double mu = estimate_mu(dist, Point{2.5}, 1000, rng);
  CHECK(mu == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("estimate_mu matches the circle quadrature at d=2") {
  const auto dist = make_distribution(DirectionKind::UnitSphere, 2);
  RngStream rng(6);
  const double mu = estimate_mu(dist, Point{1.0, 0.0}, 1000000, rng);
  const double oracle = circle_abs_cos();  // = 2/pi
  CHECK(oracle == doctest::Approx(2.0 / M_PI).epsilon(1e-6));
  CHECK(mu == doctest::Approx(oracle).epsilon(0.008));
}

TEST_CASE("estimate_mu at d=30 follows the c/sqrt(d) extrapolation") {
  RngStream rng(7);
  const std::size_t samples = 200000;
  const auto mu_at = [&](std::size_t d) {
    const auto dist = make_distribution(DirectionKind::UnitSphere, d);
    Point g(d, 0.0);
    g[0] = 1.0;
    return estimate_mu(dist, g, samples, rng);
  };
  const double c_fit = 0.5 * (mu_at(2) * std::sqrt(2.0) +
                              mu_at(8) * std::sqrt(8.0));
  const double predicted = c_fit / std::sqrt(30.0);
  const double measured = mu_at(30);
  CHECK(measured == doctest::Approx(predicted).epsilon(0.10));
}

TEST_CASE("estimate_mu * sqrt(d) is flat across dimensions") {
  RngStream rng(8);
  std::vector<double> scaled;
  for (std::size_t d : {2, 8, 32, 128}) {
    const auto dist = make_distribution(DirectionKind::UnitSphere, d);
    Point g(d, 0.0);
    g[0] = 1.0;
    scaled.push_back(estimate_mu(dist, g, 100000, rng) *
                     std::sqrt(static_cast<double>(d)));
  }
  double mean = 0.0;
  for (double v : scaled) mean += v;
  mean /= scaled.size();
  for (double v : scaled) CHECK(std::abs(v - mean) / mean < 0.10);
}

TEST_CASE("estimate_mu is isotropic on the sphere") {
  const std::size_t d = 8;
  const auto dist = make_distribution(DirectionKind::UnitSphere, d);
  const std::size_t samples = 40000;
  // Five random g; estimates must agree within 3 empirical standard errors
  // of the pairwise difference.
  std::vector<double> mus, ses;
  RngStream grng(9);
  for (int rep = 0; rep < 5; ++rep) {
    Point g(d, 0.0);
    for (double& v : g) v = grng.normal();
    const double gn = norm2(g);
    RngStream rng(100 + rep);
    double acc = 0.0, acc_sq = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const auto s = sample_direction(dist, rng);
      const double p = std::abs(dot(g, s.vector)) / gn;
      acc += p;
      acc_sq += p * p;
    }
    const double mean = acc / static_cast<double>(samples);
    const double var = acc_sq / static_cast<double>(samples) - mean * mean;
    mus.push_back(mean);
    ses.push_back(std::sqrt(var / static_cast<double>(samples)));
  }
  for (std::size_t i = 0; i < mus.size(); ++i) {
    for (std::size_t j = i + 1; j < mus.size(); ++j) {
      const double diff_se =
          std::sqrt(ses[i] * ses[i] + ses[j] * ses[j]);
      CHECK(std::abs(mus[i] - mus[j]) <= 3.0 * diff_se);
    }
  }
}

TEST_CASE("second moment of sphere projections is ||v||^2 / d") {
  RngStream rng(10);
  {
    const auto dist = make_distribution(DirectionKind::UnitSphere, 3);
    const double m = second_moment_projection(dist, Point{1, 0, 0}, 1000000, rng);
    CHECK(m == doctest::Approx(1.0 / 3.0).epsilon(0.01));
  }
  {
    const auto dist = make_distribution(DirectionKind::UnitSphere, 2);
    const double m = second_moment_projection(dist, Point{3, 4}, 1000000, rng);
    CHECK(m == doctest::Approx(12.5).epsilon(0.016));
  }
  {
    const auto dist = make_distribution(DirectionKind::UnitSphere, 5);
    const double m = second_moment_projection(dist, Point(5, 0.0), 100, rng);
    CHECK(m == 0.0);
  }
}

TEST_CASE("direction errors") {
  CHECK_THROWS_AS(make_distribution(DirectionKind::UnitSphere, 0), ConfigError);
  RngStream rng(11);
  const auto dist = make_distribution(DirectionKind::UnitSphere, 3);
  CHECK_THROWS_AS(estimate_mu(dist, Point{0, 0, 0}, 10, rng), ConfigError);
  CHECK_THROWS_AS(estimate_mu(dist, Point{1, 0, 0}, 0, rng), ConfigError);
}

TEST_CASE("sampling is deterministic given the stream") {
  const auto dist = make_distribution(DirectionKind::UnitSphere, 6);
  RngStream a = RngStream::derive(42, 3, 17, StreamPurpose::Direction);
  RngStream b = RngStream::derive(42, 3, 17, StreamPurpose::Direction);
  const auto sa = sample_direction(dist, a);
  const auto sb = sample_direction(dist, b);
  CHECK(sa.vector == sb.vector);
}

TEST_CASE("mu fallback constant") {
  CHECK(mu_fallback(4) == doctest::Approx(std::sqrt(2.0 / (M_PI * 4.0))));
}
