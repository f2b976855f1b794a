#include "mi2p/directions.hpp"

#include <cmath>
#include <string>

#include "mi2p/errors.hpp"

namespace mi2p {

DirectionDistribution make_distribution(DirectionKind kind, std::size_t dim) {
  if (dim == 0) {
    throw ConfigError("direction distribution requires dim >= 1");
  }
  return DirectionDistribution{kind, dim};
}

DirectionKind parse_direction_kind(std::string_view name) {
  if (name == "sphere") return DirectionKind::UnitSphere;
  if (name == "gaussian") return DirectionKind::NormalizedGaussian;
  if (name == "coordinate") return DirectionKind::SignedCoordinate;
  throw ConfigError("unknown direction kind '" + std::string(name) +
                    "' (expected sphere|gaussian|coordinate)");
}

const char* direction_kind_name(DirectionKind kind) {
  switch (kind) {
    case DirectionKind::UnitSphere:
      return "sphere";
    case DirectionKind::NormalizedGaussian:
      return "gaussian";
    case DirectionKind::SignedCoordinate:
      return "coordinate";
  }
  return "?";
}

DirectionSample sample_direction(const DirectionDistribution& dist,
                                 RngStream& rng) {
  if (dist.dim == 0) {
    throw ConfigError("direction distribution requires dim >= 1");
  }
  Point s(dist.dim, 0.0);
  switch (dist.kind) {
    case DirectionKind::UnitSphere: {
      // Gaussian draw + normalization; a zero-norm draw is resampled.
      double nrm = 0.0;
      do {
        for (double& v : s) v = rng.normal();
        nrm = norm2(s);
      } while (nrm == 0.0);
      scale(1.0 / nrm, s);
      break;
    }
    case DirectionKind::NormalizedGaussian: {
      const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dist.dim));
      for (double& v : s) v = rng.normal() * inv_sqrt_d;
      break;
    }
    case DirectionKind::SignedCoordinate: {
      const std::size_t i = rng.uniform_index(dist.dim);
      s[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
      break;
    }
  }
  return DirectionSample{std::move(s), dist};
}

double estimate_mu(const DirectionDistribution& dist, const Point& g,
                   std::size_t samples, RngStream& rng) {
  if (samples == 0) throw ConfigError("estimate_mu requires samples >= 1");
  const double gnorm = norm2(g);
  if (gnorm == 0.0) {
    throw ConfigError("estimate_mu: g must be nonzero");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const DirectionSample s = sample_direction(dist, rng);
    acc += std::abs(dot(g, s.vector));
  }
  return acc / (static_cast<double>(samples) * gnorm);
}

double second_moment_projection(const DirectionDistribution& dist,
                                const Point& v, std::size_t samples,
                                RngStream& rng) {
  if (samples == 0) {
    throw ConfigError("second_moment_projection requires samples >= 1");
  }
  if (v.size() != dist.dim) {
    throw ConfigError("second_moment_projection: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const DirectionSample s = sample_direction(dist, rng);
    const double p = dot(v, s.vector);
    acc += p * p;
  }
  return acc / static_cast<double>(samples);
}

double mu_fallback(std::size_t dim) {
  return std::sqrt(2.0 / (3.14159265358979323846 * static_cast<double>(dim)));
}

}  // namespace mi2p
