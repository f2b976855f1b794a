#pragma once

#include <cstddef>
#include <string_view>

#include "mi2p/rng.hpp"
#include "mi2p/vec.hpp"

namespace mi2p {

// Search-direction laws. All of them are normalized so that E||s||^2 = 1.
enum class DirectionKind { UnitSphere, NormalizedGaussian, SignedCoordinate };

struct DirectionDistribution {
  DirectionKind kind = DirectionKind::UnitSphere;
  std::size_t dim = 0;
};

// Throws ConfigError when dim == 0.
DirectionDistribution make_distribution(DirectionKind kind, std::size_t dim);

// Accepts "sphere" | "gaussian" | "coordinate".
DirectionKind parse_direction_kind(std::string_view name);
const char* direction_kind_name(DirectionKind kind);

struct DirectionSample {
  Point vector;
  DirectionDistribution distribution;
};

DirectionSample sample_direction(const DirectionDistribution& dist,
                                 RngStream& rng);

// Monte Carlo estimate of E|<g, s>| / ||g||, the exploration constant of the
// distribution measured along g. Throws ConfigError when g = 0 or samples = 0.
double estimate_mu(const DirectionDistribution& dist, const Point& g,
                   std::size_t samples, RngStream& rng);

// Monte Carlo estimate of E<v, s>^2. For the unit sphere this equals
// ||v||^2 / d.
double second_moment_projection(const DirectionDistribution& dist,
                                const Point& v, std::size_t samples,
                                RngStream& rng);

// Closed-form stand-in sqrt(2 / (pi d)) used when estimation is disabled.
double mu_fallback(std::size_t dim);

}  // namespace mi2p
