#pragma once

#include <cstdint>

#include "mi2p/objectives.hpp"
#include "mi2p/rng.hpp"
#include "mi2p/search.hpp"
#include "mi2p/vec.hpp"

namespace mi2p {

// Smoothing radius and step size of the gradient-estimation baselines.
struct SmoothingParams {
  double mu_fd = 0.0;
  double step = 0.0;  // eta for RSGF, alpha for ZO-CD
};

struct BaselineStep {
  Point x;
  std::uint64_t queries = 0;
};

// Forward-difference random gradient surrogate:
//   g = (F_B(x + mu u) - F_B(x)) / mu * u,   x <- x - eta g,
// with u uniform on the unit sphere and one minibatch shared by both
// evaluations. queries = 2b. Throws NumericalError on non-finite g.
BaselineStep rsgf_step(const Point& x, const FiniteSumObjective& obj,
                       std::size_t b, const SmoothingParams& params,
                       RngStream& rng, bool full_enumeration = false);

// Coordinate-wise central differences:
//   g = sum_i (F_B(x + mu e_i) - F_B(x - mu e_i)) / (2 mu) e_i,
//   x <- x - alpha g,
// one minibatch reused across all 2d evaluations. queries = 2 b d.
BaselineStep zocd_step(const Point& x, const FiniteSumObjective& obj,
                       std::size_t b, const SmoothingParams& params,
                       RngStream& rng, bool full_enumeration = false);

enum class BaselineKind { Rsgf, Zocd };

// Budgeted baseline run with the same trace format as the search loop.
std::vector<RunRecord> run_baseline(BaselineKind kind, const Point& x0,
                                    const FiniteSumObjective& obj,
                                    std::size_t b, const SmoothingParams& params,
                                    const StopRule& stop,
                                    const RunOptions& options);

// Default smoothing radius 1e-4 sqrt(d).
double default_mu_fd(std::size_t dim);

}  // namespace mi2p
