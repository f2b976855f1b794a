#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mi2p/directions.hpp"
#include "mi2p/estimators.hpp"
#include "mi2p/objectives.hpp"
#include "mi2p/vec.hpp"

namespace mi2p {

// Per-iteration trace entry. f_true (and grad_norm when enabled) are exact
// full-objective instrumentation, metered outside the optimizer budget.
struct RunRecord {
  std::uint64_t t = 0;
  std::uint64_t queries = 0;       // optimizer component evaluations so far
  std::uint64_t epoch_queries = 0; // one-pass epoch accounting
  std::uint64_t helper_calls = 0;
  double f_true = 0.0;
  std::optional<double> grad_norm;
  int step_sign = +1;  // sign of the step that produced this record
};

struct SearchState {
  Point x;
  std::uint64_t t = 0;
  double eta = 0.0;
  std::uint64_t queries = 0;
  std::uint64_t epoch_queries = 0;
  std::uint64_t helper_calls = 0;
  std::vector<RunRecord> trace;
};

enum class PlanRegime { AvgSmooth, SampleSmooth, FiniteSumVR, Helper };

const char* plan_regime_name(PlanRegime regime);

// Parameters chosen manually or by the analysis-based planner. caps_applied
// records which constraints bound eta.
struct Plan {
  double eta = 0.0;
  std::uint64_t iterations = 0;   // T
  std::uint64_t batch = 1;        // b
  std::uint64_t epoch_len = 1;    // m (VR only)
  double calls_estimate = 0.0;    // planner's total-call prediction
  std::vector<std::string> caps_applied;
  std::vector<std::string> notes;
};

// Stops when either limit is hit; 0 disables that limit (at least one must
// be positive). Budget counts optimizer queries plus helper calls.
struct StopRule {
  std::uint64_t max_iters = 0;
  std::uint64_t max_queries = 0;
};

struct RunOptions {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  bool record_grad_norm = false;
};

SearchState init_search_state(const Point& x0, double eta,
                              const FiniteSumObjective& obj,
                              const RunOptions& options);

// One iteration of the sign-of-difference update:
//   x <- x - eta * sign(M+ - M-) * s,   sign(0) := +1.
// Streams are derived from (seed, trial, t), so trajectories are reproducible
// and independent across trials. Throws NumericalError on non-finite
// estimates.
void srs_step(SearchState& state, const DirectionDistribution& dist,
              ValueEstimator& estimator, const FiniteSumObjective& obj,
              const RunOptions& options);

std::vector<RunRecord> run_search(const Point& x0, const Plan& plan,
                                  const DirectionDistribution& dist,
                                  ValueEstimator& estimator,
                                  const FiniteSumObjective& obj,
                                  const StopRule& stop,
                                  const RunOptions& options);

// Parameter choices from the convergence analysis with all big-O constants
// set to 1. The formulas are heuristics; the caps are enforced exactly.
Plan plan_parameters(PlanRegime regime, const TheoryConstants& constants,
                     double epsilon, std::size_t n, double helper_delta = 0.0);

// Epoch-accounted total call count (T/m) (n + (m-1) b(m)).
double vr_calls(std::uint64_t iterations, std::uint64_t epoch_len,
                std::uint64_t batch, std::size_t n);

// b(m) = d m^2 G^2 / eps^2 with unit constants.
double vr_batch_for_epoch(std::uint64_t epoch_len, const TheoryConstants& c,
                          double epsilon);

std::string format_plan(const Plan& plan);

}  // namespace mi2p
