#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mi2p/directions.hpp"
#include "mi2p/objectives.hpp"
#include "mi2p/search.hpp"
#include "mi2p/vec.hpp"

namespace mi2p {

// Momentum-on-differences variants. None of them is a recommended mode; the
// lab exists to measure why they fail.
enum class MomentumVariant { HeavyBall, Mvr, Transport };

const char* momentum_variant_name(MomentumVariant variant);

struct MomentumState {
  MomentumVariant variant = MomentumVariant::HeavyBall;
  double beta = 1.0;  // in (0, 1]
  double m = 0.0;     // smoothed difference M_t
  bool initialized = false;
  // The MVR correction term is applied with the sign as printed
  // (+ stale difference); corrected_sign flips it to the conventional
  // first-order form. No claim about intent either way.
  bool mvr_corrected_sign = false;
};

// Applies one step of the variant's recursion and returns M_t.
//   HeavyBall: M_t = (1-beta) M_{t-1} + beta fresh
//   MVR:       M_t = (1-beta)(M_{t-1} + fresh + aux) + beta fresh
//              (aux = current-batch difference at the previous points;
//               corrected_sign uses -aux)
//   Transport: M_t = (1-beta) M_{t-1} + beta aux
//              (aux = current-batch difference at the extrapolated points)
// The first call initializes M_0 = fresh (Transport falls back to HeavyBall
// at t=0, when no previous points exist).
double momentum_difference(MomentumState& state, double fresh_diff,
                           std::optional<double> aux_diff = std::nullopt);

// Instrumented decomposition of the momentum error e_t = M_t - (f+ - f-)
// into drift b_t and noise v_t so that the Heavy-Ball recursion
//   e_t = (1-beta)(e_{t-1} + b_t) + beta v_t
// is an exact identity. (b_t is the previous-minus-current true difference;
// v_t the sampling error of the fresh difference.)
struct ErrorDecomposition {
  double e = 0.0;
  double b = 0.0;
  double v = 0.0;
};

ErrorDecomposition decompose_error(double m_t, double f_plus, double f_minus,
                                   double true_prev_diff, double sample_diff);

double heavy_ball_recursion_residual(const ErrorDecomposition& cur,
                                     double prev_e, double beta);

// Sign-of-difference run with the plain minibatch difference replaced by the
// momentum recursion. Minibatch indices are shared across every evaluation of
// one iteration (current, previous, extrapolated points), and beta = 1
// short-circuits to the plain path so it reproduces Mi2P bit-identically.
std::vector<RunRecord> run_momentum(const Point& x0, double eta,
                                    MomentumVariant variant, double beta,
                                    std::size_t b,
                                    const FiniteSumObjective& obj,
                                    const DirectionDistribution& dist,
                                    const StopRule& stop,
                                    const RunOptions& options,
                                    bool mvr_corrected_sign = false);

struct BetaSweepRow {
  double beta = 0.0;
  double mean_final_f = 0.0;
  double sd_final_f = 0.0;
};

// Identical budgets for every beta; mean and sd of the final f over trials.
std::vector<BetaSweepRow> beta_sweep(const FiniteSumObjective& obj,
                                     const DirectionDistribution& dist,
                                     double eta, std::size_t b,
                                     std::uint64_t iterations,
                                     MomentumVariant variant,
                                     const std::vector<double>& betas,
                                     std::size_t trials, std::uint64_t seed);

}  // namespace mi2p
