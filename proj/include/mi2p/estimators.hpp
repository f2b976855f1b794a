#pragma once

#include <cstdint>
#include <memory>

#include "mi2p/objectives.hpp"
#include "mi2p/rng.hpp"
#include "mi2p/vec.hpp"

namespace mi2p {

enum class EstimatorRegime {
  Exact,
  Minibatch,
  VrSymmetric,
  VrTwoSnapshot,
  Helper,
};

const char* estimator_regime_name(EstimatorRegime regime);

// Paired value estimates for the two trial points, with the query cost they
// incurred. `queries` counts physical component evaluations; `epoch_queries`
// keeps the one-full-pass-per-epoch convention (n per epoch boundary, b per
// mid-epoch iteration) that the epoch cost formula (T/m)(n + (m-1) b) uses.
// Helper feedback is metered separately in `helper_calls`.
struct EstimatePair {
  double m_plus = 0.0;
  double m_minus = 0.0;
  std::uint64_t queries = 0;
  std::uint64_t epoch_queries = 0;
  std::uint64_t helper_calls = 0;
  EstimatorRegime regime = EstimatorRegime::Exact;
};

// Epoch bookkeeping for the variance-reduced estimators. iter_in_epoch counts
// from 0; snapshots refresh exactly when it wraps to 0 (so the first call is
// always an exact pass).
struct VrState {
  std::size_t epoch_len = 1;
  std::size_t iter_in_epoch = 0;
  bool have_snapshot = false;
  Point snapshot_plus, snapshot_minus;
  double snapshot_value_plus = 0.0;
  double snapshot_value_minus = 0.0;
};

enum class HelperMode { AdditiveUniform, AdditiveGaussian };

// Simulated helper h with E|h(x) - h(y) - (f(x) - f(y))| <= delta.
// AdditiveUniform adds (delta/2) u, u ~ U[-1,1], per call (expected pairwise
// error delta/3); AdditiveGaussian adds N(0, (delta sqrt(pi/8))^2) per call
// (expected pairwise error delta/sqrt(2)).
struct HelperSpec {
  double delta = 0.0;
  HelperMode mode = HelperMode::AdditiveUniform;
};

// Exact full values at both points. Costs 2n component evaluations
// (n under the one-pass epoch convention).
EstimatePair exact_pair(const FiniteSumObjective& obj, const Point& x_plus,
                        const Point& x_minus);

// One minibatch of b indices drawn i.i.d. uniform with replacement and used
// for BOTH points (common random numbers). queries = 2b. With
// full_enumeration and b = n the batch is the exhaustive index set.
EstimatePair minibatch_pair(const FiniteSumObjective& obj, const Point& x_plus,
                            const Point& x_minus, std::size_t b,
                            RngStream& rng, bool full_enumeration = false);

// Exact values at epoch boundaries, minibatch_pair mid-epoch. Advances state.
EstimatePair vr_pair_symmetric(const FiniteSumObjective& obj,
                               const Point& x_plus, const Point& x_minus,
                               std::size_t b, VrState& state, RngStream& rng);

// Control-variate form: at boundaries stores (x+, x-) and their exact values
// as snapshots; mid-epoch returns f(snap) + mean_B(f_xi(x) - f_xi(snap)) per
// sign, costing 4b. Advances state.
EstimatePair vr_pair_two_snapshot(const FiniteSumObjective& obj,
                                  const Point& x_plus, const Point& x_minus,
                                  std::size_t b, VrState& state, RngStream& rng,
                                  bool full_enumeration = false);

EstimatePair helper_pair(const FiniteSumObjective& obj, const Point& x_plus,
                         const Point& x_minus, const HelperSpec& spec,
                         RngStream& rng);

// Optimal-shift residual (1/2) |(M+ - M-) - (f+ - f-)|: the estimation error
// that survives after shifting both estimates by the best common constant.
double translation_gap(const EstimatePair& pair, double f_plus, double f_minus);
double translation_gap(double m_plus, double m_minus, double f_plus,
                       double f_minus);

// Brute-force check of the optimal shift: grid-minimizes
// |M+ - c - f+| + |M- - c - f-| over c. Testing oracle for the identity
// min_c(...) = |(M+ - M-) - (f+ - f-)|.
struct ShiftScan {
  double min_total = 0.0;
  double best_shift = 0.0;
};
ShiftScan shifted_error_grid_min(double m_plus, double m_minus, double f_plus,
                                 double f_minus, double lo, double hi,
                                 double step);

// Estimator object handed to the search loop; one call per iteration.
// Stateful implementations (VR) are single-owner.
class ValueEstimator {
 public:
  virtual ~ValueEstimator() = default;
  virtual EstimatePair estimate(const FiniteSumObjective& obj,
                                const Point& x_plus, const Point& x_minus,
                                RngStream& rng) = 0;
  virtual EstimatorRegime regime() const = 0;
};

class ExactEstimator final : public ValueEstimator {
 public:
  EstimatePair estimate(const FiniteSumObjective& obj, const Point& x_plus,
                        const Point& x_minus, RngStream& rng) override;
  EstimatorRegime regime() const override { return EstimatorRegime::Exact; }
};

class MinibatchEstimator final : public ValueEstimator {
 public:
  explicit MinibatchEstimator(std::size_t b, bool full_enumeration = false)
      : b_(b), full_enumeration_(full_enumeration) {}
  EstimatePair estimate(const FiniteSumObjective& obj, const Point& x_plus,
                        const Point& x_minus, RngStream& rng) override;
  EstimatorRegime regime() const override { return EstimatorRegime::Minibatch; }

 private:
  std::size_t b_;
  bool full_enumeration_;
};

class VrSymmetricEstimator final : public ValueEstimator {
 public:
  VrSymmetricEstimator(std::size_t b, std::size_t epoch_len) : b_(b) {
    state_.epoch_len = epoch_len;
  }
  EstimatePair estimate(const FiniteSumObjective& obj, const Point& x_plus,
                        const Point& x_minus, RngStream& rng) override;
  EstimatorRegime regime() const override {
    return EstimatorRegime::VrSymmetric;
  }

 private:
  std::size_t b_;
  VrState state_;
};

class VrTwoSnapshotEstimator final : public ValueEstimator {
 public:
  VrTwoSnapshotEstimator(std::size_t b, std::size_t epoch_len) : b_(b) {
    state_.epoch_len = epoch_len;
  }
  EstimatePair estimate(const FiniteSumObjective& obj, const Point& x_plus,
                        const Point& x_minus, RngStream& rng) override;
  EstimatorRegime regime() const override {
    return EstimatorRegime::VrTwoSnapshot;
  }

 private:
  std::size_t b_;
  VrState state_;
};

class HelperEstimator final : public ValueEstimator {
 public:
  explicit HelperEstimator(HelperSpec spec) : spec_(spec) {}
  EstimatePair estimate(const FiniteSumObjective& obj, const Point& x_plus,
                        const Point& x_minus, RngStream& rng) override;
  EstimatorRegime regime() const override { return EstimatorRegime::Helper; }

 private:
  HelperSpec spec_;
};

}  // namespace mi2p
