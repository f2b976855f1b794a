#include "mi2p/estimators.hpp"

#include <cmath>
#include <vector>

#include "mi2p/errors.hpp"

namespace mi2p {

namespace {

void check_dims(const FiniteSumObjective& obj, const Point& x_plus,
                const Point& x_minus) {
  if (x_plus.size() != obj.dim() || x_minus.size() != obj.dim()) {
    throw ConfigError("estimator: trial point dimension mismatch");
  }
}

void draw_batch(std::vector<std::size_t>& batch, std::size_t b, std::size_t n,
                RngStream& rng, bool full_enumeration) {
  batch.clear();
  batch.reserve(b);
  if (full_enumeration) {
    for (std::size_t i = 0; i < n; ++i) batch.push_back(i);
  } else {
    for (std::size_t j = 0; j < b; ++j) batch.push_back(rng.uniform_index(n));
  }
}

double batch_mean(const FiniteSumObjective& obj,
                  const std::vector<std::size_t>& batch, const Point& x) {
  double acc = 0.0;
  for (std::size_t i : batch) acc += obj.component_value(i, x);
  return acc / static_cast<double>(batch.size());
}

}  // namespace

const char* estimator_regime_name(EstimatorRegime regime) {
  switch (regime) {
    case EstimatorRegime::Exact:
      return "exact";
    case EstimatorRegime::Minibatch:
      return "minibatch";
    case EstimatorRegime::VrSymmetric:
      return "vr-sym";
    case EstimatorRegime::VrTwoSnapshot:
      return "vr-snap";
    case EstimatorRegime::Helper:
      return "helper";
  }
  return "?";
}

EstimatePair exact_pair(const FiniteSumObjective& obj, const Point& x_plus,
                        const Point& x_minus) {
  check_dims(obj, x_plus, x_minus);
  EstimatePair p;
  p.m_plus = obj.full_value(x_plus);
  p.m_minus = obj.full_value(x_minus);
  const std::uint64_t n = obj.components();
  p.queries = 2 * n;
  p.epoch_queries = n;
  p.regime = EstimatorRegime::Exact;
  return p;
}

EstimatePair minibatch_pair(const FiniteSumObjective& obj, const Point& x_plus,
                            const Point& x_minus, std::size_t b,
                            RngStream& rng, bool full_enumeration) {
  check_dims(obj, x_plus, x_minus);
  if (b == 0) throw ConfigError("minibatch_pair: b >= 1 required");
  const std::size_t n = obj.components();
  if (full_enumeration && b != n) {
    throw ConfigError("minibatch_pair: full enumeration requires b = n");
  }
  std::vector<std::size_t> batch;
  draw_batch(batch, b, n, rng, full_enumeration);
  EstimatePair p;
  p.m_plus = batch_mean(obj, batch, x_plus);
  p.m_minus = batch_mean(obj, batch, x_minus);
  p.queries = 2 * static_cast<std::uint64_t>(b);
  p.epoch_queries = p.queries;
  p.regime = EstimatorRegime::Minibatch;
  return p;
}

EstimatePair vr_pair_symmetric(const FiniteSumObjective& obj,
                               const Point& x_plus, const Point& x_minus,
                               std::size_t b, VrState& state, RngStream& rng) {
  check_dims(obj, x_plus, x_minus);
  if (state.epoch_len == 0) throw ConfigError("vr state: epoch_len >= 1");
  EstimatePair p;
  if (state.iter_in_epoch == 0) {
    p = exact_pair(obj, x_plus, x_minus);
    state.have_snapshot = true;
  } else {
    p = minibatch_pair(obj, x_plus, x_minus, b, rng);
    p.epoch_queries = static_cast<std::uint64_t>(b);
  }
  p.regime = EstimatorRegime::VrSymmetric;
  state.iter_in_epoch = (state.iter_in_epoch + 1) % state.epoch_len;
  return p;
}

EstimatePair vr_pair_two_snapshot(const FiniteSumObjective& obj,
                                  const Point& x_plus, const Point& x_minus,
                                  std::size_t b, VrState& state, RngStream& rng,
                                  bool full_enumeration) {
  check_dims(obj, x_plus, x_minus);
  if (state.epoch_len == 0) throw ConfigError("vr state: epoch_len >= 1");
  if (b == 0) throw ConfigError("vr_pair_two_snapshot: b >= 1 required");
  const std::size_t n = obj.components();
  if (full_enumeration && b != n) {
    throw ConfigError("vr_pair_two_snapshot: full enumeration requires b = n");
  }
  EstimatePair p;
  if (state.iter_in_epoch == 0) {
    p = exact_pair(obj, x_plus, x_minus);
    state.snapshot_plus = x_plus;
    state.snapshot_minus = x_minus;
    state.snapshot_value_plus = p.m_plus;
    state.snapshot_value_minus = p.m_minus;
    state.have_snapshot = true;
  } else {
    if (!state.have_snapshot) {
      throw ConfigError("vr_pair_two_snapshot: snapshot not initialized");
    }
    std::vector<std::size_t> batch;
    draw_batch(batch, b, n, rng, full_enumeration);
    const double corr_plus =
        batch_mean(obj, batch, x_plus) - batch_mean(obj, batch, state.snapshot_plus);
    const double corr_minus = batch_mean(obj, batch, x_minus) -
                              batch_mean(obj, batch, state.snapshot_minus);
    p.m_plus = state.snapshot_value_plus + corr_plus;
    p.m_minus = state.snapshot_value_minus + corr_minus;
    p.queries = 4 * static_cast<std::uint64_t>(b);
    p.epoch_queries = static_cast<std::uint64_t>(b);
  }
  p.regime = EstimatorRegime::VrTwoSnapshot;
  state.iter_in_epoch = (state.iter_in_epoch + 1) % state.epoch_len;
  return p;
}

EstimatePair helper_pair(const FiniteSumObjective& obj, const Point& x_plus,
                         const Point& x_minus, const HelperSpec& spec,
                         RngStream& rng) {
  check_dims(obj, x_plus, x_minus);
  if (spec.delta < 0.0) throw ConfigError("helper_pair: delta < 0");
  auto perturbation = [&]() {
    switch (spec.mode) {
      case HelperMode::AdditiveUniform:
        return 0.5 * spec.delta * rng.uniform(-1.0, 1.0);
      case HelperMode::AdditiveGaussian:
        return spec.delta * std::sqrt(3.14159265358979323846 / 8.0) *
               rng.normal();
    }
    return 0.0;
  };
  EstimatePair p;
  p.m_plus = obj.full_value(x_plus) + perturbation();
  p.m_minus = obj.full_value(x_minus) + perturbation();
  p.helper_calls = 2;
  p.regime = EstimatorRegime::Helper;
  return p;
}

double translation_gap(double m_plus, double m_minus, double f_plus,
                       double f_minus) {
  return 0.5 * std::abs((m_plus - m_minus) - (f_plus - f_minus));
}

double translation_gap(const EstimatePair& pair, double f_plus,
                       double f_minus) {
  return translation_gap(pair.m_plus, pair.m_minus, f_plus, f_minus);
}

ShiftScan shifted_error_grid_min(double m_plus, double m_minus, double f_plus,
                                 double f_minus, double lo, double hi,
                                 double step) {
  if (!(step > 0.0) || !(hi > lo)) {
    throw ConfigError("shifted_error_grid_min: bad grid");
  }
  const double a = m_plus - f_plus;
  const double b = m_minus - f_minus;
  ShiftScan best;
  best.min_total = std::abs(a - lo) + std::abs(b - lo);
  best.best_shift = lo;
  const auto steps = static_cast<std::uint64_t>((hi - lo) / step);
  for (std::uint64_t k = 1; k <= steps; ++k) {
    const double c = lo + static_cast<double>(k) * step;
    const double total = std::abs(a - c) + std::abs(b - c);
    if (total < best.min_total) {
      best.min_total = total;
      best.best_shift = c;
    }
  }
  return best;
}

EstimatePair ExactEstimator::estimate(const FiniteSumObjective& obj,
                                      const Point& x_plus, const Point& x_minus,
                                      RngStream&) {
  return exact_pair(obj, x_plus, x_minus);
}

EstimatePair MinibatchEstimator::estimate(const FiniteSumObjective& obj,
                                          const Point& x_plus,
                                          const Point& x_minus,
                                          RngStream& rng) {
  return minibatch_pair(obj, x_plus, x_minus, b_, rng, full_enumeration_);
}

EstimatePair VrSymmetricEstimator::estimate(const FiniteSumObjective& obj,
                                            const Point& x_plus,
                                            const Point& x_minus,
                                            RngStream& rng) {
  return vr_pair_symmetric(obj, x_plus, x_minus, b_, state_, rng);
}

EstimatePair VrTwoSnapshotEstimator::estimate(const FiniteSumObjective& obj,
                                              const Point& x_plus,
                                              const Point& x_minus,
                                              RngStream& rng) {
  return vr_pair_two_snapshot(obj, x_plus, x_minus, b_, state_, rng);
}

EstimatePair HelperEstimator::estimate(const FiniteSumObjective& obj,
                                       const Point& x_plus,
                                       const Point& x_minus, RngStream& rng) {
  return helper_pair(obj, x_plus, x_minus, spec_, rng);
}

}  // namespace mi2p
