#include "mi2p/momentum.hpp"

#include <cmath>
#include <vector>

#include "mi2p/errors.hpp"

namespace mi2p {

const char* momentum_variant_name(MomentumVariant variant) {
  switch (variant) {
    case MomentumVariant::HeavyBall:
      return "heavyball";
    case MomentumVariant::Mvr:
      return "mvr";
    case MomentumVariant::Transport:
      return "transport";
  }
  return "?";
}

double momentum_difference(MomentumState& state, double fresh_diff,
                           std::optional<double> aux_diff) {
  if (!(state.beta > 0.0) || state.beta > 1.0) {
    throw ConfigError("momentum: beta must be in (0, 1]");
  }
  if (!state.initialized) {
    state.m = fresh_diff;
    state.initialized = true;
    return state.m;
  }
  const double beta = state.beta;
  switch (state.variant) {
    case MomentumVariant::HeavyBall:
      state.m = (1.0 - beta) * state.m + beta * fresh_diff;
      break;
    case MomentumVariant::Mvr: {
      if (beta == 1.0) {
        state.m = fresh_diff;
        break;
      }
      if (!aux_diff.has_value()) {
        throw ConfigError("momentum: MVR needs the previous-point difference");
      }
      const double stale =
          state.mvr_corrected_sign ? -*aux_diff : *aux_diff;
      state.m = (1.0 - beta) * (state.m + fresh_diff + stale) +
                beta * fresh_diff;
      break;
    }
    case MomentumVariant::Transport: {
      if (beta == 1.0) {
        state.m = fresh_diff;
        break;
      }
      if (!aux_diff.has_value()) {
        throw ConfigError(
            "momentum: Transport needs the extrapolated-point difference");
      }
      state.m = (1.0 - beta) * state.m + beta * *aux_diff;
      break;
    }
  }
  return state.m;
}

ErrorDecomposition decompose_error(double m_t, double f_plus, double f_minus,
                                   double true_prev_diff, double sample_diff) {
  const double true_diff = f_plus - f_minus;
  ErrorDecomposition out;
  out.e = m_t - true_diff;
  out.b = true_prev_diff - true_diff;
  out.v = sample_diff - true_diff;
  return out;
}

double heavy_ball_recursion_residual(const ErrorDecomposition& cur,
                                     double prev_e, double beta) {
  return cur.e - ((1.0 - beta) * (prev_e + cur.b) + beta * cur.v);
}

std::vector<RunRecord> run_momentum(const Point& x0, double eta,
                                    MomentumVariant variant, double beta,
                                    std::size_t b,
                                    const FiniteSumObjective& obj,
                                    const DirectionDistribution& dist,
                                    const StopRule& stop,
                                    const RunOptions& options,
                                    bool mvr_corrected_sign) {
  if (stop.max_iters == 0 && stop.max_queries == 0) {
    throw ConfigError("run_momentum: no stopping rule");
  }
  if (b == 0) throw ConfigError("run_momentum: b >= 1 required");
  if (!(eta > 0.0)) throw ConfigError("run_momentum: eta must be > 0");
  const std::size_t n = obj.components();

  MomentumState mstate;
  mstate.variant = variant;
  mstate.beta = beta;
  mstate.mvr_corrected_sign = mvr_corrected_sign;

  std::vector<RunRecord> trace;
  Point x = x0;
  Point prev_plus, prev_minus;
  bool have_prev = false;
  std::uint64_t queries = 0;
  std::uint64_t t = 0;

  auto record = [&](int sign) {
    RunRecord rec;
    rec.t = t;
    rec.queries = queries;
    rec.epoch_queries = queries;
    rec.f_true = obj.full_value(x);
    if (options.record_grad_norm) {
      Point g(obj.dim(), 0.0);
      obj.full_gradient(x, g);
      rec.grad_norm = norm2(g);
    }
    rec.step_sign = sign;
    trace.push_back(rec);
  };
  record(+1);

  std::vector<std::size_t> batch(b);
  // Difference of the two batch means, with the same summation order as
  // minibatch_pair so beta = 1 reproduces the plain trajectory bit-exactly.
  auto batch_diff = [&](const Point& p, const Point& q) {
    double acc_p = 0.0, acc_q = 0.0;
    for (std::size_t i : batch) acc_p += obj.component_value(i, p);
    for (std::size_t i : batch) acc_q += obj.component_value(i, q);
    return acc_p / static_cast<double>(b) - acc_q / static_cast<double>(b);
  };

  while (true) {
    if (stop.max_iters > 0 && t >= stop.max_iters) break;
    if (stop.max_queries > 0 && queries >= stop.max_queries) break;
    RngStream dir_rng = RngStream::derive(options.seed, options.trial, t,
                                          StreamPurpose::Direction);
    RngStream est_rng = RngStream::derive(options.seed, options.trial, t,
                                          StreamPurpose::Batch);
    const DirectionSample s = sample_direction(dist, dir_rng);
    const Point x_plus = added(x, eta, s.vector);
    const Point x_minus = added(x, -eta, s.vector);
    for (std::size_t j = 0; j < b; ++j) batch[j] = est_rng.uniform_index(n);

    const double fresh = batch_diff(x_plus, x_minus);
    queries += 2 * static_cast<std::uint64_t>(b);

    std::optional<double> aux;
    const bool wants_aux =
        mstate.initialized && beta < 1.0 &&
        (variant == MomentumVariant::Mvr ||
         variant == MomentumVariant::Transport);
    if (wants_aux && variant == MomentumVariant::Mvr && have_prev) {
      aux = batch_diff(prev_plus, prev_minus);
      queries += 2 * static_cast<std::uint64_t>(b);
    } else if (wants_aux && variant == MomentumVariant::Transport && have_prev) {
      const double gamma = (1.0 - beta) / beta;
      Point ext_plus = x_plus;
      Point ext_minus = x_minus;
      for (std::size_t j = 0; j < x.size(); ++j) {
        ext_plus[j] += gamma * (x_plus[j] - prev_plus[j]);
        ext_minus[j] += gamma * (x_minus[j] - prev_minus[j]);
      }
      aux = batch_diff(ext_plus, ext_minus);
      queries += 2 * static_cast<std::uint64_t>(b);
    }

    const double m_t = momentum_difference(mstate, fresh, aux);
    if (!std::isfinite(m_t)) {
      throw NumericalError("run_momentum: non-finite smoothed difference");
    }

    const int sign = m_t >= 0.0 ? +1 : -1;
    prev_plus = x_plus;
    prev_minus = x_minus;
    have_prev = true;
    axpy(-eta * static_cast<double>(sign), s.vector, x);
    ++t;
    record(sign);
  }
  return trace;
}

std::vector<BetaSweepRow> beta_sweep(const FiniteSumObjective& obj,
                                     const DirectionDistribution& dist,
                                     double eta, std::size_t b,
                                     std::uint64_t iterations,
                                     MomentumVariant variant,
                                     const std::vector<double>& betas,
                                     std::size_t trials, std::uint64_t seed) {
  if (betas.empty()) throw ConfigError("beta_sweep: empty beta grid");
  if (trials == 0) throw ConfigError("beta_sweep: trials >= 1 required");
  for (double beta : betas) {
    if (!(beta > 0.0) || beta > 1.0) {
      throw ConfigError("beta_sweep: betas must lie in (0, 1]");
    }
  }
  std::vector<BetaSweepRow> rows;
  const Point x0 = zeros(obj.dim());
  StopRule stop;
  stop.max_iters = iterations;
  for (double beta : betas) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < trials; ++k) {
      RunOptions options;
      options.seed = seed;
      options.trial = k;
      const auto trace = run_momentum(x0, eta, variant, beta, b, obj, dist,
                                      stop, options);
      const double final_f = trace.back().f_true;
      mean += final_f;
      sq += final_f * final_f;
    }
    mean /= static_cast<double>(trials);
    const double var =
        std::max(0.0, sq / static_cast<double>(trials) - mean * mean);
    rows.push_back({beta, mean,
                    std::sqrt(var * static_cast<double>(trials) /
                              std::max<double>(1.0, trials - 1.0))});
  }
  return rows;
}

}  // namespace mi2p
