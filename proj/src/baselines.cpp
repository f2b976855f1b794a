#include "mi2p/baselines.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mi2p/errors.hpp"

namespace mi2p {

namespace {

void draw_batch(std::vector<std::size_t>& batch, std::size_t b, std::size_t n,
                RngStream& rng, bool full_enumeration) {
  if (full_enumeration && b != n) {
    throw ConfigError("baseline: full enumeration requires b = n");
  }
  batch.clear();
  if (full_enumeration) {
    for (std::size_t i = 0; i < n; ++i) batch.push_back(i);
  } else {
    for (std::size_t j = 0; j < b; ++j) batch.push_back(rng.uniform_index(n));
  }
}

double batch_value(const FiniteSumObjective& obj,
                   const std::vector<std::size_t>& batch, const Point& x) {
  double acc = 0.0;
  for (std::size_t i : batch) acc += obj.component_value(i, x);
  return acc / static_cast<double>(batch.size());
}

void check_params(const SmoothingParams& params) {
  if (!(params.mu_fd > 0.0)) throw ConfigError("baseline: mu_fd must be > 0");
  if (!(params.step > 0.0)) throw ConfigError("baseline: step must be > 0");
}

}  // namespace

double default_mu_fd(std::size_t dim) {
  return 1e-4 * std::sqrt(static_cast<double>(dim));
}

BaselineStep rsgf_step(const Point& x, const FiniteSumObjective& obj,
                       std::size_t b, const SmoothingParams& params,
                       RngStream& rng, bool full_enumeration) {
  check_params(params);
  if (b == 0) throw ConfigError("rsgf_step: b >= 1 required");
  const std::size_t n = obj.components();
  const DirectionDistribution sphere{DirectionKind::UnitSphere, obj.dim()};
  const DirectionSample u = sample_direction(sphere, rng);
  std::vector<std::size_t> batch;
  draw_batch(batch, b, n, rng, full_enumeration);

  const Point x_shift = added(x, params.mu_fd, u.vector);
  const double f_shift = batch_value(obj, batch, x_shift);
  const double f_base = batch_value(obj, batch, x);
  const double slope = (f_shift - f_base) / params.mu_fd;
  if (!std::isfinite(slope)) {
    throw NumericalError("rsgf_step: non-finite gradient estimate");
  }
  BaselineStep out;
  out.x = added(x, -params.step * slope, u.vector);
  out.queries = 2 * static_cast<std::uint64_t>(b);
  return out;
}

BaselineStep zocd_step(const Point& x, const FiniteSumObjective& obj,
                       std::size_t b, const SmoothingParams& params,
                       RngStream& rng, bool full_enumeration) {
  check_params(params);
  if (b == 0) throw ConfigError("zocd_step: b >= 1 required");
  const std::size_t n = obj.components();
  const std::size_t d = obj.dim();
  std::vector<std::size_t> batch;
  draw_batch(batch, b, n, rng, full_enumeration);

  BaselineStep out;
  out.x = x;
  Point probe = x;
  for (std::size_t j = 0; j < d; ++j) {
    probe[j] = x[j] + params.mu_fd;
    const double f_plus = batch_value(obj, batch, probe);
    probe[j] = x[j] - params.mu_fd;
    const double f_minus = batch_value(obj, batch, probe);
    probe[j] = x[j];
    const double gj = (f_plus - f_minus) / (2.0 * params.mu_fd);
    if (!std::isfinite(gj)) {
      throw NumericalError("zocd_step: non-finite gradient estimate at coord " +
                           std::to_string(j));
    }
    out.x[j] -= params.step * gj;
  }
  out.queries = 2 * static_cast<std::uint64_t>(b) * static_cast<std::uint64_t>(d);
  return out;
}

std::vector<RunRecord> run_baseline(BaselineKind kind, const Point& x0,
                                    const FiniteSumObjective& obj,
                                    std::size_t b, const SmoothingParams& params,
                                    const StopRule& stop,
                                    const RunOptions& options) {
  if (stop.max_iters == 0 && stop.max_queries == 0) {
    throw ConfigError("run_baseline: no stopping rule");
  }
  std::vector<RunRecord> trace;
  Point x = x0;
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
  while (true) {
    if (stop.max_iters > 0 && t >= stop.max_iters) break;
    if (stop.max_queries > 0 && queries >= stop.max_queries) break;
    RngStream rng =
        RngStream::derive(options.seed, options.trial, t, StreamPurpose::Batch);
    BaselineStep step =
        kind == BaselineKind::Rsgf
            ? rsgf_step(x, obj, b, params, rng)
            : zocd_step(x, obj, b, params, rng);
    x = std::move(step.x);
    queries += step.queries;
    ++t;
    record(+1);
  }
  return trace;
}

}  // namespace mi2p
