#include "mi2p/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mi2p/errors.hpp"
#include "mi2p/estimators.hpp"
#include "mi2p/search.hpp"

namespace mi2p {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  var /= std::max(1.0, n - 1.0);
  out.se = std::sqrt(var / n);
  return out;
}

std::string format_grid(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << " ";
    os << xs[i] << ":" << ys[i];
  }
  return os.str();
}

}  // namespace

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("ols_slope: need >= 2 points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) throw ConfigError("ols_slope: degenerate grid");
  return (n * sxy - sx * sy) / denom;
}

CheckReport check_descent_lemma(const FiniteSumObjective& obj,
                                const DirectionDistribution& dist, double eta,
                                const Point& x, std::size_t reps,
                                const TheoryConstants& constants,
                                std::uint64_t seed,
                                const DiagnosticsConfig& config) {
  if (reps < 2) throw ConfigError("check_descent_lemma: reps >= 2");
  if (constants.l1 > 0.0 && eta > constants.mu_d / constants.l1) {
    throw ConfigError(
        "check_descent_lemma: eta exceeds the mu_D/L1 cap; the bound does not "
        "apply");
  }
  const double fx = obj.full_value(x);
  Point grad(obj.dim(), 0.0);
  obj.full_gradient(x, grad);
  const double gn = norm2(grad);

  std::vector<double> decrease(reps, 0.0);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RngStream rng =
        RngStream::derive(seed, rep, 0, StreamPurpose::Direction);
    const DirectionSample s = sample_direction(dist, rng);
    const Point xp = added(x, eta, s.vector);
    const Point xm = added(x, -eta, s.vector);
    const double fp = obj.full_value(xp);
    const double fm = obj.full_value(xm);
    // sign(0) := +1 moves to the minus point, same as the optimizer.
    decrease[rep] = (fp - fm >= 0.0 ? fm : fp) - fx;
  }
  const MeanSe stat = mean_se(decrease);
  const double bound =
      -0.5 * constants.mu_d * eta * gn + 0.5 * constants.l0 * eta * eta;

  CheckReport report;
  report.name = "descent_lemma";
  report.measured = stat.mean;
  report.target = bound;
  report.samples = reps;
  report.passed = stat.mean <= bound + config.se_slack * stat.se;
  std::ostringstream os;
  os << "se=" << stat.se << " grad_norm=" << gn << " eta=" << eta;
  report.details = os.str();
  return report;
}

std::vector<CheckReport> check_variance_lemma(
    const FiniteSumObjective& obj, const Point& x,
    const std::vector<std::size_t>& b_grid, std::size_t reps,
    std::uint64_t seed, const DiagnosticsConfig& config) {
  if (reps < 1000) throw ConfigError("check_variance_lemma: reps >= 1000");
  if (b_grid.size() < 2) throw ConfigError("check_variance_lemma: need >= 2 b");
  std::vector<CheckReport> rows;
  const std::size_t n = obj.components();

  // Exact enumeration for small n: all n^b equally likely batches.
  if (n <= 6) {
    std::vector<double> values(n, 0.0);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = obj.component_value(i, x);
      mean += values[i];
    }
    mean /= static_cast<double>(n);
    double var_single = 0.0;
    for (double v : values) var_single += (v - mean) * (v - mean);
    var_single /= static_cast<double>(n);

    for (std::size_t b : {std::size_t{1}, std::size_t{2}}) {
      // Enumerate all index tuples of length b.
      std::vector<std::size_t> idx(b, 0);
      double acc = 0.0, acc_sq = 0.0;
      std::size_t count = 0;
      while (true) {
        double bm = 0.0;
        for (std::size_t j : idx) bm += values[j];
        bm /= static_cast<double>(b);
        acc += bm;
        acc_sq += bm * bm;
        ++count;
        std::size_t k = 0;
        while (k < b && ++idx[k] == n) {
          idx[k] = 0;
          ++k;
        }
        if (k == b) break;
      }
      const double mean_bm = acc / static_cast<double>(count);
      const double var_bm = acc_sq / static_cast<double>(count) - mean_bm * mean_bm;
      const double expected = var_single / static_cast<double>(b);
      CheckReport row;
      row.name = "variance_lemma_exact_b" + std::to_string(b);
      row.measured = var_bm;
      row.target = expected;
      row.samples = count;
      const double scale = std::max(1.0, std::abs(expected));
      row.passed = std::abs(var_bm - expected) <= 1e-12 * scale;
      rows.push_back(row);
    }
  }

  // Monte Carlo slope of log Var(batch mean) against log b.
  std::vector<double> log_b, log_var;
  bool degenerate = false;
  for (std::size_t b : b_grid) {
    if (b == 0) throw ConfigError("check_variance_lemma: b >= 1");
    std::vector<double> means(reps, 0.0);
    RngStream rng = RngStream::derive(seed, b, 0, StreamPurpose::Probe);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      double acc = 0.0;
      for (std::size_t j = 0; j < b; ++j) {
        acc += obj.component_value(rng.uniform_index(n), x);
      }
      means[rep] = acc / static_cast<double>(b);
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(reps);
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= static_cast<double>(reps - 1);
    if (var <= 0.0) {
      degenerate = true;
      break;
    }
    log_b.push_back(std::log(static_cast<double>(b)));
    log_var.push_back(std::log(var));
  }

  CheckReport slope_row;
  slope_row.name = "variance_lemma_slope_b";
  slope_row.target = -1.0;
  slope_row.samples = reps * b_grid.size();
  if (degenerate) {
    // Constant components: variance identically zero, nothing to fit.
    slope_row.measured = -1.0;
    slope_row.passed = true;
    slope_row.details = "degenerate (zero variance); trivially passed";
  } else {
    slope_row.measured = ols_slope(log_b, log_var);
    slope_row.passed =
        std::abs(slope_row.measured + 1.0) <= config.variance_slope_tol;
    slope_row.details = format_grid(log_b, log_var);
  }
  rows.push_back(slope_row);
  return rows;
}

std::vector<CheckReport> check_case2_projection(
    const FiniteSumObjective& obj, const Point& x,
    const std::vector<std::size_t>& b_grid,
    const std::vector<std::size_t>& d_grid, std::size_t reps,
    std::uint64_t seed, const DiagnosticsConfig& config) {
  if (reps < 100) throw ConfigError("check_case2_projection: reps >= 100");
  std::vector<CheckReport> rows;

  auto projection_mean = [&](const FiniteSumObjective& o, const Point& at,
                             std::size_t b, std::uint64_t stream_id) {
    const std::size_t n = o.components();
    const std::size_t d = o.dim();
    const DirectionDistribution sphere{DirectionKind::UnitSphere, d};
    Point full_grad(d, 0.0);
    o.full_gradient(at, full_grad);
    Point batch_grad(d, 0.0), gi(d, 0.0);
    RngStream rng = RngStream::derive(seed, stream_id, 0, StreamPurpose::Probe);
    double acc = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      batch_grad.assign(d, 0.0);
      for (std::size_t j = 0; j < b; ++j) {
        o.component_gradient(rng.uniform_index(n), at, gi);
        axpy(1.0, gi, batch_grad);
      }
      scale(1.0 / static_cast<double>(b), batch_grad);
      axpy(-1.0, full_grad, batch_grad);
      const DirectionSample s = sample_direction(sphere, rng);
      acc += std::abs(dot(batch_grad, s.vector));
    }
    return acc / static_cast<double>(reps);
  };

  if (b_grid.size() >= 2) {
    std::vector<double> log_b, log_e;
    for (std::size_t b : b_grid) {
      const double e = projection_mean(obj, x, b, 1000 + b);
      log_b.push_back(std::log(static_cast<double>(b)));
      log_e.push_back(std::log(e));
    }
    CheckReport row;
    row.name = "case2_projection_slope_b";
    row.measured = ols_slope(log_b, log_e);
    row.target = -0.5;
    row.samples = reps * b_grid.size();
    row.passed = std::abs(row.measured + 0.5) <= config.case2_slope_tol;
    row.details = format_grid(log_b, log_e);
    rows.push_back(row);
  }

  if (d_grid.size() >= 2) {
    // Synthetic quadratics with noise_sigma = sigma_t / sqrt(d), which keeps
    // the gradient-noise level sigma_1 constant across d.
    const double sigma_t = 1.0;
    const std::size_t b0 = 4;
    std::vector<double> log_d, log_e;
    for (std::size_t d : d_grid) {
      RngStream ctor = RngStream::derive(seed, d, 1, StreamPurpose::Init);
      QuadraticObjective quad(Point(d, 1.0),
                              sigma_t / std::sqrt(static_cast<double>(d)), 256,
                              ctor);
      const double e = projection_mean(quad, zeros(d), b0, 2000 + d);
      log_d.push_back(std::log(static_cast<double>(d)));
      log_e.push_back(std::log(e));
    }
    CheckReport row;
    row.name = "case2_projection_slope_d";
    row.measured = ols_slope(log_d, log_e);
    row.target = -0.5;
    row.samples = reps * d_grid.size();
    row.passed = std::abs(row.measured + 0.5) <= config.case2_slope_tol;
    row.details = format_grid(log_d, log_e);
    rows.push_back(row);
  }
  return rows;
}

std::vector<CheckReport> check_vr_error_scaling(
    const FiniteSumObjective& obj, double eta,
    const std::vector<std::size_t>& m_grid,
    const std::vector<std::size_t>& b_grid, std::size_t reps,
    double g_measured, std::uint64_t seed, const DiagnosticsConfig& config) {
  if (!(eta > 0.0)) throw ConfigError("check_vr_error_scaling: eta > 0");
  if (m_grid.size() < 2 || b_grid.size() < 2) {
    throw ConfigError("check_vr_error_scaling: need >= 2 grid points");
  }
  const std::size_t n = obj.components();
  const std::size_t d = obj.dim();
  const DirectionDistribution sphere{DirectionKind::UnitSphere, d};

  // Frozen mid-epoch state: snapshot pair at a probe point, current pair
  // displaced by exactly m*eta (the drift the epoch bound allows).
  auto residual_mean = [&](std::size_t m, std::size_t b, double step,
                           std::uint64_t stream_id) {
    RngStream rng = RngStream::derive(seed, stream_id, m * 131071 + b,
                                      StreamPurpose::Probe);
    std::vector<double> vals(reps, 0.0);
    Point snap(d, 0.0);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      for (double& v : snap) v = 0.5 * rng.normal();
      const DirectionSample s_snap = sample_direction(sphere, rng);
      const DirectionSample drift = sample_direction(sphere, rng);
      const DirectionSample s_cur = sample_direction(sphere, rng);
      const Point snap_plus = added(snap, step, s_snap.vector);
      const Point snap_minus = added(snap, -step, s_snap.vector);
      Point cur = added(snap, static_cast<double>(m) * step, drift.vector);
      const Point cur_plus = added(cur, step, s_cur.vector);
      const Point cur_minus = added(cur, -step, s_cur.vector);

      const double true_plus =
          obj.full_value(cur_plus) - obj.full_value(snap_plus);
      const double true_minus =
          obj.full_value(cur_minus) - obj.full_value(snap_minus);
      double acc_plus = 0.0, acc_minus = 0.0;
      for (std::size_t j = 0; j < b; ++j) {
        const std::size_t i = rng.uniform_index(n);
        acc_plus += obj.component_value(i, cur_plus) -
                    obj.component_value(i, snap_plus);
        acc_minus += obj.component_value(i, cur_minus) -
                     obj.component_value(i, snap_minus);
      }
      acc_plus /= static_cast<double>(b);
      acc_minus /= static_cast<double>(b);
      vals[rep] =
          std::abs(acc_plus - true_plus) + std::abs(acc_minus - true_minus);
    }
    return mean_se(vals).mean;
  };

  std::vector<CheckReport> rows;
  const std::size_t m0 = m_grid[m_grid.size() / 2];
  const std::size_t b0 = b_grid[b_grid.size() / 2];

  // Full (m, b) grid at the base eta: slopes along the two axes plus the
  // absolute bound per cell.
  std::vector<std::vector<double>> grid(m_grid.size(),
                                        std::vector<double>(b_grid.size()));
  std::size_t bound_ok = 0;
  for (std::size_t im = 0; im < m_grid.size(); ++im) {
    for (std::size_t ib = 0; ib < b_grid.size(); ++ib) {
      const double r = residual_mean(m_grid[im], b_grid[ib], eta, im * 97 + ib);
      grid[im][ib] = r;
      const double bound = 4.0 * eta * g_measured *
                           static_cast<double>(m_grid[im]) /
                           std::sqrt(static_cast<double>(b_grid[ib]));
      if (r <= bound) ++bound_ok;
    }
  }

  {
    std::vector<double> lx, ly;
    const std::size_t ib0 =
        std::find(b_grid.begin(), b_grid.end(), b0) - b_grid.begin();
    for (std::size_t im = 0; im < m_grid.size(); ++im) {
      lx.push_back(std::log(static_cast<double>(m_grid[im])));
      ly.push_back(std::log(grid[im][ib0]));
    }
    CheckReport row;
    row.name = "vr_error_slope_m";
    row.measured = ols_slope(lx, ly);
    row.target = 1.0;
    row.samples = reps * m_grid.size();
    row.passed = std::abs(row.measured - 1.0) <= config.vr_slope_tol_m;
    row.details = format_grid(lx, ly);
    rows.push_back(row);
  }
  {
    std::vector<double> lx, ly;
    const std::size_t im0 =
        std::find(m_grid.begin(), m_grid.end(), m0) - m_grid.begin();
    for (std::size_t ib = 0; ib < b_grid.size(); ++ib) {
      lx.push_back(std::log(static_cast<double>(b_grid[ib])));
      ly.push_back(std::log(grid[im0][ib]));
    }
    CheckReport row;
    row.name = "vr_error_slope_b";
    row.measured = ols_slope(lx, ly);
    row.target = -0.5;
    row.samples = reps * b_grid.size();
    row.passed = std::abs(row.measured + 0.5) <= config.vr_slope_tol_b;
    row.details = format_grid(lx, ly);
    rows.push_back(row);
  }
  {
    std::vector<double> lx, ly;
    for (double f : {0.25, 0.5, 1.0, 2.0}) {
      const double r = residual_mean(m0, b0, eta * f,
                                     40000 + static_cast<std::uint64_t>(f * 8));
      lx.push_back(std::log(eta * f));
      ly.push_back(std::log(r));
    }
    CheckReport row;
    row.name = "vr_error_slope_eta";
    row.measured = ols_slope(lx, ly);
    row.target = 1.0;
    row.samples = reps * 4;
    row.passed = std::abs(row.measured - 1.0) <= config.vr_slope_tol_eta;
    row.details = format_grid(lx, ly);
    rows.push_back(row);
  }
  {
    CheckReport row;
    row.name = "vr_error_bound_fraction";
    row.measured = static_cast<double>(bound_ok) /
                   static_cast<double>(m_grid.size() * b_grid.size());
    row.target = config.vr_bound_fraction;
    row.samples = reps * m_grid.size() * b_grid.size();
    row.passed = row.measured >= config.vr_bound_fraction;
    std::ostringstream os;
    os << "bound 4*eta*G*m/sqrt(b) with G=" << g_measured;
    row.details = os.str();
    rows.push_back(row);
  }
  return rows;
}

std::vector<CheckReport> check_helper_floor(
    const FiniteSumObjective& obj, const DirectionDistribution& dist,
    const std::vector<double>& deltas, double l0, const Point& x0,
    std::uint64_t iterations, std::size_t trials, std::uint64_t seed,
    const DiagnosticsConfig& config) {
  if (deltas.size() < 2) throw ConfigError("check_helper_floor: >= 2 deltas");
  if (!(l0 > 0.0)) throw ConfigError("check_helper_floor: l0 > 0 required");
  for (double delta : deltas) {
    if (!(delta > 0.0)) {
      throw ConfigError("check_helper_floor: deltas must be > 0 (delta = 0 is "
                        "the exact-match case, tested separately)");
    }
  }
  std::vector<double> log_delta, log_floor;
  bool inconclusive = false;
  std::ostringstream floors;
  for (double delta : deltas) {
    const double eta = std::sqrt(2.0 * delta / l0);
    double floor_acc = 0.0;
    double prev_decile_acc = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      HelperEstimator estimator(HelperSpec{delta, HelperMode::AdditiveUniform});
      Plan plan;
      plan.eta = eta;
      plan.iterations = iterations;
      RunOptions options;
      options.seed = seed + 17 * static_cast<std::uint64_t>(delta * 1e9);
      options.trial = trial;
      options.record_grad_norm = true;
      const auto trace =
          run_search(x0, plan, dist, estimator, obj, StopRule{}, options);
      const std::size_t len = trace.size();
      const std::size_t decile = std::max<std::size_t>(1, len / 10);
      double last = 0.0, prev = 0.0;
      for (std::size_t i = len - decile; i < len; ++i) {
        last += trace[i].grad_norm.value();
      }
      for (std::size_t i = len - 2 * decile; i < len - decile; ++i) {
        prev += trace[i].grad_norm.value();
      }
      floor_acc += last / static_cast<double>(decile);
      prev_decile_acc += prev / static_cast<double>(decile);
    }
    const double floor = floor_acc / static_cast<double>(trials);
    const double prev_floor = prev_decile_acc / static_cast<double>(trials);
    // The floor, not the transient, must dominate the tail.
    if (std::abs(prev_floor - floor) > 0.25 * std::max(floor, 1e-300)) {
      inconclusive = true;
    }
    floors << " delta=" << delta << ":floor=" << floor;
    log_delta.push_back(std::log(delta));
    log_floor.push_back(std::log(floor));
  }
  CheckReport row;
  row.name = "helper_floor_slope_delta";
  row.measured = ols_slope(log_delta, log_floor);
  row.target = 0.5;
  row.samples = trials * deltas.size() * iterations;
  row.passed = !inconclusive &&
               std::abs(row.measured - 0.5) <= config.helper_slope_tol;
  row.details = (inconclusive ? std::string("inconclusive (transient dominates)")
                              : std::string("ok")) +
                floors.str();
  return {row};
}

void write_report_csv(const std::vector<CheckReport>& rows,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report to '" + path + "'");
  out << "check,measured,target,passed,samples\n";
  char buf[64];
  for (const CheckReport& row : rows) {
    out << row.name << ",";
    std::snprintf(buf, sizeof buf, "%.17g", row.measured);
    out << buf << ",";
    std::snprintf(buf, sizeof buf, "%.17g", row.target);
    out << buf << "," << (row.passed ? 1 : 0) << "," << row.samples << "\n";
  }
}

}  // namespace mi2p
