#include "mi2p/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mi2p/directions.hpp"
#include "mi2p/errors.hpp"

namespace mi2p {

namespace {

// log(1 + exp(t)) without overflow for large |t|.
double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double FiniteSumObjective::full_value(const Point& x) const {
  double acc = 0.0;
  const std::size_t n = components();
  for (std::size_t i = 0; i < n; ++i) acc += component_value(i, x);
  return acc / static_cast<double>(n);
}

void FiniteSumObjective::full_gradient(const Point& x, Point& out) const {
  const std::size_t n = components();
  out.assign(dim(), 0.0);
  Point g(dim(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    component_gradient(i, x, g);
    axpy(1.0, g, out);
  }
  scale(1.0 / static_cast<double>(n), out);
}

LogisticObjective::LogisticObjective(std::vector<double> features_row_major,
                                     std::vector<double> labels,
                                     std::size_t dim, double lambda)
    : features_(std::move(features_row_major)),
      labels_(std::move(labels)),
      n_(labels_.size()),
      d_(dim),
      lambda_(lambda) {
  if (n_ == 0) throw DataError("logistic objective: empty dataset");
  if (features_.size() != n_ * d_) {
    throw DataError("logistic objective: feature matrix is not n x d");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (labels_[i] != 1.0 && labels_[i] != -1.0) {
      throw DataError("logistic objective: label at row " + std::to_string(i) +
                      " is not +-1");
    }
  }
  if (lambda_ < 0.0) throw ConfigError("logistic objective: lambda < 0");
}

double LogisticObjective::margin(std::size_t i, const Point& x) const {
  const double* row = features_.data() + i * d_;
  double m = 0.0;
  for (std::size_t j = 0; j < d_; ++j) m += row[j] * x[j];
  return labels_[i] * m;
}

double LogisticObjective::component_value(std::size_t i, const Point& x) const {
  const double reg = 0.5 * lambda_ / static_cast<double>(n_) * dot(x, x);
  return softplus(-margin(i, x)) + reg;
}

void LogisticObjective::component_gradient(std::size_t i, const Point& x,
                                           Point& out) const {
  out.assign(d_, 0.0);
  const double* row = features_.data() + i * d_;
  const double w = -labels_[i] * sigmoid(-margin(i, x));
  for (std::size_t j = 0; j < d_; ++j) {
    out[j] = w * row[j] + lambda_ / static_cast<double>(n_) * x[j];
  }
}

double LogisticObjective::full_value(const Point& x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) acc += softplus(-margin(i, x));
  return acc / static_cast<double>(n_) +
         0.5 * lambda_ / static_cast<double>(n_) * dot(x, x);
}

void LogisticObjective::full_gradient(const Point& x, Point& out) const {
  out.assign(d_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = features_.data() + i * d_;
    const double w = -labels_[i] * sigmoid(-margin(i, x));
    for (std::size_t j = 0; j < d_; ++j) out[j] += w * row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t j = 0; j < d_; ++j) {
    out[j] = out[j] * inv_n + lambda_ * inv_n * x[j];
  }
}

QuadraticObjective::QuadraticObjective(Point a_diag, double noise_sigma,
                                       std::size_t n, RngStream& rng)
    : a_diag_(std::move(a_diag)), n_(n), noise_sigma_(noise_sigma) {
  if (n_ == 0) throw DataError("quadratic objective: n >= 1 required");
  if (a_diag_.empty()) throw ConfigError("quadratic objective: empty diagonal");
  for (double a : a_diag_) {
    if (!(a > 0.0)) {
      throw ConfigError("quadratic objective: diagonal entries must be > 0");
    }
  }
  if (noise_sigma_ < 0.0) {
    throw ConfigError("quadratic objective: noise_sigma < 0");
  }
  const std::size_t d = a_diag_.size();
  offsets_.assign(n_ * d, 0.0);
  if (noise_sigma_ > 0.0 && n_ > 1) {
    for (double& v : offsets_) v = rng.normal();
    // Center so the offsets sum to zero, then scale so the sphere-averaged
    // value variance at ||x|| = 1 equals noise_sigma^2:
    // E_x Var_i <b_i, x> = (1/d) (1/n) sum ||b_i||^2.
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n_; ++i) mean += offsets_[i * d + j];
      mean /= static_cast<double>(n_);
      for (std::size_t i = 0; i < n_; ++i) offsets_[i * d + j] -= mean;
    }
    double sq = 0.0;
    for (double v : offsets_) sq += v * v;
    if (sq > 0.0) {
      const double target =
          noise_sigma_ * noise_sigma_ * static_cast<double>(n_ * d);
      const double c = std::sqrt(target / sq);
      for (double& v : offsets_) v *= c;
    }
  }
}

double QuadraticObjective::component_value(std::size_t i, const Point& x) const {
  const std::size_t d = a_diag_.size();
  double q = 0.0;
  for (std::size_t j = 0; j < d; ++j) q += a_diag_[j] * x[j] * x[j];
  double lin = 0.0;
  const double* row = offsets_.data() + i * d;
  for (std::size_t j = 0; j < d; ++j) lin += row[j] * x[j];
  return 0.5 * q + lin;
}

void QuadraticObjective::component_gradient(std::size_t i, const Point& x,
                                            Point& out) const {
  const std::size_t d = a_diag_.size();
  out.assign(d, 0.0);
  const double* row = offsets_.data() + i * d;
  for (std::size_t j = 0; j < d; ++j) out[j] = a_diag_[j] * x[j] + row[j];
}

double QuadraticObjective::full_value(const Point& x) const {
  // Offsets sum to zero, so the mean is the pure quadratic.
  const std::size_t d = a_diag_.size();
  double q = 0.0;
  for (std::size_t j = 0; j < d; ++j) q += a_diag_[j] * x[j] * x[j];
  return 0.5 * q;
}

void QuadraticObjective::full_gradient(const Point& x, Point& out) const {
  const std::size_t d = a_diag_.size();
  out.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) out[j] = a_diag_[j] * x[j];
}

double QuadraticObjective::l0() const {
  return *std::max_element(a_diag_.begin(), a_diag_.end());
}

std::unique_ptr<LogisticObjective> make_logistic(
    const std::vector<Point>& feature_rows, const std::vector<double>& labels,
    double lambda) {
  if (feature_rows.empty()) throw DataError("make_logistic: empty dataset");
  if (feature_rows.size() != labels.size()) {
    throw DataError("make_logistic: feature/label count mismatch");
  }
  const std::size_t d = feature_rows.front().size();
  std::vector<double> flat;
  flat.reserve(feature_rows.size() * d);
  for (std::size_t i = 0; i < feature_rows.size(); ++i) {
    if (feature_rows[i].size() != d) {
      throw DataError("make_logistic: ragged feature row " + std::to_string(i));
    }
    flat.insert(flat.end(), feature_rows[i].begin(), feature_rows[i].end());
  }
  return std::make_unique<LogisticObjective>(std::move(flat), labels, d,
                                             lambda);
}

std::unique_ptr<QuadraticObjective> make_quadratic(const Point& a_diag,
                                                   double noise_sigma,
                                                   std::size_t n,
                                                   RngStream& rng) {
  return std::make_unique<QuadraticObjective>(a_diag, noise_sigma, n, rng);
}

double estimate_f_star(const FiniteSumObjective& obj, const Point& x0,
                       std::size_t iters) {
  Point x = x0.empty() ? zeros(obj.dim()) : x0;
  Point g(obj.dim(), 0.0);
  double fx = obj.full_value(x);
  double step = 1.0;
  for (std::size_t k = 0; k < iters; ++k) {
    obj.full_gradient(x, g);
    const double gn = norm2(g);
    if (gn < 1e-12) break;
    // Backtracking on the full objective.
    for (int ls = 0; ls < 40; ++ls) {
      Point y = added(x, -step, g);
      const double fy = obj.full_value(y);
      if (fy < fx - 0.25 * step * gn * gn) {
        x = std::move(y);
        fx = fy;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
  }
  return fx;
}

TheoryConstants estimate_constants(const FiniteSumObjective& obj,
                                   std::size_t probe_points, RngStream& rng) {
  EstimateConstantsOptions options;
  options.probe_points = probe_points;
  return estimate_constants(obj, options, rng);
}

TheoryConstants estimate_constants(const FiniteSumObjective& obj,
                                   const EstimateConstantsOptions& options,
                                   RngStream& rng) {
  if (options.probe_points < 2) {
    throw ConfigError("estimate_constants: probe_points >= 2 required");
  }
  const std::size_t d = obj.dim();
  const std::size_t n = obj.components();
  TheoryConstants c;
  c.dim = d;
  c.mu_d = mu_fallback(d);

  const std::size_t comp_samples =
      options.component_samples == 0
          ? n
          : std::min<std::size_t>(options.component_samples, n);

  // Least squares of ||grad f(x) - grad f(y)|| / ||x - y|| against
  // ||grad f(x)|| over random probe pairs gives (l0, l1).
  double sxx = 0.0, sx = 0.0, sy = 0.0, sxy = 0.0;
  std::size_t count = 0;
  double g_max = 0.0, sigma0_sq_max = 0.0, sigma1_sq_max = 0.0;
  Point x(d, 0.0), y(d, 0.0), gx(d, 0.0), gy(d, 0.0), gi(d, 0.0), diff(d, 0.0);
  for (std::size_t k = 0; k < options.probe_points; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = rng.normal() * options.probe_radius;
      y[j] = x[j] + rng.normal() * options.probe_radius * 0.25;
    }
    obj.full_gradient(x, gx);
    obj.full_gradient(y, gy);
    diff = gx;
    axpy(-1.0, gy, diff);
    Point dxy = x;
    axpy(-1.0, y, dxy);
    const double dist = norm2(dxy);
    if (dist > 1e-12) {
      const double ratio = norm2(diff) / dist;
      const double gn = norm2(gx);
      sxx += gn * gn;
      sx += gn;
      sy += ratio;
      sxy += gn * ratio;
      ++count;
    }

    const double fx = obj.full_value(x);
    double var0 = 0.0, var1 = 0.0;
    for (std::size_t t = 0; t < comp_samples; ++t) {
      const std::size_t i =
          comp_samples == n ? t : rng.uniform_index(n);
      const double dv = obj.component_value(i, x) - fx;
      var0 += dv * dv;
      obj.component_gradient(i, x, gi);
      g_max = std::max(g_max, norm2(gi));
      axpy(-1.0, gx, gi);
      var1 += dot(gi, gi);
    }
    var0 /= static_cast<double>(comp_samples);
    var1 /= static_cast<double>(comp_samples);
    sigma0_sq_max = std::max(sigma0_sq_max, var0);
    sigma1_sq_max = std::max(sigma1_sq_max, var1);
  }

  if (count >= 2) {
    const double nn = static_cast<double>(count);
    const double denom = nn * sxx - sx * sx;
    if (std::abs(denom) > 1e-12) {
      c.l1 = std::max(0.0, (nn * sxy - sx * sy) / denom);
      c.l0 = std::max(0.0, (sy - c.l1 * sx) / nn);
    } else {
      c.l0 = std::max(0.0, sy / nn);
    }
  }
  c.g = g_max;
  c.sigma0 = std::sqrt(sigma0_sq_max);
  c.sigma1 = std::sqrt(sigma1_sq_max);

  const Point x0 = options.x0.empty() ? zeros(d) : options.x0;
  double f_star;
  if (options.f_star.has_value()) {
    f_star = *options.f_star;
  } else if (auto known = obj.known_f_star(); known.has_value()) {
    f_star = *known;
  } else {
    f_star = estimate_f_star(obj, x0);
  }
  c.f0 = std::max(0.0, obj.full_value(x0) - f_star);
  return c;
}

}  // namespace mi2p
