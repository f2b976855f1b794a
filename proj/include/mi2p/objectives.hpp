#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "mi2p/rng.hpp"
#include "mi2p/vec.hpp"

namespace mi2p {

// Problem constants feeding the planner formulas. All entries are
// empirical lower-bound estimates unless the objective knows them exactly.
struct TheoryConstants {
  double l0 = 0.0;      // smoothness intercept
  double l1 = 0.0;      // smoothness slope in ||grad f||
  double g = 0.0;       // component Lipschitz bound
  double sigma0 = 0.0;  // value-noise bound
  double sigma1 = 0.0;  // gradient-noise bound
  double f0 = 0.0;      // initial gap f(x0) - f*
  double mu_d = 0.0;    // exploration constant of the direction law
  std::size_t dim = 0;
};

// Finite-sum objective f(x) = (1/n) sum_i f_i(x). Component gradients exist
// for diagnostics only; optimizers never touch them.
class FiniteSumObjective {
 public:
  virtual ~FiniteSumObjective() = default;

  virtual std::size_t components() const = 0;
  virtual std::size_t dim() const = 0;
  virtual double component_value(std::size_t i, const Point& x) const = 0;
  virtual void component_gradient(std::size_t i, const Point& x,
                                  Point& out) const = 0;

  virtual double full_value(const Point& x) const;
  virtual void full_gradient(const Point& x, Point& out) const;

  // Exact minimum value when known (quadratic: 0), otherwise unset.
  virtual std::optional<double> known_f_star() const { return std::nullopt; }

  Point full_gradient(const Point& x) const {
    Point g(dim(), 0.0);
    full_gradient(x, g);
    return g;
  }
};

// l2-regularized logistic loss,
//   f_i(x) = log(1 + exp(-y_i <a_i, x>)) + (lambda / 2n) ||x||^2,
// with the regularizer distributed into every component so uniform component
// sampling stays unbiased.
class LogisticObjective final : public FiniteSumObjective {
 public:
  LogisticObjective(std::vector<double> features_row_major,
                    std::vector<double> labels, std::size_t dim,
                    double lambda);

  std::size_t components() const override { return n_; }
  std::size_t dim() const override { return d_; }
  double component_value(std::size_t i, const Point& x) const override;
  void component_gradient(std::size_t i, const Point& x,
                          Point& out) const override;
  double full_value(const Point& x) const override;
  void full_gradient(const Point& x, Point& out) const override;

  double lambda() const { return lambda_; }

 private:
  double margin(std::size_t i, const Point& x) const;

  std::vector<double> features_;  // n x d, row major
  std::vector<double> labels_;    // +-1
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  double lambda_ = 0.0;
};

// Controlled test objective with a known optimum:
//   f_i(x) = 1/2 x' diag(a) x + <b_i, x>,  sum_i b_i = 0,
// so f(x) = 1/2 x' diag(a) x, f* = 0 at x = 0, L0 = max a, L1 = 0. The b_i
// are calibrated so the component-value standard deviation at ||x|| = 1
// equals noise_sigma.
class QuadraticObjective final : public FiniteSumObjective {
 public:
  QuadraticObjective(Point a_diag, double noise_sigma, std::size_t n,
                     RngStream& rng);

  std::size_t components() const override { return n_; }
  std::size_t dim() const override { return a_diag_.size(); }
  double component_value(std::size_t i, const Point& x) const override;
  void component_gradient(std::size_t i, const Point& x,
                          Point& out) const override;
  double full_value(const Point& x) const override;
  void full_gradient(const Point& x, Point& out) const override;
  std::optional<double> known_f_star() const override { return 0.0; }

  double l0() const;
  double noise_sigma() const { return noise_sigma_; }

 private:
  Point a_diag_;
  std::vector<double> offsets_;  // n x d, row major
  std::size_t n_ = 0;
  double noise_sigma_ = 0.0;
};

// Construction-checked factories.
std::unique_ptr<LogisticObjective> make_logistic(
    const std::vector<Point>& feature_rows, const std::vector<double>& labels,
    double lambda);

std::unique_ptr<QuadraticObjective> make_quadratic(const Point& a_diag,
                                                   double noise_sigma,
                                                   std::size_t n,
                                                   RngStream& rng);

struct EstimateConstantsOptions {
  std::size_t probe_points = 64;
  double probe_radius = 2.0;
  Point x0;                          // defaults to the origin
  std::optional<double> f_star;      // overrides known_f_star / GD estimate
  std::size_t component_samples = 0; // 0 = all components at each probe
};

// Empirical (lower-bound) estimates of the constants entering the planner.
// mu_d is filled with the sqrt(2/(pi d)) fallback; callers holding a
// direction distribution can overwrite it with estimate_mu.
TheoryConstants estimate_constants(const FiniteSumObjective& obj,
                                   std::size_t probe_points, RngStream& rng);
TheoryConstants estimate_constants(const FiniteSumObjective& obj,
                                   const EstimateConstantsOptions& options,
                                   RngStream& rng);

// Gradient-descent estimate of f* for objectives without a closed form.
// Diagnostics only; never charged to any optimizer budget.
double estimate_f_star(const FiniteSumObjective& obj, const Point& x0,
                       std::size_t iters = 200);

}  // namespace mi2p
