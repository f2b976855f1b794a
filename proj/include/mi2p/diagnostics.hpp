#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mi2p/directions.hpp"
#include "mi2p/objectives.hpp"
#include "mi2p/vec.hpp"

namespace mi2p {

// One row of the machine-readable verification report.
struct CheckReport {
  std::string name;
  double measured = 0.0;
  double target = 0.0;
  bool passed = false;
  std::uint64_t samples = 0;
  std::string details;
};

// Every tolerance used by the checks, in one place. Bound checks allow
// se_slack standard errors of Monte Carlo noise; slope checks are OLS fits
// on log-log grids.
struct DiagnosticsConfig {
  double se_slack = 3.0;
  double variance_slope_tol = 0.05;
  double case2_slope_tol = 0.10;
  double vr_slope_tol_m = 0.15;
  double vr_slope_tol_b = 0.10;
  double vr_slope_tol_eta = 0.15;
  double helper_slope_tol = 0.15;
  double vr_bound_fraction = 0.95;
};

// OLS slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

// One-step descent bound with the exact estimator:
//   E f(x_1) <= f(x) - (mu_D/2) eta ||grad f(x)|| + (L0/2) eta^2.
// Refuses (ConfigError) when eta exceeds the mu_D/L1 cap.
CheckReport check_descent_lemma(const FiniteSumObjective& obj,
                                const DirectionDistribution& dist, double eta,
                                const Point& x, std::size_t reps,
                                const TheoryConstants& constants,
                                std::uint64_t seed,
                                const DiagnosticsConfig& config = {});

// Var(batch mean) = Var(single)/b: exact by enumeration for n <= 6, and as a
// log-log slope of -1 in b on the provided objective.
std::vector<CheckReport> check_variance_lemma(const FiniteSumObjective& obj,
                                              const Point& x,
                                              const std::vector<std::size_t>& b_grid,
                                              std::size_t reps,
                                              std::uint64_t seed,
                                              const DiagnosticsConfig& config = {});

// Gradient-noise projection E|<mean_B grad f_xi - grad f, s>| = O(sigma_1 /
// sqrt(d b)). The b slope is measured on the provided objective; the d slope
// on an internal quadratic family with constant sigma_1 across d.
std::vector<CheckReport> check_case2_projection(const FiniteSumObjective& obj,
                                                const Point& x,
                                                const std::vector<std::size_t>& b_grid,
                                                const std::vector<std::size_t>& d_grid,
                                                std::size_t reps,
                                                std::uint64_t seed,
                                                const DiagnosticsConfig& config = {});

// Mid-epoch variance-reduction error against a frozen snapshot state with the
// iterate displaced m*eta from the snapshot (the drift scale the epoch bound
// allows). Measures the snapshot-relative residual
//   sum_{+-} E | mean_B [ (f_xi - f)(x^{+-}) - (f_xi - f)(snap^{+-}) ] |,
// which bounds the pair-difference error and carries the m, eta, 1/sqrt(b)
// scaling; checks the absolute bound 4 eta G m / sqrt(b) with the measured G.
std::vector<CheckReport> check_vr_error_scaling(const FiniteSumObjective& obj,
                                                double eta,
                                                const std::vector<std::size_t>& m_grid,
                                                const std::vector<std::size_t>& b_grid,
                                                std::size_t reps,
                                                double g_measured,
                                                std::uint64_t seed,
                                                const DiagnosticsConfig& config = {});

// Gradient-norm floor of helper-feedback runs versus delta: log-log slope
// 0.5. Each delta runs at the step size sqrt(2 delta / L0) from the
// step-size optimization, which makes the delta term the binding one.
std::vector<CheckReport> check_helper_floor(const FiniteSumObjective& obj,
                                            const DirectionDistribution& dist,
                                            const std::vector<double>& deltas,
                                            double l0, const Point& x0,
                                            std::uint64_t iterations,
                                            std::size_t trials,
                                            std::uint64_t seed,
                                            const DiagnosticsConfig& config = {});

void write_report_csv(const std::vector<CheckReport>& rows,
                      const std::string& path);

}  // namespace mi2p
