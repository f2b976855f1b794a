#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mi2p/baselines.hpp"
#include "mi2p/dataset.hpp"
#include "mi2p/estimators.hpp"
#include "mi2p/momentum.hpp"
#include "mi2p/objectives.hpp"
#include "mi2p/search.hpp"

namespace mi2p {

enum class Method {
  Mi2P,
  VrMi2P,
  Rsgf,
  Zocd,
  Helper,
  MomentumHeavyBall,
  MomentumMvr,
  MomentumTransport,
};

Method parse_method(std::string_view name);
const char* method_name(Method method);

struct ExperimentConfig {
  Method method = Method::Mi2P;
  std::string estimator = "minibatch";  // mi2p: minibatch|exact|vr-sym|vr-snap|helper
  std::size_t batch = 10;
  std::uint64_t budget = 60000;  // total queries per trial
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  std::string dataset = "synthetic";  // path or "synthetic"
  bool standardize = true;
  std::size_t synth_n = 455;
  std::size_t synth_d = 30;
  double lambda = 1.0;
  std::string direction = "sphere";
  std::string eta = "pilot";  // numeric string or "pilot"
  double mu_fd = 0.0;         // 0 = 1e-4 sqrt(d)
  std::size_t epoch_len = 8;  // m, VR estimators
  double delta = 0.0;         // helper
  std::string helper_mode = "uniform";  // uniform|gaussian
  double beta = 1.0;          // momentum
  std::string out_dir = "out";
  std::size_t checkpoints = 100;
  double pilot_lo = 1e-3;
  double pilot_hi = 1.0;
  std::size_t pilot_points = 7;
  double pilot_fraction = 0.1;
  std::size_t threads = 0;  // 0 = hardware concurrency
  bool record_grad_norm = false;
  bool write_files = true;
  double x0_value = 0.0;  // every run starts at x0_value * ones(d)
};

struct AggregateCurve {
  std::string label;
  std::vector<double> queries;  // checkpoint grid
  std::vector<double> mean_f;
  std::vector<double> sd_f;
  std::vector<double> final_f;  // per trial
};

// Objective selected by the config (CSV path, "synthetic" logistic clusters,
// or "quadratic:<d>,<noise>,<n>" for the lab objectives).
std::unique_ptr<FiniteSumObjective> load_objective(const ExperimentConfig& config);

// Single budgeted trial of the configured method; shared by run_experiment
// and the pilot phase.
std::vector<RunRecord> run_one_trial(const ExperimentConfig& config,
                                     const FiniteSumObjective& obj, double eta,
                                     std::uint64_t trial,
                                     std::uint64_t budget_override = 0);

// Grid pilot: one short run (pilot_fraction of the budget) per candidate,
// winner = least final f. Throws ConfigError when every candidate diverges.
double pilot_tune(const ExperimentConfig& config,
                  const FiniteSumObjective& obj);

// trials seeded runs to budget exhaustion, aligned on the checkpoint grid by
// last-value interpolation. Writes <out>/<method>_trial<k>.csv and
// <out>/<method>_agg.csv when write_files is set.
AggregateCurve run_experiment(const ExperimentConfig& config,
                              const FiniteSumObjective& obj);
AggregateCurve run_experiment(const ExperimentConfig& config);

// One CSV per curve (queries, mean, mean-sd, mean+sd) plus a plot stub.
void emit_plot_data(const std::vector<AggregateCurve>& curves,
                    const std::string& dir);

// Step interpolation (last value carried forward) onto a query grid.
double interpolate_at(const std::vector<RunRecord>& trace, double query);

std::vector<double> checkpoint_grid(std::uint64_t budget,
                                    std::size_t checkpoints);

void write_trial_csv(const std::vector<RunRecord>& trace,
                     const std::string& path);
std::vector<std::pair<double, double>> read_trial_csv(const std::string& path);

}  // namespace mi2p
