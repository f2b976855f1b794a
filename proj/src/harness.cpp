#include "mi2p/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include "mi2p/errors.hpp"

namespace mi2p {

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

std::unique_ptr<ValueEstimator> make_estimator(const ExperimentConfig& config,
                                               const FiniteSumObjective& obj) {
  const HelperMode mode = config.helper_mode == "gaussian"
                              ? HelperMode::AdditiveGaussian
                              : HelperMode::AdditiveUniform;
  if (config.method == Method::Helper) {
    return std::make_unique<HelperEstimator>(HelperSpec{config.delta, mode});
  }
  if (config.method == Method::VrMi2P) {
    return std::make_unique<VrSymmetricEstimator>(config.batch,
                                                  config.epoch_len);
  }
  // Plain Mi2P: estimator selected by name.
  if (config.estimator == "minibatch") {
    return std::make_unique<MinibatchEstimator>(
        config.batch, config.batch == obj.components());
  }
  if (config.estimator == "exact") return std::make_unique<ExactEstimator>();
  if (config.estimator == "vr-sym") {
    return std::make_unique<VrSymmetricEstimator>(config.batch,
                                                  config.epoch_len);
  }
  if (config.estimator == "vr-snap") {
    return std::make_unique<VrTwoSnapshotEstimator>(config.batch,
                                                    config.epoch_len);
  }
  if (config.estimator == "helper") {
    return std::make_unique<HelperEstimator>(HelperSpec{config.delta, mode});
  }
  throw ConfigError("unknown estimator '" + config.estimator +
                    "' (expected minibatch|exact|vr-sym|vr-snap|helper)");
}

MomentumVariant method_momentum_variant(Method method) {
  switch (method) {
    case Method::MomentumHeavyBall:
      return MomentumVariant::HeavyBall;
    case Method::MomentumMvr:
      return MomentumVariant::Mvr;
    case Method::MomentumTransport:
      return MomentumVariant::Transport;
    default:
      throw ConfigError("not a momentum method");
  }
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "mi2p") return Method::Mi2P;
  if (name == "vr-mi2p" || name == "vr_mi2p") return Method::VrMi2P;
  if (name == "rsgf") return Method::Rsgf;
  if (name == "zocd") return Method::Zocd;
  if (name == "helper") return Method::Helper;
  if (name == "momentum-heavyball" || name == "momentum_heavyball") {
    return Method::MomentumHeavyBall;
  }
  if (name == "momentum-mvr" || name == "momentum_mvr") {
    return Method::MomentumMvr;
  }
  if (name == "momentum-transport" || name == "momentum_transport") {
    return Method::MomentumTransport;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

const char* method_name(Method method) {
  switch (method) {
    case Method::Mi2P:
      return "mi2p";
    case Method::VrMi2P:
      return "vr-mi2p";
    case Method::Rsgf:
      return "rsgf";
    case Method::Zocd:
      return "zocd";
    case Method::Helper:
      return "helper";
    case Method::MomentumHeavyBall:
      return "momentum-heavyball";
    case Method::MomentumMvr:
      return "momentum-mvr";
    case Method::MomentumTransport:
      return "momentum-transport";
  }
  return "?";
}

std::unique_ptr<FiniteSumObjective> load_objective(
    const ExperimentConfig& config) {
  if (config.dataset.rfind("quadratic", 0) == 0) {
    // "quadratic" or "quadratic:<d>,<noise>,<n>"
    std::size_t d = 30, n = 64;
    double noise = 0.5;
    const auto colon = config.dataset.find(':');
    if (colon != std::string::npos) {
      const std::string args = config.dataset.substr(colon + 1);
      if (std::sscanf(args.c_str(), "%zu,%lf,%zu", &d, &noise, &n) != 3) {
        throw ConfigError(
            "quadratic dataset expects quadratic:<d>,<noise>,<n>");
      }
    }
    RngStream rng = RngStream::derive(config.seed, 0, 0, StreamPurpose::Init);
    return std::make_unique<QuadraticObjective>(Point(d, 1.0), noise, n, rng);
  }
  Dataset data =
      config.dataset == "synthetic"
          ? synthetic_two_clusters(config.synth_n, config.synth_d, config.seed,
                                   config.standardize)
          : load_csv_dataset(config.dataset, config.standardize);
  return std::make_unique<LogisticObjective>(std::move(data.features),
                                             std::move(data.labels), data.d,
                                             config.lambda);
}

std::vector<RunRecord> run_one_trial(const ExperimentConfig& config,
                                     const FiniteSumObjective& obj, double eta,
                                     std::uint64_t trial,
                                     std::uint64_t budget_override) {
  const std::uint64_t budget =
      budget_override > 0 ? budget_override : config.budget;
  StopRule stop;
  stop.max_queries = budget;
  RunOptions options;
  options.seed = config.seed;
  options.trial = trial;
  options.record_grad_norm = config.record_grad_norm;
  const Point x0(obj.dim(), config.x0_value);

  switch (config.method) {
    case Method::Rsgf:
    case Method::Zocd: {
      SmoothingParams params;
      params.mu_fd =
          config.mu_fd > 0.0 ? config.mu_fd : default_mu_fd(obj.dim());
      params.step = eta;
      return run_baseline(config.method == Method::Rsgf ? BaselineKind::Rsgf
                                                        : BaselineKind::Zocd,
                          x0, obj, config.batch, params, stop, options);
    }
    case Method::MomentumHeavyBall:
    case Method::MomentumMvr:
    case Method::MomentumTransport: {
      const DirectionDistribution dist{
          parse_direction_kind(config.direction), obj.dim()};
      return run_momentum(x0, eta, method_momentum_variant(config.method),
                          config.beta, config.batch, obj, dist, stop, options);
    }
    default: {
      const DirectionDistribution dist{
          parse_direction_kind(config.direction), obj.dim()};
      auto estimator = make_estimator(config, obj);
      Plan plan;
      plan.eta = eta;
      plan.batch = config.batch;
      plan.epoch_len = config.epoch_len;
      return run_search(x0, plan, dist, *estimator, obj, stop, options);
    }
  }
}

double pilot_tune(const ExperimentConfig& config,
                  const FiniteSumObjective& obj) {
  if (config.eta != "pilot") {
    try {
      return std::stod(config.eta);
    } catch (const std::exception&) {
      throw ConfigError("eta must be numeric or 'pilot', got '" + config.eta +
                        "'");
    }
  }
  if (config.pilot_points == 0) throw ConfigError("pilot: empty grid");
  if (!(config.pilot_lo > 0.0) || !(config.pilot_hi >= config.pilot_lo)) {
    throw ConfigError("pilot: bad grid bounds");
  }
  const std::uint64_t pilot_budget = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(config.pilot_fraction *
                                    static_cast<double>(config.budget)));
  double best_eta = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
  std::ostringstream tried;
  for (std::size_t k = 0; k < config.pilot_points; ++k) {
    const double frac =
        config.pilot_points == 1
            ? 0.0
            : static_cast<double>(k) /
                  static_cast<double>(config.pilot_points - 1);
    const double eta =
        config.pilot_lo *
        std::pow(config.pilot_hi / config.pilot_lo, frac);
    double final_f = std::numeric_limits<double>::infinity();
    try {
      // Pilot trials live in their own trial namespace.
      const auto trace = run_one_trial(config, obj, eta,
                                       (1ull << 32) + k, pilot_budget);
      final_f = trace.back().f_true;
    } catch (const NumericalError&) {
      final_f = std::numeric_limits<double>::infinity();
    }
    tried << " " << eta << ":"
          << (std::isfinite(final_f) ? std::to_string(final_f) : "diverged");
    if (std::isfinite(final_f) && final_f < best_f) {
      best_f = final_f;
      best_eta = eta;
    }
  }
  if (!(best_eta > 0.0)) {
    throw ConfigError("pilot: every step-size candidate diverged; grid was" +
                      tried.str());
  }
  return best_eta;
}

std::vector<double> checkpoint_grid(std::uint64_t budget,
                                    std::size_t checkpoints) {
  if (checkpoints == 0) throw ConfigError("checkpoint grid needs >= 1 point");
  std::vector<double> grid(checkpoints, 0.0);
  for (std::size_t j = 0; j < checkpoints; ++j) {
    grid[j] = static_cast<double>(budget) *
              static_cast<double>(j + 1) / static_cast<double>(checkpoints);
  }
  return grid;
}

double interpolate_at(const std::vector<RunRecord>& trace, double query) {
  // Last value carried forward; the record at queries = 0 anchors the left.
  double value = trace.front().f_true;
  for (const RunRecord& rec : trace) {
    if (static_cast<double>(rec.queries + rec.helper_calls) <= query) {
      value = rec.f_true;
    } else {
      break;
    }
  }
  return value;
}

void write_trial_csv(const std::vector<RunRecord>& trace,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write trial CSV '" + path + "'");
  std::string body = "queries,f_true\n";
  for (const RunRecord& rec : trace) {
    body += std::to_string(rec.queries + rec.helper_calls);
    body += ",";
    append_double(body, rec.f_true);
    body += "\n";
  }
  out << body;
}

std::vector<std::pair<double, double>> read_trial_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read trial CSV '" + path + "'");
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError("malformed trial CSV row in '" + path + "'");
    }
    rows.emplace_back(std::stod(line.substr(0, comma)),
                      std::stod(line.substr(comma + 1)));
  }
  return rows;
}

AggregateCurve run_experiment(const ExperimentConfig& config,
                              const FiniteSumObjective& obj) {
  if (config.budget == 0) throw ConfigError("run_experiment: budget > 0");
  if (config.trials == 0) throw ConfigError("run_experiment: trials >= 1");
  const double eta = pilot_tune(config, obj);

  std::vector<std::vector<RunRecord>> traces(config.trials);
  const std::size_t threads =
      config.threads > 0
          ? config.threads
          : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (threads <= 1 || config.trials == 1) {
    for (std::size_t k = 0; k < config.trials; ++k) {
      traces[k] = run_one_trial(config, obj, eta, k);
    }
  } else {
    std::vector<std::future<void>> futures;
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::min(threads, config.trials);
    for (std::size_t w = 0; w < workers; ++w) {
      futures.push_back(std::async(std::launch::async, [&]() {
        while (true) {
          const std::size_t k = next.fetch_add(1);
          if (k >= config.trials) break;
          traces[k] = run_one_trial(config, obj, eta, k);
        }
      }));
    }
    for (auto& f : futures) f.get();
  }

  AggregateCurve curve;
  curve.label = method_name(config.method);
  curve.queries = checkpoint_grid(config.budget, config.checkpoints);
  curve.mean_f.assign(curve.queries.size(), 0.0);
  curve.sd_f.assign(curve.queries.size(), 0.0);
  for (std::size_t j = 0; j < curve.queries.size(); ++j) {
    double mean = 0.0;
    for (const auto& trace : traces) {
      mean += interpolate_at(trace, curve.queries[j]);
    }
    mean /= static_cast<double>(config.trials);
    double var = 0.0;
    for (const auto& trace : traces) {
      const double v = interpolate_at(trace, curve.queries[j]) - mean;
      var += v * v;
    }
    var /= std::max<double>(1.0, static_cast<double>(config.trials) - 1.0);
    curve.mean_f[j] = mean;
    curve.sd_f[j] = std::sqrt(var);
  }
  for (const auto& trace : traces) {
    curve.final_f.push_back(interpolate_at(trace, curve.queries.back()));
  }

  if (config.write_files) {
    std::filesystem::create_directories(config.out_dir);
    for (std::size_t k = 0; k < config.trials; ++k) {
      write_trial_csv(traces[k],
                      config.out_dir + "/" + curve.label + "_trial" +
                          std::to_string(k) + ".csv");
    }
    emit_plot_data({curve}, config.out_dir);
  }
  return curve;
}

AggregateCurve run_experiment(const ExperimentConfig& config) {
  const auto obj = load_objective(config);
  return run_experiment(config, *obj);
}

void emit_plot_data(const std::vector<AggregateCurve>& curves,
                    const std::string& dir) {
  if (curves.empty()) throw ConfigError("emit_plot_data: no curves");
  std::filesystem::create_directories(dir);
  for (const AggregateCurve& curve : curves) {
    std::ofstream out(dir + "/" + curve.label + "_agg.csv", std::ios::binary);
    if (!out) throw DataError("cannot write aggregate CSV in '" + dir + "'");
    std::string body = "queries,mean,lo,hi\n";
    for (std::size_t j = 0; j < curve.queries.size(); ++j) {
      append_double(body, curve.queries[j]);
      body += ",";
      append_double(body, curve.mean_f[j]);
      body += ",";
      append_double(body, curve.mean_f[j] - curve.sd_f[j]);
      body += ",";
      append_double(body, curve.mean_f[j] + curve.sd_f[j]);
      body += "\n";
    }
    out << body;
  }
  std::ofstream plot(dir + "/plot.py", std::ios::binary);
  if (!plot) throw DataError("cannot write plot stub in '" + dir + "'");
  plot << "#!/usr/bin/env python3\n"
          "\"\"\"Plot f(x) vs queries from the *_agg.csv files here.\"\"\"\n"
          "import glob, os\n"
          "import matplotlib\n"
          "matplotlib.use(\"Agg\")\n"
          "import matplotlib.pyplot as plt\n"
          "import csv\n\n"
          "here = os.path.dirname(os.path.abspath(__file__))\n"
          "for path in sorted(glob.glob(os.path.join(here, \"*_agg.csv\"))):\n"
          "    label = os.path.basename(path)[:-8]\n"
          "    q, mean, lo, hi = [], [], [], []\n"
          "    with open(path) as fh:\n"
          "        for row in csv.DictReader(fh):\n"
          "            q.append(float(row[\"queries\"]))\n"
          "            mean.append(float(row[\"mean\"]))\n"
          "            lo.append(float(row[\"lo\"]))\n"
          "            hi.append(float(row[\"hi\"]))\n"
          "    plt.plot(q, mean, label=label)\n"
          "    plt.fill_between(q, lo, hi, alpha=0.2)\n"
          "plt.xlabel(\"queries\")\n"
          "plt.ylabel(\"f(x)\")\n"
          "plt.legend()\n"
          "plt.savefig(os.path.join(here, \"curves.png\"), dpi=150)\n";
}

}  // namespace mi2p
