// Command-line harness: run | sweep-batch | sweep-beta | verify | plan.
// Exit codes: 0 ok, 1 config error, 2 data error, 3 numerical abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mi2p/diagnostics.hpp"
#include "mi2p/errors.hpp"
#include "mi2p/harness.hpp"

namespace {

using namespace mi2p;

// Flat key=value config support: values are injected as flags right after
// the subcommand token, and keys the user already passed as flags are
// skipped, so flags always win. '#' starts a comment.
std::vector<std::pair<std::string, std::string>> parse_flat_config(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> kvs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config '" + path + "' line " +
                        std::to_string(lineno) + ": expected key=value");
    }
    kvs.emplace_back(trim(stripped.substr(0, eq)),
                     trim(stripped.substr(eq + 1)));
  }
  return kvs;
}

std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  for (std::size_t i = 1; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + i);
    } else {
      ++i;
    }
  }
  if (config_path.empty()) return args;
  if (args.size() < 2 || args[1].empty() || args[1][0] == '-') {
    throw ConfigError("--config requires a subcommand");
  }
  std::vector<std::string> user_flags;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i].rfind("--", 0) == 0) {
      user_flags.push_back(args[i].substr(0, args[i].find('=')));
    }
  }
  std::vector<std::string> injected;
  for (const auto& [key, value] : parse_flat_config(config_path)) {
    const std::string flag = "--" + key;
    bool overridden = false;
    for (const auto& uf : user_flags) overridden = overridden || uf == flag;
    if (overridden) continue;
    const bool is_switch =
        key == "no-standardize" || key == "fast" || key == "estimate";
    if (is_switch) {
      if (value == "1" || value == "true" || value == "yes" || value == "on") {
        injected.push_back(flag);
      }
      continue;
    }
    injected.push_back(flag);
    const bool is_list =
        key == "batches" || key == "methods" || key == "betas";
    if (is_list) {
      // Lists may be comma- or space-separated.
      std::string token;
      for (char c : value + ",") {
        if (c == ',' || c == ' ' || c == '\t') {
          if (!token.empty()) injected.push_back(token);
          token.clear();
        } else {
          token += c;
        }
      }
    } else {
      injected.push_back(value);
    }
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

struct CliOptions {
  ExperimentConfig config;
  std::string config_file;  // consumed before CLI11 parsing
  std::string method = "mi2p";
  // sweep-batch
  std::vector<std::size_t> batches = {1, 5, 10, 25, 50, 100};
  std::vector<std::string> methods = {"mi2p", "rsgf", "zocd"};
  // sweep-beta
  std::vector<double> betas = {0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
  std::string variant = "heavyball";
  std::uint64_t iterations = 2000;
  // plan
  std::string regime = "avg-smooth";
  double epsilon = 0.1;
  std::size_t plan_n = 0;
  TheoryConstants constants;
  bool estimate = false;
  // verify
  bool fast = false;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_file,
                  "flat key=value config file (flags win)");
  cmd->add_option("--batch", opt.config.batch, "minibatch size b");
  cmd->add_option("--budget", opt.config.budget, "query budget per trial");
  cmd->add_option("--trials", opt.config.trials, "number of seeded trials");
  cmd->add_option("--seed", opt.config.seed, "master seed");
  cmd->add_option("--dataset", opt.config.dataset,
                  "CSV path, 'synthetic', or quadratic:<d>,<noise>,<n>");
  cmd->add_option("--lambda", opt.config.lambda, "l2 regularization");
  cmd->add_option("--direction", opt.config.direction,
                  "sphere|gaussian|coordinate");
  cmd->add_option("--eta", opt.config.eta, "step size or 'pilot'");
  cmd->add_option("--mu-fd", opt.config.mu_fd,
                  "finite-difference radius (0 = 1e-4 sqrt(d))");
  cmd->add_option("--m", opt.config.epoch_len, "VR epoch length");
  cmd->add_option("--delta", opt.config.delta, "helper inexactness");
  cmd->add_option("--helper-mode", opt.config.helper_mode, "uniform|gaussian");
  cmd->add_option("--beta", opt.config.beta, "momentum mixing weight");
  cmd->add_option("--out", opt.config.out_dir, "output directory");
  cmd->add_option("--estimator", opt.config.estimator,
                  "mi2p estimator: minibatch|exact|vr-sym|vr-snap|helper");
  cmd->add_option("--threads", opt.config.threads, "0 = hardware");
  cmd->add_option("--checkpoints", opt.config.checkpoints,
                  "aggregation grid size");
  cmd->add_flag("--no-standardize",
                [&opt](std::int64_t) { opt.config.standardize = false; },
                "skip feature standardization");
  cmd->add_option("--synth-n", opt.config.synth_n, "synthetic dataset rows");
  cmd->add_option("--synth-d", opt.config.synth_d, "synthetic dataset dim");
}

int cmd_run(CliOptions& opt) {
  opt.config.method = parse_method(opt.method);
  const AggregateCurve curve = run_experiment(opt.config);
  std::printf("%s: %zu trials, final f = %.6g (sd %.6g), files in %s\n",
              curve.label.c_str(), curve.final_f.size(),
              curve.mean_f.back(), curve.sd_f.back(),
              opt.config.out_dir.c_str());
  return 0;
}

int cmd_sweep_batch(CliOptions& opt) {
  const auto obj = load_objective(opt.config);
  std::filesystem::create_directories(opt.config.out_dir);
  std::ofstream summary(opt.config.out_dir + "/summary.csv");
  summary << "b,method,eta,mean_final_f,sd_final_f\n";
  for (std::size_t b : opt.batches) {
    std::vector<AggregateCurve> curves;
    for (const std::string& method : opt.methods) {
      ExperimentConfig config = opt.config;
      config.method = parse_method(method);
      config.batch = b;
      config.out_dir = opt.config.out_dir + "/b" + std::to_string(b);
      const double eta = pilot_tune(config, *obj);
      config.eta = std::to_string(eta);
      AggregateCurve curve = run_experiment(config, *obj);
      summary << b << "," << method << "," << eta << ","
              << curve.mean_f.back() << "," << curve.sd_f.back() << "\n";
      curves.push_back(std::move(curve));
    }
    emit_plot_data(curves, opt.config.out_dir + "/b" + std::to_string(b));
    std::printf("b=%zu done\n", b);
  }
  return 0;
}

int cmd_sweep_beta(CliOptions& opt) {
  const auto obj = load_objective(opt.config);
  const DirectionDistribution dist{parse_direction_kind(opt.config.direction),
                                   obj->dim()};
  MomentumVariant variant = MomentumVariant::HeavyBall;
  if (opt.variant == "mvr") variant = MomentumVariant::Mvr;
  else if (opt.variant == "transport") variant = MomentumVariant::Transport;
  else if (opt.variant != "heavyball") {
    throw ConfigError("unknown momentum variant '" + opt.variant + "'");
  }
  double eta = 0.05;
  if (opt.config.eta != "pilot") eta = std::stod(opt.config.eta);
  const auto rows =
      beta_sweep(*obj, dist, eta, opt.config.batch, opt.iterations, variant,
                 opt.betas, opt.config.trials, opt.config.seed);
  std::filesystem::create_directories(opt.config.out_dir);
  std::ofstream out(opt.config.out_dir + "/beta_sweep.csv");
  out << "beta,mean_final_f,sd_final_f\n";
  for (const auto& row : rows) {
    out << row.beta << "," << row.mean_final_f << "," << row.sd_final_f
        << "\n";
    std::printf("beta=%.3f mean_final_f=%.6g sd=%.6g\n", row.beta,
                row.mean_final_f, row.sd_final_f);
  }
  return 0;
}

int cmd_verify(CliOptions& opt) {
  const std::size_t reps = opt.fast ? 2000 : 10000;
  std::vector<CheckReport> rows;

  {  // Descent bound on a known quadratic.
    RngStream rng(7);
    QuadraticObjective quad(Point(10, 1.0), 0.0, 8, rng);
    const DirectionDistribution sphere{DirectionKind::UnitSphere, 10};
    TheoryConstants constants;
    constants.dim = 10;
    constants.l0 = 1.0;
    constants.l1 = 0.0;
    RngStream mu_rng(11);
    constants.mu_d = estimate_mu(sphere, Point{1.0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
                                 200000, mu_rng);
    Point x(10, 0.0);
    RngStream xr(13);
    for (double& v : x) v = xr.normal();
    rows.push_back(check_descent_lemma(quad, sphere, 0.01, x, reps, constants,
                                       opt.config.seed));
  }

  const auto logistic = [&]() {
    ExperimentConfig config = opt.config;
    config.dataset = "synthetic";
    return load_objective(config);
  }();
  Point probe(logistic->dim(), 0.0);
  {
    RngStream xr(29);
    for (double& v : probe) v = 0.3 * xr.normal();
  }

  {
    auto vrows = check_variance_lemma(*logistic, probe, {1, 4, 16, 64},
                                      opt.fast ? 2000 : 10000,
                                      opt.config.seed);
    rows.insert(rows.end(), vrows.begin(), vrows.end());
  }
  {
    auto crows = check_case2_projection(*logistic, probe, {1, 4, 16, 64},
                                        {4, 8, 16, 32, 64},
                                        opt.fast ? 500 : 4000,
                                        opt.config.seed);
    rows.insert(rows.end(), crows.begin(), crows.end());
  }
  {
    RngStream cr(31);
    const TheoryConstants constants =
        estimate_constants(*logistic, 32, cr);
    auto vrows = check_vr_error_scaling(*logistic, 0.05, {2, 4, 8, 16},
                                        {4, 16, 64, 256},
                                        opt.fast ? 200 : 600, constants.g,
                                        opt.config.seed);
    rows.insert(rows.end(), vrows.begin(), vrows.end());
  }
  {
    RngStream rng(37);
    QuadraticObjective quad(Point(30, 1.0), 0.0, 8, rng);
    const DirectionDistribution sphere{DirectionKind::UnitSphere, 30};
    auto hrows = check_helper_floor(quad, sphere,
                                    {1e-4, 1e-3, 1e-2, 1e-1}, 1.0,
                                    zeros(30), opt.fast ? 8000 : 20000,
                                    opt.fast ? 2 : 4, opt.config.seed);
    rows.insert(rows.end(), hrows.begin(), hrows.end());
  }

  std::filesystem::create_directories(opt.config.out_dir);
  write_report_csv(rows, opt.config.out_dir + "/report.csv");
  bool all_passed = true;
  for (const CheckReport& row : rows) {
    std::printf("%-28s measured=%-12.5g target=%-12.5g %s\n", row.name.c_str(),
                row.measured, row.target, row.passed ? "pass" : "FAIL");
    all_passed = all_passed && row.passed;
  }
  std::printf("report: %s/report.csv\n", opt.config.out_dir.c_str());
  return all_passed ? 0 : 3;
}

int cmd_plan(CliOptions& opt) {
  PlanRegime regime;
  if (opt.regime == "avg-smooth") regime = PlanRegime::AvgSmooth;
  else if (opt.regime == "sample-smooth") regime = PlanRegime::SampleSmooth;
  else if (opt.regime == "finite-sum-vr") regime = PlanRegime::FiniteSumVR;
  else if (opt.regime == "helper") regime = PlanRegime::Helper;
  else throw ConfigError("unknown regime '" + opt.regime + "'");

  TheoryConstants constants = opt.constants;
  std::size_t n = opt.plan_n;
  if (opt.estimate) {
    const auto obj = load_objective(opt.config);
    RngStream rng =
        RngStream::derive(opt.config.seed, 0, 0, StreamPurpose::Probe);
    constants = estimate_constants(*obj, 64, rng);
    const DirectionDistribution dist{
        parse_direction_kind(opt.config.direction), obj->dim()};
    RngStream mu_rng =
        RngStream::derive(opt.config.seed, 1, 0, StreamPurpose::Probe);
    Point e1(obj->dim(), 0.0);
    e1[0] = 1.0;
    constants.mu_d = estimate_mu(dist, e1, 200000, mu_rng);
    if (n == 0) n = obj->components();
  }
  const Plan plan =
      plan_parameters(regime, constants, opt.epsilon, n, opt.config.delta);
  const std::string text = format_plan(plan);
  std::filesystem::create_directories(opt.config.out_dir);
  std::ofstream out(opt.config.out_dir + "/plan.txt");
  out << "regime=" << plan_regime_name(regime) << "\n" << text;
  std::fputs(text.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliOptions opt;
  CLI::App app{"stochastic random search experiment harness"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "one method, budgeted trials");
  run->add_option("--method", opt.method,
                  "mi2p|vr-mi2p|rsgf|zocd|helper|momentum-*");
  add_common_flags(run, opt);

  CLI::App* sweep_batch =
      app.add_subcommand("sweep-batch", "batch-size sweep across methods");
  sweep_batch->add_option("--batches", opt.batches, "batch sizes");
  sweep_batch->add_option("--methods", opt.methods, "methods to compare");
  add_common_flags(sweep_batch, opt);

  CLI::App* sweep_beta =
      app.add_subcommand("sweep-beta", "momentum beta sweep");
  sweep_beta->add_option("--betas", opt.betas, "beta grid in (0,1]");
  sweep_beta->add_option("--variant", opt.variant,
                         "heavyball|mvr|transport");
  sweep_beta->add_option("--iterations", opt.iterations, "iterations per run");
  add_common_flags(sweep_beta, opt);

  CLI::App* verify =
      app.add_subcommand("verify", "run the lemma checks, emit report.csv");
  verify->add_flag("--fast", opt.fast, "reduced sample counts");
  add_common_flags(verify, opt);

  CLI::App* plan = app.add_subcommand("plan", "theorem-based parameter plan");
  plan->add_option("--regime", opt.regime,
                   "avg-smooth|sample-smooth|finite-sum-vr|helper");
  plan->add_option("--epsilon", opt.epsilon, "target accuracy");
  plan->add_option("--n", opt.plan_n, "component count");
  plan->add_option("--l0", opt.constants.l0, "L0");
  plan->add_option("--l1", opt.constants.l1, "L1");
  plan->add_option("--g", opt.constants.g, "G");
  plan->add_option("--sigma0", opt.constants.sigma0, "sigma0");
  plan->add_option("--sigma1", opt.constants.sigma1, "sigma1");
  plan->add_option("--f0", opt.constants.f0, "initial gap F0");
  plan->add_option("--mu-d", opt.constants.mu_d, "exploration constant");
  plan->add_option("--dim", opt.constants.dim, "dimension d");
  plan->add_flag("--estimate", opt.estimate,
                 "estimate constants from the configured dataset");
  add_common_flags(plan, opt);

  try {
    std::vector<std::string> args = expand_config_args(argc, argv);
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (run->parsed()) return cmd_run(opt);
    if (sweep_batch->parsed()) return cmd_sweep_batch(opt);
    if (sweep_beta->parsed()) return cmd_sweep_beta(opt);
    if (verify->parsed()) return cmd_verify(opt);
    if (plan->parsed()) return cmd_plan(opt);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return 3;
  }
  return 0;
}
