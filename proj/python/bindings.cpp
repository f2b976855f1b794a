#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

#include "mi2p/baselines.hpp"
#include "mi2p/dataset.hpp"
#include "mi2p/diagnostics.hpp"
#include "mi2p/errors.hpp"
#include "mi2p/harness.hpp"
#include "mi2p/momentum.hpp"

namespace py = pybind11;
using namespace mi2p;

namespace {

DirectionDistribution dist_from(const std::string& kind, std::size_t dim) {
  return make_distribution(parse_direction_kind(kind), dim);
}

std::unique_ptr<ValueEstimator> estimator_from(
    const std::string& name, std::size_t b, std::size_t m, double delta,
    const std::string& helper_mode, std::size_t n) {
  const HelperMode mode = helper_mode == "gaussian"
                              ? HelperMode::AdditiveGaussian
                              : HelperMode::AdditiveUniform;
  if (name == "minibatch") {
    return std::make_unique<MinibatchEstimator>(b, b == n);
  }
  if (name == "exact") return std::make_unique<ExactEstimator>();
  if (name == "vr-sym") return std::make_unique<VrSymmetricEstimator>(b, m);
  if (name == "vr-snap") return std::make_unique<VrTwoSnapshotEstimator>(b, m);
  if (name == "helper") {
    return std::make_unique<HelperEstimator>(HelperSpec{delta, mode});
  }
  throw ConfigError("unknown estimator '" + name + "'");
}

PlanRegime regime_from(const std::string& name) {
  if (name == "avg-smooth") return PlanRegime::AvgSmooth;
  if (name == "sample-smooth") return PlanRegime::SampleSmooth;
  if (name == "finite-sum-vr") return PlanRegime::FiniteSumVR;
  if (name == "helper") return PlanRegime::Helper;
  throw ConfigError("unknown plan regime '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_mi2p, m) {
  m.doc() = "Stochastic random search (sign-of-difference two-point) toolkit";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericalError>(m, "NumericalError");

  py::class_<FiniteSumObjective, std::shared_ptr<FiniteSumObjective>>(
      m, "FiniteSumObjective")
      .def("components", &FiniteSumObjective::components)
      .def("dim", &FiniteSumObjective::dim)
      .def("component_value", &FiniteSumObjective::component_value)
      .def("full_value", &FiniteSumObjective::full_value)
      .def("full_gradient",
           [](const FiniteSumObjective& obj, const Point& x) {
             Point g(obj.dim(), 0.0);
             obj.full_gradient(x, g);
             return g;
           })
      .def("component_gradient",
           [](const FiniteSumObjective& obj, std::size_t i, const Point& x) {
             Point g(obj.dim(), 0.0);
             obj.component_gradient(i, x, g);
             return g;
           });

  m.def("make_logistic",
        [](const std::vector<Point>& rows, const std::vector<double>& labels,
           double lam) -> std::shared_ptr<FiniteSumObjective> {
          return make_logistic(rows, labels, lam);
        },
        py::arg("features"), py::arg("labels"), py::arg("lam") = 1.0);

  m.def("make_quadratic",
        [](const Point& a_diag, double noise_sigma, std::size_t n,
           std::uint64_t seed) -> std::shared_ptr<FiniteSumObjective> {
          RngStream rng = RngStream::derive(seed, 0, 0, StreamPurpose::Init);
          return make_quadratic(a_diag, noise_sigma, n, rng);
        },
        py::arg("a_diag"), py::arg("noise_sigma") = 0.0, py::arg("n") = 1,
        py::arg("seed") = 0);

  m.def("synthetic_logistic",
        [](std::size_t n, std::size_t d, std::uint64_t seed, double lam,
           bool standardize) -> std::shared_ptr<FiniteSumObjective> {
          Dataset data = synthetic_two_clusters(n, d, seed, standardize);
          return std::make_shared<LogisticObjective>(
              std::move(data.features), std::move(data.labels), data.d, lam);
        },
        py::arg("n") = 455, py::arg("d") = 30, py::arg("seed") = 0,
        py::arg("lam") = 1.0, py::arg("standardize") = true);

  m.def("load_csv_logistic",
        [](const std::string& path, double lam,
           bool standardize) -> std::shared_ptr<FiniteSumObjective> {
          Dataset data = load_csv_dataset(path, standardize);
          return std::make_shared<LogisticObjective>(
              std::move(data.features), std::move(data.labels), data.d, lam);
        },
        py::arg("path"), py::arg("lam") = 1.0, py::arg("standardize") = true);

  m.def("sample_direction",
        [](const std::string& kind, std::size_t dim, std::uint64_t seed,
           std::uint64_t iteration) {
          RngStream rng =
              RngStream::derive(seed, 0, iteration, StreamPurpose::Direction);
          return sample_direction(dist_from(kind, dim), rng).vector;
        },
        py::arg("kind"), py::arg("dim"), py::arg("seed") = 0,
        py::arg("iteration") = 0);

  m.def("estimate_mu",
        [](const std::string& kind, const Point& g, std::size_t samples,
           std::uint64_t seed) {
          RngStream rng = RngStream::derive(seed, 0, 0, StreamPurpose::Probe);
          return estimate_mu(dist_from(kind, g.size()), g, samples, rng);
        },
        py::arg("kind"), py::arg("g"), py::arg("samples") = 100000,
        py::arg("seed") = 0);

  m.def("second_moment_projection",
        [](const std::string& kind, const Point& v, std::size_t samples,
           std::uint64_t seed) {
          RngStream rng = RngStream::derive(seed, 0, 0, StreamPurpose::Probe);
          return second_moment_projection(dist_from(kind, v.size()), v,
                                          samples, rng);
        },
        py::arg("kind"), py::arg("v"), py::arg("samples") = 100000,
        py::arg("seed") = 0);

  m.def("mu_fallback", &mu_fallback, py::arg("dim"));

  py::class_<TheoryConstants>(m, "TheoryConstants")
      .def(py::init<>())
      .def_readwrite("l0", &TheoryConstants::l0)
      .def_readwrite("l1", &TheoryConstants::l1)
      .def_readwrite("g", &TheoryConstants::g)
      .def_readwrite("sigma0", &TheoryConstants::sigma0)
      .def_readwrite("sigma1", &TheoryConstants::sigma1)
      .def_readwrite("f0", &TheoryConstants::f0)
      .def_readwrite("mu_d", &TheoryConstants::mu_d)
      .def_readwrite("dim", &TheoryConstants::dim);

  m.def("estimate_constants",
        [](const FiniteSumObjective& obj, std::size_t probe_points,
           std::uint64_t seed) {
          RngStream rng = RngStream::derive(seed, 0, 0, StreamPurpose::Probe);
          return estimate_constants(obj, probe_points, rng);
        },
        py::arg("objective"), py::arg("probe_points") = 64,
        py::arg("seed") = 0);

  py::class_<EstimatePair>(m, "EstimatePair")
      .def_readonly("m_plus", &EstimatePair::m_plus)
      .def_readonly("m_minus", &EstimatePair::m_minus)
      .def_readonly("queries", &EstimatePair::queries)
      .def_readonly("epoch_queries", &EstimatePair::epoch_queries)
      .def_readonly("helper_calls", &EstimatePair::helper_calls);

  m.def("minibatch_pair",
        [](const FiniteSumObjective& obj, const Point& xp, const Point& xm,
           std::size_t b, std::uint64_t seed, std::uint64_t iteration,
           bool full_enumeration) {
          RngStream rng =
              RngStream::derive(seed, 0, iteration, StreamPurpose::Batch);
          return minibatch_pair(obj, xp, xm, b, rng, full_enumeration);
        },
        py::arg("objective"), py::arg("x_plus"), py::arg("x_minus"),
        py::arg("b"), py::arg("seed") = 0, py::arg("iteration") = 0,
        py::arg("full_enumeration") = false);

  m.def("exact_pair", &exact_pair, py::arg("objective"), py::arg("x_plus"),
        py::arg("x_minus"));

  m.def("helper_pair",
        [](const FiniteSumObjective& obj, const Point& xp, const Point& xm,
           double delta, const std::string& mode, std::uint64_t seed,
           std::uint64_t iteration) {
          RngStream rng =
              RngStream::derive(seed, 0, iteration, StreamPurpose::Helper);
          const HelperSpec spec{delta, mode == "gaussian"
                                           ? HelperMode::AdditiveGaussian
                                           : HelperMode::AdditiveUniform};
          return helper_pair(obj, xp, xm, spec, rng);
        },
        py::arg("objective"), py::arg("x_plus"), py::arg("x_minus"),
        py::arg("delta"), py::arg("mode") = "uniform", py::arg("seed") = 0,
        py::arg("iteration") = 0);

  m.def("translation_gap",
        py::overload_cast<double, double, double, double>(&translation_gap),
        py::arg("m_plus"), py::arg("m_minus"), py::arg("f_plus"),
        py::arg("f_minus"));

  py::class_<ShiftScan>(m, "ShiftScan")
      .def_readonly("min_total", &ShiftScan::min_total)
      .def_readonly("best_shift", &ShiftScan::best_shift);
  m.def("shifted_error_grid_min", &shifted_error_grid_min, py::arg("m_plus"),
        py::arg("m_minus"), py::arg("f_plus"), py::arg("f_minus"),
        py::arg("lo") = -10.0, py::arg("hi") = 10.0, py::arg("step") = 1e-4);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("t", &RunRecord::t)
      .def_readonly("queries", &RunRecord::queries)
      .def_readonly("epoch_queries", &RunRecord::epoch_queries)
      .def_readonly("helper_calls", &RunRecord::helper_calls)
      .def_readonly("f_true", &RunRecord::f_true)
      .def_readonly("grad_norm", &RunRecord::grad_norm)
      .def_readonly("step_sign", &RunRecord::step_sign);

  m.def("run_search",
        [](const FiniteSumObjective& obj, const Point& x0, double eta,
           std::uint64_t iterations, std::uint64_t budget,
           const std::string& direction, const std::string& estimator,
           std::size_t b, std::size_t epoch_len, double delta,
           const std::string& helper_mode, std::uint64_t seed,
           std::uint64_t trial, bool record_grad_norm) {
          auto est = estimator_from(estimator, b, epoch_len, delta,
                                    helper_mode, obj.components());
          Plan plan;
          plan.eta = eta;
          plan.iterations = iterations;
          plan.batch = b;
          plan.epoch_len = epoch_len;
          StopRule stop;
          stop.max_queries = budget;
          RunOptions options;
          options.seed = seed;
          options.trial = trial;
          options.record_grad_norm = record_grad_norm;
          return run_search(x0, plan, dist_from(direction, obj.dim()), *est,
                            obj, stop, options);
        },
        py::arg("objective"), py::arg("x0"), py::arg("eta"),
        py::arg("iterations") = 0, py::arg("budget") = 0,
        py::arg("direction") = "sphere", py::arg("estimator") = "minibatch",
        py::arg("b") = 1, py::arg("epoch_len") = 8, py::arg("delta") = 0.0,
        py::arg("helper_mode") = "uniform", py::arg("seed") = 0,
        py::arg("trial") = 0, py::arg("record_grad_norm") = false);

  m.def("run_baseline",
        [](const FiniteSumObjective& obj, const std::string& kind,
           const Point& x0, double step, double mu_fd, std::size_t b,
           std::uint64_t iterations, std::uint64_t budget, std::uint64_t seed,
           std::uint64_t trial, bool record_grad_norm) {
          SmoothingParams params;
          params.mu_fd = mu_fd > 0.0 ? mu_fd : default_mu_fd(obj.dim());
          params.step = step;
          StopRule stop;
          stop.max_iters = iterations;
          stop.max_queries = budget;
          RunOptions options;
          options.seed = seed;
          options.trial = trial;
          options.record_grad_norm = record_grad_norm;
          const BaselineKind bk =
              kind == "zocd" ? BaselineKind::Zocd : BaselineKind::Rsgf;
          return run_baseline(bk, x0, obj, b, params, stop, options);
        },
        py::arg("objective"), py::arg("kind"), py::arg("x0"), py::arg("step"),
        py::arg("mu_fd") = 0.0, py::arg("b") = 1, py::arg("iterations") = 0,
        py::arg("budget") = 0, py::arg("seed") = 0, py::arg("trial") = 0,
        py::arg("record_grad_norm") = false);

  py::class_<Plan>(m, "Plan")
      .def_readonly("eta", &Plan::eta)
      .def_readonly("iterations", &Plan::iterations)
      .def_readonly("batch", &Plan::batch)
      .def_readonly("epoch_len", &Plan::epoch_len)
      .def_readonly("calls_estimate", &Plan::calls_estimate)
      .def_readonly("caps_applied", &Plan::caps_applied)
      .def_readonly("notes", &Plan::notes);

  m.def("plan_parameters",
        [](const std::string& regime, const TheoryConstants& constants,
           double epsilon, std::size_t n, double helper_delta) {
          return plan_parameters(regime_from(regime), constants, epsilon, n,
                                 helper_delta);
        },
        py::arg("regime"), py::arg("constants"), py::arg("epsilon"),
        py::arg("n") = 0, py::arg("helper_delta") = 0.0);

  py::class_<BetaSweepRow>(m, "BetaSweepRow")
      .def_readonly("beta", &BetaSweepRow::beta)
      .def_readonly("mean_final_f", &BetaSweepRow::mean_final_f)
      .def_readonly("sd_final_f", &BetaSweepRow::sd_final_f);

  m.def("beta_sweep",
        [](const FiniteSumObjective& obj, const std::string& direction,
           double eta, std::size_t b, std::uint64_t iterations,
           const std::string& variant, const std::vector<double>& betas,
           std::size_t trials, std::uint64_t seed) {
          MomentumVariant mv = MomentumVariant::HeavyBall;
          if (variant == "mvr") mv = MomentumVariant::Mvr;
          else if (variant == "transport") mv = MomentumVariant::Transport;
          else if (variant != "heavyball") {
            throw ConfigError("unknown momentum variant '" + variant + "'");
          }
          return beta_sweep(obj, dist_from(direction, obj.dim()), eta, b,
                            iterations, mv, betas, trials, seed);
        },
        py::arg("objective"), py::arg("direction"), py::arg("eta"),
        py::arg("b"), py::arg("iterations"), py::arg("variant"),
        py::arg("betas"), py::arg("trials"), py::arg("seed") = 0);

  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("name", &CheckReport::name)
      .def_readonly("measured", &CheckReport::measured)
      .def_readonly("target", &CheckReport::target)
      .def_readonly("passed", &CheckReport::passed)
      .def_readonly("samples", &CheckReport::samples)
      .def_readonly("details", &CheckReport::details);

  m.def("check_descent_lemma",
        [](const FiniteSumObjective& obj, const std::string& direction,
           double eta, const Point& x, std::size_t reps,
           const TheoryConstants& constants, std::uint64_t seed) {
          return check_descent_lemma(obj, dist_from(direction, obj.dim()), eta,
                                     x, reps, constants, seed);
        },
        py::arg("objective"), py::arg("direction"), py::arg("eta"),
        py::arg("x"), py::arg("reps"), py::arg("constants"),
        py::arg("seed") = 0);

  py::class_<AggregateCurve>(m, "AggregateCurve")
      .def_readonly("label", &AggregateCurve::label)
      .def_readonly("queries", &AggregateCurve::queries)
      .def_readonly("mean_f", &AggregateCurve::mean_f)
      .def_readonly("sd_f", &AggregateCurve::sd_f)
      .def_readonly("final_f", &AggregateCurve::final_f);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_property(
          "method",
          [](const ExperimentConfig& c) {
            return std::string(method_name(c.method));
          },
          [](ExperimentConfig& c, const std::string& name) {
            c.method = parse_method(name);
          })
      .def_readwrite("estimator", &ExperimentConfig::estimator)
      .def_readwrite("batch", &ExperimentConfig::batch)
      .def_readwrite("budget", &ExperimentConfig::budget)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("dataset", &ExperimentConfig::dataset)
      .def_readwrite("standardize", &ExperimentConfig::standardize)
      .def_readwrite("synth_n", &ExperimentConfig::synth_n)
      .def_readwrite("synth_d", &ExperimentConfig::synth_d)
      .def_readwrite("lam", &ExperimentConfig::lambda)
      .def_readwrite("direction", &ExperimentConfig::direction)
      .def_readwrite("eta", &ExperimentConfig::eta)
      .def_readwrite("mu_fd", &ExperimentConfig::mu_fd)
      .def_readwrite("epoch_len", &ExperimentConfig::epoch_len)
      .def_readwrite("delta", &ExperimentConfig::delta)
      .def_readwrite("helper_mode", &ExperimentConfig::helper_mode)
      .def_readwrite("beta", &ExperimentConfig::beta)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_readwrite("checkpoints", &ExperimentConfig::checkpoints)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("write_files", &ExperimentConfig::write_files);

  m.def("run_experiment",
        [](const ExperimentConfig& config) { return run_experiment(config); },
        py::arg("config"));

  m.def("pilot_tune",
        [](const ExperimentConfig& config) {
          const auto obj = load_objective(config);
          return pilot_tune(config, *obj);
        },
        py::arg("config"));
}
