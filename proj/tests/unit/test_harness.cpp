#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mi2p/errors.hpp"
#include "mi2p/harness.hpp"

using namespace mi2p;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig quad_config() {
  ExperimentConfig config;
  config.dataset = "quadratic:4,0.3,32";
  config.method = Method::Mi2P;
  config.batch = 4;
  config.budget = 2000;
  config.trials = 3;
  config.seed = 21;
  config.eta = "0.05";
  config.threads = 1;
  config.write_files = false;
  return config;
}

}  // namespace

TEST_CASE("pilot with a single grid point returns that point") {
  ExperimentConfig config = quad_config();
  config.eta = "pilot";
  config.pilot_lo = 0.05;
  config.pilot_hi = 0.05;
  config.pilot_points = 1;
  const auto obj = load_objective(config);
  CHECK(pilot_tune(config, *obj) == doctest::Approx(0.05));
}

TEST_CASE("pilot picks an interior winner on the exact quadratic") {
  ExperimentConfig config = quad_config();
  config.dataset = "quadratic:4,0.0,8";
  config.estimator = "exact";
  config.eta = "pilot";
  config.budget = 8000;
  config.x0_value = 1.0;
  const auto obj = load_objective(config);
  const double eta = pilot_tune(config, *obj);
  CHECK(eta > config.pilot_lo);
  CHECK(eta < config.pilot_hi);
}

TEST_CASE("pilot winner is stable under a doubled pilot budget") {
  int stable = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    ExperimentConfig config = quad_config();
    config.dataset = "quadratic:4,0.2,32";
    config.eta = "pilot";
    config.seed = 100 + s;
    config.budget = 4000;
    const auto obj = load_objective(config);
    const double eta_a = pilot_tune(config, *obj);
    config.budget = 8000;  // pilot runs at 10% of this
    const double eta_b = pilot_tune(config, *obj);
    if (eta_a == eta_b) ++stable;
  }
  CHECK(stable >= 15);
}

TEST_CASE("pilot reports the grid when every candidate diverges") {
  // Objective that is non-finite everywhere off the start point, so the very
  // first trial pair overflows for every candidate step size.
  class ExplodingObjective final : public FiniteSumObjective {
   public:
    std::size_t components() const override { return 4; }
    std::size_t dim() const override { return 2; }
    double component_value(std::size_t, const Point& x) const override {
      return dot(x, x) == 0.0 ? 0.0
                              : std::numeric_limits<double>::infinity();
    }
    void component_gradient(std::size_t, const Point&,
                            Point& out) const override {
      out.assign(2, 0.0);
    }
  } obj;
  ExperimentConfig config = quad_config();
  config.eta = "pilot";
  config.budget = 4000;
  try {
    pilot_tune(config, obj);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("diverged") != std::string::npos);
  }
}

TEST_CASE("minimal budget yields the initial point plus one update") {
  ExperimentConfig config = quad_config();
  config.trials = 1;
  config.budget = 2 * config.batch;  // one iteration's cost
  const auto obj = load_objective(config);
  const AggregateCurve curve = run_experiment(config, *obj);
  CHECK(curve.final_f.size() == 1);
  // Reconstruct the trace: one update only.
  const auto trace = run_one_trial(config, *obj, 0.05, 0);
  CHECK(trace.size() == 2);
}

TEST_CASE("mi2p and rsgf consume the same budget up to one iteration") {
  ExperimentConfig config = quad_config();
  config.trials = 1;
  config.budget = 5000;
  const auto obj = load_objective(config);
  const auto mi2p_trace = run_one_trial(config, *obj, 0.05, 0);
  ExperimentConfig rsgf = config;
  rsgf.method = Method::Rsgf;
  const auto rsgf_trace = run_one_trial(rsgf, *obj, 0.05, 0);
  const auto total = [](const std::vector<RunRecord>& t) {
    return t.back().queries + t.back().helper_calls;
  };
  const std::uint64_t iter_cost = 2 * config.batch;
  CHECK(total(mi2p_trace) >= 5000);
  CHECK(total(rsgf_trace) >= 5000);
  CHECK(total(mi2p_trace) < 5000 + iter_cost);
  CHECK(total(rsgf_trace) < 5000 + iter_cost);
}

TEST_CASE("per-iteration ledger matches the cost contracts") {
  ExperimentConfig config = quad_config();
  config.trials = 1;
  config.budget = 1000;
  const auto obj = load_objective(config);
  {
    const auto trace = run_one_trial(config, *obj, 0.05, 0);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      CHECK(trace[i].queries - trace[i - 1].queries == 2 * config.batch);
    }
  }
  {
    ExperimentConfig vr = config;
    vr.method = Method::VrMi2P;
    vr.epoch_len = 4;
    const auto trace = run_one_trial(vr, *obj, 0.05, 0);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      const std::uint64_t inc = trace[i].queries - trace[i - 1].queries;
      if ((i - 1) % 4 == 0) {
        CHECK(inc == 2 * obj->components());
      } else {
        CHECK(inc == 2 * config.batch);
      }
    }
  }
  {
    ExperimentConfig zocd = config;
    zocd.method = Method::Zocd;
    const auto trace = run_one_trial(zocd, *obj, 0.01, 0);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      CHECK(trace[i].queries - trace[i - 1].queries ==
            2 * config.batch * obj->dim());
    }
  }
}

TEST_CASE("aggregate means equal the recomputed trial means") {
  ExperimentConfig config = quad_config();
  config.trials = 3;
  const auto obj = load_objective(config);
  const AggregateCurve curve = run_experiment(config, *obj);
  std::vector<std::vector<RunRecord>> traces;
  for (std::size_t k = 0; k < config.trials; ++k) {
    traces.push_back(run_one_trial(config, *obj, 0.05, k));
  }
  for (std::size_t j = 0; j < curve.queries.size(); ++j) {
    double mean = 0.0;
    for (const auto& trace : traces) {
      mean += interpolate_at(trace, curve.queries[j]);
    }
    mean /= static_cast<double>(config.trials);
    CHECK(curve.mean_f[j] == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("trial csv round trip") {
  ExperimentConfig config = quad_config();
  config.trials = 1;
  config.budget = 500;
  const auto obj = load_objective(config);
  const auto trace = run_one_trial(config, *obj, 0.05, 0);
  const std::string path = "test_trial_tmp.csv";
  write_trial_csv(trace, path);
  const auto rows = read_trial_csv(path);
  REQUIRE(rows.size() == trace.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].first ==
          static_cast<double>(trace[i].queries + trace[i].helper_calls));
    CHECK(rows[i].second == trace[i].f_true);
  }
  std::remove(path.c_str());
}

TEST_CASE("experiment outputs are byte-identical across reruns") {
  namespace fs = std::filesystem;
  ExperimentConfig config = quad_config();
  config.write_files = true;
  config.trials = 2;
  config.out_dir = "test_out_a";
  (void)run_experiment(config);
  config.out_dir = "test_out_b";
  (void)run_experiment(config);
  for (const char* name : {"mi2p_trial0.csv", "mi2p_trial1.csv",
                           "mi2p_agg.csv", "plot.py"}) {
    CHECK(slurp(std::string("test_out_a/") + name) ==
          slurp(std::string("test_out_b/") + name));
  }
  fs::remove_all("test_out_a");
  fs::remove_all("test_out_b");
}

TEST_CASE("threaded and serial runs agree") {
  ExperimentConfig config = quad_config();
  config.trials = 4;
  config.threads = 1;
  const auto obj = load_objective(config);
  const AggregateCurve serial = run_experiment(config, *obj);
  config.threads = 4;
  const AggregateCurve threaded = run_experiment(config, *obj);
  CHECK(serial.mean_f == threaded.mean_f);
  CHECK(serial.sd_f == threaded.sd_f);
}

TEST_CASE("emit_plot_data writes one row per checkpoint") {
  AggregateCurve curve;
  curve.label = "demo";
  curve.queries = {10, 20, 30};
  curve.mean_f = {3.0, 2.0, 1.0};
  curve.sd_f = {0.1, 0.1, 0.1};
  emit_plot_data({curve}, "test_plot_tmp");
  const std::string text = slurp("test_plot_tmp/demo_agg.csv");
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 4);  // header + 3 checkpoints
  CHECK_THROWS_AS(emit_plot_data({}, "test_plot_tmp"), ConfigError);
  std::filesystem::remove_all("test_plot_tmp");
}

TEST_CASE("helper budget counts helper calls") {
  ExperimentConfig config = quad_config();
  config.method = Method::Helper;
  config.delta = 0.01;
  config.trials = 1;
  config.budget = 100;
  const auto obj = load_objective(config);
  const auto trace = run_one_trial(config, *obj, 0.05, 0);
  CHECK(trace.back().helper_calls >= 100);
  CHECK(trace.back().queries == 0);
  // 2 helper calls per iteration.
  CHECK(trace.size() == 51);
}

TEST_CASE("method names round trip") {
  for (const char* name : {"mi2p", "vr-mi2p", "rsgf", "zocd", "helper",
                           "momentum-heavyball", "momentum-mvr",
                           "momentum-transport"}) {
    CHECK(std::string(method_name(parse_method(name))) == name);
  }
  CHECK_THROWS_AS(parse_method("bogus"), ConfigError);
}
