#include "mi2p/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mi2p/errors.hpp"

namespace mi2p {

namespace {

RunRecord make_record(const SearchState& state, const FiniteSumObjective& obj,
                      bool grad_norm, int sign) {
  RunRecord rec;
  rec.t = state.t;
  rec.queries = state.queries;
  rec.epoch_queries = state.epoch_queries;
  rec.helper_calls = state.helper_calls;
  rec.f_true = obj.full_value(state.x);
  if (grad_norm) {
    Point g(obj.dim(), 0.0);
    obj.full_gradient(state.x, g);
    rec.grad_norm = norm2(g);
  }
  rec.step_sign = sign;
  return rec;
}

}  // namespace

const char* plan_regime_name(PlanRegime regime) {
  switch (regime) {
    case PlanRegime::AvgSmooth:
      return "avg-smooth";
    case PlanRegime::SampleSmooth:
      return "sample-smooth";
    case PlanRegime::FiniteSumVR:
      return "finite-sum-vr";
    case PlanRegime::Helper:
      return "helper";
  }
  return "?";
}

SearchState init_search_state(const Point& x0, double eta,
                              const FiniteSumObjective& obj,
                              const RunOptions& options) {
  if (x0.size() != obj.dim()) {
    throw ConfigError("init_search_state: x0 dimension mismatch");
  }
  if (!(eta > 0.0)) throw ConfigError("init_search_state: eta must be > 0");
  SearchState state;
  state.x = x0;
  state.eta = eta;
  state.trace.push_back(
      make_record(state, obj, options.record_grad_norm, +1));
  return state;
}

void srs_step(SearchState& state, const DirectionDistribution& dist,
              ValueEstimator& estimator, const FiniteSumObjective& obj,
              const RunOptions& options) {
  RngStream dir_rng = RngStream::derive(options.seed, options.trial, state.t,
                                        StreamPurpose::Direction);
  RngStream est_rng = RngStream::derive(options.seed, options.trial, state.t,
                                        StreamPurpose::Batch);
  const DirectionSample s = sample_direction(dist, dir_rng);
  const Point x_plus = added(state.x, state.eta, s.vector);
  const Point x_minus = added(state.x, -state.eta, s.vector);

  const EstimatePair pair = estimator.estimate(obj, x_plus, x_minus, est_rng);
  if (!std::isfinite(pair.m_plus) || !std::isfinite(pair.m_minus)) {
    throw NumericalError("srs_step: non-finite value estimate at t=" +
                         std::to_string(state.t) +
                         " (objective overflow?)");
  }
  state.queries += pair.queries;
  state.epoch_queries += pair.epoch_queries;
  state.helper_calls += pair.helper_calls;

  // sign(0) := +1, so a tie moves to the minus point.
  const int sign = pair.m_plus - pair.m_minus >= 0.0 ? +1 : -1;
  axpy(-state.eta * static_cast<double>(sign), s.vector, state.x);
  state.t += 1;
  state.trace.push_back(
      make_record(state, obj, options.record_grad_norm, sign));
}

std::vector<RunRecord> run_search(const Point& x0, const Plan& plan,
                                  const DirectionDistribution& dist,
                                  ValueEstimator& estimator,
                                  const FiniteSumObjective& obj,
                                  const StopRule& stop,
                                  const RunOptions& options) {
  SearchState state = init_search_state(x0, plan.eta, obj, options);
  const std::uint64_t iter_limit =
      stop.max_iters > 0 ? stop.max_iters : plan.iterations;
  // T = 0 with no query budget is an empty loop: the trace holds x0 only.
  while (iter_limit > 0 || stop.max_queries > 0) {
    if (iter_limit > 0 && state.t >= iter_limit) break;
    if (stop.max_queries > 0 &&
        state.queries + state.helper_calls >= stop.max_queries) {
      break;
    }
    srs_step(state, dist, estimator, obj, options);
  }
  return std::move(state.trace);
}

double vr_batch_for_epoch(std::uint64_t epoch_len, const TheoryConstants& c,
                          double epsilon) {
  const double m = static_cast<double>(epoch_len);
  return static_cast<double>(c.dim) * m * m * c.g * c.g / (epsilon * epsilon);
}

double vr_calls(std::uint64_t iterations, std::uint64_t epoch_len,
                std::uint64_t batch, std::size_t n) {
  const double t = static_cast<double>(iterations);
  const double m = static_cast<double>(epoch_len);
  return t / m *
         (static_cast<double>(n) + (m - 1.0) * static_cast<double>(batch));
}

Plan plan_parameters(PlanRegime regime, const TheoryConstants& c,
                     double epsilon, std::size_t n, double helper_delta) {
  if (!(epsilon > 0.0)) throw ConfigError("plan_parameters: epsilon must be > 0");
  if (c.dim == 0) throw ConfigError("plan_parameters: constants.dim not set");
  if (!(c.mu_d > 0.0)) throw ConfigError("plan_parameters: mu_d must be > 0");

  const double d = static_cast<double>(c.dim);
  Plan plan;

  // T = d L1 / eps + d L0 F0 / eps^2, unit constants.
  const double t_real =
      d * c.l1 / epsilon + d * c.l0 * c.f0 / (epsilon * epsilon);
  plan.iterations = static_cast<std::uint64_t>(std::max(1.0, std::ceil(t_real)));
  const double t = static_cast<double>(plan.iterations);

  // eta candidates: regime caps plus the bound-optimizing values; the
  // smallest wins and is recorded.
  struct Candidate {
    double value;
    const char* label;
    bool is_cap;
  };
  std::vector<Candidate> candidates;
  auto add = [&candidates](double v, const char* label, bool is_cap) {
    if (std::isfinite(v) && v > 0.0) candidates.push_back({v, label, is_cap});
  };

  switch (regime) {
    case PlanRegime::AvgSmooth: {
      const double b_real =
          std::pow(d * c.l0 * c.sigma0 / (epsilon * epsilon), 2.0);
      plan.batch =
          static_cast<std::uint64_t>(std::max(1.0, std::ceil(b_real)));
      if (c.l1 > 0.0) add(c.mu_d / c.l1, "eta <= mu_D/L1", true);
      if (c.l0 > 0.0) {
        add(std::sqrt(c.f0 / (c.l0 * t)), "sqrt(F0/(L0 T))", false);
        add(std::sqrt(c.sigma0 /
                      (c.l0 * std::sqrt(static_cast<double>(plan.batch)))),
            "sqrt(sigma0/(L0 sqrt(b)))", false);
      }
      plan.calls_estimate = 2.0 * static_cast<double>(plan.batch) * t;
      break;
    }
    case PlanRegime::SampleSmooth: {
      const double b_real = c.sigma1 * c.sigma1 / (epsilon * epsilon);
      plan.batch =
          static_cast<std::uint64_t>(std::max(1.0, std::ceil(b_real)));
      if (c.l1 > 0.0) {
        add(c.mu_d / (5.0 * c.l1), "eta <= mu_D/(5 L1)", true);
        add(c.mu_d * std::sqrt(static_cast<double>(plan.batch)) /
                (32.0 * std::sqrt(2.0) * c.l1),
            "eta <= mu_D sqrt(b)/(32 sqrt(2) L1)", true);
      }
      if (c.l0 > 0.0) add(std::sqrt(c.f0 / (c.l0 * t)), "sqrt(F0/(L0 T))", false);
      plan.calls_estimate = 2.0 * static_cast<double>(plan.batch) * t;
      break;
    }
    case PlanRegime::FiniteSumVR: {
      if (n == 0) throw ConfigError("plan_parameters: finite-sum regime needs n");
      if (!(c.g > 0.0)) {
        throw ConfigError("plan_parameters: finite-sum regime needs G > 0");
      }
      const double kappa = static_cast<double>(n) * epsilon * epsilon /
                           (d * c.g * c.g);
      const double m_star =
          std::min(std::cbrt(kappa), std::sqrt(kappa));
      std::uint64_t m =
          static_cast<std::uint64_t>(std::max(1.0, std::floor(m_star)));
      double b_real = vr_batch_for_epoch(m, c, epsilon);
      if (b_real > static_cast<double>(n)) {
        // Printed b(m) infeasible: fall back to the largest feasible epoch.
        std::uint64_t m_fb = 0;
        for (std::uint64_t mm = m; mm >= 1; --mm) {
          if (vr_batch_for_epoch(mm, c, epsilon) <= static_cast<double>(n)) {
            m_fb = mm;
            break;
          }
          if (mm == 1) break;
        }
        if (m_fb == 0) {
          plan.notes.push_back(
              "b(m) > n for every m >= 1; using m=1 with b=n (full passes)");
          m = 1;
          b_real = static_cast<double>(n);
        } else {
          plan.notes.push_back(
              "b(m*) > n; fell back to largest m with b(m) <= n");
          m = m_fb;
          b_real = vr_batch_for_epoch(m, c, epsilon);
        }
      }
      plan.epoch_len = m;
      plan.batch = static_cast<std::uint64_t>(std::max(1.0, std::ceil(b_real)));
      plan.notes.push_back(
          "b(m) = d m^2 G^2 / eps^2 as printed for the finite-sum scheme; the "
          "subsampling regimes' b omit the d factor");
      if (c.l1 > 0.0) add(c.mu_d / (5.0 * c.l1), "eta <= mu_D/(5 L1)", true);
      if (c.l0 > 0.0) add(std::sqrt(c.f0 / (c.l0 * t)), "sqrt(F0/(L0 T))", false);
      plan.calls_estimate = vr_calls(plan.iterations, plan.epoch_len,
                                     plan.batch, n);
      break;
    }
    case PlanRegime::Helper: {
      plan.batch = 1;
      if (c.l1 > 0.0) add(c.mu_d / c.l1, "eta <= mu_D/L1", true);
      if (c.l0 > 0.0) {
        add(std::sqrt(c.f0 / (c.l0 * t)), "sqrt(F0/(L0 T))", false);
        if (helper_delta > 0.0) {
          add(std::sqrt(2.0 * helper_delta / c.l0), "sqrt(2 delta/L0)", false);
        }
      }
      plan.calls_estimate = 2.0 * t;  // helper calls
      break;
    }
  }

  if (candidates.empty()) {
    throw ConfigError(
        "plan_parameters: no usable eta candidate (all constants zero?)");
  }
  const auto best = std::min_element(
      candidates.begin(), candidates.end(),
      [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  plan.eta = best->value;
  for (const Candidate& cand : candidates) {
    if (cand.is_cap && plan.eta <= cand.value) {
      plan.caps_applied.push_back(std::string(cand.label) +
                                  (cand.label == best->label ? " [binding]"
                                                             : " [satisfied]"));
    }
  }
  if (!best->is_cap) {
    plan.caps_applied.push_back(std::string(best->label) + " [binding]");
  }
  return plan;
}

std::string format_plan(const Plan& plan) {
  std::ostringstream os;
  os << "eta=" << plan.eta << "\n";
  os << "T=" << plan.iterations << "\n";
  os << "b=" << plan.batch << "\n";
  os << "m=" << plan.epoch_len << "\n";
  os << "calls_estimate=" << plan.calls_estimate << "\n";
  for (const auto& cap : plan.caps_applied) os << "cap: " << cap << "\n";
  for (const auto& note : plan.notes) os << "note: " << note << "\n";
  return os.str();
}

}  // namespace mi2p
