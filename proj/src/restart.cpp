#include "rfista/restart.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rfista {

bool exit_function_scheme(const IterationState& s) {
  const auto& f = s.f_history;
  return f[s.k] >= f[s.k - 1];
}

bool exit_gradient_scheme(const IterationState& s) {
  const auto& g = s.last_prox.g;
  double inner = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * (s.x_prev[i] - s.x_curr[i]);
  return inner <= 0.0;
}

bool exit_optimal_value_scheme(const IterationState& s, double f_star) {
  constexpr double e2 = std::numbers::e * std::numbers::e;
  const auto& f = s.f_history;
  return f[s.k] - f_star <= (f[0] - f_star) / e2;
}

bool exit_lcr(const IterationState& s) {
  const auto& f = s.f_history;
  const std::size_t m = s.k / 2 + 1;
  return f[m] - f[s.k] <= (f[0] - f[m]) / std::numbers::e && f[s.k] <= f[0];
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::NoRestart: return "none";
    case Scheme::Function: return "func";
    case Scheme::Gradient: return "grad";
    case Scheme::OptimalValue: return "opt";
    case Scheme::Lcr: return "lcr";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view token) {
  for (Scheme s : kAllSchemes) {
    if (scheme_name(s) == token) return s;
  }
  return std::nullopt;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate(const CompositeProblem& problem, const RestartRun& run) {
  if (!(run.epsilon > 0.0)) throw std::invalid_argument("restart run: epsilon must be > 0");
  if (run.r0.size() != problem.dimension()) {
    throw std::invalid_argument("restart run: r0 has wrong dimension");
  }
  if (!problem.feasible(run.r0)) throw std::invalid_argument("restart run: r0 is not in X");
  if (run.scheme == Scheme::OptimalValue && !(run.f_star && std::isfinite(*run.f_star))) {
    throw std::invalid_argument("restart run: optimal-value scheme needs a finite f_star");
  }
}

// Bookkeeping shared by all outer loops.
class Driver {
 public:
  Driver(const CompositeProblem& problem, const RestartRun& run)
      : problem_(problem), run_(run), r_(run.r0) {
    validate(problem, run);
    trace_.f_r0 = objective(problem, run.r0);
    trace_.g_r0 = kNaN;
  }

  const RestartTrace& trace() const { return trace_; }
  const std::vector<double>& r() const { return r_; }
  bool early() const { return run_.early_exit; }

  // Runs one inner call from the current r. Returns false when the run is
  // over (converged by early exit or budget exhausted).
  bool step(const ExitCondition& exit, std::size_t k_min) {
    if (remaining() < 2) {
      trace_.budget_exhausted = true;
      return false;
    }
    FistaOptions options;
    options.budget = remaining() - 1;
    if (run_.early_exit) options.tolerance = run_.epsilon;
    last_ = fista(problem_, r_, k_min, exit, options);

    const std::size_t j = trace_.restarts.size() + 1;
    if (trace_.restarts.empty()) {
      trace_.g_r0 = last_.start_g_dual_norm;
    } else {
      trace_.restarts.back().g_r = last_.start_g_dual_norm;
    }
    for (std::size_t k = 1; k <= last_.n; ++k) {
      trace_.iterations.push_back({trace_.total_iterations + k, j, last_.f_history[k],
                                   last_.g_history[k - 1]});
    }
    trace_.total_iterations += last_.n;
    trace_.prox_calls += last_.prox_calls;
    trace_.restarts.push_back({.j = j,
                               .observed_n = last_.n,
                               .effective_n = last_.n,
                               .doubled = false,
                               .f_r = last_.f_history.back(),
                               .g_r = kNaN});
    r_ = last_.r;

    if (last_.stop == FistaStop::Tolerance) {
      trace_.converged = true;
      trace_.final_g_dual_norm = last_.n == 0 ? last_.start_g_dual_norm : last_.g_history.back();
      return false;
    }
    if (last_.stop == FistaStop::Budget) {
      trace_.budget_exhausted = true;
      return false;
    }
    return true;
  }

  // Strict-mode check ||g(r_j)||_* <= epsilon; costs one prox.
  bool outer_converged() {
    if (remaining() < 1) {
      trace_.budget_exhausted = true;
      return true;
    }
    const ProxStep at_r = composite_gradient_map(problem_, r_);
    ++trace_.prox_calls;
    ++trace_.outer_checks;
    trace_.restarts.back().g_r = at_r.g_dual_norm;
    if (at_r.g_dual_norm <= run_.epsilon) {
      trace_.converged = true;
      trace_.final_g_dual_norm = at_r.g_dual_norm;
      return true;
    }
    return false;
  }

  RestartTrace& mutable_trace() { return trace_; }

  RestartResult finish() { return {std::move(r_), std::move(trace_)}; }

 private:
  std::size_t remaining() const {
    return run_.budget > trace_.prox_calls ? run_.budget - trace_.prox_calls : 0;
  }

  const CompositeProblem& problem_;
  const RestartRun& run_;
  RestartTrace trace_;
  std::vector<double> r_;
  FistaResult last_;
};

}  // namespace

RestartResult restart_fista(const CompositeProblem& problem, const RestartRun& run) {
  std::optional<OptimalValueContraction> opt;
  FunctionIncrease func;
  GradientAlignment grad;
  const ExitCondition* exit = nullptr;
  switch (run.scheme) {
    case Scheme::Function: exit = &func; break;
    case Scheme::Gradient: exit = &grad; break;
    case Scheme::OptimalValue:
      if (!run.f_star) throw std::invalid_argument("restart run: optimal-value scheme needs f_star");
      opt.emplace(*run.f_star);
      exit = &*opt;
      break;
    default: throw std::invalid_argument("restart_fista: scheme must be func, grad or opt");
  }

  Driver d(problem, run);
  while (d.step(*exit, run.k_min)) {
    if (!d.early() && d.outer_converged()) break;
  }
  return d.finish();
}

RestartResult lcr_fista(const CompositeProblem& problem, const RestartRun& run) {
  Driver d(problem, run);
  const LcrContraction exit;

  // j = 1 runs before the repeat-until loop, with n_0 = 0.
  if (!d.step(exit, 0)) return d.finish();
  while (true) {
    const std::size_t before = d.trace().restarts.size();
    const std::size_t k_min = d.trace().restarts.back().effective_n;
    const bool more = d.step(exit, k_min);

    auto& rec = d.mutable_trace().restarts;
    const std::size_t j = rec.size();
    if (j == before) break;  // budget ran out before the call
    const double f_prev2 = j >= 3 ? rec[j - 3].f_r : d.trace().f_r0;
    const double f_prev = rec[j - 2].f_r;
    const double f_curr = rec[j - 1].f_r;
    if (f_prev - f_curr > (f_prev2 - f_prev) / std::numbers::e) {
      rec[j - 1].effective_n = 2 * rec[j - 2].effective_n;
      rec[j - 1].doubled = true;
    }

    if (!more) break;
    if (!d.early() && d.outer_converged()) break;
  }
  return d.finish();
}

RestartResult no_restart_fista(const CompositeProblem& problem, const RestartRun& run) {
  RestartRun single = run;
  single.early_exit = true;
  Driver d(problem, single);
  d.step(NeverExit{}, 0);
  return d.finish();
}

RestartResult solve(const CompositeProblem& problem, const RestartRun& run) {
  switch (run.scheme) {
    case Scheme::NoRestart: return no_restart_fista(problem, run);
    case Scheme::Lcr: return lcr_fista(problem, run);
    default: return restart_fista(problem, run);
  }
}

}  // namespace rfista
