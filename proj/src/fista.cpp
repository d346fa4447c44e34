#include "rfista/fista.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "rfista/kernels.hpp"

namespace rfista {

double TSequence::next(double t) noexcept { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

FistaResult fista(const CompositeProblem& problem, std::span<const double> z, std::size_t k_min,
                  const ExitCondition& exit, const FistaOptions& options) {
  if (options.budget < 1) throw std::invalid_argument("fista: budget must be >= 1");
  const std::size_t n = problem.dimension();
  if (z.size() != n) throw std::invalid_argument("fista: start point has wrong dimension");

  FistaResult result;
  IterationState state;

  composite_gradient_map(problem, z, state.last_prox);
  result.prox_calls = 1;
  result.start_g_dual_norm = state.last_prox.g_dual_norm;

  state.x_curr = state.last_prox.y_plus;
  state.x_prev = state.x_curr;
  state.y_curr = state.x_curr;
  const double f0 = objective(problem, state.x_curr);
  if (!std::isfinite(f0)) throw NumericalError("fista: non-finite objective at z+");
  state.f_history.push_back(f0);

  auto finish = [&](FistaStop stop) {
    result.r = std::move(state.x_curr);
    result.n = state.k;
    result.stop = stop;
    result.f_history = std::move(state.f_history);
    return std::move(result);
  };

  if (options.tolerance && result.start_g_dual_norm <= *options.tolerance) {
    return finish(FistaStop::Tolerance);
  }

  ProxStep step;
  while (true) {
    ++state.k;
    composite_gradient_map(problem, state.y_curr, step);
    ++result.prox_calls;

    std::swap(state.x_prev, state.x_curr);
    state.x_curr.assign(step.y_plus.begin(), step.y_plus.end());  // x_k = y_{k-1}+
    std::swap(state.last_prox, step);

    state.t.advance();
    const double beta = (state.t.previous() - 1.0) / state.t.current();
    kernels::extrapolate(state.x_curr, state.x_prev, beta, state.y_curr);

    const double fk = objective(problem, state.x_curr);
    if (!std::isfinite(fk)) throw NumericalError("fista: non-finite objective");
    state.f_history.push_back(fk);
    result.g_history.push_back(state.last_prox.g_dual_norm);

    if (options.tolerance && state.last_prox.g_dual_norm <= *options.tolerance) {
      return finish(FistaStop::Tolerance);
    }
    if (state.k >= k_min && exit.evaluate(state)) return finish(FistaStop::ExitCondition);
    if (state.k >= options.budget) return finish(FistaStop::Budget);
  }
}

}  // namespace rfista
