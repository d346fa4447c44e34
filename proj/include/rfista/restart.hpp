#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rfista/fista.hpp"

namespace rfista {

// Restart exit conditions. All require state.k >= 1.

/// f(x_k) >= f(x_{k-1}).
bool exit_function_scheme(const IterationState& state);
/// <g(y_{k-1}), x_{k-1} - x_k> <= 0.
bool exit_gradient_scheme(const IterationState& state);
/// f(x_k) - f* <= (f(x_0) - f*) / e^2.
bool exit_optimal_value_scheme(const IterationState& state, double f_star);
/// With m = floor(k/2) + 1:
///   f(x_m) - f(x_k) <= (f(x_0) - f(x_m)) / e   and   f(x_k) <= f(x_0).
bool exit_lcr(const IterationState& state);

class FunctionIncrease final : public ExitCondition {
 public:
  bool evaluate(const IterationState& s) const override { return exit_function_scheme(s); }
};

class GradientAlignment final : public ExitCondition {
 public:
  bool evaluate(const IterationState& s) const override { return exit_gradient_scheme(s); }
};

class OptimalValueContraction final : public ExitCondition {
 public:
  explicit OptimalValueContraction(double f_star) : f_star_(f_star) {}
  bool evaluate(const IterationState& s) const override {
    return exit_optimal_value_scheme(s, f_star_);
  }

 private:
  double f_star_;
};

class LcrContraction final : public ExitCondition {
 public:
  bool evaluate(const IterationState& s) const override { return exit_lcr(s); }
};

enum class Scheme { NoRestart, Function, Gradient, OptimalValue, Lcr };

inline constexpr Scheme kAllSchemes[] = {Scheme::Lcr, Scheme::NoRestart, Scheme::Function,
                                         Scheme::Gradient, Scheme::OptimalValue};

/// CLI token: none, func, grad, opt, lcr.
std::string_view scheme_name(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view token);

struct RestartRun {
  Scheme scheme = Scheme::Lcr;
  double epsilon = 1e-11;
  std::vector<double> r0;
  /// Required by Scheme::OptimalValue.
  std::optional<double> f_star;
  /// Stop any inner iteration once ||g(y_{k-1})||_* <= epsilon. When off,
  /// convergence is checked only between restarts with one extra prox at r_j.
  bool early_exit = true;
  /// k_min passed to every inner call of the standard restart schemes.
  std::size_t k_min = 0;
  /// Cap on composite-gradient evaluations across the whole run.
  std::size_t budget = 10'000'000;
};

/// One inner FISTA call [r_j, n_j] = FISTA(r_{j-1}, ...).
struct RestartRecord {
  std::size_t j = 0;
  std::size_t observed_n = 0;   // iterations actually run
  std::size_t effective_n = 0;  // value carried to the next call's k_min
  bool doubled = false;
  double f_r = 0.0;             // f(r_j)
  double g_r = 0.0;             // ||g(r_j)||_*, NaN when never evaluated
};

/// One inner iteration, numbered cumulatively across restarts.
struct IterationRecord {
  std::size_t k = 0;
  std::size_t j = 0;
  double f = 0.0;            // f(x_k)
  double g_dual_norm = 0.0;  // ||g(y_{k-1})||_*
};

struct RestartTrace {
  double f_r0 = 0.0;
  double g_r0 = 0.0;
  std::vector<RestartRecord> restarts;
  std::vector<IterationRecord> iterations;
  std::size_t total_iterations = 0;  // sum of observed n_j
  std::size_t prox_calls = 0;
  std::size_t outer_checks = 0;      // strict-mode proxes at r_j
  bool converged = false;
  bool budget_exhausted = false;
  double final_g_dual_norm = 0.0;    // the residual that ended the run
};

struct RestartResult {
  std::vector<double> r_star;
  RestartTrace trace;
};

/// Standard restart FISTA with E_c^f, E_c^g or E_c^*.
RestartResult restart_fista(const CompositeProblem& problem, const RestartRun& run);

/// Restart FISTA with E_c^l and the doubling step on the minimum inner
/// iteration count.
RestartResult lcr_fista(const CompositeProblem& problem, const RestartRun& run);

/// A single FISTA call stopped by ||g(y_{k-1})||_* <= epsilon.
RestartResult no_restart_fista(const CompositeProblem& problem, const RestartRun& run);

/// Dispatch on run.scheme.
RestartResult solve(const CompositeProblem& problem, const RestartRun& run);

}  // namespace rfista
