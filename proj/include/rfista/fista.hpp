#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rfista/model.hpp"

namespace rfista {

/// Momentum sequence t_0 = 1, t_k = (1 + sqrt(1 + 4 t_{k-1}^2)) / 2.
/// Satisfies t_{k-1}^2 = t_k^2 - t_k and t_k >= (k + 2) / 2.
class TSequence {
 public:
  static double next(double t) noexcept;

  std::size_t index() const noexcept { return k_; }
  double previous() const noexcept { return prev_; }
  double current() const noexcept { return curr_; }

  void advance() noexcept {
    prev_ = curr_;
    curr_ = next(curr_);
    ++k_;
  }

 private:
  std::size_t k_ = 0;
  double prev_ = 1.0;
  double curr_ = 1.0;
};

/// Everything an exit condition may look at after iteration k.
///   x_curr = x_k, x_prev = x_{k-1}, y_curr = y_k,
///   f_history = f(x_0), ..., f(x_k),
///   last_prox = the step taken at y_{k-1} (so last_prox.g = g(y_{k-1})).
struct IterationState {
  std::size_t k = 0;
  std::vector<double> x_prev;
  std::vector<double> x_curr;
  std::vector<double> y_curr;
  std::vector<double> f_history;
  ProxStep last_prox;
  TSequence t;
};

/// Pure predicate over the iteration history.
class ExitCondition {
 public:
  virtual ~ExitCondition() = default;
  virtual bool evaluate(const IterationState& state) const = 0;
};

class NeverExit final : public ExitCondition {
 public:
  bool evaluate(const IterationState&) const override { return false; }
};

/// ||g(y_{k-1})||_* <= epsilon.
class GradientTolerance final : public ExitCondition {
 public:
  explicit GradientTolerance(double epsilon) : epsilon_(epsilon) {}
  bool evaluate(const IterationState& state) const override {
    return state.last_prox.g_dual_norm <= epsilon_;
  }

 private:
  double epsilon_;
};

enum class FistaStop {
  ExitCondition,  // E_c held with k >= k_min
  Tolerance,      // early exit: ||g(y_{k-1})||_* (or ||g(z)||_*) <= tolerance
  Budget,         // iteration budget exhausted
};

struct FistaOptions {
  /// Safety cap on loop passes.
  std::size_t budget = 10'000'000;
  /// When set, stop as soon as the prox residual at the current
  /// linearization point drops to this level. Checked at z and after every
  /// step.
  std::optional<double> tolerance;
};

struct FistaResult {
  std::vector<double> r;  // x_n
  std::size_t n = 0;
  FistaStop stop = FistaStop::ExitCondition;
  std::vector<double> f_history;  // f(x_0..x_n)
  std::vector<double> g_history;  // ||g(y_{k-1})||_*, k = 1..n
  double start_g_dual_norm = 0.0;  // ||g(z)||_* from the z+ step
  std::size_t prox_calls = 0;
};

/// Non-restarted FISTA started at x_0 = y_0 = z+. Runs until the exit
/// condition holds at some k >= k_min (first checked after k = 1).
FistaResult fista(const CompositeProblem& problem, std::span<const double> z, std::size_t k_min,
                  const ExitCondition& exit, const FistaOptions& options = {});

}  // namespace rfista
