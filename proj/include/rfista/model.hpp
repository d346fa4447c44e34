#pragma once

// Composite problems  min_{x in X} f(x) = Psi(x) + h(x)  with a diagonal
// metric R satisfying the descent inequality
//   h(x) <= h(y) + <grad h(y), x - y> + 1/2 ||x - y||_R^2.

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace rfista {

/// Raised when a solver meets a non-finite gradient or objective value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Diagonal positive-definite metric R. ||x||_R = sqrt(sum R_ii x_i^2), and
/// its dual ||v||_* = sqrt(sum v_i^2 / R_ii).
class Metric {
 public:
  /// Throws std::invalid_argument unless every entry is finite and > 0.
  explicit Metric(std::vector<double> diag);
  static Metric identity(std::size_t n);

  std::size_t dimension() const noexcept { return diag_.size(); }
  std::span<const double> diag() const noexcept { return diag_; }

  double norm(std::span<const double> x) const;
  double dual_norm(std::span<const double> v) const;

 private:
  std::vector<double> diag_;
};

double dual_norm(const Metric& metric, std::span<const double> v);

/// The smooth convex part h.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;
  virtual std::size_t dimension() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
};

/// h(x) = 1/2 x^T Q x + c^T x + offset, Q dense symmetric PSD (row-major).
class QuadraticFunction final : public SmoothFunction {
 public:
  QuadraticFunction(std::vector<double> q, std::vector<double> c, double offset = 0.0);

  std::size_t dimension() const override { return c_.size(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;

 private:
  std::vector<double> q_;
  std::vector<double> c_;
  double offset_;
};

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  bool contains(std::span<const double> x) const;
};

struct AllSpace {};

/// The closed convex set X.
using Constraint = std::variant<AllSpace, Box>;

struct ZeroPenalty {};
struct WeightedL1 {
  std::vector<double> weights;
};
struct BoxIndicator {
  Box box;
};

/// The nonsmooth part Psi; each kind has a closed-form separable prox.
using Nonsmooth = std::variant<ZeroPenalty, WeightedL1, BoxIndicator>;

/// Psi(x); +inf outside an indicator's box.
double evaluate(const Nonsmooth& psi, std::span<const double> x);

/// Result of the composite gradient mapping at y:
///   y_plus = argmin_{x in X} Psi(x) + <grad h(y), x - y> + 1/2 ||x - y||_R^2
///   g      = R (y - y_plus)
struct ProxStep {
  std::vector<double> y_plus;
  std::vector<double> g;
  double g_dual_norm = 0.0;
};

/// Immutable after construction; safe to share across threads.
class CompositeProblem {
 public:
  /// Throws std::invalid_argument on dimension mismatch, inverted box
  /// bounds, negative weights, or empty X ∩ dom Psi.
  CompositeProblem(std::shared_ptr<const SmoothFunction> smooth, Nonsmooth nonsmooth,
                   Constraint constraint, Metric metric);

  std::size_t dimension() const noexcept { return metric_.dimension(); }
  const SmoothFunction& smooth() const noexcept { return *smooth_; }
  const std::shared_ptr<const SmoothFunction>& smooth_ptr() const noexcept { return smooth_; }
  const Nonsmooth& nonsmooth() const noexcept { return nonsmooth_; }
  const Constraint& constraint() const noexcept { return constraint_; }
  const Metric& metric() const noexcept { return metric_; }

  /// Same Psi, X and R around a different smooth part (e.g. an instrumented
  /// wrapper).
  CompositeProblem with_smooth(std::shared_ptr<const SmoothFunction> smooth) const;

  /// x in X ∩ dom Psi.
  bool feasible(std::span<const double> x) const;

  // Per-coordinate prox data: l1 weights and the intersected box.
  std::span<const double> prox_weights() const noexcept { return weights_; }
  std::span<const double> prox_lower() const noexcept { return lower_; }
  std::span<const double> prox_upper() const noexcept { return upper_; }

 private:
  std::shared_ptr<const SmoothFunction> smooth_;
  Nonsmooth nonsmooth_;
  Constraint constraint_;
  Metric metric_;
  std::vector<double> weights_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

ProxStep composite_gradient_map(const CompositeProblem& problem, std::span<const double> y);

/// Buffer-reusing form; `out` is resized as needed.
void composite_gradient_map(const CompositeProblem& problem, std::span<const double> y,
                            ProxStep& out);

/// f(x) = h(x) + Psi(x), +inf outside X.
double objective(const CompositeProblem& problem, std::span<const double> x);

/// h(y) + <grad h(y), x - y> + 1/2 ||x - y||_R^2 - h(x). Nonnegative for every
/// pair iff R is a valid metric for h; a negative value flags a misspecified R.
double descent_gap(const CompositeProblem& problem, std::span<const double> x,
                   std::span<const double> y);

}  // namespace rfista
