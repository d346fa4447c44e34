#include "rfista/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rfista/kernels.hpp"

namespace rfista {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dimension(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(got) +
                                ", expected " + std::to_string(want));
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

}  // namespace

Metric::Metric(std::vector<double> diag) : diag_(std::move(diag)) {
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    if (!(diag_[i] > 0.0) || !std::isfinite(diag_[i])) {
      throw std::invalid_argument("metric entry " + std::to_string(i) +
                                  " must be finite and positive");
    }
  }
}

Metric Metric::identity(std::size_t n) { return Metric(std::vector<double>(n, 1.0)); }

double Metric::norm(std::span<const double> x) const {
  require_dimension(x.size(), dimension(), "Metric::norm");
  return std::sqrt(kernels::metric_sq_norm(x, diag_));
}

double Metric::dual_norm(std::span<const double> v) const {
  require_dimension(v.size(), dimension(), "Metric::dual_norm");
  return std::sqrt(kernels::dual_sq_norm(v, diag_));
}

double dual_norm(const Metric& metric, std::span<const double> v) { return metric.dual_norm(v); }

QuadraticFunction::QuadraticFunction(std::vector<double> q, std::vector<double> c, double offset)
    : q_(std::move(q)), c_(std::move(c)), offset_(offset) {
  require_dimension(q_.size(), c_.size() * c_.size(), "QuadraticFunction Q");
}

double QuadraticFunction::value(std::span<const double> x) const {
  const std::size_t n = c_.size();
  double s = offset_;
  for (std::size_t i = 0; i < n; ++i) {
    double qi = 0.0;
    for (std::size_t j = 0; j < n; ++j) qi += q_[i * n + j] * x[j];
    s += 0.5 * x[i] * qi + c_[i] * x[i];
  }
  return s;
}

void QuadraticFunction::gradient(std::span<const double> x, std::span<double> out) const {
  const std::size_t n = c_.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = c_[i];
    for (std::size_t j = 0; j < n; ++j) s += q_[i * n + j] * x[j];
    out[i] = s;
  }
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  }
  return true;
}

double evaluate(const Nonsmooth& psi, std::span<const double> x) {
  return std::visit(
      [&](const auto& kind) -> double {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, ZeroPenalty>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, WeightedL1>) {
          return kernels::weighted_l1(x, kind.weights);
        } else {
          return kind.box.contains(x) ? 0.0 : kInf;
        }
      },
      psi);
}

CompositeProblem::CompositeProblem(std::shared_ptr<const SmoothFunction> smooth,
                                   Nonsmooth nonsmooth, Constraint constraint, Metric metric)
    : smooth_(std::move(smooth)),
      nonsmooth_(std::move(nonsmooth)),
      constraint_(std::move(constraint)),
      metric_(std::move(metric)) {
  if (!smooth_) throw std::invalid_argument("CompositeProblem: null smooth part");
  const std::size_t n = metric_.dimension();
  require_dimension(smooth_->dimension(), n, "smooth part");

  weights_.assign(n, 0.0);
  lower_.assign(n, -kInf);
  upper_.assign(n, kInf);

  auto intersect = [&](const Box& box, const char* what) {
    require_dimension(box.lower.size(), n, what);
    require_dimension(box.upper.size(), n, what);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(box.lower[i]) || std::isnan(box.upper[i]) || box.lower[i] > box.upper[i]) {
        throw std::invalid_argument(std::string(what) + ": invalid bounds at coordinate " +
                                    std::to_string(i));
      }
      lower_[i] = std::max(lower_[i], box.lower[i]);
      upper_[i] = std::min(upper_[i], box.upper[i]);
    }
  };

  if (const auto* l1 = std::get_if<WeightedL1>(&nonsmooth_)) {
    require_dimension(l1->weights.size(), n, "l1 weights");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(l1->weights[i] >= 0.0) || !std::isfinite(l1->weights[i])) {
        throw std::invalid_argument("l1 weight " + std::to_string(i) +
                                    " must be finite and nonnegative");
      }
    }
    weights_ = l1->weights;
  } else if (const auto* ind = std::get_if<BoxIndicator>(&nonsmooth_)) {
    intersect(ind->box, "indicator box");
  }
  if (const auto* box = std::get_if<Box>(&constraint_)) intersect(*box, "constraint box");

  for (std::size_t i = 0; i < n; ++i) {
    if (lower_[i] > upper_[i]) {
      throw std::invalid_argument("X ∩ dom Psi is empty at coordinate " + std::to_string(i));
    }
  }
}

CompositeProblem CompositeProblem::with_smooth(std::shared_ptr<const SmoothFunction> smooth) const {
  return CompositeProblem(std::move(smooth), nonsmooth_, constraint_, metric_);
}

bool CompositeProblem::feasible(std::span<const double> x) const {
  if (x.size() != dimension()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
  }
  return true;
}

void composite_gradient_map(const CompositeProblem& problem, std::span<const double> y,
                            ProxStep& out) {
  const std::size_t n = problem.dimension();
  require_dimension(y.size(), n, "composite_gradient_map");
  if (!all_finite(y)) throw NumericalError("composite_gradient_map: non-finite point");
  out.y_plus.resize(n);
  out.g.resize(n);
  // gradient is staged in out.g; the sweep overwrites it in place
  problem.smooth().gradient(y, out.g);
  if (!all_finite(out.g)) throw NumericalError("composite_gradient_map: non-finite gradient");
  const double sq = kernels::prox_sweep({.y = y,
                                         .gradient = out.g,
                                         .curvature = problem.metric().diag(),
                                         .weights = problem.prox_weights(),
                                         .lower = problem.prox_lower(),
                                         .upper = problem.prox_upper(),
                                         .y_plus = out.y_plus,
                                         .g = out.g});
  out.g_dual_norm = std::sqrt(sq);
}

ProxStep composite_gradient_map(const CompositeProblem& problem, std::span<const double> y) {
  ProxStep step;
  composite_gradient_map(problem, y, step);
  return step;
}

double objective(const CompositeProblem& problem, std::span<const double> x) {
  require_dimension(x.size(), problem.dimension(), "objective");
  if (const auto* box = std::get_if<Box>(&problem.constraint()); box && !box->contains(x)) {
    return kInf;
  }
  const double psi = evaluate(problem.nonsmooth(), x);
  if (psi == kInf) return kInf;
  return problem.smooth().value(x) + psi;
}

double descent_gap(const CompositeProblem& problem, std::span<const double> x,
                   std::span<const double> y) {
  const std::size_t n = problem.dimension();
  require_dimension(x.size(), n, "descent_gap x");
  require_dimension(y.size(), n, "descent_gap y");
  std::vector<double> grad(n);
  problem.smooth().gradient(y, grad);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
  return problem.smooth().value(y) + kernels::dot(grad, d) +
         0.5 * kernels::metric_sq_norm(d, problem.metric().diag()) - problem.smooth().value(x);
}

}  // namespace rfista
