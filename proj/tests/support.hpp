#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "rfista/lasso.hpp"
#include "rfista/model.hpp"
#include "rfista/restart.hpp"

namespace rfista::testing {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// Forwards to another smooth part and counts gradient evaluations. Every
/// composite-gradient step evaluates the gradient exactly once.
class CountingSmooth final : public SmoothFunction {
 public:
  explicit CountingSmooth(std::shared_ptr<const SmoothFunction> inner) : inner_(std::move(inner)) {}

  std::size_t dimension() const override { return inner_->dimension(); }
  double value(std::span<const double> x) const override { return inner_->value(x); }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    ++calls_;
    inner_->gradient(x, out);
  }

  std::size_t calls() const { return calls_.load(); }
  void reset() { calls_ = 0; }

 private:
  std::shared_ptr<const SmoothFunction> inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

/// Scalar Lasso h = (a x - b)^2 / 2, Psi = w |x|, R = a^2.
inline LassoProblem scalar_lasso(double a, double b, double w) {
  return assemble(Family::Lasso, 1, 1, w, 0.0, 0, SparseMatrix::from_triplets(1, 1, {{0, 0, a}}),
                  {b}, {w});
}

inline LassoProblem desk_lasso(std::uint64_t seed, std::size_t rows = 60, std::size_t cols = 80) {
  return generate(LassoSpec{rows, cols, 0.01, 0.9, seed});
}

inline LassoProblem desk_quadratic(std::uint64_t seed) {
  return generate(QuadraticSpec{40, 20, 0.0, seed});
}

/// 2-D quadratic with strongly coupled coordinates: the diagonal metric
/// sees curvature 1.99 in both directions while the smallest eigenvalue of
/// the Hessian is 0.01, so FISTA overshoots and oscillates.
inline CompositeProblem coupled_quadratic() {
  auto h = std::make_shared<QuadraticFunction>(std::vector<double>{1.0, 0.99, 0.99, 1.0},
                                               std::vector<double>{-1.0, 0.5});
  return CompositeProblem(std::move(h), ZeroPenalty{}, AllSpace{}, Metric({1.99, 1.99}));
}

/// Minimizer of a convex scalar function on [lo, hi]: a coarse scan with
/// step 1e-3, then a fine scan with step 1e-6 around the best coarse point.
template <class F>
double grid_argmin(F phi, double lo, double hi) {
  auto scan = [&](double a, double b, double step) {
    double best_x = a, best = phi(a);
    const auto steps = static_cast<long>(std::floor((b - a) / step));
    for (long i = 1; i <= steps; ++i) {
      const double x = a + static_cast<double>(i) * step;
      const double v = phi(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    return best_x;
  };
  const double coarse = scan(lo, hi, 1e-3);
  return scan(std::max(lo, coarse - 2e-3), std::min(hi, coarse + 2e-3), 1e-6);
}

inline double sum_observed(const RestartTrace& t) {
  double s = 0.0;
  for (const auto& r : t.restarts) s += static_cast<double>(r.observed_n);
  return s;
}

}  // namespace rfista::testing
