#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rfista/kernels.hpp"
#include "rfista/model.hpp"
#include "support.hpp"

using namespace rfista;
using rfista::testing::random_vector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<const SmoothFunction> scalar_quadratic(double q, double c) {
  return std::make_shared<QuadraticFunction>(std::vector<double>{q}, std::vector<double>{c});
}

// h(x) = 1/2 ||x||^2 on R^n.
std::shared_ptr<const SmoothFunction> half_norm(std::size_t n) {
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;
  return std::make_shared<QuadraticFunction>(std::move(q), std::vector<double>(n, 0.0));
}

class NanGradient final : public SmoothFunction {
 public:
  std::size_t dimension() const override { return 1; }
  double value(std::span<const double>) const override { return 0.0; }
  void gradient(std::span<const double>, std::span<double> out) const override {
    out[0] = std::numeric_limits<double>::quiet_NaN();
  }
};

double inner(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> minus(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

TEST_CASE("metric validation and norms") {
  CHECK_THROWS_AS(Metric({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Metric({-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Metric({kInf}), std::invalid_argument);
  CHECK_THROWS_AS(Metric({std::nan("")}), std::invalid_argument);

  const auto id = Metric::identity(2);
  CHECK(dual_norm(id, std::vector<double>{3, 4}) == doctest::Approx(5.0));
  CHECK(dual_norm(Metric({4.0}), std::vector<double>{2}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(dual_norm(id, std::vector<double>{1, 2, 3}), std::invalid_argument);

  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const Metric r(random_vector(rng, 6, 0.1, 10.0));
    const auto x = random_vector(rng, 6);
    std::vector<double> rx(6);
    for (std::size_t i = 0; i < 6; ++i) rx[i] = r.diag()[i] * x[i];
    CHECK(r.dual_norm(rx) == doctest::Approx(r.norm(x)).epsilon(1e-12));
    CHECK(r.norm(x) * r.dual_norm(x) >= inner(x, x) * (1 - 1e-12));
  }
}

TEST_CASE("objective examples") {
  const std::vector<double> zero2{0.0, 0.0};
  const CompositeProblem quad(half_norm(2), ZeroPenalty{}, AllSpace{}, Metric::identity(2));
  CHECK(objective(quad, zero2) == 0.0);

  const auto h0 = std::make_shared<QuadraticFunction>(std::vector<double>(4, 0.0), zero2);
  const CompositeProblem l1(h0, WeightedL1{{1.0, 2.0}}, AllSpace{}, Metric::identity(2));
  CHECK(objective(l1, std::vector<double>{1, -1}) == doctest::Approx(3.0));

  const CompositeProblem box(scalar_quadratic(0.0, 0.0), BoxIndicator{Box{{0.0}, {1.0}}}, AllSpace{},
                             Metric::identity(1));
  CHECK(objective(box, std::vector<double>{2.0}) == kInf);
  CHECK(objective(box, std::vector<double>{0.5}) == 0.0);

  const CompositeProblem constrained(scalar_quadratic(1.0, 0.0), ZeroPenalty{}, Box{{0.0}, {1.0}},
                                     Metric::identity(1));
  CHECK(objective(constrained, std::vector<double>{-1.0}) == kInf);
}

TEST_CASE("nonsmooth evaluation") {
  const std::vector<double> x{1.0, -2.0};
  CHECK(evaluate(Nonsmooth{ZeroPenalty{}}, x) == 0.0);
  CHECK(evaluate(Nonsmooth{WeightedL1{{0.5, 1.0}}}, x) == doctest::Approx(2.5));
  CHECK(evaluate(Nonsmooth{BoxIndicator{Box{{0, -3}, {1, 0}}}}, x) == 0.0);
  CHECK(evaluate(Nonsmooth{BoxIndicator{Box{{0, -1}, {1, 0}}}}, x) == kInf);
}

TEST_CASE("problem validation") {
  CHECK_THROWS_AS(
      CompositeProblem(half_norm(2), ZeroPenalty{}, AllSpace{}, Metric::identity(3)),
      std::invalid_argument);
  CHECK_THROWS_AS(CompositeProblem(half_norm(2), WeightedL1{{1.0, -1.0}}, AllSpace{},
                                   Metric::identity(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(CompositeProblem(half_norm(1), ZeroPenalty{}, Box{{1.0}, {0.0}},
                                   Metric::identity(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(CompositeProblem(half_norm(1), BoxIndicator{Box{{2.0}, {3.0}}},
                                   Box{{0.0}, {1.0}}, Metric::identity(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(CompositeProblem(nullptr, ZeroPenalty{}, AllSpace{}, Metric::identity(1)),
                  std::invalid_argument);
}

TEST_CASE("composite gradient map examples") {
  SUBCASE("gradient step with matched curvature lands on the minimizer") {
    const CompositeProblem p(scalar_quadratic(1.0, 0.0), ZeroPenalty{}, AllSpace{},
                             Metric::identity(1));
    const auto step = composite_gradient_map(p, std::vector<double>{5.0});
    CHECK(step.y_plus[0] == 0.0);
    CHECK(step.g[0] == 5.0);
    CHECK(step.g_dual_norm == 5.0);
  }
  SUBCASE("soft threshold step") {
    const auto lasso = rfista::testing::scalar_lasso(1.0, 3.0, 1.0);
    const auto step = composite_gradient_map(lasso.problem, std::vector<double>{0.0});
    CHECK(step.y_plus[0] == doctest::Approx(2.0));
    CHECK(step.g[0] == doctest::Approx(-2.0));
    // Independent: grid search of the prox subproblem.
    const double grad = -3.0;
    const double x = rfista::testing::grid_argmin(
        [&](double t) { return std::abs(t) + grad * t + 0.5 * t * t; }, -10.0, 10.0);
    CHECK(x == doctest::Approx(step.y_plus[0]).epsilon(1e-4));
  }
  SUBCASE("optimal point has zero gradient map") {
    const auto lasso = rfista::testing::scalar_lasso(1.0, 3.0, 1.0);
    CHECK(composite_gradient_map(lasso.problem, std::vector<double>{2.0}).g_dual_norm == 0.0);
  }
  SUBCASE("errors") {
    const CompositeProblem p(scalar_quadratic(1.0, 0.0), ZeroPenalty{}, AllSpace{},
                             Metric::identity(1));
    CHECK_THROWS_AS(composite_gradient_map(p, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(composite_gradient_map(p, std::vector<double>{kInf}), NumericalError);
    const CompositeProblem bad(std::make_shared<NanGradient>(), ZeroPenalty{}, AllSpace{},
                               Metric::identity(1));
    CHECK_THROWS_AS(composite_gradient_map(bad, std::vector<double>{1.0}), NumericalError);
  }
}

TEST_CASE("prox closed forms match grid search") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3.0, 3.0), pos(0.5, 3.0), wdist(0.0, 2.0);
  for (int kind = 0; kind < 3; ++kind) {
    for (int rep = 0; rep < 100; ++rep) {
      const double q = pos(rng), c = u(rng), r = pos(rng) + q, y = u(rng);
      const double w = wdist(rng);
      double lo = u(rng), hi = u(rng);
      if (lo > hi) std::swap(lo, hi);
      Nonsmooth psi = kind == 0   ? Nonsmooth{ZeroPenalty{}}
                      : kind == 1 ? Nonsmooth{WeightedL1{{w}}}
                                  : Nonsmooth{BoxIndicator{Box{{lo}, {hi}}}};
      const CompositeProblem p(scalar_quadratic(q, c), psi, AllSpace{}, Metric({r}));
      const auto step = composite_gradient_map(p, std::vector<double>{y});
      const double grad = q * y + c;
      const double x = rfista::testing::grid_argmin(
          [&](double t) {
            return evaluate(psi, std::span<const double>(&t, 1)) + grad * (t - y) +
                   0.5 * r * (t - y) * (t - y);
          },
          -10.0, 10.0);
      CAPTURE(kind);
      CHECK(std::abs(x - step.y_plus[0]) <= 1e-4);
      CHECK(step.g[0] == r * (y - step.y_plus[0]));
    }
  }
}

TEST_CASE("composite gradient inequalities") {
  std::mt19937_64 rng(22);
  const auto lasso = rfista::testing::desk_lasso(5, 20, 30);
  const auto box_h = std::make_shared<QuadraticFunction>(
      std::vector<double>{2.0, 0.5, 0.5, 1.0}, std::vector<double>{-1.0, 3.0});
  const CompositeProblem boxed(box_h, WeightedL1{{0.3, 0.1}}, Box{{-1.0, -2.0}, {1.0, 0.5}},
                               Metric({2.5, 1.5}));

  for (const CompositeProblem* p : {&lasso.problem, &boxed}) {
    const std::size_t n = p->dimension();
    const auto d = p->metric().diag();
    for (int rep = 0; rep < 200; ++rep) {
      const auto y = random_vector(rng, n, -2, 2);
      auto x = random_vector(rng, n, -2, 2);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::clamp(x[i], p->prox_lower()[i], p->prox_upper()[i]);
      }
      const auto step = composite_gradient_map(*p, y);
      const double gg = step.g_dual_norm * step.g_dual_norm;
      const double lhs = objective(*p, step.y_plus) - objective(*p, x);
      const double a = inner(step.g, minus(step.y_plus, x)) + 0.5 * gg;
      const double b = inner(step.g, minus(y, x)) - 0.5 * gg;
      const double c = -0.5 * kernels::reference::metric_sq_norm(minus(step.y_plus, x), d) +
                       0.5 * kernels::reference::metric_sq_norm(minus(y, x), d);
      const double scale = 1.0 + std::abs(a);
      CHECK(lhs <= a + 1e-9 * scale);
      CHECK(std::abs(a - b) <= 1e-9 * scale);
      CHECK(std::abs(a - c) <= 1e-9 * scale);
      CHECK(p->feasible(step.y_plus));

      // Claim 2 needs y in X.
      const auto step_x = composite_gradient_map(*p, x);
      const double decrease = objective(*p, x) - objective(*p, step_x.y_plus);
      CHECK(0.5 * step_x.g_dual_norm * step_x.g_dual_norm <= decrease + 1e-12 * (1 + std::abs(decrease)));
    }
  }
}

TEST_CASE("small gradient map certifies near-optimality") {
  const auto q = rfista::testing::desk_quadratic(4);
  const auto exact = least_squares_solution(q);
  REQUIRE(exact);
  const auto& [f_star, x_star] = *exact;
  CHECK(composite_gradient_map(q.problem, x_star).g_dual_norm <= 1e-10);

  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    auto y = x_star;
    const double scale = std::pow(10.0, -static_cast<double>(rep % 8));
    for (auto& v : y) v += scale * std::uniform_real_distribution<double>(-1, 1)(rng);
    const auto step = composite_gradient_map(q.problem, y);
    const double dist = q.problem.metric().norm(minus(y, x_star));
    CHECK(objective(q.problem, step.y_plus) - f_star <= step.g_dual_norm * dist + 1e-12);
  }
}

TEST_CASE("descent and convexity inequalities on generated problems") {
  std::mt19937_64 rng(24);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto lasso = rfista::testing::desk_lasso(seed);
    const auto& p = lasso.problem;
    std::vector<double> gy(p.dimension());
    for (int rep = 0; rep < 100; ++rep) {
      const auto x = random_vector(rng, p.dimension(), -3, 3);
      const auto y = random_vector(rng, p.dimension(), -3, 3);
      const double hx = p.smooth().value(x), hy = p.smooth().value(y);
      const double tol = 1e-9 * (1.0 + std::abs(hx) + std::abs(hy));
      CHECK(descent_gap(p, x, y) >= -tol);
      p.smooth().gradient(y, gy);
      CHECK(hx >= hy + inner(gy, minus(x, y)) - tol);
    }
  }
}
