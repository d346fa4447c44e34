#pragma once

// Randomized weighted-Lasso instances
//   min_x  ||A x - b||_2^2 / (2N) + ||W x||_1
// with a diagonal metric from Gershgorin row sums of H = A^T A / N, plus the
// high-accuracy oracles (f*, x*, growth parameter) used to check solver
// bounds.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfista/model.hpp"
#include "rfista/sparse.hpp"

namespace rfista {

/// Underdetermined weighted Lasso: n > N, W_ii ~ Uniform[0, alpha].
struct LassoSpec {
  std::size_t rows = 600;     // N
  std::size_t cols = 800;     // n
  double alpha = 0.01;
  double sparsity = 0.9;      // probability of a zero entry in A
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Least squares with N >= n and no l1 term; the strongly convex test family
/// for which the growth parameter is computable.
struct QuadraticSpec {
  std::size_t rows = 40;
  std::size_t cols = 20;
  double sparsity = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class Family { Lasso, Quadratic };

std::string_view family_name(Family family);
std::optional<Family> parse_family(std::string_view token);

/// h(x) = scale * ||A x - b||^2 / 2, grad h(x) = scale * A^T (A x - b).
class LeastSquares final : public SmoothFunction {
 public:
  LeastSquares(std::shared_ptr<const SparseMatrix> a, std::vector<double> b, double scale);

  std::size_t dimension() const override { return a_->cols(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;

 private:
  std::shared_ptr<const SparseMatrix> a_;
  std::vector<double> b_;
  double scale_;
};

struct LassoProblem {
  Family family = Family::Lasso;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double alpha = 0.0;
  double sparsity = 0.0;
  std::uint64_t seed = 0;

  std::shared_ptr<const SparseMatrix> a;
  std::vector<double> b;
  std::vector<double> weights;  // diag(W)
  CompositeProblem problem;
};

/// Deterministic in the spec. Random streams (each an mt19937_64 seeded from
/// splitmix64(seed + stream * 0x9E3779B97F4A7C15)):
///   0: zero/nonzero pattern of A (column-major), 1: nonzero values of A,
///   2: b, 3: W.
LassoProblem generate(const LassoSpec& spec);
LassoProblem generate(const QuadraticSpec& spec);

/// Builds the composite problem around given data. Recomputes the metric.
LassoProblem assemble(Family family, std::size_t rows, std::size_t cols, double alpha,
                      double sparsity, std::uint64_t seed, SparseMatrix a, std::vector<double> b,
                      std::vector<double> weights);

/// R_ii = max(sum_j |H_ij|, 1e-12 * max_i sum_j |H_ij|), H = A^T A / N.
/// An all-zero A yields the identity.
Metric gershgorin_metric(const SparseMatrix& a, std::size_t n_rows);

struct FstarOracle {
  bool valid = false;
  double f_star = 0.0;
  std::vector<double> x_star;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  std::string diagnostic;
};

/// Solves with LCR-FISTA to `tight_eps` from r_0 = 0 and cross-checks the
/// result against the Lasso optimality conditions (tolerance 1e-6).
FstarOracle oracle_fstar(const LassoProblem& lasso, double tight_eps,
                         std::size_t budget = 10'000'000);

/// Largest violation of the Lasso KKT conditions at x:
///   |grad_i + W_ii sign(x_i)|      for x_i != 0,
///   max(|grad_i| - W_ii, 0)        for x_i == 0.
double lasso_kkt_residual(const LassoProblem& lasso, std::span<const double> x);

/// Smallest eigenvalue of R^{-1/2} H R^{-1/2} for dense symmetric H
/// (row-major). nullopt when H is not positive definite.
std::optional<double> growth_parameter(std::span<const double> h_dense, const Metric& metric);

/// Growth parameter of a Psi = 0 instance with full column rank; nullopt
/// otherwise. Dense, desk scale only.
std::optional<double> oracle_mu(const LassoProblem& lasso);

/// Exact minimizer of a Psi = 0 instance via the normal equations.
std::optional<std::pair<double, std::vector<double>>> least_squares_solution(
    const LassoProblem& lasso);

/// File layout:
///   line 1  : JSON header {"format":"rfista-problem","version":1,...}
///   A       : Matrix Market coordinate block (1-based indices)
///   "% b"   : N values, one per line
///   "% w"   : n values, one per line
/// Values are written with 17 significant digits, so reading back is exact.
void write_problem(std::ostream& os, const LassoProblem& lasso);
LassoProblem read_problem(std::istream& is);

}  // namespace rfista
