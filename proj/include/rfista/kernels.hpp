#pragma once

// Inner-loop kernels used by the solvers.
//
// Every kernel exists twice: `reference::` holds the plain serial loop kept
// as the testing baseline, and the unqualified version is the OpenMP one the
// solvers call. Reductions in the OpenMP versions sum fixed-size blocks and
// then combine the block partials in order, so their results depend only on
// the input, never on the thread count. Below one block they reproduce the
// reference loop bit for bit.

#include <cstddef>
#include <span>

#include "rfista/sparse.hpp"

namespace rfista::kernels {

inline constexpr std::size_t kReductionBlock = 4096;
inline constexpr std::size_t kParallelThreshold = 8192;

/// sign(t) * max(|t| - lambda, 0); |t| == lambda maps to exactly 0.
inline double soft_threshold(double t, double lambda) noexcept {
  if (t > lambda) return t - lambda;
  if (t < -lambda) return t + lambda;
  return 0.0;
}

/// Arguments of the separable composite-gradient step under a diagonal
/// metric. Per coordinate:
///   y_plus = clip(soft_threshold(y - grad / R, w / R), lower, upper)
///   g      = R * (y - y_plus)
/// `g` may alias `gradient`: each index is read before it is written.
struct ProxSweep {
  std::span<const double> y;
  std::span<const double> gradient;
  std::span<const double> curvature;  // diag(R)
  std::span<const double> weights;
  std::span<const double> lower;
  std::span<const double> upper;
  std::span<double> y_plus;
  std::span<double> g;
};

namespace reference {

double dot(std::span<const double> a, std::span<const double> b);
/// sum d_i v_i^2
double metric_sq_norm(std::span<const double> v, std::span<const double> d);
/// sum v_i^2 / d_i
double dual_sq_norm(std::span<const double> v, std::span<const double> d);
/// sum w_i |v_i|
double weighted_l1(std::span<const double> v, std::span<const double> w);
/// y = x + beta (x - x_prev)
void extrapolate(std::span<const double> x, std::span<const double> x_prev, double beta,
                 std::span<double> y);
/// Returns sum g_i^2 / R_ii.
double prox_sweep(const ProxSweep& args);
/// y = A x
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
/// y = A^T x
void spmv_transpose(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
/// out_i = scale * sum_j |(A^T A)_ij|
void gram_abs_row_sums(const SparseMatrix& a, double scale, std::span<double> out);

}  // namespace reference

double dot(std::span<const double> a, std::span<const double> b);
double metric_sq_norm(std::span<const double> v, std::span<const double> d);
double dual_sq_norm(std::span<const double> v, std::span<const double> d);
double weighted_l1(std::span<const double> v, std::span<const double> w);
void extrapolate(std::span<const double> x, std::span<const double> x_prev, double beta,
                 std::span<double> y);
double prox_sweep(const ProxSweep& args);
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
void spmv_transpose(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
void gram_abs_row_sums(const SparseMatrix& a, double scale, std::span<double> out);

}  // namespace rfista::kernels
