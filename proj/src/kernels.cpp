#include "rfista/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace rfista::kernels {

namespace reference {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double metric_sq_norm(std::span<const double> v, std::span<const double> d) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += d[i] * v[i] * v[i];
  return s;
}

double dual_sq_norm(std::span<const double> v, std::span<const double> d) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * v[i] / d[i];
  return s;
}

double weighted_l1(std::span<const double> v, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::abs(v[i]);
  return s;
}

void extrapolate(std::span<const double> x, std::span<const double> x_prev, double beta,
                 std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * (x[i] - x_prev[i]);
}

double prox_sweep(const ProxSweep& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.y.size(); ++i) {
    const double r = a.curvature[i];
    const double v = soft_threshold(a.y[i] - a.gradient[i] / r, a.weights[i] / r);
    const double yp = std::fmin(std::fmax(v, a.lower[i]), a.upper[i]);
    const double gi = r * (a.y[i] - yp);
    a.y_plus[i] = yp;
    a.g[i] = gi;
    s += gi * gi / r;
  }
  return s;
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto ptr = a.row_ptr();
  const auto idx = a.col_index();
  const auto val = a.csr_values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p) s += val[p] * x[idx[p]];
    y[i] = s;
  }
}

void spmv_transpose(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto ptr = a.col_ptr();
  const auto idx = a.row_index();
  const auto val = a.csc_values();
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t p = ptr[j]; p < ptr[j + 1]; ++p) s += val[p] * x[idx[p]];
    y[j] = s;
  }
}

void gram_abs_row_sums(const SparseMatrix& a, double scale, std::span<double> out) {
  const auto cptr = a.col_ptr();
  const auto ridx = a.row_index();
  const auto cval = a.csc_values();
  const auto rptr = a.row_ptr();
  const auto cidx = a.col_index();
  const auto rval = a.csr_values();
  std::vector<double> acc(a.cols(), 0.0);
  std::vector<std::size_t> touched;
  std::vector<char> seen(a.cols(), 0);
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t p = cptr[i]; p < cptr[i + 1]; ++p) {
      const std::size_t r = ridx[p];
      for (std::size_t q = rptr[r]; q < rptr[r + 1]; ++q) {
        const std::size_t j = cidx[q];
        if (!seen[j]) {
          seen[j] = 1;
          touched.push_back(j);
        }
        acc[j] += cval[p] * rval[q];
      }
    }
    double s = 0.0;
    for (std::size_t j : touched) {
      s += std::abs(acc[j]);
      acc[j] = 0.0;
      seen[j] = 0;
    }
    touched.clear();
    out[i] = scale * s;
  }
}

}  // namespace reference

namespace {

using index_t = std::int64_t;

// Deterministic blocked reduction: partial sums over fixed-size blocks,
// combined serially in block order.
template <class Term>
double blocked_sum(std::size_t n, Term term) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  if (blocks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (index_t b = 0; b < static_cast<index_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  return blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double metric_sq_norm(std::span<const double> v, std::span<const double> d) {
  return blocked_sum(v.size(), [&](std::size_t i) { return d[i] * v[i] * v[i]; });
}

double dual_sq_norm(std::span<const double> v, std::span<const double> d) {
  return blocked_sum(v.size(), [&](std::size_t i) { return v[i] * v[i] / d[i]; });
}

double weighted_l1(std::span<const double> v, std::span<const double> w) {
  return blocked_sum(v.size(), [&](std::size_t i) { return w[i] * std::abs(v[i]); });
}

void extrapolate(std::span<const double> x, std::span<const double> x_prev, double beta,
                 std::span<double> y) {
  const auto n = static_cast<index_t>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= kParallelThreshold)
  for (index_t i = 0; i < n; ++i) y[i] = x[i] + beta * (x[i] - x_prev[i]);
}

double prox_sweep(const ProxSweep& a) {
  // elementwise update first, then the dual-norm reduction
  const auto n = static_cast<index_t>(a.y.size());
#pragma omp parallel for schedule(static) if (a.y.size() >= kParallelThreshold)
  for (index_t i = 0; i < n; ++i) {
    const double r = a.curvature[i];
    const double v = soft_threshold(a.y[i] - a.gradient[i] / r, a.weights[i] / r);
    const double yp = std::fmin(std::fmax(v, a.lower[i]), a.upper[i]);
    a.y_plus[i] = yp;
    a.g[i] = r * (a.y[i] - yp);
  }
  return dual_sq_norm(a.g, a.curvature);
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto ptr = a.row_ptr();
  const auto idx = a.col_index();
  const auto val = a.csr_values();
  const auto rows = static_cast<index_t>(a.rows());
#pragma omp parallel for schedule(static) if (a.nonzeros() >= kParallelThreshold)
  for (index_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p) s += val[p] * x[idx[p]];
    y[i] = s;
  }
}

void spmv_transpose(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto ptr = a.col_ptr();
  const auto idx = a.row_index();
  const auto val = a.csc_values();
  const auto cols = static_cast<index_t>(a.cols());
#pragma omp parallel for schedule(static) if (a.nonzeros() >= kParallelThreshold)
  for (index_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t p = ptr[j]; p < ptr[j + 1]; ++p) s += val[p] * x[idx[p]];
    y[j] = s;
  }
}

void gram_abs_row_sums(const SparseMatrix& a, double scale, std::span<double> out) {
  const auto cptr = a.col_ptr();
  const auto ridx = a.row_index();
  const auto cval = a.csc_values();
  const auto rptr = a.row_ptr();
  const auto cidx = a.col_index();
  const auto rval = a.csr_values();
  const auto cols = static_cast<index_t>(a.cols());
#pragma omp parallel if (a.nonzeros() >= kParallelThreshold)
  {
    std::vector<double> acc(a.cols(), 0.0);
    std::vector<std::size_t> touched;
    std::vector<char> seen(a.cols(), 0);
#pragma omp for schedule(dynamic, 16)
    for (index_t ii = 0; ii < cols; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      for (std::size_t p = cptr[i]; p < cptr[i + 1]; ++p) {
        const std::size_t r = ridx[p];
        for (std::size_t q = rptr[r]; q < rptr[r + 1]; ++q) {
          const std::size_t j = cidx[q];
          if (!seen[j]) {
            seen[j] = 1;
            touched.push_back(j);
          }
          acc[j] += cval[p] * rval[q];
        }
      }
      double s = 0.0;
      for (std::size_t j : touched) {
        s += std::abs(acc[j]);
        acc[j] = 0.0;
        seen[j] = 0;
      }
      touched.clear();
      out[i] = scale * s;
    }
  }
}

}  // namespace rfista::kernels
