#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rfista {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Immutable sparse matrix. Entries are stored twice: compressed columns
/// (for A^T x) and compressed rows (for A x), so both products are pure
/// gathers and parallelize without write conflicts.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Duplicate coordinates are summed; entries that end up exactly zero are
  /// dropped. Throws std::invalid_argument on out-of-range coordinates.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return csc_values_.size(); }

  std::span<const std::size_t> col_ptr() const noexcept { return col_ptr_; }
  std::span<const std::size_t> row_index() const noexcept { return row_index_; }
  std::span<const double> csc_values() const noexcept { return csc_values_; }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_index() const noexcept { return col_index_; }
  std::span<const double> csr_values() const noexcept { return csr_values_; }

  /// Entries in column-major order.
  std::vector<Triplet> triplets() const;

  /// Dense row-major copy. Desk-scale use only.
  std::vector<double> to_dense() const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<std::size_t> row_index_;
  std::vector<double> csc_values_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_index_;
  std::vector<double> csr_values_;
};

}  // namespace rfista
