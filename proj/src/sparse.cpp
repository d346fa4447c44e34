#include "rfista/sparse.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rfista {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries) {
  for (const auto& e : entries) {
    if (e.row >= rows || e.col >= cols) {
      throw std::invalid_argument("sparse entry (" + std::to_string(e.row) + ", " +
                                  std::to_string(e.col) + ") outside " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });

  // merge duplicates, drop exact zeros
  std::vector<Triplet> merged;
  merged.reserve(entries.size());
  for (const auto& e : entries) {
    if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Triplet& t) { return t.value == 0.0; });

  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.col_ptr_.assign(cols + 1, 0);
  m.row_index_.reserve(merged.size());
  m.csc_values_.reserve(merged.size());
  for (const auto& t : merged) {
    ++m.col_ptr_[t.col + 1];
    m.row_index_.push_back(t.row);
    m.csc_values_.push_back(t.value);
  }
  for (std::size_t j = 0; j < cols; ++j) m.col_ptr_[j + 1] += m.col_ptr_[j];

  m.row_ptr_.assign(rows + 1, 0);
  for (const auto& t : merged) ++m.row_ptr_[t.row + 1];
  for (std::size_t i = 0; i < rows; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  m.col_index_.resize(merged.size());
  m.csr_values_.resize(merged.size());
  std::vector<std::size_t> cursor(m.row_ptr_.begin(), m.row_ptr_.end() - 1);
  // columns visited in increasing order, so each CSR row ends up sorted
  for (const auto& t : merged) {
    const std::size_t slot = cursor[t.row]++;
    m.col_index_[slot] = t.col;
    m.csr_values_[slot] = t.value;
  }
  return m;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nonzeros());
  for (std::size_t j = 0; j < cols_; ++j) {
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      out.push_back({row_index_[p], j, csc_values_[p]});
    }
  }
  return out;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> dense(rows_ * cols_, 0.0);
  for (std::size_t j = 0; j < cols_; ++j) {
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      dense[row_index_[p] * cols_ + j] = csc_values_[p];
    }
  }
  return dense;
}

}  // namespace rfista
