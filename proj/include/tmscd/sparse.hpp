#pragma once

#include <span>
#include <vector>

#include "tmscd/common.hpp"

namespace tmscd {

// Compressed-row sparse matrix with sorted column indices per row.
// The canonical element order keeps every downstream reduction deterministic.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;  // size n + 1
  std::vector<int> col;
  std::vector<double> val;

  int nnz() const { return static_cast<int>(col.size()); }

  std::span<const int> row_cols(int i) const {
    return {col.data() + row_ptr[i],
            static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
  }
  std::span<const double> row_vals(int i) const {
    return {val.data() + row_ptr[i],
            static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
  }

  int degree(int i) const { return row_ptr[i + 1] - row_ptr[i]; }

  // 0 when the entry is absent; binary search over the sorted row.
  double at(int i, int j) const;

  std::vector<double> to_dense() const;  // row-major n*n
};

struct Triplet {
  int row;
  int col;
  double value;
};

// Builds CSR from unsorted triplets. A duplicated (row, col) position is a
// ConsistencyError: callers are expected to resolve duplicates themselves.
CsrMatrix csr_from_triplets(int n, std::vector<Triplet> triplets);

// Number of connected components of the undirected graph whose edges are the
// off-diagonal nonzeros.
int connected_components(const CsrMatrix& m, std::vector<int>* component = nullptr);

}  // namespace tmscd
