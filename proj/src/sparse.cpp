#include "tmscd/sparse.hpp"

#include <algorithm>
#include <numeric>

namespace tmscd {

double CsrMatrix::at(int i, int j) const {
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return val[row_ptr[i] + static_cast<int>(it - cols.begin())];
}

std::vector<double> CsrMatrix::to_dense() const {
  std::vector<double> dense(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      dense[static_cast<std::size_t>(i) * n + col[k]] = val[k];
    }
  }
  return dense;
}

CsrMatrix csr_from_triplets(int n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 1; k < triplets.size(); ++k) {
    if (triplets[k].row == triplets[k - 1].row && triplets[k].col == triplets[k - 1].col) {
      throw ConsistencyError("duplicate sparse entry at (" + std::to_string(triplets[k].row) +
                             ", " + std::to_string(triplets[k].col) + ")");
    }
  }
  CsrMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  m.col.resize(triplets.size());
  m.val.resize(triplets.size());
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
      throw RangeError("sparse entry outside matrix bounds");
    }
    ++m.row_ptr[t.row + 1];
  }
  std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    m.col[k] = triplets[k].col;
    m.val[k] = triplets[k].value;
  }
  return m;
}

int connected_components(const CsrMatrix& m, std::vector<int>* component) {
  if (component) component->assign(m.n, -1);
  std::vector<int> parent(m.n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int i = 0; i < m.n; ++i) {
    for (int j : m.row_cols(i)) {
      if (j == i) continue;
      int a = find(i), b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  int count = 0;
  std::vector<int> label(m.n, -1);
  for (int i = 0; i < m.n; ++i) {
    int r = find(i);
    if (label[r] < 0) label[r] = count++;
    if (component) (*component)[i] = label[r];
  }
  return count;
}

}  // namespace tmscd
