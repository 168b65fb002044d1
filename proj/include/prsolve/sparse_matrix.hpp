#pragma once

#include "prsolve/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prsolve {

template <class Scalar>
struct Triplet {
  Index row;
  Index col;
  Scalar value;
};

/// Row-compressed sparse matrix.  For a link graph, row i holds the
/// out-edges of page i: an entry (i, j) means i links to j.
template <class Scalar = double>
class CompressedSparseMatrix {
 public:
  CompressedSparseMatrix() = default;

  /// Builds from an unordered triplet list.  Entries are sorted by (row, col)
  /// and duplicate coordinates are merged down to a single stored entry (the
  /// last occurrence wins); a page linking twice still contributes one edge.
  static CompressedSparseMatrix from_triplets(Index rows, Index cols,
                                              std::vector<Triplet<Scalar>> entries) {
    if (rows < 0 || cols < 0)
      throw std::invalid_argument("CompressedSparseMatrix: negative dimensions");
    for (const auto& t : entries) {
      if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
        throw std::invalid_argument("CompressedSparseMatrix: triplet index out of bounds");
      if (!std::isfinite(t.value))
        throw std::invalid_argument("CompressedSparseMatrix: non-finite value");
    }
    // Stable sort keeps duplicate coordinates in input order so that the
    // last occurrence is the one retained by the merge below.
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Triplet<Scalar>& a, const Triplet<Scalar>& b) {
                       return a.row != b.row ? a.row < b.row : a.col < b.col;
                     });

    CompressedSparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_offsets_.assign(static_cast<std::size_t>(rows) + 1, 0);
    m.col_indices_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (k + 1 < entries.size() && entries[k + 1].row == entries[k].row &&
          entries[k + 1].col == entries[k].col)
        continue;  // duplicate; a later occurrence supersedes this one
      m.col_indices_.push_back(entries[k].col);
      m.values_.push_back(entries[k].value);
      ++m.row_offsets_[static_cast<std::size_t>(entries[k].row) + 1];
    }
    std::partial_sum(m.row_offsets_.begin(), m.row_offsets_.end(), m.row_offsets_.begin());
    return m;
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nonzeros() const { return static_cast<Index>(col_indices_.size()); }

  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_indices() const { return col_indices_; }
  const std::vector<Scalar>& values() const { return values_; }

  Index row_begin(Index i) const { return row_offsets_[static_cast<std::size_t>(i)]; }
  Index row_end(Index i) const { return row_offsets_[static_cast<std::size_t>(i) + 1]; }

  CompressedSparseMatrix transpose() const {
    std::vector<Triplet<Scalar>> entries;
    entries.reserve(values_.size());
    for (Index i = 0; i < rows_; ++i)
      for (Index k = row_begin(i); k < row_end(i); ++k)
        entries.push_back({col_indices_[static_cast<std::size_t>(k)], i,
                           values_[static_cast<std::size_t>(k)]});
    return from_triplets(cols_, rows_, std::move(entries));
  }

  friend bool operator==(const CompressedSparseMatrix& a, const CompressedSparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.row_offsets_ == b.row_offsets_ &&
           a.col_indices_ == b.col_indices_ && a.values_ == b.values_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_offsets_ = {0};
  std::vector<Index> col_indices_;
  std::vector<Scalar> values_;
};

/// Out-degrees plus the sorted list of dangling rows (zero out-degree).
/// Stored values are treated as link indicators only; weights are ignored.
template <class Scalar>
std::pair<std::vector<Index>, std::vector<Index>> compute_outdegrees_and_dangling(
    const CompressedSparseMatrix<Scalar>& adj) {
  if (adj.rows() != adj.cols())
    throw std::invalid_argument("compute_outdegrees_and_dangling: matrix must be square");
  std::vector<Index> outdeg(static_cast<std::size_t>(adj.rows()));
  std::vector<Index> dangling;
  for (Index i = 0; i < adj.rows(); ++i) {
    outdeg[static_cast<std::size_t>(i)] = adj.row_end(i) - adj.row_begin(i);
    if (outdeg[static_cast<std::size_t>(i)] == 0) dangling.push_back(i);
  }
  return {std::move(outdeg), std::move(dangling)};
}

struct IngestStats {
  Index n = 0;
  Index nnz = 0;
  double density_percent = 0.0;  // nnz / n^2 * 100
  Index dangling_count = 0;
};

template <class Scalar>
IngestStats ingest_stats(const CompressedSparseMatrix<Scalar>& adj) {
  if (adj.rows() != adj.cols())
    throw std::invalid_argument("ingest_stats: matrix must be square");
  IngestStats s;
  s.n = adj.rows();
  s.nnz = adj.nonzeros();
  s.density_percent =
      s.n == 0 ? 0.0
               : 100.0 * static_cast<double>(s.nnz) /
                     (static_cast<double>(s.n) * static_cast<double>(s.n));
  s.dangling_count =
      static_cast<Index>(compute_outdegrees_and_dangling(adj).second.size());
  return s;
}

}  // namespace prsolve
