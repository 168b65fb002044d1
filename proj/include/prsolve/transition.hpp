#pragma once

#include "prsolve/sparse_matrix.hpp"
#include "prsolve/types.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace prsolve {

/// Counts matrix-vector products.  Exactly one increment per transition
/// apply; atomic so concurrent solver threads never lose a count.
class MvCounter {
 public:
  void increment() { count_.fetch_add(1, std::memory_order_relaxed); }
  long long value() const { return count_.load(std::memory_order_relaxed); }

 private:
  std::atomic<long long> count_{0};
};

/// Matrix-free PageRank transition operator.
///
/// For a link graph with adjacency A (row i = out-links of page i), the
/// column-stochastic transition matrix is
///     P = Ptilde^T + v * d^T,
/// where Ptilde_ij = 1/outdeg(i) when i links to j, d marks dangling pages,
/// and v is the teleport distribution.  P is never formed: an apply gathers
/// x over in-edges with pre-scaled weights 1/outdeg and adds the pooled
/// dangling mass times v.
///
/// Each target entry is accumulated by a single worker in a fixed order, so
/// multi-threaded applies are bitwise identical to sequential ones.
template <class Scalar = double>
class TransitionOperator {
 public:
  TransitionOperator(const CompressedSparseMatrix<Scalar>& adj, Vector<Scalar> teleport,
                     int threads = 1)
      : v_(std::move(teleport)), threads_(threads < 1 ? 1 : threads) {
    if (adj.rows() != adj.cols())
      throw std::invalid_argument("TransitionOperator: adjacency must be square");
    n_ = adj.rows();
    if (v_.size() != n_)
      throw std::invalid_argument("TransitionOperator: teleport size mismatch");
    for (Index i = 0; i < n_; ++i)
      if (!(v_[i] >= Scalar(0)) || !std::isfinite(v_[i]))
        throw std::invalid_argument("TransitionOperator: teleport entries must be >= 0");
    if (std::abs(kahan_sum(v_) - Scalar(1)) > Scalar(1e-14))
      throw std::invalid_argument("TransitionOperator: teleport must sum to 1");

    std::vector<Index> outdeg;
    std::tie(outdeg, dangling_) = compute_outdegrees_and_dangling(adj);

    // In-edge (gather) layout: for each target j, the sources i -> j with
    // pre-multiplied weight 1/outdeg(i).  Stored values of adj are ignored;
    // an entry is a link regardless of weight.
    in_offsets_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (Index i = 0; i < n_; ++i)
      for (Index k = adj.row_begin(i); k < adj.row_end(i); ++k)
        ++in_offsets_[static_cast<std::size_t>(adj.col_indices()[static_cast<std::size_t>(k)]) + 1];
    for (Index j = 0; j < n_; ++j)
      in_offsets_[static_cast<std::size_t>(j) + 1] += in_offsets_[static_cast<std::size_t>(j)];
    in_sources_.resize(static_cast<std::size_t>(adj.nonzeros()));
    in_weights_.resize(static_cast<std::size_t>(adj.nonzeros()));
    std::vector<Index> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
    for (Index i = 0; i < n_; ++i) {
      const Scalar w = outdeg[static_cast<std::size_t>(i)] > 0
                           ? Scalar(1) / static_cast<Scalar>(outdeg[static_cast<std::size_t>(i)])
                           : Scalar(0);
      for (Index k = adj.row_begin(i); k < adj.row_end(i); ++k) {
        const Index j = adj.col_indices()[static_cast<std::size_t>(k)];
        const Index slot = cursor[static_cast<std::size_t>(j)]++;
        in_sources_[static_cast<std::size_t>(slot)] = i;
        in_weights_[static_cast<std::size_t>(slot)] = w;
      }
    }
  }

  TransitionOperator(const TransitionOperator&) = delete;
  TransitionOperator& operator=(const TransitionOperator&) = delete;

  static Vector<Scalar> uniform_teleport(Index n) {
    return Vector<Scalar>::Constant(n, Scalar(1) / static_cast<Scalar>(n));
  }

  Index size() const { return n_; }
  const Vector<Scalar>& teleport() const { return v_; }
  const std::vector<Index>& dangling() const { return dangling_; }
  long long mv_count() const { return mv_.value(); }
  int threads() const { return threads_; }

  /// y = P x.  Counts one matrix-vector product.  x and y must not alias.
  void apply_transition(const Vector<Scalar>& x, Vector<Scalar>& y) const {
    if (x.size() != n_) throw std::invalid_argument("apply_transition: size mismatch");
    mv_.increment();
    y.resize(n_);

    Scalar dangling_mass = 0;
    for (Index i : dangling_) dangling_mass += x[i];

    auto gather = [&](Index lo, Index hi) {
      for (Index j = lo; j < hi; ++j) {
        Scalar acc = 0;
        for (Index k = in_offsets_[static_cast<std::size_t>(j)];
             k < in_offsets_[static_cast<std::size_t>(j) + 1]; ++k)
          acc += x[in_sources_[static_cast<std::size_t>(k)]] *
                 in_weights_[static_cast<std::size_t>(k)];
        y[j] = acc + v_[j] * dangling_mass;
      }
    };

    if (threads_ == 1 || n_ < 4096) {
      gather(0, n_);
    } else {
      std::vector<std::thread> workers;
      const Index chunk = (n_ + threads_ - 1) / threads_;
      for (int t = 0; t < threads_; ++t) {
        const Index lo = static_cast<Index>(t) * chunk;
        const Index hi = std::min(n_, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back(gather, lo, hi);
      }
      for (auto& w : workers) w.join();
    }
  }

  Vector<Scalar> apply_transition(const Vector<Scalar>& x) const {
    Vector<Scalar> y;
    apply_transition(x, y);
    return y;
  }

  /// y = alpha P x + (1 - alpha) v (e^T x), the Google matrix applied to x.
  /// Counts one matrix-vector product.  x and y must not alias.
  void apply_google(Scalar alpha, const Vector<Scalar>& x, Vector<Scalar>& y) const {
    const Scalar mass = x.sum();
    apply_transition(x, y);
    y = alpha * y + (Scalar(1) - alpha) * mass * v_;
  }

  Vector<Scalar> apply_google(Scalar alpha, const Vector<Scalar>& x) const {
    Vector<Scalar> y;
    apply_google(alpha, x, y);
    return y;
  }

  /// || alpha P x + (1 - alpha) v - x ||_2 with a fresh product (counted).
  Scalar pagerank_residual(Scalar alpha, const Vector<Scalar>& x) const {
    return pagerank_residual(alpha, x, apply_transition(x));
  }

  /// Residual reusing a caller-supplied P x; costs no product.
  Scalar pagerank_residual(Scalar alpha, const Vector<Scalar>& x,
                           const Vector<Scalar>& px) const {
    return (alpha * px + (Scalar(1) - alpha) * v_ - x).norm();
  }

 private:
  Index n_ = 0;
  Vector<Scalar> v_;
  std::vector<Index> dangling_;
  std::vector<Index> in_offsets_;
  std::vector<Index> in_sources_;
  std::vector<Scalar> in_weights_;
  int threads_ = 1;
  mutable MvCounter mv_;
};

}  // namespace prsolve
