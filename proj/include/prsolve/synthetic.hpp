#pragma once

#include "prsolve/sparse_matrix.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace prsolve {

/// splitmix64: the fixed, portable generator used for all synthetic graphs.
/// state advances by the golden-gamma constant; output is the finalizer
///   z  = state += 0x9E3779B97F4A7C15
///   z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   out = z ^ (z >> 31)
/// Identical seeds therefore reproduce identical graphs on any platform.
class Splitmix64 {
 public:
  explicit Splitmix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound) by rejection, so the result is unbiased.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Splitmix64::next_below: bound must be > 0");
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

enum class GraphModel { uniform_sparse, preferential_attachment };

struct GraphSpec {
  Index n = 0;
  GraphModel model = GraphModel::uniform_sparse;
  double avg_outdegree = 8.0;
  double dangling_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Deterministic random link graph.  Exactly ceil(dangling_fraction * n)
/// nodes have zero out-degree.  Both models wire a handful of nodes into
/// closed link cycles (spider traps): these give the transition matrix a
/// small cluster of unit-modulus eigenvalues, so at high damping factors the
/// benchmark behaves like a real web graph instead of a fast-mixing random
/// one.  The preferential-attachment model additionally reuses earlier
/// targets, producing a heavy-tailed in-degree distribution.
template <class Scalar = double>
CompressedSparseMatrix<Scalar> generate_graph(const GraphSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("generate_graph: n must be >= 1");
  if (!(spec.dangling_fraction >= 0.0) || spec.dangling_fraction >= 1.0)
    throw std::invalid_argument("generate_graph: dangling_fraction must be in [0, 1)");
  if (!(spec.avg_outdegree > 0.0))
    throw std::invalid_argument("generate_graph: avg_outdegree must be positive");

  const Index n = spec.n;
  if (n == 1) return CompressedSparseMatrix<Scalar>::from_triplets(1, 1, {});

  Splitmix64 rng(spec.seed);

  // Random permutation; leading slots become dangling, the next few traps.
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Index i = n - 1; i > 0; --i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(i) + 1))]);

  const Index n_dangling =
      static_cast<Index>(std::ceil(spec.dangling_fraction * static_cast<double>(n)));
  const Index n_linked = n - n_dangling;

  std::vector<Triplet<Scalar>> edges;

  // Closed cycles of length 2 and 3 when the graph is big enough for both,
  // one 2-cycle otherwise.  The count is fixed (not a fraction of n) so the
  // trap eigenvalue cluster stays small enough for a Krylov basis to resolve.
  std::vector<Index> cycle_lengths;
  if (n >= 20 && n_linked >= 5)
    cycle_lengths = {2, 3};
  else if (n_linked >= 2)
    cycle_lengths = {2};
  Index next_slot = n_dangling;
  for (Index len : cycle_lengths) {
    for (Index k = 0; k < len; ++k) {
      const Index from = perm[static_cast<std::size_t>(next_slot + k)];
      const Index to = perm[static_cast<std::size_t>(next_slot + (k + 1) % len)];
      edges.push_back({from, to, Scalar(1)});
    }
    next_slot += len;
  }
  const Index n_trap = next_slot - n_dangling;

  const Index n_regular = n_linked - n_trap;
  if (n_regular > 0) {
    const double target = std::round(spec.avg_outdegree * static_cast<double>(n)) -
                          static_cast<double>(n_trap);
    const double mean = std::max(1.0, target / static_cast<double>(n_regular));
    const std::uint64_t span =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(2.0 * mean) - 1);

    const bool preferential = spec.model == GraphModel::preferential_attachment;
    std::vector<Index> pool;  // previously chosen targets, for preferential reuse
    for (Index s = next_slot; s < n; ++s) {
      const Index from = perm[static_cast<std::size_t>(s)];
      const Index degree = 1 + static_cast<Index>(rng.next_below(span));
      for (Index d = 0; d < degree; ++d) {
        Index to;
        if (preferential && !pool.empty() && rng.next_double() < 0.7)
          to = pool[static_cast<std::size_t>(rng.next_below(pool.size()))];
        else
          to = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n)));
        edges.push_back({from, to, Scalar(1)});
        if (preferential) pool.push_back(to);
      }
    }
  }

  return CompressedSparseMatrix<Scalar>::from_triplets(n, n, std::move(edges));
}

}  // namespace prsolve
