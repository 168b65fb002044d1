#pragma once

#include "prsolve/types.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prsolve {

/// Parameters of the multi-step splitting iterations.  beta splits the
/// damping factor alpha into an inner system (I - beta P); m1 damped power
/// steps and m2 splitting steps run per outer cycle; inner Richardson
/// iterations stop at absolute tolerance eta, the outer loop at tau.
template <class Scalar = double>
struct SplittingParams {
  Scalar alpha = Scalar(0.99);
  Scalar beta = Scalar(0.5);
  int m1 = 5;
  int m2 = 3;
  Scalar tau = Scalar(1e-8);
  Scalar eta = Scalar(1e-2);
  long max_outer = 1000000;
  int max_inner = 100;

  void validate() const {
    if (!(alpha > Scalar(0)) || alpha >= Scalar(1))
      throw std::invalid_argument("SplittingParams: alpha must be in (0, 1)");
    if (!(beta > Scalar(0)) || beta >= alpha)
      throw std::invalid_argument("SplittingParams: beta must satisfy 0 < beta < alpha");
    if (m1 < 1 || m2 < 1) throw std::invalid_argument("SplittingParams: m1, m2 must be >= 1");
    if (!(tau > Scalar(0)) || !(eta > Scalar(0)))
      throw std::invalid_argument("SplittingParams: tolerances must be positive");
    if (max_outer < 1 || max_inner < 1)
      throw std::invalid_argument("SplittingParams: iteration caps must be >= 1");
  }
};

/// Controls the alternation between the Krylov phase and the splitting
/// phase of the hybrid solvers.  alpha1/alpha2 are the outer/inner slowdown
/// thresholds; the splitting phase hands control back to the Krylov phase
/// after maxit restarts without sufficient progress.  Each Krylov visit
/// runs arnoldi_runs restart cycles with subspace dimension m, keeping p
/// Ritz vectors.
template <class Scalar = double>
struct FlipFlopParams {
  Scalar alpha1 = Scalar(0.89);
  Scalar alpha2 = Scalar(0.89);
  int maxit = 10;
  int arnoldi_runs = 2;
  Index m = 8;
  Index p = 4;
  /// When set, the inner difference baseline d0 restarts at 1 on every
  /// splitting-phase entry instead of carrying over from the previous visit.
  bool reset_inner_baseline = false;

  void validate() const {
    if (!(alpha1 > Scalar(0)) || !(alpha2 > Scalar(0)))
      throw std::invalid_argument("FlipFlopParams: thresholds must be positive");
    if (maxit < 1) throw std::invalid_argument("FlipFlopParams: maxit must be >= 1");
    if (arnoldi_runs < 1 || arnoldi_runs > 3)
      throw std::invalid_argument("FlipFlopParams: arnoldi_runs must be 1..3");
    if (m < 2 || p < 1 || p >= m)
      throw std::invalid_argument("FlipFlopParams: need m >= 2 and 1 <= p < m");
  }
};

/// One phase visit of a hybrid run: 'K' for the Krylov phase, 'M' for the
/// splitting phase.  mv is the number of products consumed by the visit.
template <class Scalar = double>
struct PhaseRecord {
  char phase = 'K';
  long long mv = 0;
  Scalar entry_residual = 0;
  Scalar exit_residual = 0;
  int restart_count = 0;
};

template <class Scalar = double>
struct SolveReport {
  std::string method;
  Vector<Scalar> x;          // sum 1, entries clipped to be nonnegative
  long long iterations = 0;  // per-method iteration count, see each solver
  long long mv = 0;          // matrix-vector products, matches the operator counter
  double cpu_seconds = 0;    // filled by the bench harness, not the solvers
  bool converged = false;
  std::vector<std::pair<long long, Scalar>> residual_history;  // (mv, residual)
  std::vector<PhaseRecord<Scalar>> phases;                     // hybrids only, when traced
};

/// Phase log of a hybrid run; empty unless the run was traced.
template <class Scalar>
const std::vector<PhaseRecord<Scalar>>& flip_flop_trace(const SolveReport<Scalar>& report) {
  return report.phases;
}

/// Standard benchmark defaults for damping factor alpha: beta = 0.5,
/// m1 = 5, m2 = 3, tau = 1e-8, eta = 1e-2, m = 8, p = 4, maxit = 10,
/// slowdown thresholds alpha - 0.1.
template <class Scalar = double>
std::pair<SplittingParams<Scalar>, FlipFlopParams<Scalar>> paper_preset(Scalar alpha) {
  SplittingParams<Scalar> sp;
  sp.alpha = alpha;
  sp.beta = Scalar(0.5);
  sp.m1 = 5;
  sp.m2 = 3;
  sp.tau = Scalar(1e-8);
  sp.eta = Scalar(1e-2);
  FlipFlopParams<Scalar> ff;
  ff.alpha1 = alpha - Scalar(0.1);
  ff.alpha2 = alpha - Scalar(0.1);
  ff.maxit = 10;
  ff.arnoldi_runs = 2;
  ff.m = 8;
  ff.p = 4;
  return {sp, ff};
}

namespace detail {

/// Final cleanup shared by every solver: clip the tiny negative entries an
/// oscillatory Krylov iterate can carry, then scale to unit 1-norm.
template <class Scalar>
void finalize_probability_vector(Vector<Scalar>& x) {
  if (x.sum() < Scalar(0)) x = -x;
  x = x.cwiseMax(Scalar(0));
  const Scalar total = x.sum();
  if (!(total > Scalar(0))) throw std::runtime_error("solver produced a non-positive iterate");
  x /= total;
}

}  // namespace detail

}  // namespace prsolve
