#pragma once

#include "prsolve/dense_kernels.hpp"
#include "prsolve/report.hpp"
#include "prsolve/transition.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace prsolve {

/// Arnoldi factorization A V_k = V_{k+1} Hbar in a weighted inner product,
/// k = m_effective.  Without breakdown, basis is n x (k+1) and hbar is
/// (k+1) x k.  On happy breakdown the remainder vanishes and the span is
/// invariant, so basis keeps k columns and hbar shrinks to its square
/// k x k head (A V_k = V_k H_k exactly).
template <class Scalar = double>
struct KrylovFactorization {
  Matrix<Scalar> basis;
  Matrix<Scalar> hbar;
  WeightVector<Scalar> weights = WeightVector<Scalar>::ones(0);
  Index m_effective = 0;
  bool breakdown = false;
};

namespace detail {

/// Fills hbar columns [from, m) by modified Gram-Schmidt, with one extra
/// orthogonalization pass whenever the remainder lost more than half its
/// weighted norm.  Truncates to the square invariant form on breakdown.
template <class Scalar, class Apply>
void arnoldi_columns(KrylovFactorization<Scalar>& fact, Apply&& apply, Index from, Index m) {
  const Index n = fact.basis.rows();
  const WeightVector<Scalar>& w = fact.weights;
  Vector<Scalar> vj(n), q(n), vi(n);
  for (Index j = from; j < m; ++j) {
    vj = fact.basis.col(j);
    apply(vj, q);
    if (!q.allFinite())
      throw std::runtime_error("arnoldi: operator produced non-finite entries");
    const Scalar pre = weighted_norm(q, w);
    for (Index i = 0; i <= j; ++i) {
      vi = fact.basis.col(i);
      const Scalar h = weighted_dot(q, vi, w);
      q -= h * vi;
      fact.hbar(i, j) += h;
    }
    if (weighted_norm(q, w) < Scalar(0.5) * pre) {
      for (Index i = 0; i <= j; ++i) {
        vi = fact.basis.col(i);
        const Scalar c = weighted_dot(q, vi, w);
        q -= c * vi;
        fact.hbar(i, j) += c;
      }
    }
    const Scalar h_next = weighted_norm(q, w);
    fact.hbar(j + 1, j) = h_next;
    if (h_next <= Scalar(1e-14) * pre) {
      fact.m_effective = j + 1;
      fact.breakdown = true;
      fact.basis.conservativeResize(n, j + 1);
      fact.hbar.conservativeResize(j + 1, j + 1);
      return;
    }
    fact.basis.col(j + 1) = q / h_next;
  }
  fact.m_effective = m;
}

}  // namespace detail

/// Weighted Arnoldi process started from `start`; all-ones weights give the
/// plain Euclidean process bit for bit.  apply(x, y) must compute y = A x;
/// each of the (at most) m applications costs one Mv when A wraps the
/// transition operator.
template <class Scalar, class Apply>
KrylovFactorization<Scalar> arnoldi_process(Apply&& apply, const Vector<Scalar>& start, Index m,
                                            const WeightVector<Scalar>& weights) {
  if (m < 1) throw std::invalid_argument("arnoldi_process: m must be >= 1");
  if (start.size() != weights.size())
    throw std::invalid_argument("arnoldi_process: start/weights size mismatch");
  if (!start.allFinite())
    throw std::invalid_argument("arnoldi_process: non-finite start vector");
  KrylovFactorization<Scalar> fact;
  fact.weights = weights;
  const Scalar nrm = weighted_norm(start, weights);
  if (!(nrm > Scalar(0)))
    throw std::invalid_argument("arnoldi_process: start vector must be nonzero");
  fact.basis.resize(start.size(), m + 1);
  fact.hbar = Matrix<Scalar>::Zero(m + 1, m);
  fact.basis.col(0) = start / nrm;
  detail::arnoldi_columns(fact, apply, 0, m);
  return fact;
}

template <class Scalar, class Apply>
KrylovFactorization<Scalar> arnoldi_process(Apply&& apply, const Vector<Scalar>& start, Index m) {
  return arnoldi_process(apply, start, m, WeightVector<Scalar>::ones(start.size()));
}

/// Grows an existing factorization to m columns, continuing from its last
/// basis vector.  Used for restart continuation, where the retained head of
/// hbar is dense; new columns still carry the Hessenberg structure.
template <class Scalar, class Apply>
void arnoldi_extend(KrylovFactorization<Scalar>& fact, Apply&& apply, Index m) {
  if (fact.breakdown)
    throw std::logic_error("arnoldi_extend: cannot extend past a breakdown");
  const Index k = fact.hbar.cols();
  if (k < 1) throw std::invalid_argument("arnoldi_extend: empty factorization");
  if (m <= k) throw std::invalid_argument("arnoldi_extend: target must exceed current size");
  const Index n = fact.basis.rows();
  Matrix<Scalar> hb = Matrix<Scalar>::Zero(m + 1, m);
  hb.topLeftCorner(k + 1, k) = fact.hbar;
  fact.hbar = std::move(hb);
  Matrix<Scalar> vb(n, m + 1);
  vb.leftCols(k + 1) = fact.basis;
  fact.basis = std::move(vb);
  detail::arnoldi_columns(fact, apply, k, m);
}

/// All eigenpairs of the square head H_k, modulus-descending with conjugate
/// pairs adjacent, plus the retained count p (conjugate-pair rule applied)
/// and the Ritz residual estimate h_{k+1,k} |e_k^T y_1| of the dominant pair.
template <class Scalar = double>
struct RitzSet {
  std::vector<EigenPair<Scalar>> pairs;
  Index p = 0;
  Scalar residual_estimate = 0;
};

template <class Scalar>
RitzSet<Scalar> ritz_analysis(const KrylovFactorization<Scalar>& fact, Index p) {
  const Index k = fact.hbar.cols();
  if (k < 1) throw std::invalid_argument("ritz_analysis: empty factorization");
  if (p < 1) throw std::invalid_argument("ritz_analysis: p must be >= 1");
  RitzSet<Scalar> out;
  out.pairs = dense_eigenpairs(Matrix<Scalar>(fact.hbar.topRows(k)));
  Index p_eff = std::min<Index>(p, k);
  if (p_eff < k) {
    const Complex<Scalar> lo = out.pairs[static_cast<std::size_t>(p_eff - 1)].value;
    const Complex<Scalar> hi = out.pairs[static_cast<std::size_t>(p_eff)].value;
    if (lo.imag() != Scalar(0) && hi == std::conj(lo)) {
      // A conjugate pair straddles the cut: take both members when there is
      // room, otherwise cut below the pair.
      if (p_eff + 1 < k) p_eff += 1;
      else if (p_eff > 1) p_eff -= 1;
    }
  }
  out.p = p_eff;
  const Scalar tail = std::abs(out.pairs[0].vector[k - 1]);
  const Scalar h_next = fact.breakdown ? Scalar(0) : fact.hbar(k, k - 1);
  out.residual_estimate = h_next * tail;
  return out;
}

template <class Scalar = double>
struct ThickRestartResult {
  RitzSet<Scalar> ritz;
  Vector<Scalar> x;  // dominant Ritz vector, sign-fixed to positive sum, unit 2-norm
  bool converged = false;
};

/// One analysis-and-restart cycle on a completed factorization.  Computes
/// the Ritz set, extracts the dominant Ritz vector, and (when the residual
/// estimate test is enabled and fails) compresses the factorization in
/// place to p+1 basis columns: the orthonormalized real span of the
/// retained Ritz vectors plus the old trailing basis vector, ready for
/// continuation by arnoldi_extend.  With test_convergence=false the
/// estimate is still reported but never stops the cycle — the first pass of
/// the restarted scheme defers its convergence check by one cycle.
/// Breakdown always returns converged (the span is invariant; the estimate
/// is exactly zero and no trailing vector exists to restart with).
template <class Scalar>
ThickRestartResult<Scalar> thick_restart_cycle(KrylovFactorization<Scalar>& fact, Index p,
                                               Scalar tol, bool test_convergence = true) {
  const Index k = fact.hbar.cols();
  ThickRestartResult<Scalar> out;
  out.ritz = ritz_analysis(fact, p);

  Vector<Scalar> rey(k);
  for (Index i = 0; i < k; ++i) rey[i] = out.ritz.pairs[0].vector[i].real();
  Vector<Scalar> x = fact.basis.leftCols(k) * rey;
  if (x.sum() < Scalar(0)) x = -x;
  const Scalar xn = x.norm();
  if (!(xn > Scalar(0))) throw std::runtime_error("thick restart: degenerate Ritz vector");
  out.x = x / xn;

  if (fact.breakdown || (test_convergence && out.ritz.residual_estimate <= tol)) {
    out.converged = true;
    return out;
  }

  // Real basis of the retained Ritz space; complex vectors split into real
  // and imaginary parts, and the exact duplicates contributed by the second
  // member of a conjugate pair drop out in the Gram-Schmidt rank filter.
  std::vector<Vector<Scalar>> cols;
  for (Index i = 0; i < out.ritz.p; ++i) {
    const auto& y = out.ritz.pairs[static_cast<std::size_t>(i)].vector;
    Vector<Scalar> re(k), im(k);
    for (Index j = 0; j < k; ++j) {
      re[j] = y[j].real();
      im[j] = y[j].imag();
    }
    cols.push_back(std::move(re));
    if (out.ritz.pairs[static_cast<std::size_t>(i)].value.imag() != Scalar(0))
      cols.push_back(std::move(im));
  }
  Matrix<Scalar> y_mat(k, static_cast<Index>(cols.size()));
  for (Index c = 0; c < y_mat.cols(); ++c) y_mat.col(c) = cols[static_cast<std::size_t>(c)];
  const Matrix<Scalar> wp = orthonormalize_columns(y_mat, WeightVector<Scalar>::ones(k));
  const Index q = wp.cols();
  if (q < 1 || q >= k)
    throw std::runtime_error("thick restart: retained Ritz basis is degenerate");

  Matrix<Scalar> wq1 = Matrix<Scalar>::Zero(k + 1, q + 1);
  wq1.topLeftCorner(k, q) = wp;
  wq1(k, q) = Scalar(1);
  Matrix<Scalar> new_basis = fact.basis * wq1;
  Matrix<Scalar> new_hbar = wq1.transpose() * fact.hbar * wp;
  fact.basis = std::move(new_basis);
  fact.hbar = std::move(new_hbar);
  fact.m_effective = q;
  return out;
}

/// Thick-restarted Arnoldi on the Google operator.  iterations counts
/// restart cycles; each cycle costs m products on the first build and
/// m - p afterwards.  The first cycle computes but does not act on the
/// residual estimate (its convergence check is deferred to the next cycle),
/// matching the restarted scheme; breakdown converges immediately.
template <class Scalar>
SolveReport<Scalar> thick_restart_arnoldi_solve(const TransitionOperator<Scalar>& op, Scalar alpha,
                                                Index m, Index p, Scalar tol,
                                                long max_cycles = 1000,
                                                std::optional<Vector<Scalar>> x0 = std::nullopt) {
  if (!(alpha > Scalar(0)) || alpha >= Scalar(1))
    throw std::invalid_argument("thick_restart_arnoldi_solve: alpha must be in (0, 1)");
  if (p < 1 || p >= m) throw std::invalid_argument("thick_restart_arnoldi_solve: need 1 <= p < m");
  if (!(tol > Scalar(0))) throw std::invalid_argument("thick_restart_arnoldi_solve: tol must be positive");
  if (max_cycles < 1) throw std::invalid_argument("thick_restart_arnoldi_solve: need max_cycles >= 1");
  const long long mv_start = op.mv_count();
  SolveReport<Scalar> report;
  report.method = "arnoldi";
  auto apply = [&op, alpha](const Vector<Scalar>& in, Vector<Scalar>& out) {
    op.apply_google(alpha, in, out);
  };
  const Vector<Scalar> start = x0 ? *x0 : op.teleport();
  KrylovFactorization<Scalar> fact;
  Vector<Scalar> x;
  while (report.iterations < max_cycles) {
    if (report.iterations == 0)
      fact = arnoldi_process(apply, start, m, WeightVector<Scalar>::ones(op.size()));
    else
      arnoldi_extend(fact, apply, m);
    const bool first = report.iterations == 0;
    ++report.iterations;
    auto step = thick_restart_cycle(fact, p, tol, !first);
    x = step.x;
    report.residual_history.emplace_back(op.mv_count() - mv_start, step.ritz.residual_estimate);
    if (step.converged) {
      report.converged = true;
      break;
    }
  }
  report.mv = op.mv_count() - mv_start;
  detail::finalize_probability_vector(x);
  report.x = std::move(x);
  return report;
}

/// Weights of the G-inner product adapted from the most recent residual
/// vector; all-ones before the first cycle.
template <class Scalar = double>
struct AdaptiveWeightState {
  WeightVector<Scalar> weights = WeightVector<Scalar>::ones(0);
  Vector<Scalar> last_residual_vector;
};

template <class Scalar = double>
AdaptiveWeightState<Scalar> initial_weight_state(Index n) {
  AdaptiveWeightState<Scalar> state;
  state.weights = WeightVector<Scalar>::ones(n);
  return state;
}

template <class Scalar = double>
struct GarnoldiCycleResult {
  Vector<Scalar> x;                // V_m s_m
  Vector<Scalar> residual_vector;  // sigma_min V_{m+1} u_min = (A - I) x exactly
  Scalar residual_norm = 0;
  Scalar sigma_min = 0;
};

/// One adaptive cycle: weighted Arnoldi from x, smallest singular triplet
/// of B = Hbar - [I; 0], new iterate x = V_m s_m with exact residual
/// res = sigma_min V_{m+1} u_min, then weight update |res| / ||res||_1
/// (floored at 1e-16 and renormalized so the next inner product stays SPD).
/// A zero residual leaves the weights untouched; the caller treats it as
/// converged.  Costs m_effective products.
template <class Scalar>
GarnoldiCycleResult<Scalar> adaptive_garnoldi_cycle(const TransitionOperator<Scalar>& op,
                                                    Scalar alpha, const Vector<Scalar>& x,
                                                    Index m, AdaptiveWeightState<Scalar>& state) {
  if (!(alpha > Scalar(0)) || alpha >= Scalar(1))
    throw std::invalid_argument("adaptive_garnoldi_cycle: alpha must be in (0, 1)");
  if (state.weights.size() != op.size())
    throw std::invalid_argument("adaptive_garnoldi_cycle: weight size mismatch");
  auto apply = [&op, alpha](const Vector<Scalar>& in, Vector<Scalar>& out) {
    op.apply_google(alpha, in, out);
  };
  const auto fact = arnoldi_process(apply, x, m, state.weights);
  const Index k = fact.hbar.cols();
  Matrix<Scalar> b = fact.hbar;
  for (Index i = 0; i < k; ++i) b(i, i) -= Scalar(1);
  const auto svd = small_svd(b);
  GarnoldiCycleResult<Scalar> out;
  out.sigma_min = svd.sigma_min;
  out.x = fact.basis.leftCols(k) * svd.right;
  out.residual_vector = svd.sigma_min * (fact.basis.leftCols(b.rows()) * svd.left);
  out.residual_norm = out.residual_vector.norm();
  if (out.residual_norm > Scalar(0)) {
    Vector<Scalar> w = out.residual_vector.cwiseAbs();
    w /= w.template lpNorm<1>();
    w = w.cwiseMax(Scalar(1e-16));
    w /= w.sum();
    state.weights = WeightVector<Scalar>(std::move(w));
  }
  state.last_residual_vector = out.residual_vector;
  return out;
}

/// Adaptive GArnoldi solver; iterations counts cycles, each rebuilding the
/// Krylov space from the current iterate under the adapted inner product.
template <class Scalar>
SolveReport<Scalar> adaptive_garnoldi_solve(const TransitionOperator<Scalar>& op, Scalar alpha,
                                            Index m, Scalar tol, long max_cycles = 1000,
                                            std::optional<Vector<Scalar>> x0 = std::nullopt) {
  if (!(tol > Scalar(0))) throw std::invalid_argument("adaptive_garnoldi_solve: tol must be positive");
  if (max_cycles < 1) throw std::invalid_argument("adaptive_garnoldi_solve: need max_cycles >= 1");
  const long long mv_start = op.mv_count();
  SolveReport<Scalar> report;
  report.method = "garnoldi";
  auto state = initial_weight_state<Scalar>(op.size());
  Vector<Scalar> x = x0 ? *x0 : op.teleport();
  while (report.iterations < max_cycles) {
    auto cycle = adaptive_garnoldi_cycle(op, alpha, x, m, state);
    ++report.iterations;
    x = std::move(cycle.x);
    report.residual_history.emplace_back(op.mv_count() - mv_start, cycle.residual_norm);
    if (cycle.residual_norm < tol) {
      report.converged = true;
      break;
    }
  }
  report.mv = op.mv_count() - mv_start;
  detail::finalize_probability_vector(x);
  report.x = std::move(x);
  return report;
}

}  // namespace prsolve
