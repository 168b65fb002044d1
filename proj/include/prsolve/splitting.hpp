#pragma once

#include "prsolve/dense_kernels.hpp"
#include "prsolve/report.hpp"
#include "prsolve/synthetic.hpp"
#include "prsolve/transition.hpp"

#include <Eigen/LU>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

namespace prsolve {

namespace detail {

template <class Scalar>
Vector<Scalar> checked_start(const TransitionOperator<Scalar>& op,
                             const std::optional<Vector<Scalar>>& x0) {
  if (!x0) return op.teleport();
  if (x0->size() != op.size()) throw std::invalid_argument("start vector size mismatch");
  if (x0->minCoeff() < Scalar(-1e-12)) throw std::invalid_argument("start vector must be nonnegative");
  if (std::abs(x0->sum() - Scalar(1)) > Scalar(1e-8))
    throw std::invalid_argument("start vector must sum to 1");
  return *x0;
}

}  // namespace detail

/// Damped power iteration x <- alpha P x + (1 - alpha) v.  iterations
/// counts power steps; the residual check reuses the product of the
/// upcoming step, so each step costs exactly one product.
template <class Scalar>
SolveReport<Scalar> power_method(const TransitionOperator<Scalar>& op, Scalar alpha, Scalar tau,
                                 long max_iterations = 1000000,
                                 std::optional<Vector<Scalar>> x0 = std::nullopt) {
  if (!(alpha > Scalar(0)) || alpha >= Scalar(1))
    throw std::invalid_argument("power_method: alpha must be in (0, 1)");
  if (!(tau > Scalar(0))) throw std::invalid_argument("power_method: tau must be positive");
  const long long mv_start = op.mv_count();
  const Vector<Scalar>& v = op.teleport();

  SolveReport<Scalar> report;
  report.method = "power";
  Vector<Scalar> x = detail::checked_start(op, x0);
  Vector<Scalar> z = op.apply_transition(x);
  Scalar r = op.pagerank_residual(alpha, x, z);
  report.residual_history.emplace_back(op.mv_count() - mv_start, r);
  while (r >= tau && report.iterations < max_iterations) {
    x = alpha * z + (Scalar(1) - alpha) * v;
    op.apply_transition(x, z);
    ++report.iterations;
    r = op.pagerank_residual(alpha, x, z);
    report.residual_history.emplace_back(op.mv_count() - mv_start, r);
  }
  report.converged = r < tau;
  report.mv = op.mv_count() - mv_start;
  detail::finalize_probability_vector(x);
  report.x = std::move(x);
  return report;
}

/// Two-stage inner-outer splitting iteration.  Each outer cycle applies m1
/// steps of x <- beta P x + f with f = (alpha - beta) P x_cycle + (1 -
/// alpha) v frozen at the cycle start, then solves (I - beta P) x = (alpha -
/// beta) P x + (1 - alpha) v by Richardson sweeps until the inner residual
/// drops below eta (the sweep count may be zero when the m1 steps already
/// satisfy it).  iterations counts outer cycles plus inner sweeps.
template <class Scalar>
SolveReport<Scalar> iio_solve(const TransitionOperator<Scalar>& op,
                              const SplittingParams<Scalar>& sp,
                              std::optional<Vector<Scalar>> x0 = std::nullopt) {
  sp.validate();
  const long long mv_start = op.mv_count();
  const Scalar alpha = sp.alpha, beta = sp.beta;
  const Vector<Scalar>& v = op.teleport();

  SolveReport<Scalar> report;
  report.method = "iio";
  Vector<Scalar> x = detail::checked_start(op, x0);
  Vector<Scalar> z = op.apply_transition(x);
  Vector<Scalar> f(op.size());
  Scalar r = op.pagerank_residual(alpha, x, z);
  report.residual_history.emplace_back(op.mv_count() - mv_start, r);

  long cycles = 0;
  while (r >= sp.tau && cycles < sp.max_outer) {
    ++cycles;
    ++report.iterations;
    f = (alpha - beta) * z + (Scalar(1) - alpha) * v;
    for (int j = 0; j < sp.m1; ++j) {
      x = beta * z + f;
      op.apply_transition(x, z);
    }
    f = (alpha - beta) * z + (Scalar(1) - alpha) * v;
    Scalar d = (f + beta * z - x).norm();
    for (int j = 0; d >= sp.eta && j < sp.max_inner; ++j) {
      x = f + beta * z;
      op.apply_transition(x, z);
      d = (f + beta * z - x).norm();
      ++report.iterations;
    }
    r = op.pagerank_residual(alpha, x, z);
    report.residual_history.emplace_back(op.mv_count() - mv_start, r);
  }
  report.converged = r < sp.tau;
  report.mv = op.mv_count() - mv_start;
  detail::finalize_probability_vector(x);
  report.x = std::move(x);
  return report;
}

/// Multi-step variant of the inner-outer splitting iteration.  Per outer
/// cycle: m1 damped power steps, then with f = (alpha - beta) P x + (1 -
/// alpha) v frozen, m2 splitting steps x <- f + beta P x, then further
/// splitting steps until their difference norm drops below eta (at least
/// one such step runs per cycle).  iterations counts outer cycles.  The
/// optional observer sees every iterate, including intermediates.
template <class Scalar>
SolveReport<Scalar> miio_solve(const TransitionOperator<Scalar>& op,
                               const SplittingParams<Scalar>& sp,
                               std::optional<Vector<Scalar>> x0 = std::nullopt,
                               const std::function<void(const Vector<Scalar>&)>& observer = {}) {
  sp.validate();
  const long long mv_start = op.mv_count();
  const Scalar alpha = sp.alpha, beta = sp.beta;
  const Vector<Scalar>& v = op.teleport();

  SolveReport<Scalar> report;
  report.method = "miio";
  Vector<Scalar> x = detail::checked_start(op, x0);
  Vector<Scalar> z = op.apply_transition(x);
  Vector<Scalar> f(op.size());
  Scalar r = op.pagerank_residual(alpha, x, z);
  report.residual_history.emplace_back(op.mv_count() - mv_start, r);

  while (r >= sp.tau && report.iterations < sp.max_outer) {
    ++report.iterations;
    for (int j = 0; j < sp.m1; ++j) {
      x = alpha * z + (Scalar(1) - alpha) * v;
      op.apply_transition(x, z);
      if (observer) observer(x);
    }
    f = (alpha - beta) * z + (Scalar(1) - alpha) * v;
    for (int j = 0; j < sp.m2; ++j) {
      x = f + beta * z;
      op.apply_transition(x, z);
      if (observer) observer(x);
    }
    Scalar d;
    int inner = 0;
    do {
      x = f + beta * z;
      op.apply_transition(x, z);
      if (observer) observer(x);
      d = (f + beta * z - x).norm();
    } while (d >= sp.eta && ++inner < sp.max_inner);
    r = op.pagerank_residual(alpha, x, z);
    report.residual_history.emplace_back(op.mv_count() - mv_start, r);
  }
  x = alpha * z + (Scalar(1) - alpha) * v;
  if (observer) observer(x);
  report.converged = r < sp.tau;
  report.mv = op.mv_count() - mv_start;
  detail::finalize_probability_vector(x);
  report.x = std::move(x);
  return report;
}

/// Upper bound (alpha - beta) beta^m2 alpha^m1 / (1 - beta) on the modulus
/// of the eigenvalues of the multi-step splitting iteration matrix
/// M = (alpha - beta) beta^m2 alpha^m1 P^(m1+m2+1) (I - beta P)^{-1}.
template <class Scalar>
Scalar convergence_bound(Scalar alpha, Scalar beta, int m1, int m2) {
  if (!(alpha > Scalar(0)) || alpha >= Scalar(1) || !(beta > Scalar(0)) || beta >= alpha)
    throw std::invalid_argument("convergence_bound: need 0 < beta < alpha < 1");
  if (m1 < 1 || m2 < 1) throw std::invalid_argument("convergence_bound: m1, m2 must be >= 1");
  return (alpha - beta) * std::pow(beta, Scalar(m2)) * std::pow(alpha, Scalar(m1)) /
         (Scalar(1) - beta);
}

/// rho(M) for an explicit column-stochastic P, where M is the multi-step
/// splitting iteration matrix formed densely.
template <class Scalar>
Scalar splitting_matrix_spectral_radius(const Matrix<Scalar>& p, Scalar alpha, Scalar beta,
                                        int m1, int m2) {
  const Index n = p.rows();
  Matrix<Scalar> power = Matrix<Scalar>::Identity(n, n);
  for (int k = 0; k < m1 + m2 + 1; ++k) power = (power * p).eval();
  const Matrix<Scalar> lhs = Matrix<Scalar>::Identity(n, n) - beta * p;
  Matrix<Scalar> m = (alpha - beta) * std::pow(beta, Scalar(m2)) * std::pow(alpha, Scalar(m1)) *
                     power * lhs.partialPivLu().inverse();
  Scalar rho = 0;
  for (const auto& lambda : dense_eigenvalues(m)) rho = std::max(rho, std::abs(lambda));
  return rho;
}

template <class Scalar = double>
struct ContractionCheck {
  Scalar bound = 0;
  Scalar max_spectral_radius = 0;
  int trials = 0;
  bool passed = false;
};

/// Builds random dense column-stochastic matrices, forms the splitting
/// iteration matrix M explicitly, and checks its spectral radius (computed
/// by the dense eigensolver) against convergence_bound with 1e-12 slack.
template <class Scalar>
ContractionCheck<Scalar> verify_contraction_bound(Index n, int trials, Scalar alpha, Scalar beta,
                                                  int m1, int m2, std::uint64_t seed) {
  if (n < 1 || n > 30) throw std::invalid_argument("verify_contraction_bound: need 1 <= n <= 30");
  if (trials < 1) throw std::invalid_argument("verify_contraction_bound: trials must be >= 1");
  ContractionCheck<Scalar> result;
  result.bound = convergence_bound(alpha, beta, m1, m2);
  result.trials = trials;
  result.passed = true;
  Splitmix64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    Matrix<Scalar> p(n, n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) p(i, j) = static_cast<Scalar>(rng.next_double());
      p.col(j) /= p.col(j).sum();
    }
    const Scalar rho = splitting_matrix_spectral_radius(p, alpha, beta, m1, m2);
    result.max_spectral_radius = std::max(result.max_spectral_radius, rho);
    if (rho > result.bound + Scalar(1e-12)) result.passed = false;
  }
  return result;
}

}  // namespace prsolve
