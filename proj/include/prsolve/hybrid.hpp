#pragma once

#include "prsolve/krylov.hpp"
#include "prsolve/report.hpp"
#include "prsolve/transition.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace prsolve {

namespace detail {

/// State shared by both hybrid solvers across phase visits: the inner
/// difference norm d and its baseline d0 persist between splitting-phase
/// visits (they are initialized exactly once, at solver start), and r is
/// the latest splitting-phase residual.
template <class Scalar>
struct FlipFlopState {
  Scalar d = 1;
  Scalar d0 = 1;
  Scalar r = 1;
  long long mv_start = 0;
  long long mv_budget = 10000000;
  bool budget_exhausted = false;
};

template <class Scalar>
bool over_budget(const TransitionOperator<Scalar>& op, const FlipFlopState<Scalar>& st) {
  return op.mv_count() - st.mv_start > st.mv_budget;
}

/// The splitting phase common to both hybrids.  Runs the flip-flop
/// controlled splitting scheme in place on x (which enters as the Krylov
/// phase's approximation and leaves with unit entry sum): an outer pass
/// rescales x to unit mass — the affine updates preserve that mass, and the
/// residual of a unit-mass iterate equals the Google-operator residual —
/// and refreshes z = P x and the residual; the middle loop
/// repeats the m1 damped power steps, the f update, the m2 splitting steps,
/// and the inner difference-controlled splitting steps while the residual
/// reduction ratio stays below alpha1; a pass whose overall reduction is
/// poorer than alpha1 increments the restart counter, and maxit such passes
/// hand control back to the Krylov phase.  iterations accumulates middle
/// passes plus inner steps.
template <class Scalar>
void splitting_phase(const TransitionOperator<Scalar>& op, const SplittingParams<Scalar>& sp,
                     const FlipFlopParams<Scalar>& ff, FlipFlopState<Scalar>& st,
                     Vector<Scalar>& x, SolveReport<Scalar>& report, bool trace) {
  const Scalar alpha = sp.alpha;
  const Scalar beta = sp.beta;
  const Scalar one = 1;
  const Vector<Scalar>& v = op.teleport();
  Vector<Scalar> z(op.size()), f(op.size());
  if (ff.reset_inner_baseline) {
    st.d = 1;
    st.d0 = 1;
  }
  const long long visit_mv_start = op.mv_count();
  Scalar entry_residual = st.r;
  bool entry_recorded = false;
  int restart = 0;
  while (restart < ff.maxit && st.r > sp.tau) {
    if (over_budget(op, st)) {
      st.budget_exhausted = true;
      break;
    }
    const Scalar mass = x.sum();
    if (!(mass > Scalar(0))) throw std::runtime_error("hybrid solver: zero iterate");
    x /= mass;
    op.apply_transition(x, z);
    st.r = (alpha * z + (one - alpha) * v - x).norm();
    report.residual_history.emplace_back(op.mv_count() - st.mv_start, st.r);
    if (!entry_recorded) {
      entry_residual = st.r;
      entry_recorded = true;
    }
    Scalar r0 = st.r;
    const Scalar r1 = st.r;
    Scalar ratio = 0;
    while (ratio < ff.alpha1 && st.r > sp.tau) {
      for (int i = 0; i < sp.m1; ++i) {
        x = alpha * z + (one - alpha) * v;
        op.apply_transition(x, z);
      }
      f = (alpha - beta) * z + (one - alpha) * v;
      for (int i = 0; i < sp.m2; ++i) {
        x = f + beta * z;
        op.apply_transition(x, z);
      }
      Scalar ratio1 = 0;
      while (ratio1 < ff.alpha2 && st.d > sp.eta) {
        x = f + beta * z;
        op.apply_transition(x, z);
        st.d = (f + beta * z - x).norm();
        ratio1 = st.d / st.d0;
        st.d0 = st.d;
        ++report.iterations;
        if (over_budget(op, st)) {
          st.budget_exhausted = true;
          break;
        }
      }
      st.r = (alpha * z + (one - alpha) * v - x).norm();
      ratio = st.r / r0;
      r0 = st.r;
      ++report.iterations;
      report.residual_history.emplace_back(op.mv_count() - st.mv_start, st.r);
      if (st.budget_exhausted || over_budget(op, st)) {
        st.budget_exhausted = true;
        break;
      }
    }
    x = alpha * z + (one - alpha) * v;
    x /= x.sum();
    if (st.budget_exhausted) break;
    if (st.r / r1 > ff.alpha1) ++restart;
  }
  if (trace) {
    PhaseRecord<Scalar> rec;
    rec.phase = 'M';
    rec.mv = op.mv_count() - visit_mv_start;
    rec.entry_residual = entry_residual;
    rec.exit_residual = st.r;
    rec.restart_count = restart;
    report.phases.push_back(rec);
  }
}

template <class Scalar>
void fix_sign_by_sum(Vector<Scalar>& x) {
  if (x.sum() < Scalar(0)) x = -x;
}

}  // namespace detail

/// Hybrid of the thick-restarted Arnoldi method and the multi-step
/// splitting scheme.  The Krylov phase runs ff.arnoldi_runs restart cycles
/// on the Google operator — the very first cycle builds the space from the
/// teleport vector and defers its convergence check, later cycles extend
/// the retained factorization (the splitting phase's iterate is never
/// re-injected) — then hands the first restarted basis column to the
/// splitting phase.  Alternation continues until the Ritz residual estimate
/// or the splitting residual drops below sp.tau, or the Mv budget runs out.
/// iterations counts Krylov cycles plus splitting middle passes plus
/// splitting inner steps.
template <class Scalar>
SolveReport<Scalar> arnoldi_miio_solve(const TransitionOperator<Scalar>& op,
                                       const SplittingParams<Scalar>& sp,
                                       const FlipFlopParams<Scalar>& ff, bool trace = false,
                                       long long mv_budget = 10000000) {
  sp.validate();
  ff.validate();
  if (mv_budget < 1) throw std::invalid_argument("arnoldi_miio_solve: mv_budget must be >= 1");
  const Scalar alpha = sp.alpha;
  SolveReport<Scalar> report;
  report.method = "arnoldi-miio";
  detail::FlipFlopState<Scalar> st;
  st.mv_start = op.mv_count();
  st.mv_budget = mv_budget;
  auto apply = [&op, alpha](const Vector<Scalar>& in, Vector<Scalar>& out) {
    op.apply_google(alpha, in, out);
  };

  KrylovFactorization<Scalar> fact;
  bool fact_built = false;
  Vector<Scalar> x = op.teleport();
  bool converged = false;
  while (!converged && !st.budget_exhausted) {
    // Krylov phase.
    const long long visit_mv_start = op.mv_count();
    Scalar entry_est = 0, exit_est = 0;
    int cycles = 0;
    for (int run = 0; run < ff.arnoldi_runs; ++run) {
      const bool first_cycle_ever = !fact_built;
      if (first_cycle_ever) {
        fact = arnoldi_process(apply, op.teleport(), ff.m,
                               WeightVector<Scalar>::ones(op.size()));
        fact_built = true;
      } else {
        arnoldi_extend(fact, apply, ff.m);
      }
      ++report.iterations;
      ++cycles;
      auto step = thick_restart_cycle(fact, ff.p, sp.tau, !first_cycle_ever);
      exit_est = step.ritz.residual_estimate;
      if (cycles == 1) entry_est = exit_est;
      report.residual_history.emplace_back(op.mv_count() - st.mv_start, exit_est);
      if (step.converged) {
        x = step.x;
        converged = true;
        break;
      }
      if (detail::over_budget(op, st)) {
        st.budget_exhausted = true;
        break;
      }
    }
    if (trace) {
      PhaseRecord<Scalar> rec;
      rec.phase = 'K';
      rec.mv = op.mv_count() - visit_mv_start;
      rec.entry_residual = entry_est;
      rec.exit_residual = exit_est;
      rec.restart_count = cycles;
      report.phases.push_back(rec);
    }
    if (converged || st.budget_exhausted) break;

    // Hand off the first column of the restarted basis.
    x = fact.basis.col(0);
    detail::fix_sign_by_sum(x);
    detail::splitting_phase(op, sp, ff, st, x, report, trace);
    if (st.r < sp.tau) converged = true;
  }
  report.converged = converged;
  report.mv = op.mv_count() - st.mv_start;
  detail::finalize_probability_vector(x);
  report.x = std::move(x);
  return report;
}

/// Hybrid of the adaptive GArnoldi method and the multi-step splitting
/// scheme.  The Krylov phase runs ff.arnoldi_runs adaptive cycles; the
/// first visit starts from the teleport vector with all-ones weights, and
/// every later cycle rebuilds the Krylov space from the current iterate —
/// including the splitting phase's latest x — under the weights adapted
/// from the previous residual vector.  The splitting phase starts from
/// x = V_m s_m.  iterations counts Krylov cycles plus splitting middle
/// passes plus splitting inner steps.  ff.p is unused.
template <class Scalar>
SolveReport<Scalar> garnoldi_miio_solve(const TransitionOperator<Scalar>& op,
                                        const SplittingParams<Scalar>& sp,
                                        const FlipFlopParams<Scalar>& ff, bool trace = false,
                                        long long mv_budget = 10000000) {
  sp.validate();
  ff.validate();
  if (mv_budget < 1) throw std::invalid_argument("garnoldi_miio_solve: mv_budget must be >= 1");
  const Scalar alpha = sp.alpha;
  SolveReport<Scalar> report;
  report.method = "garnoldi-miio";
  detail::FlipFlopState<Scalar> st;
  st.mv_start = op.mv_count();
  st.mv_budget = mv_budget;

  auto state = initial_weight_state<Scalar>(op.size());
  Vector<Scalar> x = op.teleport();
  bool converged = false;
  while (!converged && !st.budget_exhausted) {
    // Krylov phase.
    const long long visit_mv_start = op.mv_count();
    Scalar entry_res = 0, exit_res = 0;
    int cycles = 0;
    for (int run = 0; run < ff.arnoldi_runs; ++run) {
      auto cycle = adaptive_garnoldi_cycle(op, alpha, x, ff.m, state);
      ++report.iterations;
      ++cycles;
      x = std::move(cycle.x);
      exit_res = cycle.residual_norm;
      if (cycles == 1) entry_res = exit_res;
      report.residual_history.emplace_back(op.mv_count() - st.mv_start, exit_res);
      if (cycle.residual_norm < sp.tau) {
        converged = true;
        break;
      }
      if (detail::over_budget(op, st)) {
        st.budget_exhausted = true;
        break;
      }
    }
    if (trace) {
      PhaseRecord<Scalar> rec;
      rec.phase = 'K';
      rec.mv = op.mv_count() - visit_mv_start;
      rec.entry_residual = entry_res;
      rec.exit_residual = exit_res;
      rec.restart_count = cycles;
      report.phases.push_back(rec);
    }
    if (converged || st.budget_exhausted) break;

    detail::fix_sign_by_sum(x);
    detail::splitting_phase(op, sp, ff, st, x, report, trace);
    if (st.r < sp.tau) converged = true;
  }
  report.converged = converged;
  report.mv = op.mv_count() - st.mv_start;
  detail::finalize_probability_vector(x);
  report.x = std::move(x);
  return report;
}

}  // namespace prsolve
