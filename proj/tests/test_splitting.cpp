#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <prsolve/dense_kernels.hpp>
#include <prsolve/splitting.hpp>
#include <prsolve/synthetic.hpp>
#include <prsolve/transition.hpp>

#include <cmath>
#include <vector>

using prsolve::CompressedSparseMatrix;
using prsolve::Index;
using prsolve::SplittingParams;
using prsolve::TransitionOperator;
using prsolve::Triplet;
using prsolve::Vector;

namespace {

CompressedSparseMatrix<double> two_node_graph() {
  std::vector<Triplet<double>> t = {{0, 1, 1.0}};
  return CompressedSparseMatrix<double>::from_triplets(2, 2, std::move(t));
}

CompressedSparseMatrix<double> test_graph(Index n, std::uint64_t seed) {
  prsolve::GraphSpec spec;
  spec.n = n;
  spec.dangling_fraction = 0.1;
  spec.seed = seed;
  return prsolve::generate_graph<double>(spec);
}

double infinity_error(const Vector<double>& a, const Vector<double>& b) {
  return (a - b).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("power method converges on the two-node fixture") {
  const auto adj = two_node_graph();
  const TransitionOperator<double> op(adj, TransitionOperator<double>::uniform_teleport(2));
  const auto report = prsolve::power_method(op, 0.85, 1e-12);
  CHECK(report.converged);
  CHECK(report.method == "power");
  CHECK(report.x[0] == doctest::Approx(20.0 / 57.0).epsilon(1e-10));
  CHECK(report.x[1] == doctest::Approx(37.0 / 57.0).epsilon(1e-10));
  // One product for the priming application, then one per step.
  CHECK(report.mv == report.iterations + 1);
  CHECK(report.residual_history.size() ==
        static_cast<std::size_t>(report.iterations) + 1);
  CHECK(report.residual_history.back().first == report.mv);
  for (std::size_t i = 1; i < report.residual_history.size(); ++i)
    CHECK(report.residual_history[i].first > report.residual_history[i - 1].first);
}

TEST_CASE("power method reports non-convergence when capped") {
  const auto adj = two_node_graph();
  const TransitionOperator<double> op(adj, TransitionOperator<double>::uniform_teleport(2));
  const auto report = prsolve::power_method(op, 0.85, 1e-14, 2);
  CHECK_FALSE(report.converged);
  CHECK(report.iterations == 2);
}

TEST_CASE("solvers accept a warm start") {
  const auto adj = two_node_graph();
  const auto v = TransitionOperator<double>::uniform_teleport(2);
  const TransitionOperator<double> op(adj, v);
  const Vector<double> exact = prsolve::dense_oracle_pagerank(adj, 0.85, v);

  const auto power = prsolve::power_method<double>(op, 0.85, 1e-8, 1000000, exact);
  CHECK(power.converged);
  CHECK(power.iterations == 0);

  SplittingParams<double> sp;
  sp.alpha = 0.85;
  const auto miio = prsolve::miio_solve<double>(op, sp, exact);
  CHECK(miio.converged);
  CHECK(miio.iterations == 0);
}

TEST_CASE("starting vectors are validated") {
  const auto adj = two_node_graph();
  const TransitionOperator<double> op(adj, TransitionOperator<double>::uniform_teleport(2));
  Vector<double> negative(2);
  negative << 1.5, -0.5;
  CHECK_THROWS_AS(prsolve::power_method<double>(op, 0.85, 1e-8, 100, negative),
                  std::invalid_argument);
  Vector<double> unnormalized(2);
  unnormalized << 0.9, 0.9;
  CHECK_THROWS_AS(prsolve::power_method<double>(op, 0.85, 1e-8, 100, unnormalized),
                  std::invalid_argument);
}

TEST_CASE("inner-outer solvers reach the oracle solution") {
  const Index n = 60;
  const auto adj = test_graph(n, 5);
  const auto v = TransitionOperator<double>::uniform_teleport(n);
  const TransitionOperator<double> op(adj, v);
  const Vector<double> exact = prsolve::dense_oracle_pagerank(adj, 0.99, v);

  SplittingParams<double> sp;  // alpha = 0.99 default
  for (const char* method : {"iio", "miio"}) {
    const auto report = method == std::string("iio") ? prsolve::iio_solve(op, sp)
                                                     : prsolve::miio_solve(op, sp);
    CAPTURE(method);
    CHECK(report.converged);
    CHECK(report.method == method);
    CHECK(infinity_error(report.x, exact) <= 1e-6);
    CHECK(std::abs(report.x.sum() - 1.0) <= 1e-12);
    CHECK(report.x.minCoeff() >= 0.0);
    CHECK(report.residual_history.back().first == report.mv);
    // The finishing touch reuses the cached product, so the final residual
    // of the returned vector still satisfies the tolerance (with slack for
    // the closing normalization).
    CHECK(op.pagerank_residual(0.99, report.x) <= 2.0 * sp.tau);
  }
}

TEST_CASE("multi-step cycles are cheaper than plain inner-outer cycles overall") {
  const Index n = 300;
  const auto adj = test_graph(n, 17);
  const TransitionOperator<double> op(adj,
                                      TransitionOperator<double>::uniform_teleport(n));
  SplittingParams<double> sp;
  const auto iio = prsolve::iio_solve(op, sp);
  const auto miio = prsolve::miio_solve(op, sp);
  REQUIRE(iio.converged);
  REQUIRE(miio.converged);
  CHECK(miio.mv <= iio.mv);
  CHECK(infinity_error(miio.x, iio.x) <= 1e-7);
}

TEST_CASE("miio accounting: one product per recorded step, cycles counted") {
  const auto adj = test_graph(40, 3);
  const TransitionOperator<double> op(adj, TransitionOperator<double>::uniform_teleport(40));
  SplittingParams<double> sp;
  sp.alpha = 0.9;

  long observed = 0;
  Vector<double> floor_seen = Vector<double>::Zero(40);
  const auto report = prsolve::miio_solve<double>(
      op, sp, std::nullopt, [&](const Vector<double>& x) {
        ++observed;
        floor_seen = floor_seen.cwiseMin(x);
      });
  CHECK(report.converged);
  // Each observed iterate except the closing assembly is followed by one
  // product, and the priming z = P x adds one more: the counts coincide.
  CHECK(report.mv == observed);
  // Each cycle runs m1 + m2 fixed steps plus at least one inner step; the
  // closing assembly is also observed but costs no product.
  CHECK(observed >= report.iterations * (sp.m1 + sp.m2 + 1) + 1);
  // Iterates stay (numerically) nonnegative throughout.
  CHECK(floor_seen.minCoeff() >= -1e-14);
}

TEST_CASE("parameter validation") {
  SplittingParams<double> sp;
  sp.beta = 0.995;  // >= alpha
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  sp = {};
  sp.m1 = 0;
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  sp = {};
  sp.tau = 0.0;
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  CHECK_THROWS_AS(prsolve::convergence_bound(0.99, 0.99, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(prsolve::convergence_bound(0.99, 0.5, 0, 1), std::invalid_argument);
}

TEST_CASE("contraction factor closed form") {
  CHECK(prsolve::convergence_bound(0.99, 0.5, 5, 3) ==
        doctest::Approx(0.11649628111275).epsilon(1e-12));
  CHECK(prsolve::convergence_bound(0.5, 0.25, 1, 1) ==
        doctest::Approx(1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("iteration matrix spectral radius honors the bound") {
  // Two-node fixture, dense transition matrix.
  prsolve::Matrix<double> p(2, 2);
  p << 0.0, 0.5, 1.0, 0.5;
  const double rho = prsolve::splitting_matrix_spectral_radius(p, 0.99, 0.5, 1, 1);
  CHECK(rho >= 0.0);
  CHECK(rho <= prsolve::convergence_bound(0.99, 0.5, 1, 1) + 1e-12);

  const auto check = prsolve::verify_contraction_bound<double>(10, 5, 0.99, 0.5, 2, 1, 123);
  CHECK(check.passed);
  CHECK(check.trials == 5);
  CHECK(check.max_spectral_radius <= check.bound + 1e-12);
  CHECK(check.bound == doctest::Approx(prsolve::convergence_bound(0.99, 0.5, 2, 1)));
}
