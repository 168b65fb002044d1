#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <prsolve/dense_kernels.hpp>
#include <prsolve/synthetic.hpp>
#include <prsolve/transition.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

using prsolve::Complex;
using prsolve::CompressedSparseMatrix;
using prsolve::Index;
using prsolve::Matrix;
using prsolve::Triplet;
using prsolve::Vector;
using prsolve::WeightVector;

namespace {

Matrix<double> random_matrix(Index n, std::uint64_t seed) {
  prsolve::Splitmix64 rng(seed);
  Matrix<double> a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = 2.0 * rng.next_double() - 1.0;
  return a;
}

std::vector<Complex<double>> sorted_complex(std::vector<Complex<double>> vals) {
  std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return vals;
}

}  // namespace

TEST_CASE("weighted dot and norm") {
  Vector<double> x(2), y(2);
  x << 1.0, 2.0;
  y << 1.0, 1.0;
  Vector<double> wv(2);
  wv << 1.0, 2.0;
  const WeightVector<double> w(wv);
  CHECK(prsolve::weighted_dot(x, y, w) == 5.0);
  CHECK(prsolve::weighted_norm(x, w) == doctest::Approx(3.0).epsilon(1e-15));  // 1 + 2*4 = 9

  // Unit weights reproduce the plain serial dot product bit for bit.
  prsolve::Splitmix64 rng(7);
  Vector<double> u(25), t(25);
  for (Index i = 0; i < 25; ++i) {
    u[i] = 2.0 * rng.next_double() - 1.0;
    t[i] = 2.0 * rng.next_double() - 1.0;
  }
  double serial = 0.0;
  for (Index i = 0; i < 25; ++i) serial += u[i] * t[i];
  CHECK(prsolve::weighted_dot(u, t, WeightVector<double>::ones(25)) == serial);
}

TEST_CASE("weight vectors reject non-positive entries") {
  Vector<double> zero(2), negative(2);
  zero << 1.0, 0.0;
  negative << 1.0, -2.0;
  CHECK_THROWS_AS(WeightVector<double>{zero}, std::invalid_argument);
  CHECK_THROWS_AS(WeightVector<double>{negative}, std::invalid_argument);
}

TEST_CASE("eigenvalues match an independent solver on random matrices") {
  for (const Index n : {2, 3, 5, 8, 12}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Matrix<double> a = random_matrix(n, 1000 * static_cast<std::uint64_t>(n) + seed);
      const auto got = sorted_complex(prsolve::dense_eigenvalues(a));
      Eigen::EigenSolver<Matrix<double>> ref(a, false);
      std::vector<Complex<double>> expect(ref.eigenvalues().data(),
                                          ref.eigenvalues().data() + n);
      const auto want = sorted_complex(std::move(expect));
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got[i] - want[i]) <= 1e-8 * (1.0 + std::abs(want[i])));
    }
  }
}

TEST_CASE("rotation matrix yields a conjugate pair ordered positive-imaginary first") {
  const double c = std::cos(0.3), s = std::sin(0.3);
  Matrix<double> a(2, 2);
  a << c, -s, s, c;
  const auto vals = prsolve::dense_eigenvalues(a);
  REQUIRE(vals.size() == 2);
  CHECK(vals[0].imag() > 0.0);
  CHECK(vals[0].real() == doctest::Approx(c).epsilon(1e-12));
  CHECK(vals[0].imag() == doctest::Approx(s).epsilon(1e-12));
  CHECK(vals[1] == std::conj(vals[0]));
}

TEST_CASE("eigenvalue ordering: modulus descending, conjugate pairs adjacent") {
  std::vector<Complex<double>> vals = {{0.5, 0.0}, {-2.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  prsolve::detail::order_eigenvalues(vals);
  CHECK(vals[0] == Complex<double>(-2.0, 0.0));
  CHECK(vals[1] == Complex<double>(0.0, 1.0));
  CHECK(vals[2] == Complex<double>(0.0, -1.0));
  CHECK(vals[3] == Complex<double>(0.5, 0.0));
}

TEST_CASE("eigenpairs satisfy the defining residual") {
  const Matrix<double> a = random_matrix(8, 42);
  const auto pairs = prsolve::dense_eigenpairs(a);
  REQUIRE(pairs.size() == 8);
  const Matrix<Complex<double>> ac = a.template cast<Complex<double>>();
  for (const auto& pair : pairs) {
    CHECK(std::abs(pair.vector.norm() - 1.0) <= 1e-12);
    CHECK((ac * pair.vector - pair.value * pair.vector).norm() <=
          1e-9 * (1.0 + a.norm()));
  }
  // Dominant first.
  for (std::size_t i = 1; i < pairs.size(); ++i)
    CHECK(std::abs(pairs[i - 1].value) >= std::abs(pairs[i].value) - 1e-12);
}

TEST_CASE("hessenberg path requires Hessenberg input") {
  Matrix<double> h(3, 3);
  h << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.0, 7.0, 8.0;
  const auto pairs = prsolve::hessenberg_eigs(h);
  REQUIRE(pairs.size() == 3);
  const Matrix<Complex<double>> hc = h.template cast<Complex<double>>();
  for (const auto& pair : pairs)
    CHECK((hc * pair.vector - pair.value * pair.vector).norm() <= 1e-9 * (1.0 + h.norm()));

  Matrix<double> full = random_matrix(4, 9);
  full(3, 0) = 1.0;  // clearly not Hessenberg
  CHECK_THROWS_AS(prsolve::hessenberg_eigs(full), std::invalid_argument);
}

TEST_CASE("dense order is capped") {
  const Matrix<double> big = Matrix<double>::Identity(65, 65);
  CHECK_THROWS_AS(prsolve::dense_eigenvalues(big), std::invalid_argument);
}

TEST_CASE("smallest singular triplet of a single column") {
  Matrix<double> b(2, 1);
  b << 3.0, 4.0;
  const auto svd = prsolve::small_svd(b);
  CHECK(svd.sigma_min == doctest::Approx(5.0).epsilon(1e-14));
  REQUIRE(svd.right.size() == 1);
  CHECK(svd.right[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(svd.left[0] == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(svd.left[1] == doctest::Approx(0.8).epsilon(1e-13));
}

TEST_CASE("smallest singular triplet matches an independent solver") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    prsolve::Splitmix64 rng(500 + seed);
    Matrix<double> b(9, 6);
    for (Index i = 0; i < b.rows(); ++i)
      for (Index j = 0; j < b.cols(); ++j) b(i, j) = 2.0 * rng.next_double() - 1.0;
    const auto svd = prsolve::small_svd(b);
    Eigen::JacobiSVD<Matrix<double>> ref(b);
    CHECK(svd.sigma_min ==
          doctest::Approx(ref.singularValues().minCoeff()).epsilon(1e-10));
    CHECK(std::abs(svd.right.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(svd.left.norm() - 1.0) <= 1e-12);
    CHECK((b * svd.right - svd.sigma_min * svd.left).norm() <= 1e-9 * (1.0 + b.norm()));
  }
}

TEST_CASE("modified Gram-Schmidt orthonormalization") {
  Matrix<double> y(2, 2);
  y << 1.0, 1.0, 0.0, 1.0;
  const auto q = prsolve::orthonormalize_columns(y, WeightVector<double>::ones(2));
  REQUIRE(q.cols() == 2);
  CHECK(q(0, 0) == 1.0);
  CHECK(q(1, 0) == 0.0);
  CHECK(q(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(q(1, 1) == doctest::Approx(1.0).epsilon(1e-15));

  Matrix<double> deficient(2, 2);
  deficient << 1.0, 2.0, 1.0, 2.0;
  CHECK(prsolve::orthonormalize_columns(deficient, WeightVector<double>::ones(2)).cols() == 1);

  prsolve::Splitmix64 rng(31);
  Matrix<double> tall(6, 3);
  Vector<double> wv(6);
  for (Index i = 0; i < 6; ++i) {
    wv[i] = 0.5 + rng.next_double();
    for (Index j = 0; j < 3; ++j) tall(i, j) = 2.0 * rng.next_double() - 1.0;
  }
  const WeightVector<double> w(wv);
  const auto qw = prsolve::orthonormalize_columns(tall, w);
  REQUIRE(qw.cols() == 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) {
      const double dij = prsolve::weighted_dot(qw.col(i).eval(), qw.col(j).eval(), w);
      CHECK(std::abs(dij - (i == j ? 1.0 : 0.0)) <= 1e-12);
    }
}

TEST_CASE("dense transition and Google matrices on the two-node fixture") {
  std::vector<Triplet<double>> t = {{0, 1, 1.0}};
  const auto adj = CompressedSparseMatrix<double>::from_triplets(2, 2, std::move(t));
  const auto v = prsolve::TransitionOperator<double>::uniform_teleport(2);
  const auto p = prsolve::dense_transition_matrix(adj, v);
  CHECK(p(0, 0) == 0.0);
  CHECK(p(1, 0) == 1.0);
  CHECK(p(0, 1) == 0.5);
  CHECK(p(1, 1) == 0.5);
  const auto g = prsolve::dense_google_matrix(adj, 0.85, v);
  for (Index j = 0; j < 2; ++j) CHECK(std::abs(g.col(j).sum() - 1.0) <= 1e-15);
  CHECK(g(0, 1) == doctest::Approx(0.85 * 0.5 + 0.15 * 0.5).epsilon(1e-15));
}

TEST_CASE("dense matrices agree with the sparse operator") {
  prsolve::GraphSpec spec;
  spec.n = 40;
  spec.dangling_fraction = 0.15;
  spec.seed = 11;
  const auto adj = prsolve::generate_graph<double>(spec);
  const auto v = prsolve::TransitionOperator<double>::uniform_teleport(spec.n);
  const prsolve::TransitionOperator<double> op(adj, v);
  const auto p = prsolve::dense_transition_matrix(adj, v);
  const auto g = prsolve::dense_google_matrix(adj, 0.9, v);

  for (Index j = 0; j < spec.n; ++j) {
    CHECK(std::abs(p.col(j).sum() - 1.0) <= 1e-12);
    CHECK(p.col(j).minCoeff() >= 0.0);
  }
  prsolve::Splitmix64 rng(77);
  Vector<double> x(spec.n);
  for (Index i = 0; i < spec.n; ++i) x[i] = rng.next_double();
  x /= x.sum();
  CHECK((p * x - op.apply_transition(x)).template lpNorm<Eigen::Infinity>() <= 1e-13);
  CHECK((g * x - op.apply_google(0.9, x)).template lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("dense oracle solves the two-node fixture exactly") {
  std::vector<Triplet<double>> t = {{0, 1, 1.0}};
  const auto adj = CompressedSparseMatrix<double>::from_triplets(2, 2, std::move(t));
  const auto v = prsolve::TransitionOperator<double>::uniform_teleport(2);
  const Vector<double> x = prsolve::dense_oracle_pagerank(adj, 0.85, v);
  CHECK(x[0] == doctest::Approx(20.0 / 57.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(37.0 / 57.0).epsilon(1e-14));
  CHECK(std::abs(x.sum() - 1.0) <= 1e-14);

  const auto g = prsolve::dense_google_matrix(adj, 0.85, v);
  CHECK((g * x - x).norm() <= 1e-14);
}

TEST_CASE("dense oracle refuses large systems") {
  const auto adj = CompressedSparseMatrix<double>::from_triplets(2001, 2001, {});
  const auto v = prsolve::TransitionOperator<double>::uniform_teleport(2001);
  CHECK_THROWS_AS(prsolve::dense_oracle_pagerank(adj, 0.85, v), std::invalid_argument);
}
