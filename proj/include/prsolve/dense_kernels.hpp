#pragma once

#include "prsolve/sparse_matrix.hpp"
#include "prsolve/types.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace prsolve {

/// (x, y)_W = sum_i w_i x_i y_i, accumulated left to right.  With all-ones
/// weights this is bit-for-bit the plain sequential dot product, so the
/// Euclidean case needs no separate code path.
template <class Scalar>
Scalar weighted_dot(const Vector<Scalar>& x, const Vector<Scalar>& y,
                    const WeightVector<Scalar>& w) {
  if (x.size() != y.size() || x.size() != w.size())
    throw std::invalid_argument("weighted_dot: size mismatch");
  Scalar acc = 0;
  for (Index i = 0; i < x.size(); ++i) acc += w[i] * x[i] * y[i];
  return acc;
}

template <class Scalar>
Scalar weighted_norm(const Vector<Scalar>& x, const WeightVector<Scalar>& w) {
  return std::sqrt(weighted_dot(x, x, w));
}

template <class Scalar>
struct EigenPair {
  Complex<Scalar> value;
  Vector<Complex<Scalar>> vector;  // unit 2-norm
};

namespace detail {

constexpr Index kMaxDenseOrder = 64;

template <class Scalar>
Scalar sign_like(Scalar magnitude, Scalar sign_source) {
  return sign_source >= Scalar(0) ? std::abs(magnitude) : -std::abs(magnitude);
}

template <class Scalar>
bool is_upper_hessenberg(const Matrix<Scalar>& a, Scalar tol) {
  for (Index i = 2; i < a.rows(); ++i)
    for (Index j = 0; j < i - 1; ++j)
      if (std::abs(a(i, j)) > tol) return false;
  return true;
}

/// Householder similarity reduction to upper Hessenberg form, in place.
/// The transformation is not accumulated; eigenvectors are recovered later
/// by inverse iteration on the original matrix.
template <class Scalar>
void hessenberg_reduce(Matrix<Scalar>& a) {
  const Index n = a.rows();
  for (Index k = 0; k + 2 < n; ++k) {
    Vector<Scalar> x = a.block(k + 1, k, n - k - 1, 1);
    const Scalar xnorm = x.norm();
    if (xnorm == Scalar(0)) continue;
    Vector<Scalar> u = x;
    u[0] += sign_like(xnorm, x[0]);
    const Scalar unorm = u.norm();
    if (unorm == Scalar(0)) continue;
    u /= unorm;
    // a <- (I - 2uu^T) a (I - 2uu^T) restricted to the trailing block
    a.block(k + 1, k, n - k - 1, n - k) -=
        Scalar(2) * u * (u.transpose() * a.block(k + 1, k, n - k - 1, n - k));
    a.rightCols(n - k - 1) -= Scalar(2) * (a.rightCols(n - k - 1) * u) * u.transpose();
    for (Index i = k + 2; i < n; ++i) a(i, k) = 0;
  }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroys it).
/// Subdiagonal entries deflate when |h(l, l-1)| <= 1e-14 (|h(l-1,l-1)| +
/// |h(l,l)|); exceptional shifts fire every ten stalled sweeps and the whole
/// run aborts after 30 sweeps per eigenvalue block.
template <class Scalar>
std::vector<Complex<Scalar>> francis_eigenvalues(Matrix<Scalar>& a) {
  const Index n = a.rows();
  std::vector<Complex<Scalar>> out(static_cast<std::size_t>(n));
  if (n == 0) return out;
  const Scalar deflate = Scalar(1e-14);

  Scalar anorm = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  if (anorm == Scalar(0)) anorm = Scalar(1);

  Index nn = n - 1;
  Scalar t = 0;
  while (nn >= 0) {
    int its = 0;
    Index l;
    for (;;) {
      for (l = nn; l >= 1; --l) {
        Scalar s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == Scalar(0)) s = anorm;
        if (std::abs(a(l, l - 1)) <= deflate * s) {
          a(l, l - 1) = 0;
          break;
        }
      }
      if (l < 0) l = 0;
      Scalar x = a(nn, nn);
      if (l == nn) {  // one real eigenvalue deflated
        out[static_cast<std::size_t>(nn)] = Complex<Scalar>(x + t, 0);
        --nn;
        break;
      }
      Scalar y = a(nn - 1, nn - 1);
      Scalar w = a(nn, nn - 1) * a(nn - 1, nn);
      if (l == nn - 1) {  // 2x2 block deflated
        Scalar p = Scalar(0.5) * (y - x);
        Scalar q = p * p + w;
        Scalar z = std::sqrt(std::abs(q));
        x += t;
        if (q >= Scalar(0)) {
          z = p + sign_like(z, p);
          Scalar l1 = x + z;
          Scalar l2 = z != Scalar(0) ? x - w / z : l1;
          out[static_cast<std::size_t>(nn - 1)] = Complex<Scalar>(l1, 0);
          out[static_cast<std::size_t>(nn)] = Complex<Scalar>(l2, 0);
        } else {
          out[static_cast<std::size_t>(nn - 1)] = Complex<Scalar>(x + p, z);
          out[static_cast<std::size_t>(nn)] = Complex<Scalar>(x + p, -z);
        }
        nn -= 2;
        break;
      }
      if (its == 30)
        throw std::runtime_error("hessenberg_eigs: QR iteration failed to converge");
      if (its == 10 || its == 20) {  // exceptional shift
        t += x;
        for (Index i = 0; i <= nn; ++i) a(i, i) -= x;
        Scalar s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
        y = x = Scalar(0.75) * s;
        w = Scalar(-0.4375) * s * s;
      }
      ++its;
      Index m;
      Scalar p = 0, q = 0, r = 0;
      for (m = nn - 2; m >= l; --m) {
        Scalar z = a(m, m);
        Scalar rr = x - z;
        Scalar ss = y - z;
        p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
        q = a(m + 1, m + 1) - z - rr - ss;
        r = a(m + 2, m + 1);
        Scalar scale = std::abs(p) + std::abs(q) + std::abs(r);
        p /= scale;
        q /= scale;
        r /= scale;
        if (m == l) break;
        const Scalar u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
        const Scalar v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) +
                                        std::abs(a(m + 1, m + 1)));
        if (u <= deflate * v) break;
      }
      for (Index i = m + 2; i <= nn; ++i) {
        a(i, i - 2) = 0;
        if (i != m + 2) a(i, i - 3) = 0;
      }
      for (Index k = m; k <= nn - 1; ++k) {  // chase the bulge
        if (k != m) {
          p = a(k, k - 1);
          q = a(k + 1, k - 1);
          r = k != nn - 1 ? a(k + 2, k - 1) : Scalar(0);
          Scalar scale = std::abs(p) + std::abs(q) + std::abs(r);
          if (scale != Scalar(0)) {
            p /= scale;
            q /= scale;
            r /= scale;
            x = scale;
          } else {
            x = 0;
          }
        }
        Scalar s = sign_like(std::sqrt(p * p + q * q + r * r), p);
        if (s == Scalar(0)) continue;
        if (k == m) {
          if (l != m) a(k, k - 1) = -a(k, k - 1);
        } else {
          a(k, k - 1) = -s * x;
        }
        p += s;
        x = p / s;
        y = q / s;
        Scalar z = r / s;
        q /= p;
        r /= p;
        for (Index j = k; j <= nn; ++j) {
          Scalar pp = a(k, j) + q * a(k + 1, j);
          if (k != nn - 1) {
            pp += r * a(k + 2, j);
            a(k + 2, j) -= pp * z;
          }
          a(k + 1, j) -= pp * y;
          a(k, j) -= pp * x;
        }
        const Index mmin = std::min(nn, k + 3);
        for (Index i = l; i <= mmin; ++i) {
          Scalar pp = x * a(i, k) + y * a(i, k + 1);
          if (k != nn - 1) {
            pp += z * a(i, k + 2);
            a(i, k + 2) -= pp * r;
          }
          a(i, k + 1) -= pp * q;
          a(i, k) -= pp;
        }
      }
    }
  }
  return out;
}

/// Dominant-first ordering: modulus descending, then real part, then
/// imaginary part.  Conjugate pairs carry bitwise-equal modulus and real
/// part, so the tie-break keeps them adjacent with +Im first.
template <class Scalar>
void order_eigenvalues(std::vector<Complex<Scalar>>& vals) {
  std::stable_sort(vals.begin(), vals.end(),
                   [](const Complex<Scalar>& a, const Complex<Scalar>& b) {
                     const Scalar ma = std::abs(a), mb = std::abs(b);
                     if (ma != mb) return ma > mb;
                     if (a.real() != b.real()) return a.real() > b.real();
                     return a.imag() > b.imag();
                   });
}

/// In-place LU with partial pivoting where vanishing pivots are replaced by
/// a tiny positive value, the standard safeguard that keeps inverse
/// iteration solvable when the shifted matrix is numerically singular.
template <class Scalar>
struct RepairedLu {
  Matrix<Complex<Scalar>> lu;
  std::vector<Index> perm;

  RepairedLu(Matrix<Complex<Scalar>> a, Scalar tiny) : lu(std::move(a)) {
    const Index n = lu.rows();
    perm.resize(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
      Index piv = k;
      for (Index i = k + 1; i < n; ++i)
        if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
      if (piv != k) lu.row(piv).swap(lu.row(k));
      perm[static_cast<std::size_t>(k)] = piv;
      if (std::abs(lu(k, k)) < tiny) lu(k, k) = Complex<Scalar>(tiny, 0);
      for (Index i = k + 1; i < n; ++i) {
        lu(i, k) /= lu(k, k);
        for (Index j = k + 1; j < n; ++j) lu(i, j) -= lu(i, k) * lu(k, j);
      }
    }
  }

  Vector<Complex<Scalar>> solve(Vector<Complex<Scalar>> b) const {
    const Index n = lu.rows();
    for (Index k = 0; k < n; ++k) {
      std::swap(b[k], b[perm[static_cast<std::size_t>(k)]]);
      for (Index i = k + 1; i < n; ++i) b[i] -= lu(i, k) * b[k];
    }
    for (Index i = n - 1; i >= 0; --i) {
      for (Index j = i + 1; j < n; ++j) b[i] -= lu(i, j) * b[j];
      b[i] /= lu(i, i);
    }
    return b;
  }
};

template <class Scalar>
Vector<Complex<Scalar>> inverse_iteration_vector(const Matrix<Scalar>& a,
                                                 Complex<Scalar> lambda) {
  const Index n = a.rows();
  Matrix<Complex<Scalar>> shifted = a.template cast<Complex<Scalar>>();
  shifted.diagonal().array() -= lambda;
  const Scalar tiny = std::numeric_limits<Scalar>::epsilon() *
                      (Scalar(1) + std::abs(lambda) + a.norm());
  RepairedLu<Scalar> lu(std::move(shifted), tiny);

  // Deterministic start with no special alignment to coordinate axes.
  Vector<Complex<Scalar>> y(n);
  for (Index i = 0; i < n; ++i) {
    const auto h = (static_cast<std::uint64_t>(i) * 2654435761ULL + 104729ULL) % 1024ULL;
    y[i] = Complex<Scalar>(Scalar(0.5) + static_cast<Scalar>(h) / Scalar(1024), 0);
  }
  y /= y.norm();
  for (int pass = 0; pass < 2; ++pass) {
    y = lu.solve(std::move(y));
    const Scalar nrm = y.norm();
    if (!(nrm > Scalar(0)) || !std::isfinite(nrm))
      throw std::runtime_error("eigenvector inverse iteration broke down");
    y /= nrm;
  }
  // Rotate the phase so the largest entry is real and positive.
  Index imax = 0;
  for (Index i = 1; i < n; ++i)
    if (std::abs(y[i]) > std::abs(y[imax])) imax = i;
  if (std::abs(y[imax]) > Scalar(0)) y *= std::conj(y[imax]) / std::abs(y[imax]);
  return y;
}

template <class Scalar>
std::vector<EigenPair<Scalar>> attach_eigenvectors(const Matrix<Scalar>& a,
                                                   std::vector<Complex<Scalar>> vals) {
  order_eigenvalues(vals);
  std::vector<EigenPair<Scalar>> out;
  out.reserve(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    EigenPair<Scalar> pair;
    pair.value = vals[i];
    const bool conj_partner = i > 0 && vals[i - 1] == std::conj(vals[i]) &&
                              vals[i].imag() != Scalar(0);
    if (conj_partner)
      pair.vector = out.back().vector.conjugate();
    else
      pair.vector = inverse_iteration_vector(a, vals[i]);
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace detail

/// All eigenvalues of a dense matrix of order <= 64 (values only).
template <class Scalar>
std::vector<Complex<Scalar>> dense_eigenvalues(const Matrix<Scalar>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("dense_eigenvalues: square input required");
  if (a.rows() > detail::kMaxDenseOrder)
    throw std::invalid_argument("dense_eigenvalues: order limited to 64");
  Matrix<Scalar> work = a;
  if (!detail::is_upper_hessenberg(work, Scalar(0))) detail::hessenberg_reduce(work);
  auto vals = detail::francis_eigenvalues(work);
  detail::order_eigenvalues(vals);
  return vals;
}

/// All eigenpairs of a dense matrix of order <= 64, dominant first.
/// Eigenvalues come from shifted QR with deflation; eigenvectors from
/// inverse iteration against the original matrix.  Conjugate pairs are
/// adjacent, with the second vector the exact conjugate of the first.
template <class Scalar>
std::vector<EigenPair<Scalar>> dense_eigenpairs(const Matrix<Scalar>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("dense_eigenpairs: square input required");
  if (a.rows() > detail::kMaxDenseOrder)
    throw std::invalid_argument("dense_eigenpairs: order limited to 64");
  Matrix<Scalar> work = a;
  if (!detail::is_upper_hessenberg(work, Scalar(0))) detail::hessenberg_reduce(work);
  return detail::attach_eigenvectors(a, detail::francis_eigenvalues(work));
}

/// Eigenpairs of an upper Hessenberg matrix (order <= 64).  Rejects inputs
/// that are not Hessenberg; use dense_eigenpairs for general matrices.
template <class Scalar>
std::vector<EigenPair<Scalar>> hessenberg_eigs(const Matrix<Scalar>& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("hessenberg_eigs: square input required");
  if (h.rows() > detail::kMaxDenseOrder)
    throw std::invalid_argument("hessenberg_eigs: order limited to 64");
  if (!detail::is_upper_hessenberg(h, Scalar(1e-13) * (Scalar(1) + h.norm())))
    throw std::invalid_argument("hessenberg_eigs: input is not upper Hessenberg");
  Matrix<Scalar> work = h;
  return detail::attach_eigenvectors(h, detail::francis_eigenvalues(work));
}

template <class Scalar>
struct SvdTriplet {
  Scalar sigma_min = 0;     // smallest singular value
  Vector<Scalar> right;     // s: unit right singular vector
  Vector<Scalar> left;      // u: unit left singular vector, B s = sigma u
};

/// Smallest singular triplet of a small dense matrix (rows >= cols, order
/// <= 65 x 64) via Golub-Kahan bidiagonalization followed by implicit-shift
/// QR on the bidiagonal factor.  Signs are fixed so the largest-magnitude
/// entry of the right vector is positive.
template <class Scalar>
SvdTriplet<Scalar> small_svd(const Matrix<Scalar>& b) {
  const Index rows = b.rows(), cols = b.cols();
  if (cols < 1 || rows < cols) throw std::invalid_argument("small_svd: need rows >= cols >= 1");
  if (cols > detail::kMaxDenseOrder)
    throw std::invalid_argument("small_svd: order limited to 64 columns");
  if (!b.allFinite()) throw std::invalid_argument("small_svd: non-finite entries");

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Matrix<Scalar> a = b;                                // becomes thin U
  Matrix<Scalar> v = Matrix<Scalar>::Zero(cols, cols); // right vectors
  Vector<Scalar> w = Vector<Scalar>::Zero(cols);       // singular values
  Vector<Scalar> rv1 = Vector<Scalar>::Zero(cols);     // superdiagonal workspace

  // Householder bidiagonalization.
  Scalar g = 0, scale = 0, anorm = 0;
  Index l = 0;
  for (Index i = 0; i < cols; ++i) {
    l = i + 1;
    rv1[i] = scale * g;
    g = scale = 0;
    Scalar s = 0;
    for (Index k = i; k < rows; ++k) scale += std::abs(a(k, i));
    if (scale != Scalar(0)) {
      for (Index k = i; k < rows; ++k) {
        a(k, i) /= scale;
        s += a(k, i) * a(k, i);
      }
      Scalar f = a(i, i);
      g = -detail::sign_like(std::sqrt(s), f);
      const Scalar h = f * g - s;
      a(i, i) = f - g;
      for (Index j = l; j < cols; ++j) {
        s = 0;
        for (Index k = i; k < rows; ++k) s += a(k, i) * a(k, j);
        f = s / h;
        for (Index k = i; k < rows; ++k) a(k, j) += f * a(k, i);
      }
      for (Index k = i; k < rows; ++k) a(k, i) *= scale;
    }
    w[i] = scale * g;
    g = scale = 0;
    s = 0;
    if (i != cols - 1) {
      for (Index k = l; k < cols; ++k) scale += std::abs(a(i, k));
      if (scale != Scalar(0)) {
        for (Index k = l; k < cols; ++k) {
          a(i, k) /= scale;
          s += a(i, k) * a(i, k);
        }
        Scalar f = a(i, l);
        g = -detail::sign_like(std::sqrt(s), f);
        const Scalar h = f * g - s;
        a(i, l) = f - g;
        for (Index k = l; k < cols; ++k) rv1[k] = a(i, k) / h;
        for (Index j = l; j < rows; ++j) {
          s = 0;
          for (Index k = l; k < cols; ++k) s += a(j, k) * a(i, k);
          for (Index k = l; k < cols; ++k) a(j, k) += s * rv1[k];
        }
        for (Index k = l; k < cols; ++k) a(i, k) *= scale;
      }
    }
    anorm = std::max(anorm, std::abs(w[i]) + std::abs(rv1[i]));
  }
  if (anorm == Scalar(0)) anorm = Scalar(1);

  // Accumulate right-hand transformations.
  for (Index i = cols - 1; i >= 0; --i) {
    if (i < cols - 1) {
      if (g != Scalar(0)) {
        for (Index j = l; j < cols; ++j) v(j, i) = (a(i, j) / a(i, l)) / g;
        for (Index j = l; j < cols; ++j) {
          Scalar s = 0;
          for (Index k = l; k < cols; ++k) s += a(i, k) * v(k, j);
          for (Index k = l; k < cols; ++k) v(k, j) += s * v(k, i);
        }
      }
      for (Index j = l; j < cols; ++j) v(i, j) = v(j, i) = 0;
    }
    v(i, i) = 1;
    g = rv1[i];
    l = i;
  }

  // Accumulate left-hand transformations (thin U in place of a).
  for (Index i = cols - 1; i >= 0; --i) {
    l = i + 1;
    g = w[i];
    for (Index j = l; j < cols; ++j) a(i, j) = 0;
    if (g != Scalar(0)) {
      g = Scalar(1) / g;
      for (Index j = l; j < cols; ++j) {
        Scalar s = 0;
        for (Index k = l; k < rows; ++k) s += a(k, i) * a(k, j);
        const Scalar f = (s / a(i, i)) * g;
        for (Index k = i; k < rows; ++k) a(k, j) += f * a(k, i);
      }
      for (Index j = i; j < rows; ++j) a(j, i) *= g;
    } else {
      for (Index j = i; j < rows; ++j) a(j, i) = 0;
    }
    a(i, i) += Scalar(1);
  }

  // Diagonalize the bidiagonal form by implicit-shift QR.
  for (Index k = cols - 1; k >= 0; --k) {
    for (int its = 1;; ++its) {
      bool split_without_cancel = true;
      Index nm = 0;
      for (l = k; l >= 0; --l) {
        nm = l - 1;
        if (std::abs(rv1[l]) <= eps * anorm) {
          split_without_cancel = false;
          break;
        }
        if (std::abs(w[nm]) <= eps * anorm) break;
      }
      if (split_without_cancel) {
        // w[nm] is negligible: rotate rv1[l..k] out through the left side.
        Scalar cs = 0, sn = 1;
        for (Index i = l; i <= k; ++i) {
          Scalar f = sn * rv1[i];
          rv1[i] = cs * rv1[i];
          if (std::abs(f) <= eps * anorm) break;
          g = w[i];
          Scalar h = std::hypot(f, g);
          w[i] = h;
          h = Scalar(1) / h;
          cs = g * h;
          sn = -f * h;
          for (Index j = 0; j < rows; ++j) {
            const Scalar y = a(j, nm), z = a(j, i);
            a(j, nm) = y * cs + z * sn;
            a(j, i) = z * cs - y * sn;
          }
        }
      }
      Scalar z = w[k];
      if (l == k) {
        if (z < Scalar(0)) {
          w[k] = -z;
          v.col(k) = -v.col(k);
        }
        break;
      }
      if (its == 30) throw std::runtime_error("small_svd: QR iteration failed to converge");
      Scalar x = w[l];
      nm = k - 1;
      Scalar y = w[nm];
      g = rv1[nm];
      Scalar h = rv1[k];
      Scalar f = ((y - z) * (y + z) + (g - h) * (g + h)) / (Scalar(2) * h * y);
      g = std::hypot(f, Scalar(1));
      f = ((x - z) * (x + z) + h * (y / (f + detail::sign_like(g, f)) - h)) / x;
      Scalar cs = 1, sn = 1;
      for (Index j = l; j <= nm; ++j) {
        const Index i = j + 1;
        g = rv1[i];
        y = w[i];
        h = sn * g;
        g = cs * g;
        z = std::hypot(f, h);
        rv1[j] = z;
        cs = f / z;
        sn = h / z;
        f = x * cs + g * sn;
        g = g * cs - x * sn;
        h = y * sn;
        y *= cs;
        for (Index jj = 0; jj < cols; ++jj) {
          const Scalar vx = v(jj, j), vz = v(jj, i);
          v(jj, j) = vx * cs + vz * sn;
          v(jj, i) = vz * cs - vx * sn;
        }
        z = std::hypot(f, h);
        w[j] = z;
        if (z != Scalar(0)) {
          z = Scalar(1) / z;
          cs = f * z;
          sn = h * z;
        }
        f = cs * g + sn * y;
        x = cs * y - sn * g;
        for (Index jj = 0; jj < rows; ++jj) {
          const Scalar ay = a(jj, j), az = a(jj, i);
          a(jj, j) = ay * cs + az * sn;
          a(jj, i) = az * cs - ay * sn;
        }
      }
      rv1[l] = 0;
      rv1[k] = f;
      w[k] = x;
    }
  }

  Index imin = 0;
  for (Index i = 1; i < cols; ++i)
    if (w[i] < w[imin]) imin = i;

  SvdTriplet<Scalar> out;
  out.sigma_min = w[imin];
  out.right = v.col(imin);
  out.left = a.col(imin);
  Index big = 0;
  for (Index i = 1; i < cols; ++i)
    if (std::abs(out.right[i]) > std::abs(out.right[big])) big = i;
  if (out.right[big] < Scalar(0)) {
    out.right = -out.right;
    out.left = -out.left;
  }
  return out;
}

/// Modified Gram-Schmidt in the W-inner product with one full
/// reorthogonalization pass.  Columns whose remainder falls below
/// 1e-12 of their pre-projection W-norm are dropped; the column count of
/// the result is the retained count.
template <class Scalar>
Matrix<Scalar> orthonormalize_columns(const Matrix<Scalar>& y, const WeightVector<Scalar>& w) {
  if (y.rows() != w.size())
    throw std::invalid_argument("orthonormalize_columns: weight size mismatch");
  std::vector<Vector<Scalar>> q;
  for (Index j = 0; j < y.cols(); ++j) {
    Vector<Scalar> col = y.col(j);
    const Scalar pre = weighted_norm(col, w);
    if (!(pre > Scalar(0)) || !std::isfinite(pre)) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : q) col -= weighted_dot(qi, col, w) * qi;
    const Scalar post = weighted_norm(col, w);
    if (post < Scalar(1e-12) * pre) continue;
    q.push_back(col / post);
  }
  Matrix<Scalar> out(y.rows(), static_cast<Index>(q.size()));
  for (std::size_t j = 0; j < q.size(); ++j) out.col(static_cast<Index>(j)) = q[j];
  return out;
}

/// Dense column-stochastic transition matrix P = Ptilde^T + v d^T.
template <class Scalar>
Matrix<Scalar> dense_transition_matrix(const CompressedSparseMatrix<Scalar>& adj,
                                       const Vector<Scalar>& v) {
  if (adj.rows() != adj.cols())
    throw std::invalid_argument("dense_transition_matrix: adjacency must be square");
  const Index n = adj.rows();
  if (v.size() != n) throw std::invalid_argument("dense_transition_matrix: teleport size mismatch");
  Matrix<Scalar> p = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const Index deg = adj.row_end(i) - adj.row_begin(i);
    if (deg == 0) {
      p.col(i) = v;
    } else {
      const Scalar share = Scalar(1) / static_cast<Scalar>(deg);
      for (Index k = adj.row_begin(i); k < adj.row_end(i); ++k)
        p(adj.col_indices()[static_cast<std::size_t>(k)], i) = share;
    }
  }
  return p;
}

/// Dense Google matrix G = alpha P + (1 - alpha) v e^T.
template <class Scalar>
Matrix<Scalar> dense_google_matrix(const CompressedSparseMatrix<Scalar>& adj, Scalar alpha,
                                   const Vector<Scalar>& v) {
  Matrix<Scalar> g = alpha * dense_transition_matrix(adj, v);
  g.colwise() += (Scalar(1) - alpha) * v;
  return g;
}

/// Ground-truth PageRank by direct solve of (I - alpha P) x = (1 - alpha) v
/// with partial-pivoted Gaussian elimination, normalized to sum 1.
/// Intended as an oracle for iterative solvers; limited to n <= 2000.
template <class Scalar>
Vector<Scalar> dense_oracle_pagerank(const CompressedSparseMatrix<Scalar>& adj, Scalar alpha,
                                     const Vector<Scalar>& v) {
  if (adj.rows() != adj.cols())
    throw std::invalid_argument("dense_oracle_pagerank: adjacency must be square");
  if (adj.rows() > 2000)
    throw std::invalid_argument("dense_oracle_pagerank: refuses n > 2000");
  if (!(alpha > Scalar(0)) || alpha >= Scalar(1))
    throw std::invalid_argument("dense_oracle_pagerank: alpha must be in (0, 1)");
  const Index n = adj.rows();
  Matrix<Scalar> lhs = Matrix<Scalar>::Identity(n, n) - alpha * dense_transition_matrix(adj, v);
  Vector<Scalar> x = lhs.partialPivLu().solve(((Scalar(1) - alpha) * v).eval());
  return x / x.sum();
}

}  // namespace prsolve
