#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace prsolve {

using Index = Eigen::Index;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using Complex = std::complex<Scalar>;

/// Compensated (Kahan) summation.  Used where a plain left-to-right sum would
/// accumulate O(n*eps) error, e.g. validating that a teleport vector sums to 1.
template <class Scalar>
Scalar kahan_sum(const Vector<Scalar>& x) {
  Scalar sum = 0;
  Scalar carry = 0;
  for (Index i = 0; i < x.size(); ++i) {
    const Scalar y = x[i] - carry;
    const Scalar t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

/// Strictly positive weight vector defining the inner product
/// (x, y)_W = sum_i w_i x_i y_i.  All-ones weights recover the Euclidean case.
template <class Scalar>
class WeightVector {
 public:
  explicit WeightVector(Vector<Scalar> w) : w_(std::move(w)) {
    for (Index i = 0; i < w_.size(); ++i) {
      if (!(w_[i] > Scalar(0)) || !std::isfinite(w_[i]))
        throw std::invalid_argument("WeightVector: entries must be positive and finite");
    }
  }

  static WeightVector ones(Index n) { return WeightVector(Vector<Scalar>::Ones(n)); }

  Index size() const { return w_.size(); }
  const Vector<Scalar>& values() const { return w_; }
  Scalar operator[](Index i) const { return w_[i]; }

 private:
  Vector<Scalar> w_;
};

}  // namespace prsolve
