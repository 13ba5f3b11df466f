// Copyright 2026 The dplabel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small dense vector and symmetric-matrix helpers. Dimensions in this
// library are tiny (d <= a few hundred), so everything is row-major
// std::vector<double> with no expression templates.

#ifndef DPLABEL_LINALG_HPP_
#define DPLABEL_LINALG_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dplabel/errors.hpp"

namespace dplabel {

using Vector = std::vector<double>;
using ConstVectorView = std::span<const double>;

inline void require_same_dim(ConstVectorView a, ConstVectorView b,
                             const char* what) {
  if (a.size() != b.size()) throw DomainError(what);
}

inline double dot(ConstVectorView a, ConstVectorView b) {
  require_same_dim(a, b, "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(ConstVectorView a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// y += alpha * x
inline void axpy(double alpha, ConstVectorView x, std::span<double> y) {
  require_same_dim(x, ConstVectorView(y.data(), y.size()),
                   "axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector subtract(ConstVectorView a, ConstVectorView b) {
  require_same_dim(a, b, "subtract: dimension mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector scaled(ConstVectorView a, double alpha) {
  Vector out(a.begin(), a.end());
  for (double& v : out) v *= alpha;
  return out;
}

// Square dense matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  static Matrix identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * dim_ + c];
  }

  // Largest |A(i,j) - A(j,i)|.
  double asymmetry() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i + 1; j < dim_; ++j)
        worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
    return worst;
  }

  // v^T A v
  double quadratic_form(ConstVectorView v) const {
    if (v.size() != dim_) throw DomainError("quadratic_form: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) row += (*this)(i, j) * v[j];
      s += v[i] * row;
    }
    return s;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// All eigenvalues of a symmetric matrix, ascending, by the cyclic Jacobi
// method. Sweeps until the off-diagonal mass is negligible relative to the
// Frobenius norm; converges quadratically, so 50 sweeps is never reached for
// d <= 64 in practice.
inline Vector symmetric_eigenvalues(const Matrix& input) {
  const std::size_t n = input.dim();
  Matrix a = input;
  // Work on the exactly symmetrized copy.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = m;
      a(j, i) = m;
    }

  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) frob += a(i, j) * a(i, j);
  const double stop = 1e-30 * frob;

  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= stop) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = arp - s * (arq + tau * arp);
          a(p, r) = a(r, p);
          a(r, q) = arq + s * (arp - tau * arq);
          a(q, r) = a(r, q);
        }
      }
    }
  }

  Vector eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace dplabel

#endif  // DPLABEL_LINALG_HPP_
