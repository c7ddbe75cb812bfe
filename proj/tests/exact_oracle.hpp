// Copyright 2026 The dpmwf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Exact M = 2 dp-mwf in GMP rationals. Shared by the unit tests and the
// acceptance binary.

#pragma once

#include <array>
#include <random>
#include <utility>

#include <Eigen/Core>
#include <gmpxx.h>

namespace dpmwf::testing::exact {

// Exact complex rationals for the 2x2 oracle.
struct Q {
  mpq_class re, im;
};
inline Q operator+(const Q& x, const Q& y) { return {x.re + y.re, x.im + y.im}; }
inline Q operator-(const Q& x, const Q& y) { return {x.re - y.re, x.im - y.im}; }
inline Q operator*(const Q& x, const Q& y) {
  return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
}
inline Q scale(const mpq_class& s, const Q& x) { return {s * x.re, s * x.im}; }
inline Q inverse(const Q& x) {
  const mpq_class d = x.re * x.re + x.im * x.im;
  return {x.re / d, -x.im / d};
}

using Q2 = std::array<std::array<Q, 2>, 2>;

inline Q2 mul(const Q2& a, const Q2& b) {
  Q2 c;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  }
  return c;
}

inline Q2 inv(const Q2& a) {
  const Q det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  const Q r = inverse(det);
  Q2 b;
  b[0][0] = a[1][1] * r;
  b[1][1] = a[0][0] * r;
  b[0][1] = scale(-1, a[0][1]) * r;
  b[1][0] = scale(-1, a[1][0]) * r;
  return b;
}

// Hermitian PSD matrix A A^H from small-integer A, both as Q2 and Eigen.
inline std::pair<Q2, Eigen::MatrixXcd> random_rational_psd(std::mt19937& rng) {
  std::uniform_int_distribution<int> d(-6, 6);
  Q2 a;
  for (auto& row : a) {
    for (auto& e : row) e = {d(rng), d(rng)};
  }
  Q2 r;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Q acc{0, 0};
      for (int k = 0; k < 2; ++k) {
        acc = acc + a[i][k] * Q{a[j][k].re, -a[j][k].im};
      }
      r[i][j] = acc;
    }
  }
  // Extra diagonal keeps the pair well away from singular.
  r[0][0].re += 1;
  r[1][1].re += 1;
  Eigen::MatrixXcd m(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) m(i, j) = {r[i][j].re.get_d(), r[i][j].im.get_d()};
  }
  return {r, m};
}

// W_dp evaluated exactly for rational a, mu, nu.
inline Q2 exact_dp_mwf(const Q2& rxx, const Q2& rnn, const mpq_class& a,
                const mpq_class& mu, const mpq_class& nu) {
  Q2 num, den;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      num[i][j] = rxx[i][j] - rnn[i][j];
      den[i][j] = rxx[i][j] + scale(mu + nu - 1, rnn[i][j]);
    }
  }
  const Q2 w = mul(num, inv(den));
  const Q2 wr = mul(w, rnn);
  mpq_class tw = wr[0][0].re + wr[1][1].re;
  if (tw < 0) tw = 0;
  const mpq_class tn = rnn[0][0].re + rnn[1][1].re;
  mpq_class ap = a;
  const mpq_class denom = mu * tn + nu * tw;
  if (denom > 0) ap = a + (1 - a) * nu * tw / denom;
  if (ap > 1) ap = 1;
  Q2 out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out[i][j] = scale(1 - ap, w[i][j]);
      if (i == j) out[i][j].re += ap;
    }
  }
  return out;
}

}  // namespace dpmwf::testing::exact
