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

#include "dpmwf/dp_mwf.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Cholesky>

#include "dpmwf/error.hpp"

namespace dpmwf {

namespace {

constexpr double kConditionLimit = 1e-12;  // reciprocal condition estimate
constexpr double kLoading = 1e-10;
constexpr double kMixingGuard = 1e-30;

bool is_zero(const Eigen::MatrixXcd& m) {
  return m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0;
}

void require_square_pair(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() ||
      a.rows() == 0) {
    fail(ErrorKind::kUsage, "filter: covariance matrices must be square and "
                            "of equal size");
  }
}

// Returns D^-1 B for Hermitian D, or nothing if D cannot be factored even
// after loading.
std::optional<Eigen::MatrixXcd> hermitian_solve(const Eigen::MatrixXcd& d,
                                                const Eigen::MatrixXcd& b,
                                                BinStatus* status) {
  const Eigen::MatrixXcd dh = 0.5 * (d + d.adjoint());
  Eigen::LLT<Eigen::MatrixXcd> llt(dh);
  if (llt.info() == Eigen::Success && llt.rcond() >= kConditionLimit) {
    return llt.solve(b);
  }
  const double trace = dh.trace().real();
  if (!(trace > 0.0)) return std::nullopt;
  if (status) status->loaded = true;
  const auto m = dh.rows();
  const double load = kLoading * trace / static_cast<double>(m);
  llt.compute(dh + load * Eigen::MatrixXcd::Identity(m, m));
  if (llt.info() != Eigen::Success) return std::nullopt;
  return llt.solve(b);
}

}  // namespace

void FilterParams::validate() const {
  if (!(a >= 0.0 && a <= 1.0)) {
    fail(ErrorKind::kUsage, "filter: a must lie in [0, 1]");
  }
  if (!(mu >= 0.0) || !(nu >= 0.0) || !std::isfinite(mu) ||
      !std::isfinite(nu)) {
    fail(ErrorKind::kUsage, "filter: mu and nu must be finite and >= 0");
  }
  if (mu + nu < 1.0) {
    fail(ErrorKind::kUsage,
         "filter: mu + nu < 1 makes Rxx + (mu + nu - 1) Rnn possibly "
         "indefinite");
  }
  if (!(window_ms > 0.0) || !std::isfinite(window_ms)) {
    fail(ErrorKind::kUsage, "filter: window must be positive");
  }
}

Eigen::MatrixXcd mwf(const Eigen::MatrixXcd& rxx, const Eigen::MatrixXcd& rnn,
                     BinStatus* status) {
  require_square_pair(rxx, rnn);
  const auto m = rxx.rows();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(m, m);
  if (is_zero(rnn)) return I;
  if (is_zero(rxx)) return Eigen::MatrixXcd::Zero(m, m);
  // Rnn Rxx^-1 = (Rxx^-1 Rnn)^H for Hermitian operands.
  auto x = hermitian_solve(rxx, rnn, status);
  if (!x) {
    if (status) status->singular = true;
    return Eigen::MatrixXcd::Zero(m, m);
  }
  return I - x->adjoint();
}

Eigen::MatrixXcd w_mu_nu(const Eigen::MatrixXcd& rxx,
                         const Eigen::MatrixXcd& rnn, double mu, double nu,
                         BinStatus* status) {
  require_square_pair(rxx, rnn);
  const auto m = rxx.rows();
  if (is_zero(rnn)) return Eigen::MatrixXcd::Identity(m, m);
  const Eigen::MatrixXcd numerator = rxx - rnn;
  if (is_zero(numerator)) return Eigen::MatrixXcd::Zero(m, m);
  const Eigen::MatrixXcd denominator = rxx + (mu + nu - 1.0) * rnn;
  // (Rxx - Rnn) D^-1 = (D^-1 (Rxx - Rnn))^H since both factors are Hermitian.
  auto x = hermitian_solve(denominator, numerator, status);
  if (!x) {
    if (status) status->singular = true;
    return Eigen::MatrixXcd::Zero(m, m);
  }
  return x->adjoint();
}

double mixing_factor(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& rnn,
                     double a, double mu, double nu, BinStatus* status) {
  const double tn = rnn.trace().real();
  // tr(W Rnn) without forming the product.
  double tw = (w.array() * rnn.transpose().array()).sum().real();
  if (tw < 0.0) {
    tw = 0.0;
    if (status) status->trace_clamped = true;
  }
  const double denom = mu * tn + nu * tw;
  if (!(denom > kMixingGuard)) return a;
  const double value = a + (1.0 - a) * nu * tw / denom;
  return std::clamp(value, a, 1.0);
}

Eigen::MatrixXcd dp_mwf(const Eigen::MatrixXcd& rxx,
                        const Eigen::MatrixXcd& rnn, const FilterParams& params,
                        BinStatus* status, double* mixing) {
  Eigen::MatrixXcd w = w_mu_nu(rxx, rnn, params.mu, params.nu, status);
  const double am =
      mixing_factor(w, rnn, params.a, params.mu, params.nu, status);
  if (mixing) *mixing = am;
  w *= (1.0 - am);
  w.diagonal().array() += am;
  return w;
}

FilterField build_filter_field(const MatrixField& rxx, const MatrixField& rnn,
                               const FilterParams& params, FilterStats* stats) {
  params.validate();
  if (!rxx.same_shape(rnn)) {
    fail(ErrorKind::kUsage,
         "filter: mixture and noise covariance fields differ in shape (" +
             std::to_string(rxx.frames()) + "x" + std::to_string(rxx.bins()) +
             "x" + std::to_string(rxx.channels()) + " vs " +
             std::to_string(rnn.frames()) + "x" + std::to_string(rnn.bins()) +
             "x" + std::to_string(rnn.channels()) + ")");
  }
  FilterField field(rxx.frames(), rxx.bins(), rxx.channels());
  FilterStats local;
  double mixing_sum = 0.0;
  for (std::size_t t = 0; t < rxx.frames(); ++t) {
    for (std::size_t f = 0; f < rxx.bins(); ++f) {
      BinStatus st;
      double am = 0.0;
      field.at(t, f) = dp_mwf(rxx.at(t, f), rnn.at(t, f), params, &st, &am);
      ++local.bins;
      local.loaded_bins += st.loaded;
      local.singular_bins += st.singular;
      local.trace_clamped_bins += st.trace_clamped;
      local.mixing_min = std::min(local.mixing_min, am);
      local.mixing_max = std::max(local.mixing_max, am);
      mixing_sum += am;
    }
  }
  if (local.bins > 0) {
    local.mixing_mean = mixing_sum / static_cast<double>(local.bins);
  } else {
    local.mixing_min = local.mixing_max = params.a;
  }
  if (stats) *stats = local;
  return field;
}

Spectrogram apply_filter(const FilterField& w, const Spectrogram& spec) {
  if (w.frames() != spec.frames() || w.bins() != spec.bins() ||
      w.channels() != spec.channels()) {
    fail(ErrorKind::kUsage, "filter: filter field and spectrogram differ in "
                            "shape");
  }
  Spectrogram out = spec;
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    for (std::size_t f = 0; f < spec.bins(); ++f) {
      out.bin(t, f) = w.at(t, f) * spec.bin(t, f);
    }
  }
  return out;
}

}  // namespace dpmwf
