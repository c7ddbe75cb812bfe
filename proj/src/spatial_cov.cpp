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

#include "dpmwf/spatial_cov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dpmwf/error.hpp"

namespace dpmwf {

namespace {

void require_profile(const ScaleProfile& profile, std::size_t bins) {
  if (profile.gamma.size() != bins) {
    fail(ErrorKind::kUsage, "scale profile has " +
                                std::to_string(profile.gamma.size()) +
                                " bins, expected " + std::to_string(bins));
  }
  for (double g : profile.gamma) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      fail(ErrorKind::kUsage, "scale profile contains gamma <= 0");
    }
  }
}

}  // namespace

std::size_t window_frames(double window_ms, const StftConfig& config) {
  if (!(window_ms > 0.0) || !std::isfinite(window_ms)) {
    fail(ErrorKind::kUsage, "covariance window must be positive");
  }
  const double frames = window_ms * config.sample_rate /
                        (1000.0 * static_cast<double>(config.hop_size));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(frames)));
}

CovarianceField sliding_covariance(const Spectrogram& spec, double window_ms,
                                   CovarianceTag tag) {
  const std::size_t K = window_frames(window_ms, spec.config());
  const std::size_t T = spec.frames();
  const std::size_t F = spec.bins();
  const std::size_t M = spec.channels();
  CovarianceField cov(T, F, M, tag);

  // Bins are independent; the sum over the window runs oldest frame first.
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t first = t + 1 >= K ? t + 1 - K : 0;
      const double count = static_cast<double>(t - first + 1);
      auto R = cov.at(t, f);
      for (std::size_t j = 0; j < M; ++j) {
        for (std::size_t i = j; i < M; ++i) {
          cplx acc(0.0, 0.0);
          for (std::size_t k = first; k <= t; ++k) {
            acc += spec(k, f, i) * std::conj(spec(k, f, j));
          }
          acc /= count;
          if (i == j) acc.imag(0.0);
          R(i, j) = acc;
          R(j, i) = std::conj(acc);
        }
      }
    }
  }
  return cov;
}

CovarianceField oracle_noise_covariance(const Spectrogram& noise_spec,
                                        double window_ms) {
  return sliding_covariance(noise_spec, window_ms, CovarianceTag::kNoise);
}

ScaleProfile scale_profile(const CovarianceField& cov) {
  const std::size_t T = cov.frames();
  const std::size_t F = cov.bins();
  const double M = static_cast<double>(cov.channels());
  if (T == 0 || F == 0 || cov.channels() == 0) {
    fail(ErrorKind::kUsage, "scale_profile: empty covariance field");
  }
  ScaleProfile profile;
  profile.gamma.assign(F, 0.0);
  for (std::size_t f = 0; f < F; ++f) {
    double sum = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      sum += cov.at(t, f).trace().real() / M;
    }
    double g = sum / static_cast<double>(T);
    if (!(g > kGammaFloor)) {
      g = kGammaFloor;
      ++profile.floored_bins;
    }
    profile.gamma[f] = g;
  }
  return profile;
}

Spectrogram normalize_spectrogram(const Spectrogram& spec,
                                  const ScaleProfile& profile) {
  require_profile(profile, spec.bins());
  Spectrogram out = spec;
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    for (std::size_t f = 0; f < spec.bins(); ++f) {
      out.bin(t, f) /= std::sqrt(profile.gamma[f]);
    }
  }
  return out;
}

CovarianceField normalize_covariance(const CovarianceField& cov,
                                     const ScaleProfile& profile) {
  require_profile(profile, cov.bins());
  CovarianceField out = cov;
  for (std::size_t t = 0; t < cov.frames(); ++t) {
    for (std::size_t f = 0; f < cov.bins(); ++f) {
      out.at(t, f) /= profile.gamma[f];
    }
  }
  return out;
}

double softplus(double u) {
  // ln(1 + e^u) = max(u, 0) + ln(1 + e^-|u|)
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

CholeskyField cholesky_assemble(std::span<const double> raw_diag,
                                std::span<const cplx> raw_lower,
                                std::size_t frames, std::size_t bins,
                                std::size_t channels, double eps) {
  if (!(eps > 0.0)) fail(ErrorKind::kUsage, "cholesky floor must be > 0");
  const std::size_t n_bins = frames * bins;
  const std::size_t n_lower = channels * (channels - 1) / 2;
  if (raw_diag.size() != n_bins * channels ||
      raw_lower.size() != n_bins * n_lower) {
    fail(ErrorKind::kUsage, "cholesky_assemble: raw output sizes do not "
                            "match T x F x M");
  }
  CholeskyField chol(frames, bins, channels, eps);
  std::size_t d = 0;
  std::size_t l = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f) {
      auto L = chol.at(t, f);
      for (std::size_t i = 0; i < channels; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          const cplx v = raw_lower[l++];
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            fail(ErrorKind::kUsage, "cholesky_assemble: non-finite value");
          }
          L(i, j) = v;
        }
        const double u = raw_diag[d++];
        if (std::isnan(u) || u == HUGE_VAL) {
          fail(ErrorKind::kUsage, "cholesky_assemble: non-finite value");
        }
        L(i, i) = softplus(u) + eps;
      }
    }
  }
  return chol;
}

CovarianceField reconstruct(const CholeskyField& chol) {
  CovarianceField cov(chol.frames(), chol.bins(), chol.channels(),
                      CovarianceTag::kNoise);
  for (std::size_t t = 0; t < chol.frames(); ++t) {
    for (std::size_t f = 0; f < chol.bins(); ++f) {
      auto L = chol.at(t, f);
      Eigen::MatrixXcd P = L.triangularView<Eigen::Lower>() * L.adjoint();
      cov.at(t, f) = 0.5 * (P + P.adjoint());
    }
  }
  return cov;
}

FactorizeResult factorize(const CovarianceField& cov, double eps) {
  if (!(eps > 0.0)) fail(ErrorKind::kUsage, "cholesky floor must be > 0");
  const std::size_t M = cov.channels();
  FactorizeResult result;
  result.field = CholeskyField(cov.frames(), cov.bins(), M, eps);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(M, M);

  for (std::size_t t = 0; t < cov.frames(); ++t) {
    for (std::size_t f = 0; f < cov.bins(); ++f) {
      Eigen::MatrixXcd R = cov.at(t, f);
      auto L = result.field.at(t, f);
      if (R.cwiseAbs().maxCoeff() == 0.0) {
        L.setZero();
        ++result.zero_bins;
        continue;
      }
      R = 0.5 * (R + R.adjoint()).eval();
      const double trace = R.trace().real();

      Eigen::LLT<Eigen::MatrixXcd> llt(R);
      if (llt.info() != Eigen::Success || !(llt.rcond() >= 1e-12)) {
        ++result.loaded_bins;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(R);
        const double min_ev = eig.eigenvalues().minCoeff();
        if (min_ev < -1e-10 * std::abs(trace)) {
          ++result.indefinite_bins;
          Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
          R = eig.eigenvectors() * ev.asDiagonal() *
              eig.eigenvectors().adjoint();
        }
        const double load =
            kFactorizeLoading * std::max(R.trace().real(), 0.0) /
            static_cast<double>(M);
        llt.compute(R + load * I);
        if (llt.info() != Eigen::Success) {
          fail(ErrorKind::kNumerical,
               "factorize: Cholesky failed after loading at frame " +
                   std::to_string(t) + ", bin " + std::to_string(f));
        }
      }
      L = llt.matrixL();
      for (std::size_t i = 0; i < M; ++i) L(i, i) = L(i, i).real();
    }
  }
  return result;
}

void floor_diagonal(CholeskyField& chol) {
  const double eps = chol.diag_floor();
  for (std::size_t t = 0; t < chol.frames(); ++t) {
    for (std::size_t f = 0; f < chol.bins(); ++f) {
      auto L = chol.at(t, f);
      if (L.cwiseAbs().maxCoeff() == 0.0) continue;
      for (Eigen::Index i = 0; i < L.rows(); ++i) {
        L(i, i) = std::max(L(i, i).real(), eps);
      }
    }
  }
}

void validate_cholesky(const CholeskyField& chol) {
  const double eps = chol.diag_floor();
  for (std::size_t t = 0; t < chol.frames(); ++t) {
    for (std::size_t f = 0; f < chol.bins(); ++f) {
      auto L = chol.at(t, f);
      if (L.cwiseAbs().maxCoeff() == 0.0) continue;
      const std::string where =
          " at frame " + std::to_string(t) + ", bin " + std::to_string(f);
      for (Eigen::Index j = 0; j < L.cols(); ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
          if (L(i, j) != cplx(0.0, 0.0)) {
            fail(ErrorKind::kFormat, "cholesky factor not lower-triangular" +
                                         where);
          }
        }
        const cplx d = L(j, j);
        if (d.imag() != 0.0 || !(d.real() >= eps)) {
          fail(ErrorKind::kFormat,
               "cholesky diagonal below floor or not real" + where);
        }
      }
    }
  }
}

double max_hermitian_defect(const MatrixField& field) {
  double worst = 0.0;
  for (std::size_t t = 0; t < field.frames(); ++t) {
    for (std::size_t f = 0; f < field.bins(); ++f) {
      auto R = field.at(t, f);
      const double d = (R - R.adjoint()).norm() / std::max(R.norm(), 1e-30);
      worst = std::max(worst, d);
    }
  }
  return worst;
}

}  // namespace dpmwf
