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


#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dpmwf/error.hpp"
#include "dpmwf/metrics.hpp"
#include "dpmwf/spatial_cov.hpp"
#include "support.hpp"

using namespace dpmwf;
using dpmwf::testing::Rng;

namespace {

// mpmath references.
constexpr double kTenLog4 = 6.0205999132796239;
constexpr double kTenLog6 = 7.7815125038364363;
constexpr double kInvSqrt2 = 0.70710678118654752;

MultichannelSignal scaled(const MultichannelSignal& x, double c) {
  MultichannelSignal y = x;
  for (double& v : y.data()) v *= c;
  return y;
}

// e with <e, s> = 0 over all channels and ||e||^2 = ratio * ||s||^2.
MultichannelSignal orthogonal_error(const MultichannelSignal& s, double ratio,
                                    Rng& rng) {
  auto e = testing::random_signal(s.channels(), s.samples(), s.sample_rate(), rng);
  double es = 0.0;
  for (std::size_t i = 0; i < e.data().size(); ++i) es += e.data()[i] * s.data()[i];
  const double k = es / s.energy();
  for (std::size_t i = 0; i < e.data().size(); ++i) e.data()[i] -= k * s.data()[i];
  return scaled(e, std::sqrt(ratio * s.energy() / e.energy()));
}

MultichannelSignal sum(const MultichannelSignal& a, const MultichannelSignal& b) {
  MultichannelSignal y = a;
  for (std::size_t i = 0; i < y.data().size(); ++i) y.data()[i] += b.data()[i];
  return y;
}

FilterField constant_filter(const Spectrogram& s, cplx g) {
  FilterField w(s.frames(), s.bins(), s.channels());
  for (std::size_t t = 0; t < s.frames(); ++t) {
    for (std::size_t f = 0; f < s.bins(); ++f) {
      w.at(t, f) = g * Eigen::MatrixXcd::Identity(s.channels(), s.channels());
    }
  }
  return w;
}

}  // namespace

TEST_CASE("metrics: shared alpha") {
  Rng rng(1);
  const auto s = testing::random_signal(4, 3000, 32000, rng);
  CHECK(shared_alpha(s, s) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(shared_alpha(scaled(s, 2.0), s) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(shared_alpha(sum(s, orthogonal_error(s, 0.3, rng)), s) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(shared_alpha(s, MultichannelSignal(4, 3000, 32000)), Error);
  CHECK_THROWS_AS(shared_alpha(s, MultichannelSignal(4, 2999, 32000)), Error);
}

TEST_CASE("metrics: SI-SDR examples") {
  Rng rng(2);
  const auto s = testing::random_signal(6, 4000, 32000, rng);
  CHECK(si_sdr(s, s) == kDbClamp);
  CHECK(si_sdr(scaled(s, 2.0), s) == kDbClamp);
  CHECK(si_sdr(sum(s, orthogonal_error(s, 0.01, rng)), s) ==
        doctest::Approx(20.0).epsilon(1e-12));
  CHECK(si_sdr(MultichannelSignal(6, 4000, 32000), s) == -kDbClamp);
  CHECK_THROWS_AS(si_sdr(s, MultichannelSignal(6, 4000, 32000)), Error);
}

TEST_CASE("metrics: SI-SDR is scale invariant") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = testing::random_signal(3, 2000, 32000, rng);
    const auto y = sum(s, testing::random_signal(3, 2000, 32000, rng, 0.5));
    double c = std::pow(10.0, u(rng));
    if (trial % 2) c = -c;
    CHECK(std::abs(si_sdr(scaled(y, c), s) - si_sdr(y, s)) <= 1e-9);
  }
}

TEST_CASE("metrics: SI-SDR shares one scale across channels") {
  // Per-channel gains differ, so a shared alpha cannot absorb them.
  Rng rng(4);
  const auto s = testing::random_signal(2, 2000, 32000, rng);
  MultichannelSignal y = s;
  for (double& v : y.channel(1)) v *= 3.0;
  CHECK(si_sdr(y, s) < 10.0);
}

TEST_CASE("metrics: Cholesky loss") {
  Rng rng(5);
  MatrixField L(2, 3, 4);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t f = 0; f < 3; ++f) L.at(t, f) = testing::random_factor(4, rng, 0.1);
  }
  MatrixField twice = L;
  for (auto& v : twice.data()) v *= 2.0;
  const MatrixField zero(2, 3, 4);
  CHECK(cholesky_loss(L, L).value == 0.0);
  CHECK(cholesky_loss(twice, L).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cholesky_loss(zero, L).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cholesky_loss(L, L).evaluated_bins == 6);

  MatrixField partial = L;
  partial.at(1, 2).setZero();
  const auto r = cholesky_loss(twice, partial);
  CHECK(r.skipped_bins == 1);
  CHECK(r.evaluated_bins == 5);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(cholesky_loss(L, zero), Error);
  CHECK_THROWS_AS(cholesky_loss(L, MatrixField(2, 3, 3)), Error);
}

TEST_CASE("metrics: combined loss") {
  CHECK(combined_loss(20.0, 0.0, 10.0) == -20.0);
  CHECK(combined_loss(0.0, 1.0, 10.0) == 10.0);
  CHECK(combined_loss(20.0, 0.32, 10.0) == doctest::Approx(-16.8).epsilon(1e-14));
  CHECK(combined_loss(20.0, 0.32) == doctest::Approx(-16.8).epsilon(1e-14));
}

TEST_CASE("metrics: noise reduction") {
  Rng rng(6);
  const auto n = analyze(testing::random_signal(3, 6000, 32000, rng), StftConfig{});
  CHECK(noise_reduction(constant_filter(n, 1.0), n) == 0.0);
  CHECK(noise_reduction(constant_filter(n, 0.5), n) ==
        doctest::Approx(kTenLog4).epsilon(1e-12));
  CHECK(noise_reduction(constant_filter(n, 0.0), n) == kDbClamp);
  Spectrogram silent(n.frames(), 3, StftConfig{}, n.num_samples());
  CHECK_THROWS_AS(noise_reduction(constant_filter(n, 1.0), silent), Error);
  CHECK_THROWS_AS(noise_reduction(FilterField(1, 1, 3), n), Error);
}

TEST_CASE("metrics: cosine similarity examples") {
  Rng rng(7);
  const Eigen::MatrixXcd r = testing::random_psd(3, rng);
  CHECK(cosine_sim(r, r) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cosine_sim(r, 7.5 * r) == doctest::Approx(1.0).epsilon(1e-14));
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 0) = 1.0;
  CHECK(cosine_sim(Eigen::MatrixXcd::Identity(2, 2), d) ==
        doctest::Approx(kInvSqrt2).epsilon(1e-15));
  CHECK_THROWS_AS(cosine_sim(r, Eigen::MatrixXcd::Zero(3, 3)), Error);
  CHECK_THROWS_AS(cosine_sim(r, Eigen::MatrixXcd::Identity(2, 2)), Error);
}

TEST_CASE("metrics: cosine similarity of PSD pairs lies in [0, 1]") {
  Rng rng(8);
  std::uniform_int_distribution<int> rank(1, 6);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::MatrixXcd a = testing::random_psd(6, rng, rank(rng));
    const Eigen::MatrixXcd b = testing::random_psd(6, rng, rank(rng));
    const double s = cosine_sim(a, b);
    REQUIRE(s >= -1e-12);
    REQUIRE(s <= 1.0 + 1e-12);
  }
}

TEST_CASE("metrics: field similarity") {
  Rng rng(9);
  MatrixField a(3, 4, 2), b(3, 4, 2);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t f = 0; f < 4; ++f) {
      a.at(t, f) = testing::random_psd(2, rng);
      b.at(t, f) = testing::random_psd(2, rng);
    }
  }
  const auto same = field_similarity(a, a);
  CHECK(same.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(same.evaluated_bins == 12);
  MatrixField twice = a;
  for (auto& v : twice.data()) v *= 2.0;
  CHECK(field_similarity(a, twice).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(field_similarity(a, b).value - field_similarity(b, a).value) <= 1e-12);

  a.at(0, 0).setZero();
  b.at(2, 3).setZero();
  const auto r = field_similarity(a, b);
  CHECK(r.evaluated_bins == 10);
  CHECK(r.skipped_bins == 2);
  CHECK(r.evaluated_bins + r.skipped_bins == 12);
  CHECK(r.value >= 0.0);
  CHECK(r.value <= 1.0 + 1e-12);

  CHECK_THROWS_AS(field_similarity(MatrixField(1, 1, 2), MatrixField(1, 1, 2)), Error);
  CHECK_THROWS_AS(field_similarity(a, MatrixField(3, 4, 3)), Error);
}

TEST_CASE("metrics: ILD") {
  Rng rng(10);
  const auto x = testing::random_signal(2, 1000, 32000, rng);
  const auto l = x.channel(0);
  std::vector<double> doubled(l.begin(), l.end());
  for (double& v : doubled) v *= 2.0;
  CHECK(ild(l, l) == 0.0);
  CHECK(ild(doubled, l) == doctest::Approx(kTenLog4).epsilon(1e-14));
  CHECK(ild(l, doubled) == doctest::Approx(-kTenLog4).epsilon(1e-14));
  CHECK(ild(x.channel(0), x.channel(1)) == doctest::Approx(-ild(x.channel(1), x.channel(0))));
  const std::vector<double> zero(1000, 0.0);
  CHECK_THROWS_AS(ild(l, zero), Error);

  const ChannelPair est{doubled, l}, ref{l, l};
  CHECK(ild_error(ref, ref) == 0.0);
  CHECK(ild_error(est, ref) == doctest::Approx(kTenLog4).epsilon(1e-14));
  CHECK(ild_error(ref, est) == ild_error(est, ref));
}

TEST_CASE("metrics: lateral pair of the default array") {
  const auto array = ArrayGeometry::circular();
  CHECK(array.lateral_pair() == std::pair<std::size_t, std::size_t>{1, 4});
  const auto four = ArrayGeometry::circular(4, 0.1);
  CHECK(four.lateral_pair() == std::pair<std::size_t, std::size_t>{1, 3});
}

TEST_CASE("metrics: steering grid") {
  const auto array = ArrayGeometry::circular();
  const auto g = SteeringGrid::uniform(5.0, StftConfig{}, array);
  CHECK(g.azimuths_deg.size() == 72);
  CHECK(g.azimuths_deg.front() == 0.0);
  CHECK(g.azimuths_deg.back() == 355.0);
  CHECK(g.frequencies_hz.size() == 257);
  CHECK(g.frequencies_hz[1] == 62.5);
  CHECK_NOTHROW(g.validate());
  CHECK_THROWS_AS(SteeringGrid::uniform(0.0, StftConfig{}, array), Error);
  SteeringGrid bad = g;
  std::swap(bad.azimuths_deg[3], bad.azimuths_deg[4]);
  CHECK_THROWS_AS(bad.validate(), Error);

  // Steering vector phases follow the propagation delay.
  const auto d = steering_vector(array, 0.0, 1000.0);
  for (std::size_t m = 0; m < 6; ++m) {
    const double tau = array.mic_positions[m].dot(propagation_direction(0.0)) / kSoundSpeed;
    CHECK(std::abs(d(m) - std::polar(1.0, -2.0 * std::numbers::pi * 1000.0 * tau)) < 1e-14);
  }
  // Mic 0 sits at azimuth 0, nearest the source: it hears the wave first.
  CHECK(array.mic_positions[0].dot(propagation_direction(0.0)) < 0.0);
}

TEST_CASE("metrics: delay-and-sum with zero delays returns the channel") {
  // Mics on a vertical line see no horizontal delay.
  ArrayGeometry line;
  for (int m = 0; m < 4; ++m) line.mic_positions.emplace_back(0.0, 0.0, 0.02 * m);
  Rng rng(11);
  const auto mono = testing::random_signal(1, 4000, 32000, rng);
  MultichannelSignal x(4, 4000, 32000);
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t n = 0; n < 4000; ++n) x(m, n) = mono(0, n);
  }
  const auto spec = analyze(x, StftConfig{});
  const auto mono_spec = analyze(mono, StftConfig{});
  const auto grid = SteeringGrid::uniform(1.0, StftConfig{}, line);
  for (double az : {0.0, 77.0, 301.0}) {
    const auto y = ds_beamform(spec, az, grid);
    REQUIRE(y.channels() == 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < y.data().size(); ++i) {
      worst = std::max(worst, std::abs(y.data()[i] - mono_spec.data()[i]));
    }
    CHECK(worst <= 1e-12);
  }
  const Spectrogram zero(spec.frames(), 4, StftConfig{}, spec.num_samples());
  const auto silent = ds_beamform(zero, 10.0, grid);
  for (const auto& v : silent.data()) CHECK(v == cplx(0.0));
  CHECK_THROWS_AS(ds_beamform(spec, 360.0, grid), Error);
  CHECK_THROWS_AS(ds_beamform(analyze(mono, StftConfig{}), 0.0, grid), Error);
}

TEST_CASE("metrics: delay-and-sum array gain on white noise is 10 log10 M") {
  const auto array = ArrayGeometry::circular();
  const StftConfig c;
  const auto grid = SteeringGrid::uniform(1.0, c, array);
  Rng rng(12);
  const double az = 140.0;
  const auto target = testing::plane_wave(array, az, 64000, c.sample_rate, 300.0, 3000.0, 40, rng);
  const auto noise = testing::random_signal(6, 64000, c.sample_rate, rng);
  const auto ts = analyze(target, c), ns = analyze(noise, c);
  const auto ty = ds_beamform(ts, az, grid), ny = ds_beamform(ns, az, grid);
  // Input SNR at one mic vs output SNR, over the band carrying the target.
  double t_in = 0, n_in = 0, t_out = 0, n_out = 0;
  for (std::size_t t = 0; t < ts.frames(); ++t) {
    for (std::size_t f = 0; f < ts.bins(); ++f) {
      const double hz = c.bin_frequency(f);
      if (hz < 300.0 || hz > 3000.0) continue;
      for (std::size_t m = 0; m < 6; ++m) {
        t_in += std::norm(ts(t, f, m)) / 6.0;
        n_in += std::norm(ns(t, f, m)) / 6.0;
      }
      t_out += std::norm(ty(t, f, 0));
      n_out += std::norm(ny(t, f, 0));
    }
  }
  const double gain = 10.0 * std::log10((t_out / n_out) / (t_in / n_in));
  CHECK(gain == doctest::Approx(kTenLog6).epsilon(0.3 / kTenLog6));
}

TEST_CASE("metrics: SRP of a spatially white field is flat") {
  const auto array = ArrayGeometry::circular();
  const StftConfig c;
  const std::size_t T = 60;
  Spectrogram s(T, 6, c, (T - 1) * c.hop_size);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < s.bins(); ++f) s(t, f, t % 6) = 1.0;
  }
  const auto grid = SteeringGrid::uniform(2.0, c, array);
  // One-frame window: each frame contributes e_k e_k^H.
  const auto map = srp_map(s, grid, 8.0);
  REQUIRE(map.values.size() == grid.azimuths_deg.size() * s.bins());
  for (std::size_t a = 0; a < map.azimuths_deg.size(); a += 13) {
    for (std::size_t f = 0; f < s.bins(); f += 17) {
      CHECK(map(a, f) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("metrics: SRP of silence is zero") {
  const auto array = ArrayGeometry::circular();
  const Spectrogram s(20, 6, StftConfig{}, 19 * 256);
  const auto map = srp_map(s, SteeringGrid::uniform(10.0, StftConfig{}, array));
  for (double v : map.values) CHECK(v == 0.0);
  CHECK_THROWS_AS(map.band_peak_azimuth(500.0, 2000.0), Error);
}

TEST_CASE("metrics: SRP peaks at the plane-wave azimuth") {
  const auto array = ArrayGeometry::circular();
  const StftConfig c;
  Rng rng(13);
  const auto grid = SteeringGrid::uniform(1.0, c, array);
  for (double az : {0.0, 57.0, 200.0, 315.0}) {
    const auto x = testing::plane_wave(array, az, 32000, c.sample_rate, 400.0, 2200.0, 30, rng);
    const auto map = srp_map(analyze(x, c), grid);
    for (double v : map.values) REQUIRE(v >= -1e-10);
    const double peak = map.band_peak_azimuth(500.0, 2000.0);
    const double diff = std::abs(std::remainder(peak - az, 360.0));
    CHECK(diff <= 1.0);
  }
}

TEST_CASE("metrics: SRP CSV and PGM output") {
  SrpMap map;
  map.azimuths_deg = {0.0, 90.0, 180.0};
  map.frequencies_hz = {0.0, 62.5};
  map.values = {1.0, 0.0, 1e-2, 1e-5, 1e-4, 0.5};
  std::ostringstream csv;
  write_srp_csv(map, csv);
  std::istringstream lines(csv.str());
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == "azimuth_deg,0,62.5");
  int rows = 0;
  while (std::getline(lines, row)) {
    ++rows;
    CHECK(std::count(row.begin(), row.end(), ',') == 2);
  }
  CHECK(rows == 3);

  std::ostringstream pgm;
  write_srp_pgm(map, pgm, 40.0);
  const std::string bytes = pgm.str();
  const std::string head = "P5\n2 3\n255\n";
  REQUIRE(bytes.size() == head.size() + 6);
  CHECK(bytes.substr(0, head.size()) == head);
  const auto px = [&](std::size_t i) {
    return static_cast<unsigned char>(bytes[head.size() + i]);
  };
  CHECK(px(0) == 255);  // peak
  CHECK(px(1) == 0);    // zero power
  CHECK(px(2) == 128);  // -20 dB is mid-range
  CHECK(px(3) == 0);    // below the 40 dB range
  CHECK(px(4) == 0);    // exactly -40 dB
  CHECK_THROWS_AS(write_srp_pgm(map, pgm, 0.0), Error);
}
