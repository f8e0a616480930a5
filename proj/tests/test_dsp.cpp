#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "readtask/dsp.hpp"
#include "readtask/error.hpp"

using namespace readtask;
using namespace readtask::dsp;

namespace {

constexpr double kFs = 500.0;
constexpr double kPi = std::numbers::pi;

std::vector<double> tone(double freq, double amp, double seconds, double phase = 0.0) {
  const auto n = static_cast<std::size_t>(seconds * kFs);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * kPi * freq * i / kFs + phase);
  return x;
}

// [first, last) of the central `frac` of n samples.
std::pair<std::size_t, std::size_t> central(std::size_t n, double frac) {
  const auto skip = static_cast<std::size_t>(n * (1.0 - frac) / 2.0);
  return {skip, n - skip};
}

double central_rms(const std::vector<double>& x, double frac) {
  auto [a, b] = central(x.size(), frac);
  double s = 0;
  for (auto i = a; i < b; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(b - a));
}

ContinuousEeg constant_envelope_eeg(double seconds, std::vector<double> amps, double freq) {
  ContinuousEeg e;
  e.channels = kChannels;
  e.samples = static_cast<std::size_t>(seconds * kFs);
  e.sample_rate_hz = kFs;
  e.data.resize(e.channels * e.samples);
  for (std::size_t c = 0; c < e.channels; ++c)
    for (std::size_t t = 0; t < e.samples; ++t)
      e.data[c * e.samples + t] =
          static_cast<float>(amps[c % amps.size()] * std::sin(2 * kPi * freq * t / kFs + 0.1 * c));
  return e;
}

}  // namespace

TEST_CASE("canonical bands") {
  CHECK(band_by_name("theta").low_hz == 4.0);
  CHECK(band_by_name("alpha").low_hz == 8.5);
  CHECK(band_by_name("beta").high_hz == 30.0);
  CHECK(band_by_name("gamma").high_hz == 49.5);
  CHECK(band_by_name("broadband").low_hz == 0.1);
  auto halves = split_band(band_by_name("theta"));
  CHECK(halves[0].name == "theta1");
  CHECK(halves[1].low_hz == 6.0);
  CHECK(band_by_name("gamma2").low_hz == doctest::Approx(40.0));
  CHECK_THROWS_AS(band_by_name("delta"), ParameterError);
}

TEST_CASE("butterworth design has unit gain at centre and a zero at DC") {
  const auto sos = butterworth_bandpass(4, 8.5, 13.0, kFs);
  CHECK(sos.size() == 4);
  for (const auto& q : sos) CHECK(q.b0 + q.b1 + q.b2 == doctest::Approx(0.0).epsilon(1e-12));
  // Poles inside the unit circle.
  for (const auto& q : sos) CHECK(q.a2 < 1.0);
}

TEST_CASE("bandpass passes an in-band tone") {
  const auto x = tone(10.0, 1.0, 4.0);
  const auto y = bandpass(x, band_by_name("alpha"), kFs);
  REQUIRE(y.size() == x.size());
  auto [a, b] = central(y.size(), 0.9);
  // Peak amplitude over each cycle within 5% of 1.
  double peak = 0;
  for (auto i = a; i < b; ++i) peak = std::max(peak, std::abs(y[i]));
  CHECK(peak == doctest::Approx(1.0).epsilon(0.05));
  CHECK(central_rms(y, 0.9) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("bandpass rejects an out-of-band tone") {
  const auto y = bandpass(tone(10.0, 1.0, 4.0), band_by_name("gamma"), kFs);
  CHECK(central_rms(y, 0.9) <= 0.05);
}

TEST_CASE("bandpass removes DC for every band") {
  std::vector<double> dc(2000, 3.7);
  for (const char* b : {"theta", "alpha", "beta", "gamma", "broadband"}) {
    CAPTURE(b);
    CHECK(central_rms(bandpass(dc, band_by_name(b), kFs), 0.9) <= 1e-3);
  }
}

TEST_CASE("bandpass is zero-phase") {
  const auto x = tone(20.0, 1.0, 4.0, 0.3);
  const auto y = bandpass(x, band_by_name("beta"), kFs);
  auto [a, b] = central(x.size(), 0.8);
  int best_lag = 99;
  double best = -1e300;
  for (int lag = -12; lag <= 12; ++lag) {
    double s = 0;
    for (auto i = a; i < b; ++i) s += x[i] * y[static_cast<std::size_t>(static_cast<long>(i) + lag)];
    if (s > best) {
      best = s;
      best_lag = lag;
    }
  }
  CHECK(best_lag == 0);
}

TEST_CASE("bandpass is linear") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<double> x(1500), ax(1500);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = nd(rng);
    ax[i] = -2.5 * x[i];
  }
  const auto y = bandpass(x, band_by_name("theta"), kFs);
  const auto ay = bandpass(ax, band_by_name("theta"), kFs);
  double maxdiff = 0, maxval = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    maxdiff = std::max(maxdiff, std::abs(ay[i] + 2.5 * y[i]));
    maxval = std::max(maxval, std::abs(ay[i]));
  }
  CHECK(maxdiff <= 1e-12 * std::max(1.0, maxval));
}

TEST_CASE("bandpass parameter and length errors") {
  std::vector<double> x(1000, 0.0);
  CHECK_THROWS_AS(bandpass(x, FrequencyBand{"hi", 100.0, 250.0}, kFs), ParameterError);
  CHECK_THROWS_AS(bandpass(x, FrequencyBand{"hi", 100.0, 300.0}, kFs), ParameterError);
  std::vector<double> shortx(min_signal_length() - 1, 1.0);
  CHECK_THROWS_AS(bandpass(shortx, band_by_name("alpha"), kFs), LengthError);
}

TEST_CASE("hilbert envelope of a pure tone is flat") {
  for (double f : {10.0, 20.0, 37.3}) {
    CAPTURE(f);
    const auto env = hilbert_envelope(tone(f, 2.5, 3.0, 0.7));
    auto [a, b] = central(env.size(), 0.9);
    for (auto i = a; i < b; ++i) REQUIRE(env[i] == doctest::Approx(2.5).epsilon(0.01));
  }
}

TEST_CASE("hilbert envelope of zero is zero") {
  std::vector<double> z(64, 0.0);
  for (double v : hilbert_envelope(z)) CHECK(v == 0.0);
}

TEST_CASE("hilbert envelope recovers amplitude modulation") {
  const std::size_t n = 2000;
  std::vector<double> x(n), expected(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / kFs;
    expected[i] = 1.0 + 0.5 * std::sin(2 * kPi * 1.0 * t);
    x[i] = expected[i] * std::sin(2 * kPi * 20.0 * t);
  }
  const auto env = hilbert_envelope(x);
  auto [a, b] = central(n, 0.8);
  for (auto i = a; i < b; ++i) REQUIRE(env[i] == doctest::Approx(expected[i]).epsilon(0.02));
}

TEST_CASE("hilbert envelope of two separated tones dominates each amplitude") {
  auto x = tone(9.0, 1.0, 3.0);
  const auto x2 = tone(12.0, 0.6, 3.0, 1.1);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += x2[i];
  const auto env = hilbert_envelope(x);
  auto [a, b] = central(env.size(), 0.9);
  double mean = 0;
  for (auto i = a; i < b; ++i) mean += env[i];
  mean /= static_cast<double>(b - a);
  CHECK(mean >= 0.95 * 1.0);
  CHECK(mean >= 0.95 * 0.6);
}

TEST_CASE("hilbert envelope errors") {
  std::vector<double> x(32, 1.0);
  x[5] = std::nan("");
  CHECK_THROWS_AS(hilbert_envelope(x), NumericError);
  CHECK_THROWS_AS(hilbert_envelope(std::vector<double>(8, 1.0)), LengthError);
}

TEST_CASE("segment band power of a constant envelope") {
  const auto eeg = constant_envelope_eeg(4.0, {1.0, 2.0, 3.5}, 10.0);
  const std::vector<Segment> segs{{1000, 200}, {1800, 350}, {2600, 100}};
  const auto v = segment_band_power(eeg, band_by_name("alpha"), segs);
  REQUIRE(v.size() == kChannels);
  for (std::size_t c = 0; c < kChannels; ++c)
    CHECK(v[c] == doctest::Approx(std::vector<double>{1.0, 2.0, 3.5}[c % 3]).epsilon(0.01));

  const auto sq = segment_band_power(eeg, band_by_name("alpha"), segs, PowerMode::amplitude_squared);
  CHECK(sq[1] == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("segment band power averages piecewise-constant envelopes") {
  // Envelope c1 = 1 on [0, 2s), c2 = 3 on [2s, 4s); equal-length segments in each.
  ContinuousEeg e;
  e.channels = kChannels;
  e.samples = 2000;
  e.sample_rate_hz = kFs;
  e.data.resize(e.channels * e.samples);
  for (std::size_t c = 0; c < e.channels; ++c)
    for (std::size_t t = 0; t < e.samples; ++t)
      e.data[c * e.samples + t] =
          static_cast<float>((t < 1000 ? 1.0 : 3.0) * std::sin(2 * kPi * 40.0 * t / kFs));
  const std::vector<Segment> segs{{700, 200}, {3100, 200}};
  const auto v = segment_band_power(e, band_by_name("gamma"), segs);
  for (double x : v) CHECK(x == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("segment union identity") {
  const auto eeg = constant_envelope_eeg(2.0, {1.0, 1.5}, 20.0);
  const auto env = channel_envelopes(eeg, band_by_name("beta"));
  const std::vector<Segment> whole{{0, 2000}};
  const std::vector<Segment> pieces{{0, 700}, {500, 800}, {1300, 700}};
  CHECK(segment_mean(env, kFs, whole) == segment_mean(env, kFs, pieces));
}

TEST_CASE("segment band power errors") {
  const auto eeg = constant_envelope_eeg(1.0, {1.0}, 20.0);
  const std::vector<Segment> none;
  CHECK_THROWS_WITH_AS(segment_band_power(eeg, band_by_name("beta"), none), "no fixations",
                       DataError);
  const std::vector<Segment> out{{900, 200}};
  CHECK_THROWS_AS(segment_band_power(eeg, band_by_name("beta"), out), RangeError);
}
