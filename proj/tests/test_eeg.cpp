#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "readtask/eeg_features.hpp"
#include "readtask/error.hpp"

using namespace readtask;

namespace {

// Fixations carry gamma vectors filled with 1, 2, 3, ... in reading order.
SentenceRecording with_fixation_vectors(const std::vector<std::pair<std::size_t, double>>& trace,
                                        std::size_t n_words) {
  auto s = fixtures::sentence("e", n_words, trace);
  for (std::size_t k = 0; k < s.fixations.size(); ++k)
    s.fixations[k].band_power["gamma"] = fixtures::constant_vector(static_cast<double>(k + 1));
  return s;
}

// Continuous EEG whose every channel is a tone at `freq` with amplitude `amp`.
ContinuousEeg tone_eeg(double seconds, double freq, double amp) {
  ContinuousEeg e;
  e.channels = kChannels;
  e.sample_rate_hz = 500.0;
  e.samples = static_cast<std::size_t>(seconds * e.sample_rate_hz);
  e.data.resize(e.channels * e.samples);
  for (std::size_t c = 0; c < e.channels; ++c)
    for (std::size_t t = 0; t < e.samples; ++t)
      e.data[c * e.samples + t] = static_cast<float>(
          amp * std::sin(2 * std::numbers::pi * freq * t / e.sample_rate_hz + 0.1 * c));
  return e;
}

}  // namespace

TEST_CASE("word vectors are duration-weighted means over the word's fixations") {
  const auto s = with_fixation_vectors({{0, 100}, {1, 50}, {0, 300}}, 3);
  const auto w = word_eeg_features(s, "gamma");
  REQUIRE(w.size() == 3);
  CHECK(w[0][0] == doctest::Approx((1 * 100 + 3 * 300) / 400.0));
  CHECK(w[1][104] == doctest::Approx(2.0));
  CHECK(w[2][0] == 0.0);
}

TEST_CASE("stored word vectors are used when fixations carry none") {
  auto s = fixtures::sentence("w", 2, {{1, 100}});
  s.words[0].band_power["alpha"] = fixtures::constant_vector(9.0);
  s.words[1].band_power["alpha"] = fixtures::constant_vector(4.0);
  const auto w = word_eeg_features(s, "alpha");
  CHECK(w[0][3] == 0.0);  // skipped
  CHECK(w[1][3] == 4.0);
  CHECK_THROWS_AS(word_eeg_features(s, "theta"), DataError);
  CHECK_THROWS_AS(word_eeg_features(s, "delta"), ParameterError);
}

TEST_CASE("ablation takes the first ceil(p n) fixations in reading order") {
  std::vector<std::pair<std::size_t, double>> trace;
  for (std::size_t k = 0; k < 30; ++k) trace.push_back({k % 5, 100.0 + k});
  const auto s = with_fixation_vectors(trace, 5);
  // p = 0.1 of 30 fixations is exactly 3.
  CHECK(ablated_word_eeg(s, "gamma", 0.1)[0] == doctest::Approx(2.0));
  CHECK(ablated_word_eeg(s, "gamma", 0.2)[0] == doctest::Approx(3.5));
  CHECK(ablated_word_eeg(s, "gamma", 0.5)[0] == doctest::Approx(8.0));
  const auto full = ablated_word_eeg(s, "gamma", 1.0);
  CHECK(full[0] == doctest::Approx(15.5));

  const auto tiny = with_fixation_vectors({{0, 100}, {1, 120}}, 2);
  CHECK(ablated_word_eeg(tiny, "gamma", 0.1)[0] == 1.0);
  CHECK_THROWS_AS(ablated_word_eeg(tiny, "gamma", 0.0), ParameterError);
  CHECK_THROWS_AS(ablated_word_eeg(fixtures::sentence("n", 2, {}), "gamma", 0.5), DataError);
}

TEST_CASE("sentence sets from stored vectors") {
  auto s = fixtures::sentence("s", 2, {{0, 100}});
  const char* bands[] = {"theta", "alpha", "beta", "gamma"};
  for (int b = 0; b < 4; ++b) {
    std::vector<double> v(kChannels);
    for (std::size_t c = 0; c < kChannels; ++c) v[c] = 10.0 * (b + 1) + static_cast<double>(c) / 104.0;
    s.sentence_band_power[bands[b]] = v;
  }
  CHECK(sentence_eeg_features(s, "beta_mean") == std::vector<double>{30.5});
  const auto means = sentence_eeg_features(s, "eeg_means");
  REQUIRE(means.size() == 4);
  for (int b = 0; b < 4; ++b) CHECK(means[b] == doctest::Approx(10.0 * (b + 1) + 0.5));
  const auto all = sentence_eeg_features(s, "electrode_features_all");
  REQUIRE(all.size() == 420);
  CHECK(all[0] == 10.0);
  CHECK(all[105] == 20.0);
  CHECK(all[419] == 41.0);
  const auto names = sentence_eeg_feature_names("electrode_features_all");
  CHECK(names.size() == 420);
  CHECK(names[105] == "alpha_e1");
  CHECK(sentence_eeg_feature_names("electrode_features_gamma").size() == 105);
  CHECK(is_sentence_eeg_set("gamma_mean"));
  CHECK_FALSE(is_sentence_eeg_set("broadband_mean"));
  CHECK_THROWS_AS(sentence_eeg_features(s, "delta_mean"), UsageError);
  EegOptions eight;
  eight.subbands = 8;
  CHECK(sentence_eeg_feature_names("eeg_means", eight).size() == 8);
  CHECK_THROWS_AS(sentence_eeg_features(s, "eeg_means", eight), DataError);
}

TEST_CASE("continuous EEG with a constant envelope yields that constant everywhere") {
  const double c = 2.5;
  auto s = fixtures::sentence("c", 3, {{0, 300}, {1, 250}, {2, 400}, {1, 200}});
  for (auto& f : s.fixations) f.onset_ms += 300.0;
  s.eeg = tone_eeg(3.0, 40.0, c);  // gamma tone
  s.total_reading_ms = 2500;
  const auto words = word_eeg_features(s, "gamma");
  for (const auto& w : words)
    for (double v : w) CHECK(v == doctest::Approx(c).epsilon(0.01));
  const auto sent = sentence_eeg_features(s, "electrode_features_gamma");
  for (double v : sent) CHECK(v == doctest::Approx(c).epsilon(0.01));
  CHECK(ablated_word_eeg(s, "gamma", 0.5)[17] == doctest::Approx(c).epsilon(0.01));

  EegOptions sq;
  sq.power = dsp::PowerMode::amplitude_squared;
  CHECK(sentence_eeg_features(s, "gamma_mean", sq)[0] == doctest::Approx(c * c).epsilon(0.02));

  EegOptions eight;
  eight.subbands = 8;
  CHECK(sentence_eeg_features(s, "eeg_means", eight).size() == 8);
}
