#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "readtask/error.hpp"
#include "readtask/gaze_features.hpp"

using namespace readtask;

TEST_CASE("single fixation identity") {
  const auto s = fixtures::sentence("s", 2, {{0, 200}, {1, 150}});
  const auto f = word_gaze_features(s);
  CHECK(f[0].nFix == 1);
  CHECK(f[0].FFD == 200);
  CHECK(f[0].GD == 200);
  CHECK(f[0].TRT == 200);
  CHECK(f[0].GPT == 200);
}

TEST_CASE("regression trace") {
  // w1 150, w2 100, w1 80, w3 120
  const auto s = fixtures::sentence("s", 3, {{0, 150}, {1, 100}, {0, 80}, {2, 120}});
  const auto f = word_gaze_features(s);
  CHECK(f[0].nFix == 2);
  CHECK(f[0].FFD == 150);
  CHECK(f[0].GD == 150);
  CHECK(f[0].TRT == 230);
  CHECK(f[0].GPT == 150);
  CHECK(f[1].GPT == 180);
  CHECK(f[1].GD == 100);
  CHECK(f[2].GPT == 120);
}

TEST_CASE("refixations count toward gaze duration; the final word's go-past runs to the end") {
  const auto s = fixtures::sentence("s", 2, {{0, 100}, {0, 50}, {1, 90}, {0, 70}, {1, 40}});
  const auto f = word_gaze_features(s);
  CHECK(f[0].GD == 150);
  CHECK(f[0].TRT == 220);
  CHECK(f[1].GD == 90);
  CHECK(f[1].TRT == 130);
  CHECK(f[1].GPT == 200);
}

TEST_CASE("skipped words are all zero") {
  auto s = fixtures::sentence("s", 3, {{0, 100}, {2, 100}});
  s.saccades.push_back({30, 2.0, 200, 0, 2});
  const auto f = word_gaze_features(s)[1].to_vector(true);
  REQUIRE(f.size() == 17);
  CHECK(std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("saccade statistics per word") {
  auto s = fixtures::sentence("s", 3, {{0, 100}, {1, 100}, {2, 100}});
  s.saccades.push_back({20, 1.0, 100, 0, 1});
  s.saccades.push_back({40, 3.0, 300, 2, 1});
  s.saccades.push_back({30, 2.0, 250, 1, 2});
  const auto f = word_gaze_features(s);
  CHECK(f[1].in_duration_mean == 30);
  CHECK(f[1].in_duration_max == 40);
  CHECK(f[1].in_velocity_mean == 200);
  CHECK(f[1].in_amplitude_max == 3.0);
  CHECK(f[1].out_velocity_mean == 250);
  CHECK(f[0].out_duration_max == 20);
  CHECK(f[0].in_duration_mean == 0);
  CHECK(word_gaze_feature_names(false).size() == 5);
  CHECK(word_gaze_feature_names(true).size() == 17);
  CHECK(f[1].to_vector(false).size() == 5);
}

TEST_CASE("sentence features by definition") {
  SUBCASE("omission rate") {
    const auto s = fixtures::sentence("s", 10, {{0, 100}, {2, 100}, {4, 100}, {5, 100}, {7, 100}, {9, 100}});
    CHECK(sentence_gaze_features(s).omission_rate == doctest::Approx(0.4));
  }
  SUBCASE("fixation number and reading speed") {
    std::vector<std::pair<std::size_t, double>> trace;
    for (std::size_t k = 0; k < 12; ++k) trace.push_back({k % 10, 200.0});
    const auto g = sentence_gaze_features(fixtures::sentence("s", 10, trace));
    CHECK(g.fixation_number == doctest::Approx(1.2));
    CHECK(g.reading_speed == doctest::Approx(0.24));
  }
  SUBCASE("saccade duration mean divides by words") {
    auto s = fixtures::sentence("s", 10, {{0, 100}});
    s.saccades = {{20, 1, 100, {}, {}}, {30, 2, 200, {}, {}}, {40, 3, 600, {}, {}}};
    const auto g = sentence_gaze_features(s);
    CHECK(g.mean_sacc_dur == doctest::Approx(9.0));
    CHECK(g.max_sacc_dur == 40);
    CHECK(g.mean_sacc_velocity == doctest::Approx(300.0));
    CHECK(g.max_sacc_velocity == 600);
    CHECK(g.mean_sacc_amplitude == doctest::Approx(2.0));
    CHECK(g.max_sacc_amplitude == 3);
  }
  SUBCASE("no saccades") {
    const auto g = sentence_gaze_features(fixtures::sentence("s", 3, {{0, 100}}));
    CHECK(g.mean_sacc_dur == 0);
    CHECK(g.max_sacc_velocity == 0);
  }
  SUBCASE("empty sentence") {
    SentenceRecording s;
    CHECK_THROWS_AS(sentence_gaze_features(s), DataError);
  }
}

TEST_CASE("gaze properties on random traces") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n_words = 1 + rng() % 12;
    std::vector<std::pair<std::size_t, double>> trace;
    const std::size_t n_fix = rng() % 20;
    for (std::size_t k = 0; k < n_fix; ++k)
      trace.push_back({rng() % n_words, 50.0 + static_cast<double>(rng() % 400)});
    auto s = fixtures::sentence("r", n_words, trace);
    for (int k = 0; k < 6; ++k)
      s.saccades.push_back({10.0 + rng() % 50, (rng() % 100) / 10.0, 50.0 + rng() % 500,
                            rng() % n_words, rng() % n_words});
    const auto words = word_gaze_features(s);
    const auto sent = sentence_gaze_features(s);
    double trt = 0.0;
    std::size_t skipped = 0;
    for (const auto& w : words) {
      CHECK(w.FFD <= w.GD);
      CHECK(w.GD <= w.TRT);
      CHECK(w.GD <= w.GPT);
      trt += w.TRT;
      if (w.nFix == 0) ++skipped;
    }
    CHECK(trt == doctest::Approx(sent.reading_speed * n_words * 1000.0));
    CHECK(sent.omission_rate == doctest::Approx(static_cast<double>(skipped) / n_words));

    auto shuffled = s;
    std::shuffle(shuffled.saccades.begin(), shuffled.saccades.end(), rng);
    const auto g2 = sentence_gaze_features(shuffled);
    CHECK(g2.mean_sacc_dur == doctest::Approx(sent.mean_sacc_dur));
    CHECK(g2.max_sacc_amplitude == sent.max_sacc_amplitude);
    CHECK(g2.mean_sacc_velocity == doctest::Approx(sent.mean_sacc_velocity));
  }
}
