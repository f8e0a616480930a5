#include <doctest.h>

#include <cmath>
#include <random>

#include "readtask/analysis.hpp"
#include "readtask/error.hpp"
#include "readtask/scaler.hpp"
#include "readtask/synth.hpp"

using namespace readtask;

namespace {

FeatureMatrix matrix(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  FeatureMatrix m;
  for (std::size_t j = 0; j < rows[0].size(); ++j) m.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.push_back(rows[i], labels[i], {"S01", 1, 1, "s" + std::to_string(i), TaskLabel::NR});
  m.label_names = task_label_names();
  return m;
}

LinearSvmModel fixed_model(std::vector<double> w) {
  LinearSvmModel model;
  model.classes = {0, 1};
  model.weights = {std::move(w)};
  model.bias = {0.0};
  return model;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("Welch test") {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{1, 2, 3, 4, 5};
  CHECK(welch_t_test(a, b).p == doctest::Approx(1.0));
  // Hand computation: means 3 and 5, variances 2.5 and 10, n = 5 each.
  const std::vector<double> c{1, 3, 5, 7, 9};
  const auto w = welch_t_test(a, c);
  CHECK(w.t == doctest::Approx(-2.0 / std::sqrt(0.5 + 2.0)));
  CHECK(w.df == doctest::Approx(6.25 / (0.25 / 4 + 4.0 / 4)));
  CHECK_THROWS_AS(welch_t_test(std::vector<double>{1}, a), DataError);
}

TEST_CASE("descriptive statistics") {
  SynthSpec spec;
  auto corpus = synthesize_corpus(spec, 3);
  const auto rows = descriptive_stats(corpus);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].quantity == "omission_rate");
  CHECK(rows[2].nr_mean == doctest::Approx(0.32).epsilon(0.05));
  CHECK(rows[2].tsr_mean == doctest::Approx(0.47).epsilon(0.05));
  CHECK(rows[2].p_value < 1e-6);
  CHECK(rows[1].nr_mean > rows[1].tsr_mean);

  // Identical task subsets.
  Corpus twin = corpus;
  for (auto& subj : twin.subjects) {
    std::vector<SentenceRecording> both;
    for (const auto& s : subj.sentences)
      if (s.task == TaskLabel::NR) {
        both.push_back(s);
        both.push_back(s);
        both.back().task = TaskLabel::TSR;
      }
    subj.sentences = both;
  }
  for (const auto& r : descriptive_stats(twin)) {
    CHECK(r.nr_mean == r.tsr_mean);
    CHECK(r.p_value == doctest::Approx(1.0));
  }

  // Ten standard deviations apart.
  spec.subjects = 1;
  spec.sentences_per_class = 30;
  spec.tsr.omission_rate = {0.32 + 10 * 0.009, 0.009};
  spec.nr.omission_rate = {0.32, 0.009};
  CHECK(descriptive_stats(synthesize_corpus(spec, 1))[2].p_value < 1e-6);

  for (auto& subj : corpus.subjects)
    std::erase_if(subj.sentences, [](const auto& s) { return s.task == TaskLabel::TSR; });
  CHECK_THROWS_AS(descriptive_stats(corpus), DataError);
}

TEST_CASE("outlier detection") {
  std::vector<std::pair<std::string, double>> same;
  for (int i = 0; i < 5; ++i) same.push_back({"S" + std::to_string(i), 3.0});
  CHECK(detect_outliers(same).flagged.empty());

  std::vector<std::pair<std::string, double>> planted;
  const std::vector<double> base{0.3, -1.2, 0.8, 0.1, -0.4, 1.5, -0.9, 0.6, -0.2, -0.6};
  double mean = 0, ss = 0;
  for (double v : base) mean += v / 10;
  for (double v : base) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 9);
  for (std::size_t i = 0; i < base.size(); ++i) planted.push_back({"S" + std::to_string(i), base[i]});
  planted.push_back({"X", mean + 5 * sd});
  const auto r = detect_outliers(planted, "f");
  CHECK(r.flagged == std::vector<std::string>{"X"});

  for (const auto [a, b] : {std::pair{3.0, -7.0}, std::pair{1e-3, 100.0}, std::pair{-2.0, 1.0}}) {
    auto scaled = planted;
    for (auto& [id, v] : scaled) v = a * v + b;
    CHECK(detect_outliers(scaled).flagged == r.flagged);
  }
  planted.resize(2);
  CHECK_THROWS_AS(detect_outliers(planted), DataError);
}

TEST_CASE("outlier construction from recorded max saccade duration statistics") {
  // Eleven subjects whose means reproduce group mean 57.74 and std 18.74,
  // with one subject placed far above the rest.
  const std::vector<std::string> ids{"ZKW", "ZDN", "ZPH", "ZMG", "ZAB", "ZJN",
                                     "ZKH", "ZJS", "ZKB", "ZDM", "ZGW"};
  const double target_mean = 57.74, target_sd = 18.74, h = 5.0;
  const double spread = 330.0 / 81.0;  // sum of squared offsets of 10 evenly spaced points in [-1, 1]
  const double d = std::sqrt((10 * target_sd * target_sd - h * h * spread) / 110.0);
  std::vector<std::pair<std::string, double>> means;
  for (int k = 0; k < 10; ++k)
    means.push_back({ids[static_cast<std::size_t>(k)], target_mean - d + h * (2.0 * k - 9.0) / 9.0});
  means.push_back({"ZGW", target_mean + 10 * d});
  const auto r = detect_outliers(means, "max_sacc_dur");
  CHECK(r.group_mean == doctest::Approx(target_mean));
  CHECK(r.group_std == doctest::Approx(target_sd));
  CHECK(r.flagged == std::vector<std::string>{"ZGW"});
}

TEST_CASE("outliers from a corpus feature") {
  SynthSpec spec;
  spec.subjects = 3;
  spec.sentences_per_class = 10;
  const auto corpus = synthesize_corpus(spec, 2);
  const auto r = detect_outliers(corpus, "max_sacc_dur");
  CHECK(r.subject_means.size() == 3);
  CHECK(r.subject_means[0].first == "S01");
  CHECK_THROWS_AS(detect_outliers(corpus, "sent_gaze"), UsageError);
}

TEST_CASE("Spearman correlation") {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{1, 3, 2, 5, 4};
  CHECK(*spearman(x, y).rho == doctest::Approx(0.8).epsilon(1e-15));
  const std::vector<double> up{2, 4, 8, 16, 32}, down{5, 4, 3, 2, 1};
  CHECK(*spearman(x, up).rho == 1.0);
  CHECK(*spearman(x, down).rho == -1.0);
  CHECK(*spearman(x, up).p == 0.0);
  const std::vector<double> flat{2, 2, 2, 2, 2};
  CHECK_FALSE(spearman(x, flat).defined());
  CHECK(to_json(spearman(x, flat))["rho"] == "undefined");

  const std::vector<double> ties{1, 2, 2, 3};
  CHECK(average_ranks(ties) == std::vector<double>{1, 2.5, 2.5, 4});
  const std::vector<double> a{0.3, -1.0, 7.5, 2.0, 2.0, 0.1}, b{4.0, 4.0, -2.0, 0.5, 9.0, 1.0};
  const auto ra = average_ranks(a), rb = average_ranks(b);
  CHECK(*spearman(a, b).rho == *spearman(ra, rb).rho);

  const std::vector<double> idx{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  const std::vector<double> perm{16, 15, 10, 7, 6, 12, 8, 11, 13, 14, 1, 4, 3, 5, 2, 9};
  const auto r = spearman(idx, perm);
  CHECK(*r.rho == doctest::Approx(-0.61).epsilon(0.002));
  CHECK(*r.p < 0.05);
  CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DataError);
}

TEST_CASE("Spearman p-values are calibrated under independence") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  int hits = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> x(16), y(16);
    for (auto& v : x) v = z(rng);
    for (auto& v : y) v = z(rng);
    hits += *spearman(x, y).p < 0.05;
  }
  CHECK(hits >= 30);
  CHECK(hits <= 70);
}

TEST_CASE("correlation table") {
  EvalReport rep;
  rep.protocol = "within-sentence";
  rep.feature_set = "sent_gaze";
  std::vector<SubjectMeta> meta;
  for (int i = 0; i < 6; ++i) {
    SubjectResult s;
    s.subject_id = "S" + std::to_string(i);
    s.accuracy = 0.5 + 0.01 * i * i;
    rep.subjects.push_back(s);
    SubjectMeta m;
    m.subject_id = s.subject_id;
    m.speed_tsr = 10.0 - i;
    m.lextale = 80.0 + (i % 2);
    meta.push_back(m);
  }
  const auto rows = correlation_table({rep}, meta);
  REQUIRE(rows.size() == 5);
  CHECK(rows[3].covariate == "speed_tsr");
  CHECK(*rows[3].result.rho == -1.0);
  CHECK(rows[3].significant);
  CHECK_FALSE(rows[0].result.defined());
  CHECK(rows[0].result.n == 0);
  CHECK(rows[4].result.n == 6);
  meta.pop_back();
  CHECK_THROWS_AS(correlation_table({rep}, meta), DataError);
}

TEST_CASE("forward model patterns") {
  // Orthogonal, equal-variance columns: the covariance is a multiple of I.
  const auto white = matrix({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}, {1, 1, 0, 0});
  const std::vector<double> w{2.0, -1.0, 0.5};
  const auto p = forward_model_pattern(fixed_model(w), white)[0];
  const double norm = std::sqrt(dot(w, w));
  for (std::size_t j = 0; j < 3; ++j) CHECK(p[j] == doctest::Approx(w[j] / norm).epsilon(1e-12));

  auto scaled = w;
  for (auto& v : scaled) v *= 7.5;
  const auto ps = forward_model_pattern(fixed_model(scaled), white)[0];
  for (std::size_t j = 0; j < 3; ++j) CHECK(ps[j] == doctest::Approx(p[j]).epsilon(1e-14));

  // Two copies of one informative channel; the model only weights the first.
  const auto twins = matrix({{1, 1, 0.2}, {2, 2, -0.1}, {3, 3, 0.3}, {4, 4, -0.4}}, {0, 0, 1, 1});
  const auto q = forward_model_pattern(fixed_model({1.0, 0.0, 0.0}), twins)[0];
  CHECK(q[1] != 0.0);
  CHECK(q[1] == doctest::Approx(q[0]));

  // Flipping labels flips the trained pattern.
  auto trained_on = white;
  const auto m1 = train_svm(trained_on);
  for (auto& l : trained_on.labels) l = 1 - l;
  const auto m2 = train_svm(trained_on);
  const auto p1 = forward_model_pattern(m1, white)[0], p2 = forward_model_pattern(m2, white)[0];
  for (std::size_t j = 0; j < 3; ++j) CHECK(p1[j] == doctest::Approx(-p2[j]).epsilon(1e-6));
  // Trained on whitened data, the pattern is the normalized weight vector.
  const auto& w1 = m1.weights[0];
  for (std::size_t j = 0; j < 3; ++j) CHECK(p1[j] == doctest::Approx(w1[j] / std::sqrt(dot(w1, w1))).epsilon(1e-9));

  CHECK_THROWS_AS(forward_model_pattern(fixed_model({1.0, 2.0}), white), LengthError);
}

TEST_CASE("band pattern export") {
  std::vector<std::string> names;
  std::vector<double> pattern;
  for (const std::string band : {"alpha", "gamma"})
    for (int c = 1; c <= 105; ++c) {
      names.push_back(band + "_e" + std::to_string(c));
      pattern.push_back(band == "gamma" && c == 17 ? 1.0 : 0.0);
    }
  const auto bands = band_patterns(pattern, names);
  REQUIRE(bands.size() == 2);
  CHECK(bands.at("gamma")[16] == 1.0);
  const auto j = pattern_json("gamma", bands.at("gamma"));
  CHECK(j["band"] == "gamma");
  CHECK(j["channel_values"].size() == 105);
  CHECK_THROWS_AS(pattern_json("gamma", std::vector<double>(104)), LengthError);
  CHECK_THROWS_AS(band_patterns({1.0}, {"omission_rate"}), DataError);
}
