#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "readtask/eeg_features.hpp"
#include "readtask/error.hpp"
#include "readtask/gaze_features.hpp"
#include "readtask/synth.hpp"

using namespace readtask;

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("synthesis is a pure function of spec and seed") {
  SynthSpec spec;
  spec.subjects = 2;
  spec.sentences_per_class = 10;
  spec.eeg = EegMode::band_power;
  spec.eeg_level = EegLevel::fixation;
  const auto a = synthesize_corpus(spec, 5);
  const auto b = synthesize_corpus(spec, 5);
  const auto c = synthesize_corpus(spec, 6);
  REQUIRE(a.subjects.size() == 2);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t i = 0; i < a.subjects[s].sentences.size(); ++i)
      CHECK(sentence_to_json(a.subjects[s].sentences[i]) == sentence_to_json(b.subjects[s].sentences[i]));
  CHECK(sentence_to_json(a.subjects[0].sentences[0]) != sentence_to_json(c.subjects[0].sentences[0]));
}

TEST_CASE("default spec reproduces the class omission means") {
  SynthSpec spec;  // 4 subjects x 100 sentences per class
  const auto corpus = synthesize_corpus(spec, 7);
  double nr = 0, tsr = 0;
  int n_nr = 0, n_tsr = 0;
  for (const auto& subj : corpus.subjects) {
    for (const auto& s : subj.sentences) {
      const auto words = word_gaze_features(s);
      std::size_t fixated = 0;
      for (const auto& w : words) fixated += w.nFix > 0;
      const double rate = sentence_gaze_features(s).omission_rate;
      // Fixated words equal W (1 - realized rate) exactly.
      CHECK(fixated == static_cast<std::size_t>(std::lround(s.words.size() * (1.0 - rate))));
      CHECK(fixated >= 1);
      (s.task == TaskLabel::NR ? nr : tsr) += rate;
      ++(s.task == TaskLabel::NR ? n_nr : n_tsr);
    }
  }
  nr /= n_nr;
  tsr /= n_tsr;
  CHECK(std::abs(nr - 0.32) <= 3 * 0.09 / std::sqrt(n_nr));
  CHECK(std::abs(tsr - 0.47) <= 3 * 0.11 / std::sqrt(n_tsr));
}

TEST_CASE("blocks and sessions layouts") {
  SynthSpec spec;
  spec.subjects = 1;
  spec.sentences_per_class = 14;
  auto blocks = synthesize_corpus(spec, 1);
  std::set<int> nr_blocks, tsr_blocks;
  for (const auto& s : blocks.subjects[0].sentences)
    (s.task == TaskLabel::NR ? nr_blocks : tsr_blocks).insert(s.block_id);
  CHECK(nr_blocks == std::set<int>{1, 3, 5, 7, 9, 11, 13});
  CHECK(tsr_blocks == std::set<int>{2, 4, 6, 8, 10, 12, 14});

  spec.layout = SynthLayout::sessions;
  spec.sr_per_session = 3;
  const auto sessions = synthesize_corpus(spec, 1);
  int sr[3] = {0, 0, 0};
  for (const auto& s : sessions.subjects[0].sentences) {
    if (s.task == TaskLabel::SR) ++sr[s.session_id];
    if (s.task == TaskLabel::NR) CHECK(s.session_id == 1);
    if (s.task == TaskLabel::TSR) CHECK(s.session_id == 2);
  }
  CHECK(sr[1] == 3);
  CHECK(sr[2] == 3);
}

TEST_CASE("spec validation") {
  SynthSpec spec;
  spec.nr.omission_rate.sd = 0.0;
  CHECK_THROWS_AS(synthesize_corpus(spec, 1), ParameterError);
  spec = {};
  spec.subjects = 0;
  CHECK_THROWS_AS(synthesize_corpus(spec, 1), ParameterError);
  spec = {};
  spec.sr_per_session = 2;  // blocks layout has no SR
  CHECK_THROWS_AS(synthesize_corpus(spec, 1), ParameterError);
  const auto back = synth_spec_from_json(to_json(SynthSpec{}));
  CHECK(to_json(back) == to_json(SynthSpec{}));
}

TEST_CASE("Bayes oracle on one variable") {
  SynthSpec spec;
  CHECK(bayes_oracle(spec, {"omission_rate"}).accuracy ==
        doctest::Approx(oracles::kOmissionBayesAccuracy).epsilon(1e-7));
  spec.tsr.omission_rate = spec.nr.omission_rate;
  CHECK(bayes_oracle(spec, {"omission_rate"}).accuracy == doctest::Approx(0.5).epsilon(1e-9));
  spec.nr.omission_rate = {0.0, 1.0};
  spec.tsr.omission_rate = {10.0, 1.0};
  CHECK(std::abs(bayes_oracle(spec, {"omission_rate"}).accuracy - 1.0) < 1e-6);
  CHECK_THROWS_AS(bayes_oracle(spec, {"fre"}), UnsupportedError);
  CHECK_THROWS_AS(bayes_oracle(spec, {"electrodes_gamma"}), UnsupportedError);
}

TEST_CASE("Monte Carlo oracle matches the equal-covariance closed form") {
  SynthSpec spec;
  spec.eeg = EegMode::band_power;
  spec.eeg_bands = {"gamma"};
  spec.tsr_shift["gamma"] = 0.2;
  const auto est = bayes_oracle(spec, {"electrodes_gamma"}, 3);
  CHECK(est.method == "monte_carlo");
  // Mean difference 0.2 on 20 channels, noise sd 0.5.
  const double exact = phi(std::sqrt(20.0) * 0.2 / (2 * 0.5));
  CHECK(std::abs(est.accuracy - exact) < 4 * est.standard_error);
  CHECK(bayes_oracle(spec, {"electrodes_gamma"}, 3).accuracy == est.accuracy);

  const auto joint = bayes_oracle(spec, {"omission_rate", "electrodes_gamma"}, 4);
  CHECK(joint.accuracy > est.accuracy);
  CHECK(joint.accuracy > oracles::kOmissionBayesAccuracy);

  spec.block_drift_sd = 0.1;
  CHECK_THROWS_AS(bayes_oracle(spec, {"electrodes_gamma"}), UnsupportedError);
}

TEST_CASE("continuous synthesis feeds the filter path") {
  SynthSpec spec;
  spec.subjects = 1;
  spec.sentences_per_class = 2;
  spec.eeg = EegMode::continuous;
  spec.eeg_noise_sd = 0.01;
  spec.tsr_shift["gamma"] = 1.0;
  const auto corpus = synthesize_corpus(spec, 2);
  for (const auto& s : corpus.subjects[0].sentences) {
    REQUIRE(s.eeg.has_value());
    const auto v = sentence_eeg_features(s, "electrode_features_gamma");
    // Frontal channels carry the shift on TSR sentences only.
    const double expect_front = 1.8 + (s.task == TaskLabel::TSR ? 1.0 : 0.0);
    CHECK(v[0] == doctest::Approx(expect_front).epsilon(0.05));
    CHECK(v[60] == doctest::Approx(1.8).epsilon(0.05));
  }
}
