#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "readtask/error.hpp"
#include "readtask/evaluation.hpp"
#include "readtask/feature_sets.hpp"
#include "readtask/synth.hpp"

using namespace readtask;

namespace {

FeatureMatrix omission_matrix(SynthSpec spec, std::uint64_t seed) {
  return assemble_feature_set(synthesize_corpus(spec, seed), "omission_rate");
}

std::vector<std::size_t> indices_of(const FeatureMatrix& m, const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < m.size(); ++i)
    pos[m.groups[i].subject_id + "/" + m.groups[i].sentence_id] = i;
  std::vector<std::size_t> out;
  for (const auto& id : ids) out.push_back(pos.at(id));
  return out;
}

EvalOptions quick(int runs = 10) {
  EvalOptions o;
  o.runs = runs;
  o.jobs = 2;
  return o;
}

}  // namespace

TEST_CASE("median and MAD") {
  const std::vector<double> a{1, 2, 3}, b{5}, c{0.6, 0.6, 0.9, 0.9};
  CHECK(median_mad(a).median == 2.0);
  CHECK(median_mad(a).mad == 1.0);
  CHECK(median_mad(b).median == 5.0);
  CHECK(median_mad(b).mad == 0.0);
  CHECK(median_mad(c).median == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(median_mad(c).mad == doctest::Approx(0.15).epsilon(1e-12));
  CHECK_THROWS_AS(median_mad(std::vector<double>{}), DataError);
}

TEST_CASE("within-subject sentence splits are disjoint, stratified and scaled on train only") {
  SynthSpec spec;
  spec.subjects = 3;
  spec.sentences_per_class = 30;
  const auto m = omission_matrix(spec, 11);
  auto opts = quick(6);
  opts.audit = true;
  const auto r = within_subject_sentence(m, opts);
  REQUIRE(r.subjects.size() == 3);
  CHECK(r.models_trained == 18);
  REQUIRE(r.splits.size() == 18);

  std::map<std::string, std::vector<long>> test_counts;
  for (const auto& s : r.splits) {
    std::set<std::string> train(s.train_ids.begin(), s.train_ids.end());
    for (const auto& id : s.test_ids) CHECK(train.count(id) == 0);
    CHECK(s.train_ids.size() + s.test_ids.size() == 60);
    // 10% of 30 per class.
    CHECK(s.test_ids.size() == 6);
    const auto scaler = fit_scaler(m.subset(indices_of(m, s.train_ids)));
    CHECK(scaler.min == s.scaler.min);
    CHECK(scaler.max == s.scaler.max);
    auto& counts = test_counts[s.subject_id];
    counts.resize(2);
    for (auto i : indices_of(m, s.test_ids)) ++counts[static_cast<std::size_t>(m.labels[i])];
  }
  for (const auto& sr : r.subjects) {
    CHECK(sr.confusion.row_sums() == test_counts[sr.subject_id]);
    double mean = 0;
    for (double a : sr.run_accuracies) mean += a;
    CHECK(sr.accuracy == doctest::Approx(mean / 6).epsilon(1e-12));
  }
  const auto mm = median_mad(r.accuracies());
  CHECK(r.median == mm.median);
  CHECK(r.mad == mm.mad);
  CHECK(r.confusion.total() == 18 * 6);
}

TEST_CASE("evaluation is independent of thread count and repeatable") {
  SynthSpec spec;
  spec.subjects = 3;
  spec.sentences_per_class = 20;
  const auto m = omission_matrix(spec, 4);
  auto one = quick(5);
  one.jobs = 1;
  auto many = quick(5);
  many.jobs = 4;
  CHECK(to_json(within_subject_sentence(m, one)).dump() == to_json(within_subject_sentence(m, many)).dump());
  many.seed = 2;
  CHECK(to_json(within_subject_sentence(m, one)).dump() != to_json(within_subject_sentence(m, many)).dump());
}

TEST_CASE("small or single-class subjects are skipped with a warning") {
  SynthSpec spec;
  spec.subjects = 2;
  spec.sentences_per_class = 20;
  auto m = omission_matrix(spec, 3);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.groups[i].subject_id == "S01" || keep.size() < 48) keep.push_back(i);
  // S02 keeps 8 samples.
  m = m.subset(keep);
  const auto r = within_subject_sentence(m, quick(3));
  CHECK(r.subjects.size() == 1);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("S02") != std::string::npos);
}

TEST_CASE("zero separation stays at chance") {
  SynthSpec spec;
  spec.subjects = 6;
  spec.tsr = spec.nr;
  const auto r = within_subject_sentence(omission_matrix(spec, 21), quick(20));
  CHECK(r.median >= 0.45);
  CHECK(r.median <= 0.55);
}

TEST_CASE("leave one subject out trains one model per subject") {
  SynthSpec spec;
  spec.subjects = 5;
  spec.sentences_per_class = 20;
  const auto m = omission_matrix(spec, 8);
  auto opts = quick();
  opts.audit = true;
  const auto r = cross_subject(m, opts);
  CHECK(r.models_trained == 5);
  CHECK(r.subjects.size() == 5);
  for (const auto& s : r.splits) {
    CHECK(s.test_ids.size() == 40);
    for (const auto& id : s.test_ids) CHECK(id.rfind(s.subject_id + "/", 0) == 0);
    for (const auto& id : s.train_ids) CHECK(id.rfind(s.subject_id + "/", 0) != 0);
  }
  CHECK(r.median > 0.65);

  spec.subjects = 2;
  CHECK_THROWS_AS(cross_subject(omission_matrix(spec, 8), opts), DataError);
}

TEST_CASE("word-level folds partition every subject") {
  SynthSpec spec;
  spec.subjects = 2;
  spec.sentences_per_class = 8;
  spec.nr.sentence_length = {6, 1};
  spec.tsr.sentence_length = {6, 1};
  const auto s = assemble_sequence_set(synthesize_corpus(spec, 2), "word_fixation");
  EvalOptions opts;
  opts.jobs = 2;
  opts.seeds = 2;
  opts.lstm.hidden = 3;
  opts.lstm.dense = 3;
  opts.lstm.max_epochs = 2;
  opts.audit = true;
  const auto r = within_subject_word(s, opts);
  CHECK(r.models_trained == 2 * 2 * 3);
  std::map<std::pair<std::string, int>, std::vector<std::string>> tested;
  for (const auto& split : r.splits) {
    std::set<std::string> train(split.train_ids.begin(), split.train_ids.end());
    for (const auto& id : split.test_ids) CHECK(train.count(id) == 0);
    CHECK(train.size() + split.test_ids.size() == 16);
    auto& acc = tested[{split.subject_id, split.run / 3}];
    acc.insert(acc.end(), split.test_ids.begin(), split.test_ids.end());
  }
  REQUIRE(tested.size() == 4);
  for (auto& [key, ids] : tested) {
    std::sort(ids.begin(), ids.end());
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    CHECK(ids.size() == 16);
  }
}

TEST_CASE("block scheme gives a 14-way confusion matrix") {
  SynthSpec spec;
  spec.subjects = 2;
  spec.sentences_per_class = 70;
  const auto m = omission_matrix(spec, 5);
  auto opts = quick(3);
  opts.audit = true;
  const auto r = relabel_and_classify(m, LabelScheme::block, opts);
  CHECK(r.scheme == "block");
  REQUIRE(r.confusion.classes.size() == 14);
  std::vector<long> expected(14, 0);
  for (const auto& s : r.splits)
    for (auto i : indices_of(m, s.test_ids)) ++expected[static_cast<std::size_t>(m.groups[i].block_id - 1)];
  CHECK(r.confusion.row_sums() == expected);
  CHECK(r.label_names.at(3) == "block_3");
  std::ostringstream csv;
  write_confusion_csv(r.confusion, r.label_names, csv);
  CHECK(csv.str().rfind("true\\pred,block_1,block_2,", 0) == 0);
}

TEST_CASE("subject scheme pools subjects and reports chance") {
  SynthSpec spec;
  spec.subjects = 4;
  spec.sentences_per_class = 15;
  const auto r = relabel_and_classify(omission_matrix(spec, 5), LabelScheme::subject, quick(3));
  REQUIRE(r.chance_level.has_value());
  CHECK(*r.chance_level == 0.25);
  CHECK(r.subjects.size() == 1);
  CHECK(r.confusion.classes.size() == 4);
  CHECK(to_json(r)["chance_level"] == 0.25);
}

TEST_CASE("balanced session scheme with identical sessions is at chance") {
  SynthSpec spec;
  spec.subjects = 4;
  spec.sentences_per_class = 40;
  spec.tsr = spec.nr;
  spec.layout = SynthLayout::sessions;
  spec.sr_per_session = 25;
  FeatureConfig cfg;
  cfg.include_sr = true;
  const auto m = assemble_feature_set(synthesize_corpus(spec, 9), "omission_rate", cfg);
  auto opts = quick(20);
  opts.balanced = true;
  const auto r = relabel_and_classify(m, LabelScheme::session, opts);
  CHECK(r.subjects[0].samples == 130);
  CHECK(r.median == doctest::Approx(0.5).epsilon(0.12));
  CHECK_THROWS_AS(relabel_and_classify(omission_matrix(SynthSpec{}, 1), LabelScheme::session, opts),
                  DataError);
  CHECK_THROWS_AS(parse_scheme("blocks"), UsageError);
}

TEST_CASE("block ablation") {
  SynthSpec spec;
  spec.subjects = 4;
  spec.sentences_per_class = 140;
  const auto m = omission_matrix(spec, 13);
  const auto r = block_ablation(m, 6, 10, quick());
  REQUIRE(r.rows.size() == 6);
  CHECK(r.rows[5].mean_train_samples > r.rows[0].mean_train_samples);
  CHECK(r.rows[0].mean_train_samples == 40.0);
  double lo = 1, hi = 0;
  for (const auto& row : r.rows) {
    CHECK(row.accuracies.size() == 40);
    lo = std::min(lo, row.mean);
    hi = std::max(hi, row.mean);
  }
  // No block-specific signal: the curve is flat.
  CHECK(hi - lo <= 0.05);
  CHECK_THROWS_AS(block_ablation(m, 7, 1, quick()), DataError);
}

TEST_CASE("report serialization") {
  SynthSpec spec;
  spec.subjects = 2;
  spec.sentences_per_class = 10;
  const auto r = within_subject_sentence(omission_matrix(spec, 1), quick(2));
  const auto j = to_json(r);
  CHECK(j["schema_version"] == 1);
  CHECK(j["protocol"] == "within-sentence");
  CHECK(j["subjects"].size() == 2);
  CHECK(j["label_names"]["0"] == "NR");
  CHECK(j["confusion"]["labels"] == nlohmann::json{"NR", "TSR"});
  CHECK(j.contains("median"));
  CHECK(j["chance_level"].is_null());
  std::ostringstream csv;
  write_summary_csv(r, csv);
  CHECK(csv.str().rfind("subject_id,samples,accuracy\nS01,20,", 0) == 0);
  CHECK(csv.str().find("\nmedian,,") != std::string::npos);
}
