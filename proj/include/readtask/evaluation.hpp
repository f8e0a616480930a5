#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "readtask/bilstm.hpp"
#include "readtask/feature_matrix.hpp"
#include "readtask/scaler.hpp"
#include "readtask/svm.hpp"

namespace readtask {

enum class LabelScheme { task, session, block, subject };

std::string_view scheme_name(LabelScheme s);
// Throws UsageError listing the valid names.
LabelScheme parse_scheme(std::string_view s);

// Replaces task labels by the scheme's labels, taken from the sample groups.
// Subject ids are numbered in sorted order. Throws DataError when the scheme
// has fewer than two distinct values.
FeatureMatrix relabel(const FeatureMatrix& m, LabelScheme scheme);

struct MedianMad {
  double median = 0.0;
  double mad = 0.0;
};

// Even lengths average the two middle values. MAD is unscaled.
MedianMad median_mad(std::span<const double> values);

struct ConfusionMatrix {
  std::vector<int> classes;                 // ascending label ids
  std::vector<std::vector<long>> counts;    // [true][predicted]

  explicit ConfusionMatrix(std::vector<int> classes = {});
  void add(int truth, int predicted);
  void merge(const ConfusionMatrix& other);
  long total() const;
  std::vector<long> row_sums() const;
};

// One train/test split, recorded when EvalOptions::audit is set.
struct SplitRecord {
  std::string subject_id;  // held-out subject for cross-subject runs
  int run = 0;             // run, or seed * folds + fold
  std::vector<std::string> train_ids;  // "<subject>/<sentence_id>"
  std::vector<std::string> test_ids;
  ScalerParams scaler;
  double accuracy = 0.0;
};

struct SubjectResult {
  std::string subject_id;
  double accuracy = 0.0;
  std::vector<double> run_accuracies;
  std::size_t samples = 0;
  ConfusionMatrix confusion;
};

struct EvalReport {
  std::string protocol;
  std::string feature_set;
  std::string scheme = "task";
  std::string model;
  std::vector<SubjectResult> subjects;
  double median = 0.0;
  double mad = 0.0;
  std::optional<double> chance_level;
  std::size_t models_trained = 0;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  std::map<int, std::string> label_names;
  ConfusionMatrix confusion;  // summed over subjects and runs
  std::vector<SplitRecord> splits;
  nlohmann::json config = nlohmann::json::object();

  std::vector<double> accuracies() const;
};

struct EvalOptions {
  std::uint64_t seed = 1;
  unsigned jobs = 0;  // 0 = hardware concurrency
  int runs = 50;
  double test_fraction = 0.1;
  int folds = 3;
  int seeds = 5;
  std::size_t min_samples = 10;
  SvmOptions svm;
  BiLstmHyper lstm;
  bool balanced = false;
  bool audit = false;
};

// Per subject: `runs` stratified shuffled splits, scaler and SVM fit on the
// training part. Subjects with fewer than min_samples samples or a single
// class are skipped with a warning.
EvalReport within_subject_sentence(const FeatureMatrix& m, const EvalOptions& opts = {});

// Per subject: `seeds` repetitions of stratified `folds`-fold cross-validation
// with a BiLSTM per fold.
EvalReport within_subject_word(const SequenceSet& s, const EvalOptions& opts = {});

// Leave one subject out; exactly one model per subject. Needs ≥ 3 subjects.
EvalReport cross_subject(const FeatureMatrix& m, const EvalOptions& opts = {});
EvalReport cross_subject(const SequenceSet& s, const EvalOptions& opts = {});

// Relabels by `scheme` and classifies with the sentence-level SVM. Session and
// block schemes are evaluated within subject; the subject scheme pools all
// subjects and reports the chance level 1 / n_subjects. `balanced`
// subsamples every class to the smallest class count first.
EvalReport relabel_and_classify(const FeatureMatrix& m, LabelScheme scheme,
                                const EvalOptions& opts = {});

struct BlockAblationRow {
  int k = 0;  // training blocks per task
  double mean = 0.0;
  double std = 0.0;
  double mean_train_samples = 0.0;
  std::vector<double> accuracies;  // one per (subject, repeat)
};

struct BlockAblationReport {
  std::string feature_set;
  std::vector<BlockAblationRow> rows;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
};

// For each k in [1, k_max]: train on k random NR and k random TSR blocks of a
// subject, test on all remaining blocks. Needs k_max + 1 blocks per task.
BlockAblationReport block_ablation(const FeatureMatrix& m, int k_max, int repeats,
                                   const EvalOptions& opts = {});

nlohmann::json to_json(const ConfusionMatrix& c, const std::map<int, std::string>& names);
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const BlockAblationReport& r);

// subject_id,samples,accuracy rows followed by median and mad rows.
void write_summary_csv(const EvalReport& r, std::ostream& out);
// Header "true\pred,<names...>", one row per true class.
void write_confusion_csv(const ConfusionMatrix& c, const std::map<int, std::string>& names,
                         std::ostream& out);

}  // namespace readtask
