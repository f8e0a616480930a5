#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "readtask/corpus.hpp"
#include "readtask/evaluation.hpp"
#include "readtask/feature_matrix.hpp"
#include "readtask/svm.hpp"

namespace readtask {

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Needs at least two values per sample. Two samples with zero variance give
// p = 1 when the means agree and p = 0 otherwise.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct DescriptiveRow {
  std::string quantity;  // sentence_length, reading_time_s, omission_rate
  std::size_t n_nr = 0, n_tsr = 0;
  double nr_mean = 0.0, nr_std = 0.0;
  double tsr_mean = 0.0, tsr_std = 0.0;
  double p_value = 1.0;
};

// Pooled over every NR and TSR sentence of the corpus. Standard deviations
// use n - 1. Throws DataError when a task is absent.
std::vector<DescriptiveRow> descriptive_stats(const Corpus& corpus);

struct OutlierReport {
  std::string feature;
  std::vector<std::pair<std::string, double>> subject_means;
  double group_mean = 0.0;
  double group_std = 0.0;  // sample std over subject means
  std::vector<std::string> flagged;
};

// Flags subjects whose mean lies outside group mean ± 2 std. Nothing is
// flagged when the std is 0. Needs at least 3 subjects.
OutlierReport detect_outliers(std::vector<std::pair<std::string, double>> subject_means,
                              std::string feature = {});
// Subject means of a one-column sentence-level feature set, before scaling.
OutlierReport detect_outliers(const Corpus& corpus, const std::string& feature);

struct SpearmanResult {
  std::optional<double> rho;  // empty when either input is constant
  std::optional<double> p;    // t approximation, n - 2 degrees of freedom
  std::size_t n = 0;
  bool defined() const { return rho.has_value(); }
};

// Average ranks, 1-based; ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationRow {
  std::string protocol;
  std::string feature_set;
  std::string covariate;  // score_nr score_tsr speed_nr speed_tsr lextale
  SpearmanResult result;
  bool significant = false;  // p < 0.05
};

const std::vector<std::string>& covariate_names();

// Correlates every report's per-subject accuracies with the covariates.
// Throws DataError when a report subject has no metadata. Covariates missing
// for some subjects are correlated over the subjects that have them.
std::vector<CorrelationRow> correlation_table(const std::vector<EvalReport>& reports,
                                              const std::vector<SubjectMeta>& meta);

// a = cov(X) w over the training features, unit norm; one pattern per
// weight vector (one for binary models, one per class otherwise).
std::vector<std::vector<double>> forward_model_pattern(const LinearSvmModel& model,
                                                       const FeatureMatrix& train);

// Splits a pattern over electrode features into 105-channel vectors keyed
// by band, using the "<band>_e<channel>" feature names.
std::map<std::string, std::vector<double>> band_patterns(const std::vector<double>& pattern,
                                                         const std::vector<std::string>& feature_names);

// {"band": ..., "channel_values": [105 values]}
nlohmann::json pattern_json(const std::string& band, const std::vector<double>& channel_values);

nlohmann::json to_json(const std::vector<DescriptiveRow>& rows);
nlohmann::json to_json(const OutlierReport& r);
nlohmann::json to_json(const SpearmanResult& r);
nlohmann::json to_json(const std::vector<CorrelationRow>& rows);

}  // namespace readtask
