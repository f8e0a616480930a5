#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "readtask/corpus.hpp"
#include "readtask/eeg_features.hpp"
#include "readtask/feature_matrix.hpp"
#include "readtask/text_baselines.hpp"

namespace readtask {

struct FeatureConfig {
  EegOptions eeg;
  // SR sentences are only used by session classification.
  bool include_sr = false;
};

// Sentence-level sets (one vector per sentence):
//   gaze:   omission_rate fixation_number reading_speed sent_gaze
//           mean_sacc_dur max_sacc_dur mean_sacc_velocity max_sacc_velocity
//           mean_sacc_amplitude max_sacc_amplitude sent_saccade sent_gaze_sacc
//   EEG:    theta_mean alpha_mean beta_mean gamma_mean eeg_means
//           electrode_features_{theta,alpha,beta,gamma,all}
//   text:   fre
const std::vector<std::string>& sentence_set_names();

// Word-level sets (one sequence per sentence):
//   word_fixation (5) word_fixation_saccade (17)
//   eeg_{theta,alpha,beta,gamma,broadband} (105) embeddings (d)
const std::vector<std::string>& word_set_names();

bool is_sentence_set(std::string_view name);
bool is_word_set(std::string_view name);

// Throws UsageError listing the valid names when `name` is unknown.
FeatureMatrix assemble_feature_set(const Corpus& corpus, std::string_view name,
                                   const FeatureConfig& cfg = {});

SequenceSet assemble_sequence_set(const Corpus& corpus, std::string_view name,
                                  const FeatureConfig& cfg = {},
                                  const EmbeddingTable* embeddings = nullptr);

// Sentence-level matrix of ablated_word_eeg vectors (fixation order).
FeatureMatrix ablated_feature_set(const Corpus& corpus, std::string_view band, double fraction,
                                  const FeatureConfig& cfg = {});

// 1-column matrix of Flesch reading-ease scores.
FeatureMatrix fre_feature_matrix(const Corpus& corpus, const FeatureConfig& cfg = {});

}  // namespace readtask
