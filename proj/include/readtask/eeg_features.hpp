#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "readtask/corpus.hpp"
#include "readtask/dsp.hpp"

namespace readtask {

struct EegOptions {
  dsp::PowerMode power = dsp::PowerMode::amplitude;
  // 4: theta/alpha/beta/gamma. 8: each band split into two halves (needs
  // continuous EEG, since stored band power only carries the four bands).
  int subbands = 4;
};

// Per-fixation 105-vectors for `band`, aligned with sentence.fixations.
// Sources, in order: stored fixation band power, continuous EEG, the stored
// vector of the fixated word.
std::vector<std::vector<double>> fixation_band_vectors(const SentenceRecording& sentence,
                                                       std::string_view band,
                                                       const EegOptions& opts = {});

// One 105-vector per word: duration-weighted mean over the word's fixations
// (or the stored word vector); zeros for skipped words.
std::vector<std::vector<double>> word_eeg_features(const SentenceRecording& sentence,
                                                   std::string_view band,
                                                   const EegOptions& opts = {});

// Whole-sentence 105-vector for one band or sub-band.
std::vector<double> sentence_band_vector(const SentenceRecording& sentence, std::string_view band,
                                         const EegOptions& opts = {});

// Sentence-level EEG feature sets: <band>_mean, eeg_means,
// electrode_features_<band>, electrode_features_all.
std::vector<double> sentence_eeg_features(const SentenceRecording& sentence,
                                          std::string_view set_name, const EegOptions& opts = {});

std::vector<std::string> sentence_eeg_feature_names(std::string_view set_name,
                                                    const EegOptions& opts = {});

bool is_sentence_eeg_set(std::string_view set_name);

// Unweighted mean over the first ceil(fraction * n_fix) fixations (at least
// one) in chronological order.
std::vector<double> ablated_word_eeg(const SentenceRecording& sentence, std::string_view band,
                                     double fraction, const EegOptions& opts = {});

inline constexpr double kAblationFractions[] = {0.10, 0.20, 0.50, 0.75, 1.0};

}  // namespace readtask
