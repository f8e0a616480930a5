#pragma once

#include <array>
#include <string>
#include <vector>

#include "readtask/corpus.hpp"

namespace readtask {

// Word-level reading measures. Durations in ms, velocities in deg/s,
// amplitudes in deg. A skipped word has every field zero.
struct WordGazeFeatures {
  double nFix = 0, FFD = 0, TRT = 0, GD = 0, GPT = 0;
  // mean then max; incoming then outgoing; velocity, duration, amplitude.
  double in_velocity_mean = 0, in_duration_mean = 0, in_amplitude_mean = 0;
  double out_velocity_mean = 0, out_duration_mean = 0, out_amplitude_mean = 0;
  double in_velocity_max = 0, in_duration_max = 0, in_amplitude_max = 0;
  double out_velocity_max = 0, out_duration_max = 0, out_amplitude_max = 0;

  // 5 fixation values, or 17 with the saccade values appended.
  std::vector<double> to_vector(bool include_saccades) const;
};

const std::vector<std::string>& word_gaze_feature_names(bool include_saccades);

std::vector<WordGazeFeatures> word_gaze_features(const SentenceRecording& sentence);

struct SentenceGazeFeatures {
  double omission_rate = 0;
  double fixation_number = 0;
  double reading_speed = 0;  // seconds of fixation per word
  // Duration mean is normalized by word count; velocity and amplitude means
  // by saccade count.
  double mean_sacc_dur = 0, max_sacc_dur = 0;
  double mean_sacc_velocity = 0, max_sacc_velocity = 0;
  double mean_sacc_amplitude = 0, max_sacc_amplitude = 0;
};

SentenceGazeFeatures sentence_gaze_features(const SentenceRecording& sentence);

// Single sentence-level gaze value by its feature name (e.g. "omission_rate").
double sentence_gaze_value(const SentenceGazeFeatures& f, const std::string& name);

const std::array<std::string, 3>& sent_gaze_names();
const std::array<std::string, 6>& sent_saccade_names();

}  // namespace readtask
