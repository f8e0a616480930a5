#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "readtask/corpus.hpp"

namespace readtask {

struct Gaussian {
  double mean = 0.0;
  double sd = 1.0;
};

// Class-conditional reading behaviour.
struct ClassSpec {
  Gaussian omission_rate;
  Gaussian reading_time_s;   // seconds per sentence
  Gaussian sentence_length;  // words, rounded and clipped to min_words
};

enum class EegMode { none, band_power, continuous };
// Granularity of stored band power in band_power mode. Sentence vectors are
// always stored; `word` adds one vector per fixated word, `fixation` one per
// fixation.
enum class EegLevel { sentence, word, fixation };
// blocks: one session, blocks alternate NR (odd ids) and TSR (even ids).
// sessions: NR in session 1, TSR in session 2, optional SR in both.
enum class SynthLayout { blocks, sessions };

struct SynthSpec {
  std::string dataset_id = "synthetic";
  int subjects = 4;
  int sentences_per_class = 100;  // per subject and task
  ClassSpec nr{{0.32, 0.09}, {7.3, 2.5}, {21.9, 11.1}};
  ClassSpec tsr{{0.47, 0.11}, {4.2, 1.5}, {20.1, 9.9}};
  int min_words = 3;

  EegMode eeg = EegMode::none;
  EegLevel eeg_level = EegLevel::sentence;
  std::vector<std::string> eeg_bands{"theta", "alpha", "beta", "gamma"};
  std::map<std::string, double> band_baseline{
      {"theta", 2.8}, {"alpha", 2.6}, {"beta", 2.7}, {"gamma", 1.8}, {"broadband", 6.0}};
  // TSR minus NR mean on the shifted channels, per band.
  std::map<std::string, double> tsr_shift{
      {"theta", 0.3}, {"alpha", 0.3}, {"beta", 0.3}, {"gamma", 0.3}, {"broadband", 0.0}};
  std::vector<std::size_t> shift_channels = default_shift_channels();
  double eeg_noise_sd = 0.5;       // per sentence and channel
  double fixation_noise_sd = 0.2;  // per fixation (or word) around the sentence vector
  double sample_rate_hz = 500.0;   // continuous mode

  SynthLayout layout = SynthLayout::blocks;
  int blocks_per_task = 7;
  int sr_per_session = 0;         // sessions layout only
  double block_drift_sd = 0.0;    // random-walk step per block, every channel
  double session_shift_sd = 0.0;  // per-session offset, every channel

  bool shared_texts = false;  // TSR sentence i reuses the tokens of NR sentence i

  static std::vector<std::size_t> default_shift_channels();
};

// Throws ParameterError on non-positive standard deviations or counts.
void validate(const SynthSpec& spec);

// Deterministic in (spec, seed). Skipped words receive no fixation and the
// realized omission rate of each sentence is exactly skipped / words.
Corpus synthesize_corpus(const SynthSpec& spec, std::uint64_t seed);

struct BayesEstimate {
  double accuracy = 0.0;
  double standard_error = 0.0;  // 0 for grid integration
  std::string method;           // "grid" or "monte_carlo"
};

// Bayes-optimal accuracy (equal priors) of the generating distributions of
// the named variables: "omission_rate" and/or "electrodes_<band>" (the
// sentence-level band power vector). One scalar variable is integrated on a
// fine grid; anything else is estimated by Monte Carlo. Variables whose
// distribution is not Gaussian under these settings (drifts, continuous EEG, text)
// raise UnsupportedError.
BayesEstimate bayes_oracle(const SynthSpec& spec, const std::vector<std::string>& variables,
                           std::uint64_t seed = 1, std::size_t draws = 1000000);

nlohmann::json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

}  // namespace readtask
