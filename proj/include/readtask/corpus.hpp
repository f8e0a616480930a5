#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace readtask {

inline constexpr std::size_t kChannels = 105;
inline constexpr int kSchemaVersion = 1;

// Band name -> per-channel amplitudes. Keys are restricted to the canonical
// band names ("theta", "alpha", "beta", "gamma", "broadband").
using BandPowerMap = std::map<std::string, std::vector<double>>;

enum class TaskLabel { NR = 0, TSR = 1, SR = 2 };

std::string_view task_name(TaskLabel t);
TaskLabel parse_task(std::string_view s);

struct FixationEvent {
  double onset_ms = 0.0;
  double duration_ms = 0.0;
  std::size_t word_index = 0;
  std::size_t fixation_order = 0;
  // Optional per-fixation band power (one 105-vector per band).
  BandPowerMap band_power;
};

struct SaccadeEvent {
  double duration_ms = 0.0;
  double amplitude_deg = 0.0;
  double velocity_degps = 0.0;
  std::optional<std::size_t> from_word;
  std::optional<std::size_t> to_word;
};

struct WordRecord {
  std::string token;
  // Indices into SentenceRecording::fixations, chronological. Derived from
  // the fixations' word_index; not serialized.
  std::vector<std::size_t> fixations;
  BandPowerMap band_power;
};

// Continuous EEG, channel-major: sample t of channel c is data[c * samples + t].
struct ContinuousEeg {
  std::size_t channels = 0;
  std::size_t samples = 0;
  double sample_rate_hz = 0.0;
  std::vector<float> data;

  std::span<const float> channel(std::size_t c) const {
    return {data.data() + c * samples, samples};
  }
};

struct SentenceRecording {
  std::string sentence_id;
  TaskLabel task = TaskLabel::NR;
  int session_id = 1;
  int block_id = 1;
  double total_reading_ms = 0.0;
  std::vector<WordRecord> words;
  std::vector<FixationEvent> fixations;
  std::vector<SaccadeEvent> saccades;
  // Whole-sentence band power, when supplied precomputed.
  BandPowerMap sentence_band_power;
  std::optional<ContinuousEeg> eeg;

  // Fixation indices sorted by fixation_order.
  std::vector<std::size_t> chronological_fixations() const;
  // Rebuilds WordRecord::fixations from the fixation list.
  void link_fixations();
};

struct SubjectMeta {
  std::string subject_id;
  std::optional<double> lextale;
  std::optional<double> score_nr;
  std::optional<double> score_tsr;
  std::optional<double> speed_nr;
  std::optional<double> speed_tsr;
};

struct SubjectData {
  SubjectMeta meta;
  std::vector<SentenceRecording> sentences;
};

struct Corpus {
  std::string dataset_id;
  std::vector<SubjectData> subjects;

  const SubjectData& subject(std::string_view id) const;
  std::size_t sentence_count() const;
};

bool is_canonical_band(std::string_view name);

// Validation. Each throws ValidationError naming the violated rule.
void validate(const SentenceRecording& s);
void validate(const SubjectMeta& m);
void validate(const Corpus& c);

// JSON Lines interchange. `eeg_dir` resolves relative .bin paths.
nlohmann::json sentence_to_json(const SentenceRecording& s, const std::string& eeg_file = {});
SentenceRecording sentence_from_json(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir = {});

Corpus load_corpus(const std::filesystem::path& dir);
// Writes manifest.json, one <subject>.jsonl per subject and, for sentences
// with continuous EEG, <subject>_eeg/<sentence_id>.bin.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace readtask
