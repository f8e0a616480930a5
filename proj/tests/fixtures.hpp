#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "readtask/corpus.hpp"

namespace fixtures {

// Directory removed with everything in it when the object goes away.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("readtask_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// Sentence with `n_words` tokens and fixations given as (word, duration)
// pairs in reading order. Onsets are packed back to back with a 30 ms gap.
inline readtask::SentenceRecording sentence(
    std::string id, std::size_t n_words,
    const std::vector<std::pair<std::size_t, double>>& trace,
    readtask::TaskLabel task = readtask::TaskLabel::NR) {
  readtask::SentenceRecording s;
  s.sentence_id = std::move(id);
  s.task = task;
  for (std::size_t w = 0; w < n_words; ++w) s.words.push_back({"word" + std::to_string(w), {}, {}});
  double t = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    readtask::FixationEvent f;
    f.onset_ms = t;
    f.duration_ms = trace[k].second;
    f.word_index = trace[k].first;
    f.fixation_order = k;
    s.fixations.push_back(f);
    t += f.duration_ms + 30.0;
  }
  s.total_reading_ms = t + 100.0;
  s.link_fixations();
  return s;
}

inline std::vector<double> constant_vector(double v, std::size_t n = readtask::kChannels) {
  return std::vector<double>(n, v);
}

}  // namespace fixtures
