#include "readtask/gaze_features.hpp"

#include <algorithm>

#include "readtask/error.hpp"

namespace readtask {

std::vector<double> WordGazeFeatures::to_vector(bool include_saccades) const {
  std::vector<double> v{nFix, FFD, TRT, GD, GPT};
  if (include_saccades) {
    v.insert(v.end(), {in_velocity_mean, in_duration_mean, in_amplitude_mean, out_velocity_mean,
                       out_duration_mean, out_amplitude_mean, in_velocity_max, in_duration_max,
                       in_amplitude_max, out_velocity_max, out_duration_max, out_amplitude_max});
  }
  return v;
}

const std::vector<std::string>& word_gaze_feature_names(bool include_saccades) {
  static const std::vector<std::string> fix{"nFix", "FFD", "TRT", "GD", "GPT"};
  static const std::vector<std::string> all{"nFix",
                                            "FFD",
                                            "TRT",
                                            "GD",
                                            "GPT",
                                            "inSacc_velocity_mean",
                                            "inSacc_duration_mean",
                                            "inSacc_amplitude_mean",
                                            "outSacc_velocity_mean",
                                            "outSacc_duration_mean",
                                            "outSacc_amplitude_mean",
                                            "inSacc_velocity_max",
                                            "inSacc_duration_max",
                                            "inSacc_amplitude_max",
                                            "outSacc_velocity_max",
                                            "outSacc_duration_max",
                                            "outSacc_amplitude_max"};
  return include_saccades ? all : fix;
}

namespace {

struct Agg {
  double sum = 0, max = 0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    max = n == 0 ? v : std::max(max, v);
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
};

}  // namespace

std::vector<WordGazeFeatures> word_gaze_features(const SentenceRecording& s) {
  const std::size_t n_words = s.words.size();
  std::vector<WordGazeFeatures> out(n_words);

  const auto order = s.chronological_fixations();
  std::vector<std::size_t> seq_word(order.size());
  std::vector<double> seq_dur(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    seq_word[k] = s.fixations[order[k]].word_index;
    seq_dur[k] = s.fixations[order[k]].duration_ms;
  }

  for (std::size_t w = 0; w < n_words; ++w) {
    auto& f = out[w];
    const auto first = std::find(seq_word.begin(), seq_word.end(), w);
    if (first == seq_word.end()) continue;
    const auto i0 = static_cast<std::size_t>(first - seq_word.begin());

    for (std::size_t k = 0; k < seq_word.size(); ++k)
      if (seq_word[k] == w) {
        f.nFix += 1;
        f.TRT += seq_dur[k];
      }
    f.FFD = seq_dur[i0];
    for (std::size_t k = i0; k < seq_word.size() && seq_word[k] == w; ++k) f.GD += seq_dur[k];
    // Go-past: from the first fixation on w until gaze first lands right of w.
    for (std::size_t k = i0; k < seq_word.size() && seq_word[k] <= w; ++k) f.GPT += seq_dur[k];

    Agg in_v, in_d, in_a, out_v, out_d, out_a;
    for (const auto& sc : s.saccades) {
      if (sc.to_word && *sc.to_word == w) {
        in_v.add(sc.velocity_degps);
        in_d.add(sc.duration_ms);
        in_a.add(sc.amplitude_deg);
      }
      if (sc.from_word && *sc.from_word == w) {
        out_v.add(sc.velocity_degps);
        out_d.add(sc.duration_ms);
        out_a.add(sc.amplitude_deg);
      }
    }
    f.in_velocity_mean = in_v.mean();
    f.in_duration_mean = in_d.mean();
    f.in_amplitude_mean = in_a.mean();
    f.out_velocity_mean = out_v.mean();
    f.out_duration_mean = out_d.mean();
    f.out_amplitude_mean = out_a.mean();
    f.in_velocity_max = in_v.max;
    f.in_duration_max = in_d.max;
    f.in_amplitude_max = in_a.max;
    f.out_velocity_max = out_v.max;
    f.out_duration_max = out_d.max;
    f.out_amplitude_max = out_a.max;
  }
  return out;
}

SentenceGazeFeatures sentence_gaze_features(const SentenceRecording& s) {
  if (s.words.empty()) throw DataError("sentence '" + s.sentence_id + "' has no words");
  const auto n_words = static_cast<double>(s.words.size());

  std::vector<char> fixated(s.words.size(), 0);
  double fix_ms = 0.0;
  for (const auto& f : s.fixations) {
    if (f.word_index < fixated.size()) fixated[f.word_index] = 1;
    fix_ms += f.duration_ms;
  }
  const auto n_fixated = static_cast<double>(std::count(fixated.begin(), fixated.end(), 1));

  SentenceGazeFeatures out;
  out.omission_rate = (n_words - n_fixated) / n_words;
  out.fixation_number = static_cast<double>(s.fixations.size()) / n_words;
  out.reading_speed = fix_ms / n_words / 1000.0;

  if (!s.saccades.empty()) {
    Agg d, v, a;
    for (const auto& sc : s.saccades) {
      d.add(sc.duration_ms);
      v.add(sc.velocity_degps);
      a.add(sc.amplitude_deg);
    }
    out.mean_sacc_dur = d.sum / n_words;
    out.max_sacc_dur = d.max;
    out.mean_sacc_velocity = v.mean();
    out.max_sacc_velocity = v.max;
    out.mean_sacc_amplitude = a.mean();
    out.max_sacc_amplitude = a.max;
  }
  return out;
}

const std::array<std::string, 3>& sent_gaze_names() {
  static const std::array<std::string, 3> n{"omission_rate", "fixation_number", "reading_speed"};
  return n;
}

const std::array<std::string, 6>& sent_saccade_names() {
  static const std::array<std::string, 6> n{"mean_sacc_dur",      "max_sacc_dur",
                                            "mean_sacc_velocity", "max_sacc_velocity",
                                            "mean_sacc_amplitude", "max_sacc_amplitude"};
  return n;
}

double sentence_gaze_value(const SentenceGazeFeatures& f, const std::string& name) {
  if (name == "omission_rate") return f.omission_rate;
  if (name == "fixation_number") return f.fixation_number;
  if (name == "reading_speed") return f.reading_speed;
  if (name == "mean_sacc_dur") return f.mean_sacc_dur;
  if (name == "max_sacc_dur") return f.max_sacc_dur;
  if (name == "mean_sacc_velocity") return f.mean_sacc_velocity;
  if (name == "max_sacc_velocity") return f.max_sacc_velocity;
  if (name == "mean_sacc_amplitude") return f.mean_sacc_amplitude;
  if (name == "max_sacc_amplitude") return f.max_sacc_amplitude;
  throw UsageError("unknown sentence gaze feature '" + name + "'");
}

}  // namespace readtask
