#include "readtask/eeg_features.hpp"

#include <algorithm>
#include <cmath>

#include "readtask/error.hpp"

namespace readtask {

namespace {

bool has_fixation_band(const SentenceRecording& s, const std::string& band) {
  if (s.fixations.empty()) return false;
  return std::all_of(s.fixations.begin(), s.fixations.end(),
                     [&](const FixationEvent& f) { return f.band_power.count(band) > 0; });
}

std::vector<dsp::Segment> fixation_segment(const FixationEvent& f) {
  return {dsp::Segment{f.onset_ms, f.duration_ms}};
}

void axpy(std::vector<double>& acc, double a, const std::vector<double>& x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a * x[i];
}

std::string missing(const SentenceRecording& s, std::string_view band) {
  return "sentence '" + s.sentence_id + "' has neither stored '" + std::string(band) +
         "' band power nor continuous EEG";
}

}  // namespace

std::vector<std::vector<double>> fixation_band_vectors(const SentenceRecording& s,
                                                       std::string_view band_sv,
                                                       const EegOptions& opts) {
  const std::string band(band_sv);
  std::vector<std::vector<double>> out;
  out.reserve(s.fixations.size());
  if (has_fixation_band(s, band)) {
    for (const auto& f : s.fixations) out.push_back(f.band_power.at(band));
    return out;
  }
  if (s.eeg) {
    const auto env = dsp::channel_envelopes(*s.eeg, dsp::band_by_name(band), opts.power);
    for (const auto& f : s.fixations)
      out.push_back(dsp::segment_mean(env, s.eeg->sample_rate_hz, fixation_segment(f)));
    return out;
  }
  for (const auto& f : s.fixations) {
    const auto& w = s.words.at(f.word_index);
    auto it = w.band_power.find(band);
    if (it == w.band_power.end()) throw DataError(missing(s, band));
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::vector<double>> word_eeg_features(const SentenceRecording& s,
                                                   std::string_view band_sv,
                                                   const EegOptions& opts) {
  const std::string band(band_sv);
  dsp::band_by_name(band);  // validates the name
  std::vector<std::vector<double>> out(s.words.size(), std::vector<double>(kChannels, 0.0));

  const bool per_fixation = has_fixation_band(s, band) || s.eeg.has_value();
  if (per_fixation) {
    const auto fix = fixation_band_vectors(s, band, opts);
    for (std::size_t w = 0; w < s.words.size(); ++w) {
      double total = 0.0;
      for (std::size_t fi : s.words[w].fixations) {
        axpy(out[w], s.fixations[fi].duration_ms, fix[fi]);
        total += s.fixations[fi].duration_ms;
      }
      if (total > 0.0)
        for (double& v : out[w]) v /= total;
    }
    return out;
  }

  for (std::size_t w = 0; w < s.words.size(); ++w) {
    if (s.words[w].fixations.empty()) continue;
    auto it = s.words[w].band_power.find(band);
    if (it == s.words[w].band_power.end()) throw DataError(missing(s, band));
    out[w] = it->second;
  }
  return out;
}

std::vector<double> sentence_band_vector(const SentenceRecording& s, std::string_view band_sv,
                                         const EegOptions& opts) {
  const std::string band(band_sv);
  if (auto it = s.sentence_band_power.find(band); it != s.sentence_band_power.end()) {
    if (opts.power == dsp::PowerMode::amplitude) return it->second;
    // Stored vectors are amplitudes; the squared mode needs the raw signal.
    if (!s.eeg)
      throw DataError("sentence '" + s.sentence_id +
                      "': amplitude_squared power needs continuous EEG");
  }
  if (!s.eeg) throw DataError(missing(s, band));
  const auto env = dsp::channel_envelopes(*s.eeg, dsp::band_by_name(band), opts.power);
  const double extent_ms =
      static_cast<double>(s.eeg->samples) * 1000.0 / s.eeg->sample_rate_hz;
  const std::vector<dsp::Segment> whole{{0.0, std::min(s.total_reading_ms, extent_ms)}};
  return dsp::segment_mean(env, s.eeg->sample_rate_hz, whole);
}

bool is_sentence_eeg_set(std::string_view name) {
  for (const auto& b : dsp::oscillatory_bands()) {
    if (name == b + "_mean" || name == "electrode_features_" + b) return true;
  }
  return name == "eeg_means" || name == "electrode_features_all";
}

namespace {

double channel_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> electrode_vector(const SentenceRecording& s, const std::string& band,
                                     const EegOptions& opts) {
  if (opts.subbands == 8) {
    const auto halves = dsp::split_band(dsp::band_by_name(band));
    auto a = sentence_band_vector(s, halves[0].name, opts);
    const auto b = sentence_band_vector(s, halves[1].name, opts);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.5 * (a[i] + b[i]);
    return a;
  }
  return sentence_band_vector(s, band, opts);
}

void check_subbands(const EegOptions& opts) {
  if (opts.subbands != 4 && opts.subbands != 8)
    throw ParameterError("subbands must be 4 or 8");
}

}  // namespace

std::vector<double> sentence_eeg_features(const SentenceRecording& s, std::string_view set_sv,
                                          const EegOptions& opts) {
  check_subbands(opts);
  const std::string set(set_sv);
  for (const auto& b : dsp::oscillatory_bands()) {
    if (set == b + "_mean") return {channel_mean(electrode_vector(s, b, opts))};
    if (set == "electrode_features_" + b) return electrode_vector(s, b, opts);
  }
  if (set == "eeg_means") {
    std::vector<double> out;
    for (const auto& b : dsp::oscillatory_bands()) {
      if (opts.subbands == 8) {
        for (const auto& h : dsp::split_band(dsp::band_by_name(b)))
          out.push_back(channel_mean(sentence_band_vector(s, h.name, opts)));
      } else {
        out.push_back(channel_mean(sentence_band_vector(s, b, opts)));
      }
    }
    return out;
  }
  if (set == "electrode_features_all") {
    std::vector<double> out;
    out.reserve(4 * kChannels);
    for (const auto& b : dsp::oscillatory_bands()) {
      const auto v = electrode_vector(s, b, opts);
      out.insert(out.end(), v.begin(), v.end());
    }
    return out;
  }
  throw UsageError("unknown sentence EEG feature set '" + set + "'");
}

std::vector<std::string> sentence_eeg_feature_names(std::string_view set_sv,
                                                    const EegOptions& opts) {
  check_subbands(opts);
  const std::string set(set_sv);
  auto channels = [](const std::string& prefix) {
    std::vector<std::string> n;
    for (std::size_t c = 0; c < kChannels; ++c) n.push_back(prefix + "_e" + std::to_string(c + 1));
    return n;
  };
  for (const auto& b : dsp::oscillatory_bands()) {
    if (set == b + "_mean") return {set};
    if (set == "electrode_features_" + b) return channels(b);
  }
  if (set == "eeg_means") {
    std::vector<std::string> n;
    for (const auto& b : dsp::oscillatory_bands()) {
      if (opts.subbands == 8)
        for (const auto& h : dsp::split_band(dsp::band_by_name(b))) n.push_back(h.name + "_mean");
      else
        n.push_back(b + "_mean");
    }
    return n;
  }
  if (set == "electrode_features_all") {
    std::vector<std::string> n;
    for (const auto& b : dsp::oscillatory_bands()) {
      auto c = channels(b);
      n.insert(n.end(), c.begin(), c.end());
    }
    return n;
  }
  throw UsageError("unknown sentence EEG feature set '" + set + "'");
}

std::vector<double> ablated_word_eeg(const SentenceRecording& s, std::string_view band,
                                     double fraction, const EegOptions& opts) {
  if (s.fixations.empty())
    throw DataError("no fixations (sentence '" + s.sentence_id + "')");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ParameterError("ablation fraction must be in (0, 1]");
  const auto n_fix = s.fixations.size();
  // The epsilon keeps products such as 0.1 * 30 from rounding up past 3.
  auto take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n_fix) - 1e-9));
  take = std::clamp<std::size_t>(take, 1, n_fix);

  const auto vecs = fixation_band_vectors(s, band, opts);
  const auto chrono = s.chronological_fixations();
  std::vector<double> out(kChannels, 0.0);
  for (std::size_t k = 0; k < take; ++k) axpy(out, 1.0, vecs[chrono[k]]);
  for (double& v : out) v /= static_cast<double>(take);
  return out;
}

}  // namespace readtask
