#include "readtask/feature_sets.hpp"

#include <algorithm>

#include "readtask/error.hpp"
#include "readtask/gaze_features.hpp"

namespace readtask {

const std::vector<std::string>& sentence_set_names() {
  static const std::vector<std::string> names{
      "omission_rate",       "fixation_number",
      "reading_speed",       "sent_gaze",
      "mean_sacc_dur",       "max_sacc_dur",
      "mean_sacc_velocity",  "max_sacc_velocity",
      "mean_sacc_amplitude", "max_sacc_amplitude",
      "sent_saccade",        "sent_gaze_sacc",
      "theta_mean",          "alpha_mean",
      "beta_mean",           "gamma_mean",
      "eeg_means",           "electrode_features_theta",
      "electrode_features_alpha", "electrode_features_beta",
      "electrode_features_gamma", "electrode_features_all",
      "fre"};
  return names;
}

const std::vector<std::string>& word_set_names() {
  static const std::vector<std::string> names{
      "word_fixation", "word_fixation_saccade", "eeg_theta", "eeg_alpha", "eeg_beta",
      "eeg_gamma",     "eeg_broadband",         "embeddings"};
  return names;
}

bool is_sentence_set(std::string_view name) {
  const auto& n = sentence_set_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

bool is_word_set(std::string_view name) {
  const auto& n = word_set_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

[[noreturn]] void unknown_set(std::string_view name) {
  throw UsageError("unknown feature set '" + std::string(name) +
                   "'; sentence-level: " + join(sentence_set_names()) +
                   "; word-level: " + join(word_set_names()));
}

bool keep(const SentenceRecording& s, const FeatureConfig& cfg) {
  return s.task != TaskLabel::SR || cfg.include_sr;
}

SampleGroup group_of(const SubjectData& subj, const SentenceRecording& s) {
  return {subj.meta.subject_id, s.session_id, s.block_id, s.sentence_id, s.task};
}

std::vector<std::string> gaze_names(std::string_view name) {
  const auto& g = sent_gaze_names();
  const auto& sc = sent_saccade_names();
  if (name == "sent_gaze") return {g.begin(), g.end()};
  if (name == "sent_saccade") return {sc.begin(), sc.end()};
  if (name == "sent_gaze_sacc") {
    std::vector<std::string> n(g.begin(), g.end());
    n.insert(n.end(), sc.begin(), sc.end());
    return n;
  }
  for (const auto& x : g)
    if (x == name) return {x};
  for (const auto& x : sc)
    if (x == name) return {x};
  return {};
}

}  // namespace

FeatureMatrix fre_feature_matrix(const Corpus& corpus, const FeatureConfig& cfg) {
  FeatureMatrix m;
  m.set_name = "fre";
  m.feature_names = {"fre"};
  m.label_names = task_label_names();
  for (const auto& subj : corpus.subjects)
    for (const auto& s : subj.sentences) {
      if (!keep(s, cfg)) continue;
      std::vector<std::string> tokens;
      for (const auto& w : s.words) tokens.push_back(w.token);
      m.push_back({flesch_score(tokens)}, static_cast<int>(s.task), group_of(subj, s));
    }
  return m;
}

FeatureMatrix assemble_feature_set(const Corpus& corpus, std::string_view name,
                                   const FeatureConfig& cfg) {
  if (!is_sentence_set(name)) {
    if (is_word_set(name))
      throw UsageError("'" + std::string(name) +
                       "' is a word-level set; use assemble_sequence_set");
    unknown_set(name);
  }
  if (name == "fre") return fre_feature_matrix(corpus, cfg);

  FeatureMatrix m;
  m.set_name = std::string(name);
  m.label_names = task_label_names();

  if (is_sentence_eeg_set(name)) {
    m.feature_names = sentence_eeg_feature_names(name, cfg.eeg);
    for (const auto& subj : corpus.subjects)
      for (const auto& s : subj.sentences)
        if (keep(s, cfg))
          m.push_back(sentence_eeg_features(s, name, cfg.eeg), static_cast<int>(s.task),
                      group_of(subj, s));
    return m;
  }

  m.feature_names = gaze_names(name);
  for (const auto& subj : corpus.subjects)
    for (const auto& s : subj.sentences) {
      if (!keep(s, cfg)) continue;
      const auto f = sentence_gaze_features(s);
      std::vector<double> row;
      for (const auto& n : m.feature_names) row.push_back(sentence_gaze_value(f, n));
      m.push_back(std::move(row), static_cast<int>(s.task), group_of(subj, s));
    }
  return m;
}

SequenceSet assemble_sequence_set(const Corpus& corpus, std::string_view name,
                                  const FeatureConfig& cfg, const EmbeddingTable* embeddings) {
  if (!is_word_set(name)) {
    if (is_sentence_set(name))
      throw UsageError("'" + std::string(name) +
                       "' is a sentence-level set; use assemble_feature_set");
    unknown_set(name);
  }
  SequenceSet out;
  out.set_name = std::string(name);
  out.label_names = task_label_names();

  const bool gaze = name == "word_fixation" || name == "word_fixation_saccade";
  const bool sacc = name == "word_fixation_saccade";
  const bool emb = name == "embeddings";
  std::string band;
  if (gaze) {
    out.feature_names = word_gaze_feature_names(sacc);
  } else if (emb) {
    if (!embeddings) throw UsageError("feature set 'embeddings' needs an embedding table");
    for (std::size_t i = 0; i < embeddings->dim(); ++i)
      out.feature_names.push_back("emb" + std::to_string(i));
  } else {
    band = std::string(name.substr(4));
    for (std::size_t c = 0; c < kChannels; ++c)
      out.feature_names.push_back(band + "_e" + std::to_string(c + 1));
  }

  for (const auto& subj : corpus.subjects)
    for (const auto& s : subj.sentences) {
      if (!keep(s, cfg)) continue;
      std::vector<std::vector<double>> seq;
      if (gaze) {
        for (const auto& f : word_gaze_features(s)) seq.push_back(f.to_vector(sacc));
      } else if (emb) {
        for (const auto& w : s.words) seq.push_back(embeddings->lookup(w.token));
      } else {
        seq = word_eeg_features(s, band, cfg.eeg);
      }
      out.sequences.push_back(std::move(seq));
      out.labels.push_back(static_cast<int>(s.task));
      out.groups.push_back(group_of(subj, s));
    }
  return out;
}

FeatureMatrix ablated_feature_set(const Corpus& corpus, std::string_view band, double fraction,
                                  const FeatureConfig& cfg) {
  FeatureMatrix m;
  m.set_name = "ablated_" + std::string(band);
  m.label_names = task_label_names();
  for (std::size_t c = 0; c < kChannels; ++c)
    m.feature_names.push_back(std::string(band) + "_e" + std::to_string(c + 1));
  for (const auto& subj : corpus.subjects)
    for (const auto& s : subj.sentences)
      if (keep(s, cfg))
        m.push_back(ablated_word_eeg(s, band, fraction, cfg.eeg), static_cast<int>(s.task),
                    group_of(subj, s));
  return m;
}

}  // namespace readtask
