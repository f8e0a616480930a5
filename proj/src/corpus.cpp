#include "readtask/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "readtask/error.hpp"

namespace readtask {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view task_name(TaskLabel t) {
  switch (t) {
    case TaskLabel::NR: return "NR";
    case TaskLabel::TSR: return "TSR";
    case TaskLabel::SR: return "SR";
  }
  return "?";
}

TaskLabel parse_task(std::string_view s) {
  if (s == "NR") return TaskLabel::NR;
  if (s == "TSR") return TaskLabel::TSR;
  if (s == "SR") return TaskLabel::SR;
  throw ValidationError("unknown task label '" + std::string(s) + "' (expected NR, TSR or SR)");
}

bool is_canonical_band(std::string_view name) {
  return name == "theta" || name == "alpha" || name == "beta" || name == "gamma" ||
         name == "broadband";
}

std::vector<std::size_t> SentenceRecording::chronological_fixations() const {
  std::vector<std::size_t> idx(fixations.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return fixations[a].fixation_order < fixations[b].fixation_order;
  });
  return idx;
}

void SentenceRecording::link_fixations() {
  for (auto& w : words) w.fixations.clear();
  for (std::size_t i : chronological_fixations()) {
    const auto wi = fixations[i].word_index;
    if (wi < words.size()) words[wi].fixations.push_back(i);
  }
}

const SubjectData& Corpus::subject(std::string_view id) const {
  for (const auto& s : subjects)
    if (s.meta.subject_id == id) return s;
  throw DataError("unknown subject '" + std::string(id) + "'");
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += s.sentences.size();
  return n;
}

namespace {

void check_band_map(const BandPowerMap& m, const std::string& where) {
  for (const auto& [band, v] : m) {
    if (!is_canonical_band(band))
      throw ValidationError(where + ": unknown band name '" + band + "'");
    if (v.size() != kChannels)
      throw ValidationError(where + ": band vector length ≠ 105 (band " + band + " has " +
                            std::to_string(v.size()) + ")");
    for (double x : v)
      if (!std::isfinite(x) || x < 0.0)
        throw ValidationError(where + ": band power values must be finite and ≥ 0");
  }
}

}  // namespace

void validate(const SentenceRecording& s) {
  const std::string where = "sentence '" + s.sentence_id + "'";
  if (s.sentence_id.empty()) throw ValidationError("sentence_id must be nonempty");
  if (s.words.empty()) throw ValidationError(where + ": words must be nonempty");
  if (!(s.total_reading_ms > 0.0) || !std::isfinite(s.total_reading_ms))
    throw ValidationError(where + ": total_reading_ms must be > 0");

  const std::size_t n_fix = s.fixations.size();
  std::vector<bool> seen(n_fix, false);
  for (const auto& f : s.fixations) {
    if (!(f.duration_ms > 0.0) || !std::isfinite(f.duration_ms))
      throw ValidationError(where + ": fixation duration_ms must be > 0");
    if (!std::isfinite(f.onset_ms) || f.onset_ms < 0.0)
      throw ValidationError(where + ": fixation onset_ms must be finite and ≥ 0");
    if (f.word_index >= s.words.size())
      throw ValidationError(where + ": fixation word_index out of range");
    if (f.fixation_order >= n_fix || seen[f.fixation_order])
      throw ValidationError(where + ": fixation_order must be a permutation of 0..n_fix-1");
    seen[f.fixation_order] = true;
    check_band_map(f.band_power, where + " fixation");
  }
  const auto chrono = s.chronological_fixations();
  for (std::size_t k = 1; k < chrono.size(); ++k)
    if (s.fixations[chrono[k]].onset_ms < s.fixations[chrono[k - 1]].onset_ms)
      throw ValidationError(where + ": fixation_order must follow onset_ms");

  for (const auto& sc : s.saccades) {
    if (!(sc.duration_ms > 0.0) || !std::isfinite(sc.duration_ms))
      throw ValidationError(where + ": saccade duration_ms must be > 0");
    if (!(sc.amplitude_deg >= 0.0) || !std::isfinite(sc.amplitude_deg))
      throw ValidationError(where + ": saccade amplitude_deg must be ≥ 0");
    if (!(sc.velocity_degps >= 0.0) || !std::isfinite(sc.velocity_degps))
      throw ValidationError(where + ": saccade velocity_degps must be ≥ 0");
    if ((sc.from_word && *sc.from_word >= s.words.size()) ||
        (sc.to_word && *sc.to_word >= s.words.size()))
      throw ValidationError(where + ": saccade word index out of range");
  }

  for (const auto& w : s.words) check_band_map(w.band_power, where + " word '" + w.token + "'");
  check_band_map(s.sentence_band_power, where + " sentence_band_power");

  if (s.eeg) {
    const auto& e = *s.eeg;
    if (!(e.sample_rate_hz > 0.0)) throw ValidationError(where + ": sample_rate_hz must be > 0");
    if (e.channels != kChannels)
      throw ValidationError(where + ": continuous EEG must have 105 channels");
    if (e.data.size() != e.channels * e.samples)
      throw ValidationError(where + ": continuous EEG size does not match declared dimensions");
    const double limit = static_cast<double>(e.samples);
    for (const auto& f : s.fixations) {
      const double end = (f.onset_ms + f.duration_ms) * e.sample_rate_hz / 1000.0;
      if (end > limit + 1e-6)
        throw ValidationError(where + ": fixation exceeds continuous EEG extent");
    }
  }
}

void validate(const SubjectMeta& m) {
  if (m.subject_id.empty()) throw ValidationError("subject_id must be nonempty");
  auto pct = [&](const std::optional<double>& v, const char* name) {
    if (v && !(*v >= 0.0 && *v <= 100.0))
      throw ValidationError("subject '" + m.subject_id + "': " + name + " must be in [0,100]");
  };
  auto pos = [&](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0))
      throw ValidationError("subject '" + m.subject_id + "': " + name + " must be > 0");
  };
  pct(m.lextale, "lextale");
  pct(m.score_nr, "score_nr");
  pct(m.score_tsr, "score_tsr");
  pos(m.speed_nr, "speed_nr");
  pos(m.speed_tsr, "speed_tsr");
}

void validate(const Corpus& c) {
  std::set<std::string> ids;
  for (const auto& subj : c.subjects) {
    validate(subj.meta);
    if (!ids.insert(subj.meta.subject_id).second)
      throw ValidationError("duplicate subject_id '" + subj.meta.subject_id + "'");
    std::set<std::string> sids;
    for (const auto& s : subj.sentences) {
      validate(s);
      if (!sids.insert(s.sentence_id).second)
        throw ValidationError("subject '" + subj.meta.subject_id + "': duplicate sentence_id '" +
                              s.sentence_id + "'");
    }
  }
}

// --------------------------------------------------------------------------
// JSON

namespace {

json band_map_to_json(const BandPowerMap& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

BandPowerMap band_map_from_json(const json& j) {
  BandPowerMap m;
  for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = it.value().get<std::vector<double>>();
  return m;
}

std::vector<float> read_eeg_bin(const fs::path& p, std::size_t count) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open EEG file " + p.string());
  std::vector<unsigned char> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw ValidationError("EEG file " + p.string() + " is shorter than declared dimensions");
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t u = std::uint32_t(raw[4 * i]) | (std::uint32_t(raw[4 * i + 1]) << 8) |
                      (std::uint32_t(raw[4 * i + 2]) << 16) | (std::uint32_t(raw[4 * i + 3]) << 24);
    std::memcpy(&out[i], &u, 4);
  }
  return out;
}

void write_eeg_bin(const fs::path& p, const std::vector<float>& data) {
  std::vector<unsigned char> raw(data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t u;
    std::memcpy(&u, &data[i], 4);
    raw[4 * i] = static_cast<unsigned char>(u & 0xff);
    raw[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
    raw[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
    raw[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write EEG file " + p.string());
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

// Sentence ids are free text; file names keep [A-Za-z0-9._-] and
// percent-encode every other byte.
std::string file_stem(const std::string& id) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : id) {
    if (std::isalnum(c) || c == '.' || c == '_' || c == '-') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

template <class T>
std::optional<T> opt(const json& j, const char* key) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) return it->get<T>();
  return std::nullopt;
}

}  // namespace

json sentence_to_json(const SentenceRecording& s, const std::string& eeg_file) {
  json j;
  j["sentence_id"] = s.sentence_id;
  j["task"] = std::string(task_name(s.task));
  j["session"] = s.session_id;
  j["block"] = s.block_id;
  j["total_reading_ms"] = s.total_reading_ms;
  json words = json::array();
  for (const auto& w : s.words) {
    json jw;
    jw["token"] = w.token;
    if (!w.band_power.empty()) jw["band_power"] = band_map_to_json(w.band_power);
    words.push_back(std::move(jw));
  }
  j["words"] = std::move(words);
  json fix = json::array();
  for (const auto& f : s.fixations) {
    json jf;
    jf["onset_ms"] = f.onset_ms;
    jf["duration_ms"] = f.duration_ms;
    jf["word_index"] = f.word_index;
    jf["fixation_order"] = f.fixation_order;
    if (!f.band_power.empty()) jf["band_power"] = band_map_to_json(f.band_power);
    fix.push_back(std::move(jf));
  }
  j["fixations"] = std::move(fix);
  json sac = json::array();
  for (const auto& sc : s.saccades) {
    json js;
    js["duration_ms"] = sc.duration_ms;
    js["amplitude_deg"] = sc.amplitude_deg;
    js["velocity_degps"] = sc.velocity_degps;
    if (sc.from_word) js["from_word"] = *sc.from_word;
    if (sc.to_word) js["to_word"] = *sc.to_word;
    sac.push_back(std::move(js));
  }
  j["saccades"] = std::move(sac);
  if (!s.sentence_band_power.empty())
    j["sentence_band_power"] = band_map_to_json(s.sentence_band_power);
  if (s.eeg) {
    json je;
    je["file"] = eeg_file;
    je["channels"] = s.eeg->channels;
    je["samples"] = s.eeg->samples;
    je["sample_rate_hz"] = s.eeg->sample_rate_hz;
    j["eeg"] = std::move(je);
  }
  return j;
}

SentenceRecording sentence_from_json(const json& j, const fs::path& base_dir) {
  SentenceRecording s;
  s.sentence_id = j.at("sentence_id").get<std::string>();
  s.task = parse_task(j.at("task").get<std::string>());
  s.session_id = j.value("session", 1);
  s.block_id = j.value("block", 1);
  s.total_reading_ms = j.at("total_reading_ms").get<double>();
  for (const auto& jw : j.at("words")) {
    WordRecord w;
    w.token = jw.at("token").get<std::string>();
    if (auto it = jw.find("band_power"); it != jw.end()) w.band_power = band_map_from_json(*it);
    s.words.push_back(std::move(w));
  }
  if (auto it = j.find("fixations"); it != j.end()) {
    for (const auto& jf : *it) {
      FixationEvent f;
      f.onset_ms = jf.at("onset_ms").get<double>();
      f.duration_ms = jf.at("duration_ms").get<double>();
      f.word_index = jf.at("word_index").get<std::size_t>();
      f.fixation_order = jf.at("fixation_order").get<std::size_t>();
      if (auto b = jf.find("band_power"); b != jf.end()) f.band_power = band_map_from_json(*b);
      s.fixations.push_back(std::move(f));
    }
  }
  if (auto it = j.find("saccades"); it != j.end()) {
    for (const auto& js : *it) {
      SaccadeEvent sc;
      sc.duration_ms = js.at("duration_ms").get<double>();
      sc.amplitude_deg = js.at("amplitude_deg").get<double>();
      sc.velocity_degps = js.at("velocity_degps").get<double>();
      sc.from_word = opt<std::size_t>(js, "from_word");
      sc.to_word = opt<std::size_t>(js, "to_word");
      s.saccades.push_back(sc);
    }
  }
  if (auto it = j.find("sentence_band_power"); it != j.end())
    s.sentence_band_power = band_map_from_json(*it);
  if (auto it = j.find("eeg"); it != j.end()) {
    ContinuousEeg e;
    e.channels = it->at("channels").get<std::size_t>();
    e.samples = it->at("samples").get<std::size_t>();
    e.sample_rate_hz = it->at("sample_rate_hz").get<double>();
    e.data = read_eeg_bin(base_dir / it->at("file").get<std::string>(), e.channels * e.samples);
    s.eeg = std::move(e);
  }
  s.link_fixations();
  return s;
}

Corpus load_corpus(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream mf(manifest_path);
  if (!mf) throw IoError("cannot open " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::parse_error& e) {
    throw ParseError(manifest_path.string(), 1, e.what());
  }

  Corpus corpus;
  corpus.dataset_id = manifest.value("dataset_id", std::string{});
  for (const auto& js : manifest.at("subjects")) {
    SubjectData subj;
    subj.meta.subject_id = js.at("subject_id").get<std::string>();
    subj.meta.lextale = opt<double>(js, "lextale");
    subj.meta.score_nr = opt<double>(js, "score_nr");
    subj.meta.score_tsr = opt<double>(js, "score_tsr");
    subj.meta.speed_nr = opt<double>(js, "speed_nr");
    subj.meta.speed_tsr = opt<double>(js, "speed_tsr");
    const fs::path file = dir / js.value("file", subj.meta.subject_id + ".jsonl");

    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(file.string(), line_no, e.what());
      }
      try {
        subj.sentences.push_back(sentence_from_json(j, dir));
      } catch (const json::exception& e) {
        throw ParseError(file.string(), line_no, e.what());
      }
    }
    corpus.subjects.push_back(std::move(subj));
  }
  validate(corpus);
  return corpus;
}

void save_corpus(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["dataset_id"] = corpus.dataset_id;
  manifest["schema_version"] = kSchemaVersion;
  json subjects = json::array();
  for (const auto& subj : corpus.subjects) {
    const auto& m = subj.meta;
    json js;
    js["subject_id"] = m.subject_id;
    js["file"] = file_stem(m.subject_id) + ".jsonl";
    if (m.lextale) js["lextale"] = *m.lextale;
    if (m.score_nr) js["score_nr"] = *m.score_nr;
    if (m.score_tsr) js["score_tsr"] = *m.score_tsr;
    if (m.speed_nr) js["speed_nr"] = *m.speed_nr;
    if (m.speed_tsr) js["speed_tsr"] = *m.speed_tsr;
    subjects.push_back(std::move(js));

    std::ofstream out(dir / (file_stem(m.subject_id) + ".jsonl"), std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / (file_stem(m.subject_id) + ".jsonl")).string());
    for (const auto& s : subj.sentences) {
      std::string eeg_file;
      if (s.eeg) {
        const std::string rel_dir = file_stem(m.subject_id) + "_eeg";
        fs::create_directories(dir / rel_dir);
        eeg_file = rel_dir + "/" + file_stem(s.sentence_id) + ".bin";
        write_eeg_bin(dir / eeg_file, s.eeg->data);
      }
      out << sentence_to_json(s, eeg_file).dump() << '\n';
    }
  }
  manifest["subjects"] = std::move(subjects);
  std::ofstream mf(dir / "manifest.json", std::ios::binary);
  if (!mf) throw IoError("cannot write manifest in " + dir.string());
  mf << manifest.dump(2) << '\n';
}

}  // namespace readtask
