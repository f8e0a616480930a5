#include "readtask/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "readtask/dsp.hpp"
#include "readtask/error.hpp"
#include "readtask/parallel.hpp"

namespace readtask {

namespace {

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words{
      "the",      "of",        "and",        "a",         "in",        "was",       "he",
      "his",      "born",      "city",       "river",     "company",   "founded",   "married",
      "studied",  "university", "president", "film",      "director",  "produced",  "national",
      "political", "history",  "famous",     "american",  "television", "season",   "actor",
      "award",    "served",    "member",     "family",    "daughter",  "largest",   "located",
      "early",    "career",    "written",    "album",     "released",  "record",    "team",
      "played",   "game",      "series",     "novel",     "story",     "character", "beautiful",
      "movie",    "simply",    "entertaining", "performance", "plot",   "is",        "it",
      "to",       "by",        "on",         "with",      "for",       "as",        "at"};
  return words;
}

std::string_view layout_name(SynthLayout l) { return l == SynthLayout::blocks ? "blocks" : "sessions"; }
std::string_view eeg_mode_name(EegMode m) {
  switch (m) {
    case EegMode::none: return "none";
    case EegMode::band_power: return "band_power";
    case EegMode::continuous: return "continuous";
  }
  return "none";
}
std::string_view eeg_level_name(EegLevel l) {
  switch (l) {
    case EegLevel::sentence: return "sentence";
    case EegLevel::word: return "word";
    case EegLevel::fixation: return "fixation";
  }
  return "sentence";
}

void check_gaussian(const Gaussian& g, const std::string& what) {
  if (!std::isfinite(g.mean)) throw ParameterError(what + " mean must be finite");
  if (!(g.sd > 0.0) || !std::isfinite(g.sd)) throw ParameterError(what + " sd must be > 0");
}

double value_or(const std::map<std::string, double>& m, const std::string& k, double fallback = 0.0) {
  auto it = m.find(k);
  return it == m.end() ? fallback : it->second;
}

struct SubjectGen {
  const SynthSpec& spec;
  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};
  std::uniform_real_distribution<double> unit{0.0, 1.0};
  // [band][block or session key] -> per-channel offset
  std::map<std::string, std::map<int, std::vector<double>>> block_offset, session_offset;

  SubjectGen(const SynthSpec& s, std::uint64_t seed) : spec(s), rng(seed) {}

  double gauss(const Gaussian& g) { return g.mean + g.sd * normal(rng); }

  void draw_offsets(int n_blocks) {
    for (const auto& band : spec.eeg_bands) {
      std::vector<double> walk(kChannels, 0.0);
      for (int b = 1; b <= n_blocks; ++b) {
        if (spec.block_drift_sd > 0.0)
          for (auto& v : walk) v += spec.block_drift_sd * normal(rng);
        block_offset[band][b] = walk;
      }
      for (int session = 1; session <= 2; ++session) {
        std::vector<double> off(kChannels, 0.0);
        if (spec.session_shift_sd > 0.0)
          for (auto& v : off) v = spec.session_shift_sd * normal(rng);
        session_offset[band][session] = off;
      }
    }
  }

  std::vector<double> channel_means(const std::string& band, bool tsr, int block, int session) {
    std::vector<double> mu(kChannels, value_or(spec.band_baseline, band, 1.0));
    if (tsr)
      for (auto c : spec.shift_channels) mu[c] += value_or(spec.tsr_shift, band);
    const auto& bo = block_offset[band][block];
    const auto& so = session_offset[band][session];
    for (std::size_t c = 0; c < kChannels; ++c) mu[c] += bo[c] + so[c];
    return mu;
  }

  std::vector<double> jitter(const std::vector<double>& mu, double sd) {
    std::vector<double> v(mu.size());
    for (std::size_t c = 0; c < mu.size(); ++c) v[c] = std::max(0.0, mu[c] + sd * normal(rng));
    return v;
  }

  std::vector<std::string> tokens(std::size_t n) {
    const auto& vocab = vocabulary();
    std::vector<std::string> t(n);
    for (auto& w : t) w = vocab[rng() % vocab.size()];
    return t;
  }

  SentenceRecording sentence(std::string id, TaskLabel task, int session, int block,
                             const std::vector<std::string>* shared_tokens) {
    const ClassSpec& cls = task == TaskLabel::TSR ? spec.tsr : spec.nr;
    SentenceRecording s;
    s.sentence_id = std::move(id);
    s.task = task;
    s.session_id = session;
    s.block_id = block;

    std::size_t n_words;
    std::vector<std::string> toks;
    if (shared_tokens) {
      toks = *shared_tokens;
      n_words = toks.size();
    } else {
      const double len = std::round(gauss(cls.sentence_length));
      n_words = static_cast<std::size_t>(std::max<double>(spec.min_words, len));
      toks = tokens(n_words);
    }
    for (auto& t : toks) s.words.push_back({t, {}, {}});

    // Which words are skipped.
    const double rate = std::clamp(gauss(cls.omission_rate), 0.0, 1.0);
    auto skipped = static_cast<std::size_t>(std::lround(rate * static_cast<double>(n_words)));
    skipped = std::min(skipped, n_words - 1);
    std::vector<std::size_t> order(n_words);
    for (std::size_t i = 0; i < n_words; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> fixated(n_words, true);
    for (std::size_t k = 0; k < skipped; ++k) fixated[order[k]] = false;

    // Reading order: left to right with refixations and regressions.
    std::vector<std::size_t> trace;
    std::vector<std::size_t> seen;
    for (std::size_t w = 0; w < n_words; ++w) {
      if (!fixated[w]) continue;
      trace.push_back(w);
      if (unit(rng) < 0.2) trace.push_back(w);
      if (!seen.empty() && unit(rng) < 0.1) {
        const auto back = seen[rng() % seen.size()];
        trace.push_back(back);
        trace.push_back(w);
      }
      seen.push_back(w);
    }

    const double total_ms = 1000.0 * std::max(0.5, gauss(cls.reading_time_s));
    s.total_reading_ms = total_ms;
    const std::size_t n_fix = trace.size();
    std::vector<double> dur(n_fix), gap(n_fix + 1);
    double dsum = 0.0, gsum = 0.0;
    for (auto& d : dur) dsum += d = 0.6 + 0.8 * unit(rng);
    for (auto& g : gap) gsum += g = 0.5 + unit(rng);
    double t = 0.0;
    for (std::size_t k = 0; k < n_fix; ++k) {
      const double g_ms = 0.2 * total_ms * gap[k] / gsum;
      t += g_ms;
      FixationEvent f;
      f.onset_ms = t;
      f.duration_ms = 0.8 * total_ms * dur[k] / dsum;
      f.word_index = trace[k];
      f.fixation_order = k;
      s.fixations.push_back(f);
      if (k > 0) {
        const double jump = std::abs(static_cast<double>(trace[k]) - static_cast<double>(trace[k - 1]));
        SaccadeEvent sc;
        sc.duration_ms = std::max(1.0, g_ms);
        sc.amplitude_deg = 1.2 * jump + 0.3 + 0.2 * std::abs(normal(rng));
        sc.velocity_degps = std::max(0.0, 60.0 * sc.amplitude_deg + 80.0 + 10.0 * normal(rng));
        sc.from_word = trace[k - 1];
        sc.to_word = trace[k];
        s.saccades.push_back(sc);
      }
      t += f.duration_ms;
    }
    s.link_fixations();

    if (spec.eeg != EegMode::none) add_eeg(s, task == TaskLabel::TSR);
    return s;
  }

  void add_eeg(SentenceRecording& s, bool tsr) {
    std::map<std::string, std::vector<double>> sentence_vec;
    for (const auto& band : spec.eeg_bands) {
      const auto mu = channel_means(band, tsr, s.block_id, s.session_id);
      sentence_vec[band] = jitter(mu, spec.eeg_noise_sd);
    }
    if (spec.eeg == EegMode::band_power) {
      s.sentence_band_power = sentence_vec;
      for (const auto& band : spec.eeg_bands) {
        if (spec.eeg_level == EegLevel::word) {
          for (auto& w : s.words)
            if (!w.fixations.empty()) w.band_power[band] = jitter(sentence_vec[band], spec.fixation_noise_sd);
        } else if (spec.eeg_level == EegLevel::fixation) {
          for (auto& f : s.fixations) f.band_power[band] = jitter(sentence_vec[band], spec.fixation_noise_sd);
        }
      }
      return;
    }

    // Continuous: one tone per band at the band centre, amplitude equal to
    // the sentence vector, plus a little white noise.
    ContinuousEeg e;
    e.channels = kChannels;
    e.sample_rate_hz = spec.sample_rate_hz;
    e.samples = static_cast<std::size_t>(std::ceil(s.total_reading_ms * spec.sample_rate_hz / 1000.0)) + 1;
    e.samples = std::max(e.samples, dsp::min_signal_length() + 1);
    e.data.assign(e.channels * e.samples, 0.0f);
    const double two_pi = 2.0 * std::numbers::pi;
    for (const auto& band : spec.eeg_bands) {
      if (band == "broadband") continue;
      const auto fb = dsp::band_by_name(band);
      const double f0 = 0.5 * (fb.low_hz + fb.high_hz);
      const auto& amp = sentence_vec[band];
      for (std::size_t c = 0; c < kChannels; ++c) {
        const double phase = two_pi * unit(rng);
        float* row = e.data.data() + c * e.samples;
        for (std::size_t i = 0; i < e.samples; ++i)
          row[i] += static_cast<float>(amp[c] * std::sin(two_pi * f0 * static_cast<double>(i) / spec.sample_rate_hz + phase));
      }
    }
    for (auto& v : e.data) v += static_cast<float>(0.05 * normal(rng));
    s.eeg = std::move(e);
  }
};

}  // namespace

std::vector<std::size_t> SynthSpec::default_shift_channels() {
  std::vector<std::size_t> c(20);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = i;
  return c;
}

void validate(const SynthSpec& spec) {
  if (spec.subjects < 1) throw ParameterError("subjects must be ≥ 1");
  if (spec.sentences_per_class < 1) throw ParameterError("sentences_per_class must be ≥ 1");
  if (spec.min_words < 1) throw ParameterError("min_words must be ≥ 1");
  if (spec.blocks_per_task < 1) throw ParameterError("blocks_per_task must be ≥ 1");
  if (spec.sr_per_session < 0) throw ParameterError("sr_per_session must be ≥ 0");
  if (spec.sr_per_session > 0 && spec.layout != SynthLayout::sessions)
    throw ParameterError("SR sentences need the sessions layout");
  for (const auto* c : {&spec.nr, &spec.tsr}) {
    const std::string who = c == &spec.nr ? "NR " : "TSR ";
    check_gaussian(c->omission_rate, who + "omission_rate");
    check_gaussian(c->reading_time_s, who + "reading_time_s");
    check_gaussian(c->sentence_length, who + "sentence_length");
  }
  if (spec.eeg != EegMode::none) {
    if (!(spec.eeg_noise_sd > 0.0)) throw ParameterError("eeg_noise_sd must be > 0");
    if (!(spec.fixation_noise_sd > 0.0)) throw ParameterError("fixation_noise_sd must be > 0");
    if (spec.eeg_bands.empty()) throw ParameterError("eeg_bands must not be empty");
    for (const auto& b : spec.eeg_bands) dsp::band_by_name(b);
    if (spec.eeg == EegMode::continuous && !(spec.sample_rate_hz > 100.0))
      throw ParameterError("continuous synthesis needs sample_rate_hz > 100");
  }
  if (spec.block_drift_sd < 0.0 || spec.session_shift_sd < 0.0)
    throw ParameterError("drift standard deviations must be ≥ 0");
  for (auto c : spec.shift_channels)
    if (c >= kChannels) throw ParameterError("shift channel out of range");
}

Corpus synthesize_corpus(const SynthSpec& spec, std::uint64_t seed) {
  validate(spec);
  Corpus corpus;
  corpus.dataset_id = spec.dataset_id;
  const int n = spec.sentences_per_class;
  const int bpt = spec.blocks_per_task;
  for (int subj = 0; subj < spec.subjects; ++subj) {
    SubjectGen gen(spec, derive_seed(seed, {static_cast<std::uint64_t>(subj)}));
    gen.draw_offsets(2 * bpt + 2);
    SubjectData data;
    char id[16];
    std::snprintf(id, sizeof id, "S%02d", subj + 1);
    data.meta.subject_id = id;

    auto block_of = [&](TaskLabel task, int i) {
      const int within = i * bpt / n;  // 0..bpt-1
      if (spec.layout == SynthLayout::blocks) return 2 * within + (task == TaskLabel::NR ? 1 : 2);
      return within + 1 + (task == TaskLabel::TSR ? bpt : 0);
    };
    auto session_of = [&](TaskLabel task) {
      return spec.layout == SynthLayout::sessions && task == TaskLabel::TSR ? 2 : 1;
    };

    std::vector<std::vector<std::string>> nr_tokens;
    double nr_time = 0.0, tsr_time = 0.0;
    for (int i = 0; i < n; ++i) {
      char sid[32];
      std::snprintf(sid, sizeof sid, "nr_%04d", i);
      auto s = gen.sentence(sid, TaskLabel::NR, session_of(TaskLabel::NR), block_of(TaskLabel::NR, i), nullptr);
      nr_time += s.total_reading_ms / 1000.0;
      std::vector<std::string> toks;
      for (const auto& w : s.words) toks.push_back(w.token);
      nr_tokens.push_back(std::move(toks));
      data.sentences.push_back(std::move(s));
    }
    for (int i = 0; i < n; ++i) {
      char sid[32];
      std::snprintf(sid, sizeof sid, "tsr_%04d", i);
      auto s = gen.sentence(sid, TaskLabel::TSR, session_of(TaskLabel::TSR), block_of(TaskLabel::TSR, i),
                            spec.shared_texts ? &nr_tokens[static_cast<std::size_t>(i)] : nullptr);
      tsr_time += s.total_reading_ms / 1000.0;
      data.sentences.push_back(std::move(s));
    }
    for (int session = 1; session <= 2 && spec.sr_per_session > 0; ++session) {
      for (int i = 0; i < spec.sr_per_session; ++i) {
        char sid[32];
        std::snprintf(sid, sizeof sid, "sr%d_%04d", session, i);
        data.sentences.push_back(gen.sentence(sid, TaskLabel::SR, session, 2 * bpt + session, nullptr));
      }
    }
    // Keep each session contiguous.
    std::stable_sort(data.sentences.begin(), data.sentences.end(),
                     [](const SentenceRecording& a, const SentenceRecording& b) {
                       return a.session_id < b.session_id;
                     });

    data.meta.lextale = 60.0 + 40.0 * gen.unit(gen.rng);
    data.meta.score_nr = 60.0 + 40.0 * gen.unit(gen.rng);
    data.meta.score_tsr = 60.0 + 40.0 * gen.unit(gen.rng);
    data.meta.speed_nr = nr_time / n;
    data.meta.speed_tsr = tsr_time / n;
    corpus.subjects.push_back(std::move(data));
  }
  validate(corpus);
  return corpus;
}

namespace {

double log_normal_pdf(double x, const Gaussian& g) {
  const double z = (x - g.mean) / g.sd;
  return -0.5 * z * z - std::log(g.sd);
}

}  // namespace

BayesEstimate bayes_oracle(const SynthSpec& spec, const std::vector<std::string>& variables,
                           std::uint64_t seed, std::size_t draws) {
  validate(spec);
  if (variables.empty()) throw ParameterError("bayes_oracle needs at least one variable");

  bool omission = false;
  std::vector<std::string> bands;
  for (const auto& v : variables) {
    if (v == "omission_rate") {
      omission = true;
    } else if (v.rfind("electrodes_", 0) == 0) {
      const std::string band = v.substr(11);
      if (spec.eeg != EegMode::band_power)
        throw UnsupportedError("electrode oracle needs band_power synthesis");
      if (std::find(spec.eeg_bands.begin(), spec.eeg_bands.end(), band) == spec.eeg_bands.end())
        throw ParameterError("band '" + band + "' is not synthesized");
      if (spec.block_drift_sd > 0.0 || spec.session_shift_sd > 0.0)
        throw UnsupportedError("block or session drift makes the electrode distribution a mixture");
      bands.push_back(band);
    } else {
      throw UnsupportedError("no Gaussian generating distribution for '" + v + "'");
    }
  }

  if (omission && bands.empty()) {
    const Gaussian a = spec.nr.omission_rate, b = spec.tsr.omission_rate;
    const double lo = std::min(a.mean - 12 * a.sd, b.mean - 12 * b.sd);
    const double hi = std::max(a.mean + 12 * a.sd, b.mean + 12 * b.sd);
    const std::size_t steps = 400000;  // step = range / 4e5
    const double h = (hi - lo) / static_cast<double>(steps);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    double acc = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
      const double x = lo + (static_cast<double>(i) + 0.5) * h;
      const double pa = norm / a.sd * std::exp(-0.5 * std::pow((x - a.mean) / a.sd, 2));
      const double pb = norm / b.sd * std::exp(-0.5 * std::pow((x - b.mean) / b.sd, 2));
      acc += std::max(pa, pb);
    }
    return {0.5 * acc * h, 0.0, "grid"};
  }

  if (draws < 1000000) throw ParameterError("Monte Carlo oracle needs at least 1e6 draws");
  // Only the shifted channels differ between classes; the others cancel in
  // the likelihood ratio and are not sampled.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::size_t correct = 0;
  const double sd = spec.eeg_noise_sd;
  for (std::size_t d = 0; d < draws; ++d) {
    const bool tsr = (d & 1) != 0;
    double llr = 0.0;  // log p(x|TSR) - log p(x|NR)
    if (omission) {
      const Gaussian& g = tsr ? spec.tsr.omission_rate : spec.nr.omission_rate;
      const double x = g.mean + g.sd * z(rng);
      llr += log_normal_pdf(x, spec.tsr.omission_rate) - log_normal_pdf(x, spec.nr.omission_rate);
    }
    for (const auto& band : bands) {
      const double shift = value_or(spec.tsr_shift, band);
      for (std::size_t k = 0; k < spec.shift_channels.size(); ++k) {
        const double x = (tsr ? shift : 0.0) + sd * z(rng);
        llr += ((x * x) - (x - shift) * (x - shift)) / (2 * sd * sd);
      }
    }
    const bool say_tsr = llr > 0.0;
    if (say_tsr == tsr) ++correct;
  }
  const double p = static_cast<double>(correct) / static_cast<double>(draws);
  return {p, std::sqrt(p * (1 - p) / static_cast<double>(draws)), "monte_carlo"};
}

nlohmann::json to_json(const SynthSpec& s) {
  auto cls = [](const ClassSpec& c) {
    auto g = [](const Gaussian& x) { return nlohmann::json{{"mean", x.mean}, {"sd", x.sd}}; };
    return nlohmann::json{{"omission_rate", g(c.omission_rate)},
                          {"reading_time_s", g(c.reading_time_s)},
                          {"sentence_length", g(c.sentence_length)}};
  };
  return {{"dataset_id", s.dataset_id},
          {"subjects", s.subjects},
          {"sentences_per_class", s.sentences_per_class},
          {"nr", cls(s.nr)},
          {"tsr", cls(s.tsr)},
          {"min_words", s.min_words},
          {"eeg", eeg_mode_name(s.eeg)},
          {"eeg_level", eeg_level_name(s.eeg_level)},
          {"eeg_bands", s.eeg_bands},
          {"band_baseline", s.band_baseline},
          {"tsr_shift", s.tsr_shift},
          {"shift_channels", s.shift_channels},
          {"eeg_noise_sd", s.eeg_noise_sd},
          {"fixation_noise_sd", s.fixation_noise_sd},
          {"sample_rate_hz", s.sample_rate_hz},
          {"layout", layout_name(s.layout)},
          {"blocks_per_task", s.blocks_per_task},
          {"sr_per_session", s.sr_per_session},
          {"block_drift_sd", s.block_drift_sd},
          {"session_shift_sd", s.session_shift_sd},
          {"shared_texts", s.shared_texts}};
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  auto cls = [](const nlohmann::json& jc, ClassSpec& c) {
    auto g = [&](const char* key, Gaussian& x) {
      if (!jc.contains(key)) return;
      x.mean = jc.at(key).value("mean", x.mean);
      x.sd = jc.at(key).value("sd", x.sd);
    };
    g("omission_rate", c.omission_rate);
    g("reading_time_s", c.reading_time_s);
    g("sentence_length", c.sentence_length);
  };
  s.dataset_id = j.value("dataset_id", s.dataset_id);
  s.subjects = j.value("subjects", s.subjects);
  s.sentences_per_class = j.value("sentences_per_class", s.sentences_per_class);
  if (j.contains("nr")) cls(j.at("nr"), s.nr);
  if (j.contains("tsr")) cls(j.at("tsr"), s.tsr);
  s.min_words = j.value("min_words", s.min_words);
  const std::string eeg = j.value("eeg", std::string(eeg_mode_name(s.eeg)));
  if (eeg == "none") s.eeg = EegMode::none;
  else if (eeg == "band_power") s.eeg = EegMode::band_power;
  else if (eeg == "continuous") s.eeg = EegMode::continuous;
  else throw ParameterError("eeg must be none, band_power or continuous");
  const std::string level = j.value("eeg_level", std::string(eeg_level_name(s.eeg_level)));
  if (level == "sentence") s.eeg_level = EegLevel::sentence;
  else if (level == "word") s.eeg_level = EegLevel::word;
  else if (level == "fixation") s.eeg_level = EegLevel::fixation;
  else throw ParameterError("eeg_level must be sentence, word or fixation");
  s.eeg_bands = j.value("eeg_bands", s.eeg_bands);
  if (j.contains("band_baseline"))
    for (auto& [k, v] : j.at("band_baseline").items()) s.band_baseline[k] = v.get<double>();
  if (j.contains("tsr_shift"))
    for (auto& [k, v] : j.at("tsr_shift").items()) s.tsr_shift[k] = v.get<double>();
  s.shift_channels = j.value("shift_channels", s.shift_channels);
  s.eeg_noise_sd = j.value("eeg_noise_sd", s.eeg_noise_sd);
  s.fixation_noise_sd = j.value("fixation_noise_sd", s.fixation_noise_sd);
  s.sample_rate_hz = j.value("sample_rate_hz", s.sample_rate_hz);
  const std::string layout = j.value("layout", std::string(layout_name(s.layout)));
  if (layout == "blocks") s.layout = SynthLayout::blocks;
  else if (layout == "sessions") s.layout = SynthLayout::sessions;
  else throw ParameterError("layout must be blocks or sessions");
  s.blocks_per_task = j.value("blocks_per_task", s.blocks_per_task);
  s.sr_per_session = j.value("sr_per_session", s.sr_per_session);
  s.block_drift_sd = j.value("block_drift_sd", s.block_drift_sd);
  s.session_shift_sd = j.value("session_shift_sd", s.session_shift_sd);
  s.shared_texts = j.value("shared_texts", s.shared_texts);
  return s;
}

}  // namespace readtask
