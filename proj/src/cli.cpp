#include "readtask/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "readtask/analysis.hpp"
#include "readtask/config.hpp"
#include "readtask/corpus.hpp"
#include "readtask/error.hpp"
#include "readtask/evaluation.hpp"
#include "readtask/feature_sets.hpp"
#include "readtask/parallel.hpp"
#include "readtask/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace readtask {

json default_config() {
  const BiLstmHyper lstm;
  const SvmOptions svm;
  const EvalOptions eval;
  return {
      {"seed", 1},
      {"jobs", 0},
      {"out", "out"},
      {"data",
       {{"corpus", ""}, {"synthetic", false}, {"exclude", json::array()}, {"embeddings", ""}}},
      {"eval",
       {{"protocol", "within-sentence"},
        {"features", "sent_gaze_sacc"},
        {"scheme", "task"},
        {"balanced", false},
        {"runs", eval.runs},
        {"test_fraction", eval.test_fraction},
        {"folds", eval.folds},
        {"seeds", eval.seeds},
        {"min_samples", eval.min_samples},
        {"audit", false}}},
      {"svm", {{"C", svm.C}, {"gap_tol", svm.gap_tol}, {"max_epochs", svm.max_epochs}}},
      {"lstm",
       {{"hidden", lstm.hidden},
        {"dense", lstm.dense},
        {"learning_rate", lstm.learning_rate},
        {"batch_size", lstm.batch_size},
        {"max_epochs", lstm.max_epochs},
        {"patience", lstm.patience},
        {"min_delta", lstm.min_delta},
        {"validation_fraction", lstm.validation_fraction}}},
      {"eeg", {{"power", "amplitude"}, {"subbands", 4}}},
      {"ablation",
       {{"band", "gamma"},
        {"fractions", {0.1, 0.2, 0.5, 0.75, 1.0}},
        {"features", "electrode_features_gamma"},
        {"k_max", 6},
        {"repeats", 10}}},
      {"analysis",
       {{"outlier_features",
         {"fixation_number", "omission_rate", "reading_speed", "max_sacc_dur", "max_sacc_velocity",
          "mean_sacc_dur", "mean_sacc_velocity", "theta_mean", "alpha_mean", "beta_mean", "gamma_mean"}},
        {"reports", json::array()}}},
      {"patterns", {{"features", "electrode_features_gamma"}}},
      {"synth", to_json(SynthSpec{})},
  };
}

namespace {

const char* kind_name(const json& j) {
  switch (j.type()) {
    case json::value_t::string: return "a string";
    case json::value_t::boolean: return "a boolean";
    case json::value_t::array: return "a list";
    case json::value_t::object: return "a table";
    default: return "a number";
  }
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

// Overlays `src` onto `dst`, refusing keys and types unknown to `dst`.
void overlay(json& dst, const json& src, const std::string& prefix) {
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!dst.contains(it.key())) {
      std::string valid;
      for (auto d = dst.begin(); d != dst.end(); ++d) valid += (valid.empty() ? "" : ", ") + d.key();
      throw UsageError("unknown config key '" + key + "' (valid here: " + valid + ")");
    }
    auto& target = dst[it.key()];
    if (target.is_object() && it->is_object() && key.rfind("synth", 0) != 0) {
      overlay(target, *it, key);
      continue;
    }
    if (target.is_object() && it->is_object()) {
      target.merge_patch(*it);
      continue;
    }
    if (!same_kind(target, *it))
      throw ParameterError("config key '" + key + "' must be " + kind_name(target) + ", got " +
                           kind_name(*it));
    target = *it;
  }
}

const json* lookup(const json& cfg, const std::string& dotted) {
  const json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const auto part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

// Interprets a flag value with the type of the key's default.
json coerce(const json& def, const std::string& key, const std::string& raw) {
  if (def.is_string()) {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') return parse_config_value(raw);
    return raw;
  }
  if (def.is_array()) {
    json arr = json::array();
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) arr.push_back(parse_config_value(item));
    return arr;
  }
  json v = parse_config_value(raw);
  if (!same_kind(def, v))
    throw ParameterError("value '" + raw + "' for '" + key + "' must be " + kind_name(def));
  return v;
}

struct Settings {
  std::vector<std::pair<std::string, std::string>> overrides;  // flag key, raw value
  std::string config_path;
};

json resolve(Settings& s) {
  json cfg = default_config();
  if (!s.config_path.empty()) overlay(cfg, load_config(s.config_path), "");
  for (const auto& [key, raw] : s.overrides) {
    const json* def = lookup(cfg, key);
    if (!def) throw UsageError("unknown config key '" + key + "'");
    set_config_path(cfg, key, coerce(*def, key, raw));
  }
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Experiment settings only: where results go and how many threads compute
// them do not change any result.
json experiment_config(const json& cfg) {
  json e = cfg;
  e.erase("out");
  e.erase("jobs");
  return e;
}

struct Run {
  std::string command;
  json cfg;
  fs::path dir;
  std::uint64_t seed = 1;
  unsigned jobs = 0;
  std::vector<std::string> warnings;

  json envelope(json body) const {
    body["schema_version"] = kReportSchemaVersion;
    body["command"] = command;
    body["version"] = READTASK_VERSION;
    body["seed"] = seed;
    body["config"] = experiment_config(cfg);
    if (!body.contains("warnings")) body["warnings"] = warnings;
    return body;
  }
};

Run start_run(const std::string& command, const json& cfg) {
  Run r;
  r.command = command;
  r.cfg = cfg;
  if (cfg["seed"].is_number_integer() && cfg["seed"].get<long long>() < 0 && !cfg["seed"].is_number_unsigned())
    throw ParameterError("seed must be a non-negative integer");
  r.seed = cfg["seed"].get<std::uint64_t>();
  const auto jobs = cfg["jobs"].get<long long>();
  if (jobs < 0) throw ParameterError("jobs must be ≥ 0");
  r.jobs = static_cast<unsigned>(jobs);
  char id[17];
  std::snprintf(id, sizeof id, "%016llx",
                static_cast<unsigned long long>(hash_name(command + "\n" + experiment_config(cfg).dump())));
  r.dir = fs::path(cfg["out"].get<std::string>()) / (command + "-" + id);
  return r;
}

FeatureConfig feature_config(const json& cfg, bool include_sr = false) {
  FeatureConfig fc;
  fc.eeg.power = dsp::parse_power_mode(cfg["eeg"]["power"].get<std::string>());
  fc.eeg.subbands = cfg["eeg"]["subbands"].get<int>();
  fc.include_sr = include_sr;
  return fc;
}

EvalOptions eval_options(const Run& run) {
  const auto& e = run.cfg["eval"];
  EvalOptions o;
  o.seed = run.seed;
  o.jobs = run.jobs;
  o.runs = e["runs"].get<int>();
  o.test_fraction = e["test_fraction"].get<double>();
  o.folds = e["folds"].get<int>();
  o.seeds = e["seeds"].get<int>();
  const auto min_samples = e["min_samples"].get<long long>();
  if (min_samples < 0) throw ParameterError("min_samples must be ≥ 0");
  o.min_samples = static_cast<std::size_t>(min_samples);
  o.balanced = e["balanced"].get<bool>();
  o.audit = e["audit"].get<bool>();
  const auto& s = run.cfg["svm"];
  o.svm.C = s["C"].get<double>();
  o.svm.gap_tol = s["gap_tol"].get<double>();
  o.svm.max_epochs = s["max_epochs"].get<int>();
  const auto& l = run.cfg["lstm"];
  o.lstm.hidden = l["hidden"].get<int>();
  o.lstm.dense = l["dense"].get<int>();
  o.lstm.learning_rate = l["learning_rate"].get<double>();
  o.lstm.batch_size = l["batch_size"].get<int>();
  o.lstm.max_epochs = l["max_epochs"].get<int>();
  o.lstm.patience = l["patience"].get<int>();
  o.lstm.min_delta = l["min_delta"].get<double>();
  o.lstm.validation_fraction = l["validation_fraction"].get<double>();
  return o;
}

Corpus get_corpus(Run& run) {
  const auto& d = run.cfg["data"];
  Corpus corpus;
  const auto path = d["corpus"].get<std::string>();
  if (!path.empty()) {
    corpus = load_corpus(path);
  } else if (d["synthetic"].get<bool>()) {
    corpus = synthesize_corpus(synth_spec_from_json(run.cfg["synth"]), run.seed);
  } else {
    throw UsageError("no corpus given: pass --corpus DIR or --synthetic");
  }
  std::set<std::string> exclude;
  for (const auto& id : d["exclude"]) exclude.insert(id.get<std::string>());
  for (const auto& id : exclude) {
    auto it = std::find_if(corpus.subjects.begin(), corpus.subjects.end(),
                           [&](const SubjectData& s) { return s.meta.subject_id == id; });
    if (it == corpus.subjects.end()) run.warnings.push_back("excluded subject " + id + " is not in the corpus");
    else corpus.subjects.erase(it);
  }
  return corpus;
}

std::optional<EmbeddingTable> embeddings(const json& cfg) {
  const auto path = cfg["data"]["embeddings"].get<std::string>();
  if (path.empty()) return std::nullopt;
  return EmbeddingTable::load(path);
}

const std::vector<std::string>& protocols() {
  static const std::vector<std::string> p{"within-sentence", "within-word", "cross-subject"};
  return p;
}

std::string joined(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

void check_feature_set(const std::string& name) {
  if (!is_sentence_set(name) && !is_word_set(name))
    throw UsageError("unknown feature set '" + name + "'; sentence-level: " + joined(sentence_set_names()) +
                     "; word-level: " + joined(word_set_names()));
}

void finish_eval_outputs(const Run& run, EvalReport& r, const std::string& scheme) {
  r.config = experiment_config(run.cfg);
  r.warnings.insert(r.warnings.begin(), run.warnings.begin(), run.warnings.end());
  json j = to_json(r);
  j["command"] = run.command;
  j["version"] = READTASK_VERSION;
  write_json(run.dir / "report.json", j);
  std::ostringstream summary, confusion;
  write_summary_csv(r, summary);
  write_text(run.dir / "summary.csv", summary.str());
  write_confusion_csv(r.confusion, r.label_names, confusion);
  write_text(run.dir / ("confusion_" + scheme + ".csv"), confusion.str());
}

void cmd_eval(Run& run) {
  const auto& e = run.cfg["eval"];
  const auto protocol = e["protocol"].get<std::string>();
  const auto features = e["features"].get<std::string>();
  const auto scheme_str = e["scheme"].get<std::string>();
  if (std::find(protocols().begin(), protocols().end(), protocol) == protocols().end())
    throw UsageError("unknown protocol '" + protocol + "' (valid: " + joined(protocols()) + ")");
  check_feature_set(features);
  const auto scheme = parse_scheme(scheme_str);
  const bool word = is_word_set(features);
  if (protocol == "within-word" && !word)
    throw UsageError("protocol within-word needs a word-level feature set (" + joined(word_set_names()) + ")");
  if (protocol == "within-sentence" && word)
    throw UsageError("protocol within-sentence needs a sentence-level feature set (" +
                     joined(sentence_set_names()) + ")");
  if (scheme != LabelScheme::task && protocol != "within-sentence")
    throw UsageError("label scheme '" + scheme_str + "' is only available with protocol within-sentence");

  const auto corpus = get_corpus(run);
  const auto opts = eval_options(run);
  const auto fc = feature_config(run.cfg, scheme == LabelScheme::session);
  EvalReport r;
  if (word) {
    const auto table = embeddings(run.cfg);
    const auto s = assemble_sequence_set(corpus, features, fc, table ? &*table : nullptr);
    r = protocol == "within-word" ? within_subject_word(s, opts) : cross_subject(s, opts);
  } else {
    const auto m = assemble_feature_set(corpus, features, fc);
    if (protocol == "cross-subject") r = cross_subject(m, opts);
    else if (scheme == LabelScheme::task && !opts.balanced) r = within_subject_sentence(m, opts);
    else r = relabel_and_classify(m, scheme, opts);
  }
  finish_eval_outputs(run, r, scheme_str);
}

void cmd_ablate_fixations(Run& run) {
  const auto& a = run.cfg["ablation"];
  const auto band = a["band"].get<std::string>();
  const auto corpus = get_corpus(run);
  const auto opts = eval_options(run);
  const auto fc = feature_config(run.cfg);
  json rows = json::array();
  std::string csv = "fraction,subject_id,samples,accuracy\n";
  std::string summary = "fraction,median,mad\n";
  for (const auto& f : a["fractions"]) {
    const double fraction = f.get<double>();
    const auto r = within_subject_sentence(ablated_feature_set(corpus, band, fraction, fc), opts);
    for (const auto& s : r.subjects)
      csv += fmt(fraction) + "," + s.subject_id + "," + std::to_string(s.samples) + "," + fmt(s.accuracy) + "\n";
    summary += fmt(fraction) + "," + fmt(r.median) + "," + fmt(r.mad) + "\n";
    json subjects = json::array();
    for (const auto& s : r.subjects) subjects.push_back({{"subject_id", s.subject_id}, {"accuracy", s.accuracy}});
    rows.push_back({{"fraction", fraction},
                    {"median", r.median},
                    {"mad", r.mad},
                    {"subjects", subjects},
                    {"warnings", r.warnings}});
  }
  write_json(run.dir / "report.json",
             run.envelope({{"kind", "fixation_ablation"}, {"band", band}, {"rows", rows}}));
  write_text(run.dir / "fixation_ablation.csv", csv);
  write_text(run.dir / "summary.csv", summary);
}

void cmd_ablate_blocks(Run& run) {
  const auto& a = run.cfg["ablation"];
  const auto features = a["features"].get<std::string>();
  check_feature_set(features);
  if (!is_sentence_set(features)) throw UsageError("block ablation needs a sentence-level feature set");
  const auto corpus = get_corpus(run);
  const auto m = assemble_feature_set(corpus, features, feature_config(run.cfg));
  const auto rep = block_ablation(m, a["k_max"].get<int>(), a["repeats"].get<int>(), eval_options(run));
  json body = to_json(rep);
  std::vector<double> ks, means;
  std::string csv = "k,mean,std,mean_train_samples\n";
  for (const auto& row : rep.rows) {
    ks.push_back(row.k);
    means.push_back(row.mean);
    csv += std::to_string(row.k) + "," + fmt(row.mean) + "," + fmt(row.std) + "," + fmt(row.mean_train_samples) + "\n";
  }
  if (ks.size() >= 3) body["trend"] = to_json(spearman(ks, means));
  write_json(run.dir / "report.json", run.envelope(body));
  write_text(run.dir / "block_ablation.csv", csv);
}

void cmd_outliers(Run& run) {
  const auto corpus = get_corpus(run);
  json results = json::array();
  std::string csv = "feature,group_mean,group_std,outliers\n";
  for (const auto& f : run.cfg["analysis"]["outlier_features"]) {
    const auto name = f.get<std::string>();
    try {
      const auto r = detect_outliers(corpus, name);
      results.push_back(to_json(r));
      std::string flagged;
      for (const auto& id : r.flagged) flagged += (flagged.empty() ? "" : ";") + id;
      csv += name + "," + fmt(r.group_mean) + "," + fmt(r.group_std) + "," + flagged + "\n";
    } catch (const DataError& e) {
      if (corpus.subjects.size() < 3) throw;
      run.warnings.push_back(name + " skipped: " + e.what());
    } catch (const UnsupportedError& e) {
      run.warnings.push_back(name + " skipped: " + e.what());
    }
  }
  write_json(run.dir / "report.json", run.envelope({{"kind", "outliers"}, {"results", results}}));
  write_text(run.dir / "outliers.csv", csv);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return in;
}

EvalReport read_report(const std::string& path) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
  if (j.value("schema_version", 0) != kReportSchemaVersion)
    throw ValidationError(path + ": unsupported report schema version");
  if (!j.contains("subjects")) throw ValidationError(path + ": not an evaluation report");
  EvalReport r;
  r.protocol = j.value("protocol", "");
  r.feature_set = j.value("feature_set", "");
  for (const auto& s : j["subjects"]) {
    SubjectResult sr;
    sr.subject_id = s.at("subject_id").get<std::string>();
    sr.accuracy = s.at("accuracy").get<double>();
    r.subjects.push_back(sr);
  }
  return r;
}

void cmd_correlate(Run& run) {
  const auto& paths = run.cfg["analysis"]["reports"];
  if (paths.empty()) throw UsageError("correlate needs at least one --report FILE");
  std::vector<EvalReport> reports;
  for (const auto& p : paths) reports.push_back(read_report(p.get<std::string>()));
  const auto corpus = get_corpus(run);
  std::vector<SubjectMeta> meta;
  for (const auto& s : corpus.subjects) meta.push_back(s.meta);
  const auto rows = correlation_table(reports, meta);
  std::string csv = "protocol,feature_set,covariate,n,rho,p,significant\n";
  for (const auto& r : rows)
    csv += r.protocol + "," + r.feature_set + "," + r.covariate + "," + std::to_string(r.result.n) + "," +
           (r.result.rho ? fmt(*r.result.rho) : "undefined") + "," + (r.result.p ? fmt(*r.result.p) : "") + "," +
           (r.significant ? "*" : "") + "\n";
  write_json(run.dir / "report.json", run.envelope({{"kind", "correlations"}, {"rows", to_json(rows)}}));
  write_text(run.dir / "correlations.csv", csv);
}

void cmd_patterns(Run& run) {
  const auto features = run.cfg["patterns"]["features"].get<std::string>();
  if (features.rfind("electrode_features_", 0) != 0)
    throw UsageError("patterns need an electrode feature set (electrode_features_theta, _alpha, _beta, "
                     "_gamma or _all), got '" + features + "'");
  check_feature_set(features);
  const auto corpus = get_corpus(run);
  const auto m = assemble_feature_set(corpus, features, feature_config(run.cfg));
  auto opts = eval_options(run);

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto [it, fresh] = by_subject.try_emplace(m.groups[i].subject_id);
    if (fresh) order.push_back(m.groups[i].subject_id);
    it->second.push_back(i);
  }
  std::vector<std::vector<double>> per_subject(order.size());
  parallel_for(order.size(), opts.jobs, [&](std::size_t k) {
    const auto subset = m.subset(by_subject.at(order[k]));
    if (std::set<int>(subset.labels.begin(), subset.labels.end()).size() < 2) return;
    const auto scaled = apply_scaler(fit_scaler(subset), subset);
    SvmOptions svm = opts.svm;
    svm.seed = derive_seed(opts.seed, {hash_name(order[k]), hash_name("pattern")});
    per_subject[k] = forward_model_pattern(train_svm(scaled, svm), scaled)[0];
  });

  std::vector<double> mean(m.dim(), 0.0);
  json subjects = json::array();
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (per_subject[k].empty()) {
      run.warnings.push_back("subject " + order[k] + " skipped: only one class present");
      continue;
    }
    subjects.push_back(order[k]);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += per_subject[k][j];
  }
  if (subjects.empty()) throw DataError("no subject has both tasks");
  double norm = 0;
  for (double v : mean) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0)
    for (double& v : mean) v /= norm;

  json files = json::array();
  for (const auto& [band, values] : band_patterns(mean, m.feature_names)) {
    const std::string file = "patterns_" + band + ".json";
    write_json(run.dir / file, pattern_json(band, values));
    files.push_back(file);
  }
  write_json(run.dir / "report.json",
             run.envelope({{"kind", "patterns"}, {"feature_set", features}, {"subjects", subjects},
                           {"positive_class", "TSR"}, {"files", files}}));
}

void cmd_stats(Run& run) {
  const auto rows = descriptive_stats(get_corpus(run));
  std::string csv = "quantity,nr_n,nr_mean,nr_std,tsr_n,tsr_mean,tsr_std,welch_p\n";
  for (const auto& r : rows)
    csv += r.quantity + "," + std::to_string(r.n_nr) + "," + fmt(r.nr_mean) + "," + fmt(r.nr_std) + "," +
           std::to_string(r.n_tsr) + "," + fmt(r.tsr_mean) + "," + fmt(r.tsr_std) + "," + fmt(r.p_value) + "\n";
  write_json(run.dir / "report.json", run.envelope({{"kind", "descriptive_stats"}, {"rows", to_json(rows)}}));
  write_text(run.dir / "stats.csv", csv);
}

void cmd_features(Run& run) {
  const auto features = run.cfg["eval"]["features"].get<std::string>();
  check_feature_set(features);
  const auto corpus = get_corpus(run);
  const auto fc = feature_config(run.cfg, run.cfg["eval"]["scheme"].get<std::string>() == "session");
  std::ostringstream csv;
  std::size_t samples = 0;
  if (is_word_set(features)) {
    const auto table = embeddings(run.cfg);
    const auto s = assemble_sequence_set(corpus, features, fc, table ? &*table : nullptr);
    write_csv(s, csv);
    samples = s.size();
  } else {
    const auto m = assemble_feature_set(corpus, features, fc);
    write_csv(m, csv);
    samples = m.size();
  }
  const std::string file = "features_" + features + ".csv";
  write_text(run.dir / file, csv.str());
  write_json(run.dir / "report.json",
             run.envelope({{"kind", "features"}, {"feature_set", features}, {"samples", samples}, {"file", file}}));
}

void cmd_synth(Run& run, const std::string& corpus_out) {
  const auto spec = synth_spec_from_json(run.cfg["synth"]);
  const auto corpus = synthesize_corpus(spec, run.seed);
  const fs::path dir = corpus_out.empty() ? run.dir / "corpus" : fs::path(corpus_out);
  save_corpus(corpus, dir);
  std::size_t sentences = 0;
  for (const auto& s : corpus.subjects) sentences += s.sentences.size();
  json body{{"kind", "synth"}, {"subjects", corpus.subjects.size()}, {"sentences", sentences},
            {"corpus", corpus_out.empty() ? "corpus" : dir.string()}};
  try {
    const auto b = bayes_oracle(spec, {"omission_rate"}, run.seed);
    body["bayes_accuracy"] = {{"omission_rate", {{"accuracy", b.accuracy}, {"method", b.method}}}};
  } catch (const UnsupportedError&) {
  }
  write_json(run.dir / "report.json", run.envelope(body));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reading-task classification from eye-tracking and EEG features", "readtask"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version",
                       std::string("readtask ") + READTASK_VERSION + " (report schema " +
                           std::to_string(kReportSchemaVersion) + ")");

  Settings settings;
  auto flag_value = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&settings, key](const std::string& v) { settings.overrides.push_back({key, v}); }, help);
  };
  auto flag_bool = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_flag_function(
        flag, [&settings, key](std::int64_t) { settings.overrides.push_back({key, "true"}); }, help);
  };

  app.add_option("--config", settings.config_path, "Configuration file")->check(CLI::ExistingFile);
  flag_value(&app, "--seed", "seed", "Master seed");
  flag_value(&app, "--jobs", "jobs", "Concurrent work items (0 = logical cores)");
  flag_value(&app, "--out", "out", "Output root directory");
  flag_value(&app, "--corpus", "data.corpus", "Corpus directory");
  flag_bool(&app, "--synthetic", "data.synthetic", "Synthesize the corpus from the [synth] settings");
  std::vector<std::string> sets;
  app.add_option("--set", sets, "Override any config key: --set section.key=value");

  std::string corpus_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  flag_value(synth, "--subjects", "synth.subjects", "Number of subjects");
  flag_value(synth, "--sentences-per-class", "synth.sentences_per_class", "Sentences per task and subject");
  flag_value(synth, "--eeg", "synth.eeg", "none, band_power or continuous");
  flag_value(synth, "--layout", "synth.layout", "blocks or sessions");
  synth->add_option("--corpus-out", corpus_out, "Write the corpus here instead of the run directory");

  auto* features = app.add_subcommand("features", "Export a feature matrix as CSV");
  flag_value(features, "--features", "eval.features", "Feature set");

  auto* eval = app.add_subcommand("eval", "Evaluate a feature set");
  flag_value(eval, "--protocol", "eval.protocol", "within-sentence, within-word or cross-subject");
  flag_value(eval, "--features", "eval.features", "Feature set");
  flag_value(eval, "--scheme", "eval.scheme", "task, session, block or subject");
  flag_bool(eval, "--balanced", "eval.balanced", "Subsample classes to equal counts");
  flag_bool(eval, "--audit", "eval.audit", "Record every split in the report");
  flag_value(eval, "--runs", "eval.runs", "Splits per subject (within-sentence)");
  flag_value(eval, "--folds", "eval.folds", "Folds (within-word)");
  flag_value(eval, "--seeds", "eval.seeds", "Repetitions (within-word)");
  flag_value(eval, "--test-fraction", "eval.test_fraction", "Test share of each split");

  auto* fix = app.add_subcommand("ablate-fixations", "Accuracy when only the first fixations are used");
  flag_value(fix, "--band", "ablation.band", "EEG band");
  flag_value(fix, "--fractions", "ablation.fractions", "Comma-separated fixation fractions");
  flag_value(fix, "--runs", "eval.runs", "Splits per subject");

  auto* blocks = app.add_subcommand("ablate-blocks", "Accuracy against the number of training blocks");
  flag_value(blocks, "--features", "ablation.features", "Feature set");
  flag_value(blocks, "--k-max", "ablation.k_max", "Largest number of training blocks per task");
  flag_value(blocks, "--repeats", "ablation.repeats", "Random block draws per k and subject");

  auto* outliers = app.add_subcommand("outliers", "Flag subjects outside mean ± 2 std");
  flag_value(outliers, "--features", "analysis.outlier_features", "Comma-separated single-valued features");

  auto* correlate = app.add_subcommand("correlate", "Correlate accuracies with subject covariates");
  std::vector<std::string> report_paths;
  correlate->add_option("--report", report_paths, "Evaluation report.json (repeatable)");

  auto* patterns = app.add_subcommand("patterns", "Forward-model patterns of per-subject SVMs");
  flag_value(patterns, "--features", "patterns.features", "Electrode feature set");

  auto* stats = app.add_subcommand("stats", "Per-task descriptive statistics");
  (void)stats;

  auto fail = [&](const std::string& kind, const std::string& message, int code) {
    err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
    return code;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), e.kind() == "usage" ? 2 : 1);
  }

  try {
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
      settings.overrides.push_back({s.substr(0, eq), s.substr(eq + 1)});
    }
    json cfg = resolve(settings);
    if (!report_paths.empty()) cfg["analysis"]["reports"] = report_paths;

    const std::string command = app.get_subcommands().front()->get_name();
    Run run = start_run(command, cfg);
    if (command == "synth") cmd_synth(run, corpus_out);
    else if (command == "features") cmd_features(run);
    else if (command == "eval") cmd_eval(run);
    else if (command == "ablate-fixations") cmd_ablate_fixations(run);
    else if (command == "ablate-blocks") cmd_ablate_blocks(run);
    else if (command == "outliers") cmd_outliers(run);
    else if (command == "correlate") cmd_correlate(run);
    else if (command == "patterns") cmd_patterns(run);
    else cmd_stats(run);
    out << run.dir.string() << "\n";
    return 0;
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), e.kind() == "usage" ? 2 : 1);
  } catch (const json::exception& e) {
    return fail("parameter", std::string("invalid config value: ") + e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
}

}  // namespace readtask
