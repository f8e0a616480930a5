#include "readtask/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>

#include "readtask/error.hpp"
#include "readtask/parallel.hpp"

namespace readtask {

std::string_view scheme_name(LabelScheme s) {
  switch (s) {
    case LabelScheme::task: return "task";
    case LabelScheme::session: return "session";
    case LabelScheme::block: return "block";
    case LabelScheme::subject: return "subject";
  }
  return "task";
}

LabelScheme parse_scheme(std::string_view s) {
  if (s == "task") return LabelScheme::task;
  if (s == "session") return LabelScheme::session;
  if (s == "block") return LabelScheme::block;
  if (s == "subject") return LabelScheme::subject;
  throw UsageError("unknown label scheme '" + std::string(s) +
                   "' (valid: task, session, block, subject)");
}

FeatureMatrix relabel(const FeatureMatrix& m, LabelScheme scheme) {
  m.check();
  FeatureMatrix out = m;
  out.label_names.clear();
  if (scheme == LabelScheme::task) {
    out.label_names = task_label_names();
    for (std::size_t i = 0; i < m.size(); ++i) out.labels[i] = static_cast<int>(m.groups[i].task);
  } else if (scheme == LabelScheme::subject) {
    std::set<std::string> ids;
    for (const auto& g : m.groups) ids.insert(g.subject_id);
    std::map<std::string, int> index;
    for (const auto& id : ids) {
      const int k = static_cast<int>(index.size());
      index[id] = k;
      out.label_names[k] = id;
    }
    for (std::size_t i = 0; i < m.size(); ++i) out.labels[i] = index.at(m.groups[i].subject_id);
  } else {
    const bool session = scheme == LabelScheme::session;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const int v = session ? m.groups[i].session_id : m.groups[i].block_id;
      out.labels[i] = v;
      out.label_names[v] = (session ? "session_" : "block_") + std::to_string(v);
    }
  }
  if (out.label_names.size() < 2)
    throw DataError("label scheme '" + std::string(scheme_name(scheme)) +
                    "' needs at least two distinct values in the data");
  return out;
}

MedianMad median_mad(std::span<const double> values) {
  if (values.empty()) throw DataError("median of an empty list");
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  const double med = median({values.begin(), values.end()});
  std::vector<double> dev;
  for (double v : values) dev.push_back(std::abs(v - med));
  return {med, median(dev)};
}

ConfusionMatrix::ConfusionMatrix(std::vector<int> cls)
    : classes(std::move(cls)), counts(classes.size(), std::vector<long>(classes.size(), 0)) {}

void ConfusionMatrix::add(int truth, int predicted) {
  auto pos = [&](int label) {
    auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label)
      throw DataError("label " + std::to_string(label) + " is not a confusion-matrix class");
    return static_cast<std::size_t>(it - classes.begin());
  };
  ++counts[pos(truth)][pos(predicted)];
}

void ConfusionMatrix::merge(const ConfusionMatrix& o) {
  if (o.classes != classes) throw DataError("confusion matrices have different classes");
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = 0; j < counts.size(); ++j) counts[i][j] += o.counts[i][j];
}

long ConfusionMatrix::total() const {
  long t = 0;
  for (const auto& r : counts) t += std::accumulate(r.begin(), r.end(), 0L);
  return t;
}

std::vector<long> ConfusionMatrix::row_sums() const {
  std::vector<long> out;
  for (const auto& r : counts) out.push_back(std::accumulate(r.begin(), r.end(), 0L));
  return out;
}

std::vector<double> EvalReport::accuracies() const {
  std::vector<double> a;
  for (const auto& s : subjects) a.push_back(s.accuracy);
  return a;
}

namespace {

using Partition = std::vector<std::pair<std::string, std::vector<std::size_t>>>;

template <class Set>
Partition by_subject(const Set& m) {
  Partition p;
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < m.groups.size(); ++i) {
    const auto& id = m.groups[i].subject_id;
    auto [it, fresh] = pos.try_emplace(id, p.size());
    if (fresh) p.push_back({id, {}});
    p[it->second].second.push_back(i);
  }
  return p;
}

std::vector<int> label_set(const std::vector<int>& labels) {
  std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

std::map<int, std::vector<std::size_t>> by_label(const std::vector<int>& labels,
                                                 const std::vector<std::size_t>& idx) {
  std::map<int, std::vector<std::size_t>> out;
  for (auto i : idx) out[labels[i]].push_back(i);
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<int>& labels, const std::vector<std::size_t>& idx, double test_fraction,
    std::mt19937_64& rng) {
  std::vector<std::size_t> train, test;
  for (auto& [label, members] : by_label(labels, idx)) {
    std::shuffle(members.begin(), members.end(), rng);
    std::size_t n_test = 0;
    if (members.size() >= 2)
      n_test = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(members.size()))), 1,
          members.size() - 1);
    test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

// Fold id per sample; every class is dealt round-robin after a shuffle.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels,
                                                       const std::vector<std::size_t>& idx,
                                                       int folds, std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  std::size_t next = 0;
  for (auto& [label, members] : by_label(labels, idx)) {
    std::shuffle(members.begin(), members.end(), rng);
    for (auto i : members) out[next++ % out.size()].push_back(i);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

template <class Set>
std::vector<std::string> sample_ids(const Set& m, const std::vector<std::size_t>& idx) {
  std::vector<std::string> ids;
  for (auto i : idx) ids.push_back(m.groups[i].subject_id + "/" + m.groups[i].sentence_id);
  return ids;
}

struct Outcome {
  bool done = false;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  SplitRecord record;
};

Outcome svm_outcome(const FeatureMatrix& m, const std::vector<std::size_t>& train_idx,
                    const std::vector<std::size_t>& test_idx, const std::vector<int>& classes,
                    const SvmOptions& svm, bool audit) {
  Outcome o;
  o.confusion = ConfusionMatrix(classes);
  const auto train = m.subset(train_idx);
  const auto scaler = fit_scaler(train);
  const auto model = train_svm(apply_scaler(scaler, train), svm);
  const auto test = apply_scaler(scaler, m.subset(test_idx));
  const auto pred = model.predict(test);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ok += pred[i] == test.labels[i];
    o.confusion.add(test.labels[i], pred[i]);
  }
  o.accuracy = static_cast<double>(ok) / static_cast<double>(pred.size());
  o.done = true;
  if (audit) o.record = {"", 0, sample_ids(m, train_idx), sample_ids(m, test_idx), scaler, o.accuracy};
  return o;
}

Outcome lstm_outcome(const SequenceSet& s, const std::vector<std::size_t>& train_idx,
                     const std::vector<std::size_t>& test_idx, const std::vector<int>& classes,
                     const BiLstmHyper& hyper, std::uint64_t seed, bool audit) {
  Outcome o;
  o.confusion = ConfusionMatrix(classes);
  const auto train = s.subset(train_idx);
  const auto scaler = fit_scaler(train);
  const auto model = train_bilstm(apply_scaler(scaler, train), hyper, seed);
  const auto test = apply_scaler(scaler, s.subset(test_idx));
  const auto pred = model.predict(test);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ok += pred[i] == test.labels[i];
    // A class absent from training can still be predicted by the padded
    // output layer; such predictions count as errors against known classes.
    if (std::binary_search(classes.begin(), classes.end(), pred[i]))
      o.confusion.add(test.labels[i], pred[i]);
  }
  o.accuracy = static_cast<double>(ok) / static_cast<double>(pred.size());
  o.done = true;
  if (audit) o.record = {"", 0, sample_ids(s, train_idx), sample_ids(s, test_idx), scaler, o.accuracy};
  return o;
}

void finish(EvalReport& r) {
  const auto acc = r.accuracies();
  if (acc.empty()) {
    r.warnings.push_back("no subject could be evaluated");
    return;
  }
  const auto mm = median_mad(acc);
  r.median = mm.median;
  r.mad = mm.mad;
}

// Within-group repeated stratified splits with an SVM; shared by the task,
// session, block and pooled subject evaluations.
EvalReport repeated_splits(const FeatureMatrix& m, const Partition& parts, const EvalOptions& opts,
                           std::string protocol) {
  m.check();
  if (opts.runs < 1) throw ParameterError("runs must be ≥ 1");
  if (!(opts.test_fraction > 0.0 && opts.test_fraction < 1.0))
    throw ParameterError("test_fraction must be in (0, 1)");
  EvalReport r;
  r.protocol = std::move(protocol);
  r.feature_set = m.set_name;
  r.model = "svm";
  r.seed = opts.seed;
  r.label_names = m.label_names;
  const auto classes = label_set(m.labels);
  r.confusion = ConfusionMatrix(classes);

  std::vector<std::size_t> usable;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& [id, idx] = parts[p];
    std::set<int> present;
    for (auto i : idx) present.insert(m.labels[i]);
    if (idx.size() < opts.min_samples)
      r.warnings.push_back("subject " + id + " skipped: " + std::to_string(idx.size()) +
                           " samples (< " + std::to_string(opts.min_samples) + ")");
    else if (present.size() < 2)
      r.warnings.push_back("subject " + id + " skipped: only one class present");
    else
      usable.push_back(p);
  }

  const auto runs = static_cast<std::size_t>(opts.runs);
  std::vector<Outcome> out(usable.size() * runs);
  parallel_for(out.size(), opts.jobs, [&](std::size_t item) {
    const auto& [id, idx] = parts[usable[item / runs]];
    const auto run = item % runs;
    const auto seed = derive_seed(opts.seed, {hash_name(id), run});
    std::mt19937_64 rng(derive_seed(seed, {0}));
    auto [train, test] = stratified_split(m.labels, idx, opts.test_fraction, rng);
    std::set<int> train_classes;
    for (auto i : train) train_classes.insert(m.labels[i]);
    if (test.empty() || train_classes.size() < 2) return;
    SvmOptions svm = opts.svm;
    svm.seed = derive_seed(seed, {1});
    out[item] = svm_outcome(m, train, test, classes, svm, opts.audit);
    out[item].record.subject_id = id;
    out[item].record.run = static_cast<int>(run);
  });

  for (std::size_t u = 0; u < usable.size(); ++u) {
    SubjectResult sr;
    sr.subject_id = parts[usable[u]].first;
    sr.samples = parts[usable[u]].second.size();
    sr.confusion = ConfusionMatrix(classes);
    for (std::size_t run = 0; run < runs; ++run) {
      auto& o = out[u * runs + run];
      if (!o.done) continue;
      sr.run_accuracies.push_back(o.accuracy);
      sr.confusion.merge(o.confusion);
      ++r.models_trained;
      if (opts.audit) r.splits.push_back(std::move(o.record));
    }
    if (sr.run_accuracies.empty()) {
      r.warnings.push_back("subject " + sr.subject_id + " skipped: no usable split");
      continue;
    }
    sr.accuracy = std::accumulate(sr.run_accuracies.begin(), sr.run_accuracies.end(), 0.0) /
                  static_cast<double>(sr.run_accuracies.size());
    r.confusion.merge(sr.confusion);
    r.subjects.push_back(std::move(sr));
  }
  finish(r);
  return r;
}

// Keeps an equal number of samples per class inside every group.
std::vector<std::size_t> balance(const std::vector<int>& labels, const Partition& parts,
                                 std::uint64_t seed) {
  std::vector<std::size_t> keep;
  for (const auto& [id, idx] : parts) {
    auto groups = by_label(labels, idx);
    std::size_t smallest = idx.size();
    for (const auto& [l, members] : groups) smallest = std::min(smallest, members.size());
    std::mt19937_64 rng(derive_seed(seed, {hash_name(id), hash_name("balance")}));
    for (auto& [l, members] : groups) {
      std::shuffle(members.begin(), members.end(), rng);
      keep.insert(keep.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(smallest));
    }
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

}  // namespace

EvalReport within_subject_sentence(const FeatureMatrix& m, const EvalOptions& opts) {
  return repeated_splits(m, by_subject(m), opts, "within-sentence");
}

EvalReport within_subject_word(const SequenceSet& s, const EvalOptions& opts) {
  s.check();
  if (opts.folds < 2) throw ParameterError("folds must be ≥ 2");
  if (opts.seeds < 1) throw ParameterError("seeds must be ≥ 1");
  EvalReport r;
  r.protocol = "within-word";
  r.feature_set = s.set_name;
  r.model = "bilstm";
  r.seed = opts.seed;
  r.label_names = s.label_names;
  const auto classes = label_set(s.labels);
  r.confusion = ConfusionMatrix(classes);
  const auto parts = by_subject(s);

  std::vector<std::size_t> usable;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& [id, idx] = parts[p];
    if (idx.size() < std::max<std::size_t>(opts.min_samples, static_cast<std::size_t>(opts.folds)))
      r.warnings.push_back("subject " + id + " skipped: " + std::to_string(idx.size()) + " samples");
    else
      usable.push_back(p);
  }

  const auto folds = static_cast<std::size_t>(opts.folds);
  const auto per_subject = folds * static_cast<std::size_t>(opts.seeds);
  // Fold partitions are drawn up front so every fold of one seed shares them.
  const auto seeds = static_cast<std::size_t>(opts.seeds);
  std::vector<std::vector<std::vector<std::size_t>>> partitions(usable.size() * seeds);
  for (std::size_t u = 0; u < usable.size(); ++u)
    for (std::size_t k = 0; k < seeds; ++k) {
      const auto& [id, idx] = parts[usable[u]];
      std::mt19937_64 rng(derive_seed(opts.seed, {hash_name(id), k, 0}));
      partitions[u * seeds + k] = stratified_folds(s.labels, idx, opts.folds, rng);
    }

  std::vector<Outcome> out(usable.size() * per_subject);
  parallel_for(out.size(), opts.jobs, [&](std::size_t item) {
    const std::size_t u = item / per_subject;
    const std::size_t k = (item % per_subject) / folds;
    const std::size_t f = item % folds;
    const auto& fold_sets = partitions[u * seeds + k];
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds; ++g)
      if (g != f) train.insert(train.end(), fold_sets[g].begin(), fold_sets[g].end());
    std::sort(train.begin(), train.end());
    const auto& test = fold_sets[f];
    if (test.empty() || train.empty()) return;
    const auto& id = parts[usable[u]].first;
    const auto seed = derive_seed(opts.seed, {hash_name(id), k, f + 1});
    out[item] = lstm_outcome(s, train, test, classes, opts.lstm, seed, opts.audit);
    out[item].record.subject_id = id;
    out[item].record.run = static_cast<int>(item % per_subject);
  });

  for (std::size_t u = 0; u < usable.size(); ++u) {
    SubjectResult sr;
    sr.subject_id = parts[usable[u]].first;
    sr.samples = parts[usable[u]].second.size();
    sr.confusion = ConfusionMatrix(classes);
    for (std::size_t j = 0; j < per_subject; ++j) {
      auto& o = out[u * per_subject + j];
      if (!o.done) continue;
      sr.run_accuracies.push_back(o.accuracy);
      sr.confusion.merge(o.confusion);
      ++r.models_trained;
      if (opts.audit) r.splits.push_back(std::move(o.record));
    }
    if (sr.run_accuracies.empty()) continue;
    sr.accuracy = std::accumulate(sr.run_accuracies.begin(), sr.run_accuracies.end(), 0.0) /
                  static_cast<double>(sr.run_accuracies.size());
    r.confusion.merge(sr.confusion);
    r.subjects.push_back(std::move(sr));
  }
  finish(r);
  return r;
}

namespace {

template <class Set, class Train>
EvalReport leave_one_subject_out(const Set& s, const EvalOptions& opts, const char* model,
                                 Train&& train_one) {
  s.check();
  const auto parts = by_subject(s);
  if (parts.size() < 3)
    throw DataError("cross-subject evaluation needs at least 3 subjects (got " +
                    std::to_string(parts.size()) + ")");
  EvalReport r;
  r.protocol = "cross-subject";
  r.feature_set = s.set_name;
  r.model = model;
  r.seed = opts.seed;
  r.label_names = s.label_names;
  const auto classes = label_set(s.labels);
  r.confusion = ConfusionMatrix(classes);

  std::vector<Outcome> out(parts.size());
  parallel_for(parts.size(), opts.jobs, [&](std::size_t p) {
    std::vector<std::size_t> train;
    for (std::size_t q = 0; q < parts.size(); ++q)
      if (q != p) train.insert(train.end(), parts[q].second.begin(), parts[q].second.end());
    std::sort(train.begin(), train.end());
    const auto seed = derive_seed(opts.seed, {hash_name(parts[p].first), hash_name("loso")});
    out[p] = train_one(train, parts[p].second, classes, seed);
    out[p].record.subject_id = parts[p].first;
  });
  for (std::size_t p = 0; p < parts.size(); ++p) {
    SubjectResult sr;
    sr.subject_id = parts[p].first;
    sr.samples = parts[p].second.size();
    sr.accuracy = out[p].accuracy;
    sr.run_accuracies = {out[p].accuracy};
    sr.confusion = out[p].confusion;
    r.confusion.merge(sr.confusion);
    ++r.models_trained;
    if (opts.audit) r.splits.push_back(std::move(out[p].record));
    r.subjects.push_back(std::move(sr));
  }
  finish(r);
  return r;
}

}  // namespace

EvalReport cross_subject(const FeatureMatrix& m, const EvalOptions& opts) {
  return leave_one_subject_out(m, opts, "svm", [&](const auto& train, const auto& test,
                                                   const auto& classes, std::uint64_t seed) {
    SvmOptions svm = opts.svm;
    svm.seed = seed;
    return svm_outcome(m, train, test, classes, svm, opts.audit);
  });
}

EvalReport cross_subject(const SequenceSet& s, const EvalOptions& opts) {
  return leave_one_subject_out(s, opts, "bilstm", [&](const auto& train, const auto& test,
                                                      const auto& classes, std::uint64_t seed) {
    return lstm_outcome(s, train, test, classes, opts.lstm, seed, opts.audit);
  });
}

EvalReport relabel_and_classify(const FeatureMatrix& m, LabelScheme scheme,
                                const EvalOptions& opts) {
  FeatureMatrix data = relabel(m, scheme);
  const bool pooled = scheme == LabelScheme::subject;
  Partition parts;
  if (pooled) {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    parts.push_back({"all", all});
  } else {
    parts = by_subject(data);
  }
  if (opts.balanced) {
    data = data.subset(balance(data.labels, parts, opts.seed));
    parts = pooled ? Partition{} : by_subject(data);
    if (pooled) {
      std::vector<std::size_t> all(data.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      parts.push_back({"all", all});
    }
  }
  auto r = repeated_splits(data, parts, opts, pooled ? "pooled-sentence" : "within-sentence");
  r.scheme = std::string(scheme_name(scheme));
  if (pooled) r.chance_level = 1.0 / static_cast<double>(data.label_names.size());
  return r;
}

BlockAblationReport block_ablation(const FeatureMatrix& m, int k_max, int repeats,
                                   const EvalOptions& opts) {
  m.check();
  if (k_max < 1 || repeats < 1) throw ParameterError("k_max and repeats must be ≥ 1");
  BlockAblationReport rep;
  rep.feature_set = m.set_name;
  rep.seed = opts.seed;
  const auto parts = by_subject(m);

  struct SubjectBlocks {
    std::string id;
    std::vector<int> nr, tsr;
    std::map<int, std::vector<std::size_t>> samples;
  };
  std::vector<SubjectBlocks> subjects;
  for (const auto& [id, idx] : parts) {
    SubjectBlocks sb{id, {}, {}, {}};
    std::set<int> nr, tsr;
    for (auto i : idx) {
      const auto& g = m.groups[i];
      if (g.task == TaskLabel::NR) nr.insert(g.block_id);
      else if (g.task == TaskLabel::TSR) tsr.insert(g.block_id);
      else continue;
      sb.samples[g.block_id].push_back(i);
    }
    for (int b : nr)
      if (tsr.count(b))
        throw DataError("subject " + id + ": a block mixes NR and TSR sentences");
    if (static_cast<int>(nr.size()) <= k_max || static_cast<int>(tsr.size()) <= k_max)
      throw DataError("subject " + id + " has " + std::to_string(nr.size()) + " NR and " +
                      std::to_string(tsr.size()) + " TSR blocks; block ablation up to k = " +
                      std::to_string(k_max) + " needs " + std::to_string(k_max + 1) + " per task");
    sb.nr.assign(nr.begin(), nr.end());
    sb.tsr.assign(tsr.begin(), tsr.end());
    subjects.push_back(std::move(sb));
  }

  const auto classes = label_set(m.labels);
  const std::size_t per_k = subjects.size() * static_cast<std::size_t>(repeats);
  std::vector<Outcome> out(per_k * static_cast<std::size_t>(k_max));
  std::vector<std::size_t> train_sizes(out.size(), 0);
  parallel_for(out.size(), opts.jobs, [&](std::size_t item) {
    const int k = static_cast<int>(item / per_k) + 1;
    const auto& sb = subjects[(item % per_k) / static_cast<std::size_t>(repeats)];
    const auto rep_i = item % static_cast<std::size_t>(repeats);
    const auto seed = derive_seed(opts.seed, {hash_name(sb.id), static_cast<std::uint64_t>(k), rep_i});
    std::mt19937_64 rng(derive_seed(seed, {0}));
    auto nr = sb.nr, tsr = sb.tsr;
    std::shuffle(nr.begin(), nr.end(), rng);
    std::shuffle(tsr.begin(), tsr.end(), rng);
    std::set<int> chosen(nr.begin(), nr.begin() + k);
    chosen.insert(tsr.begin(), tsr.begin() + k);
    std::vector<std::size_t> train, test;
    for (const auto& [block, idx] : sb.samples) {
      auto& dst = chosen.count(block) ? train : test;
      dst.insert(dst.end(), idx.begin(), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    SvmOptions svm = opts.svm;
    svm.seed = derive_seed(seed, {1});
    out[item] = svm_outcome(m, train, test, classes, svm, false);
    train_sizes[item] = train.size();
  });

  for (int k = 1; k <= k_max; ++k) {
    BlockAblationRow row;
    row.k = k;
    double train_total = 0.0;
    for (std::size_t j = 0; j < per_k; ++j) {
      const auto item = static_cast<std::size_t>(k - 1) * per_k + j;
      row.accuracies.push_back(out[item].accuracy);
      train_total += static_cast<double>(train_sizes[item]);
    }
    const double n = static_cast<double>(row.accuracies.size());
    row.mean = std::accumulate(row.accuracies.begin(), row.accuracies.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : row.accuracies) ss += (a - row.mean) * (a - row.mean);
    row.std = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    row.mean_train_samples = train_total / n;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

nlohmann::json to_json(const ConfusionMatrix& c, const std::map<int, std::string>& names) {
  std::vector<std::string> labels;
  for (int k : c.classes) {
    auto it = names.find(k);
    labels.push_back(it == names.end() ? std::to_string(k) : it->second);
  }
  return {{"classes", c.classes}, {"labels", labels}, {"counts", c.counts}};
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& s : r.subjects)
    subjects.push_back({{"subject_id", s.subject_id},
                        {"accuracy", s.accuracy},
                        {"samples", s.samples},
                        {"run_accuracies", s.run_accuracies},
                        {"confusion", to_json(s.confusion, r.label_names)}});
  nlohmann::json names = nlohmann::json::object();
  for (const auto& [k, v] : r.label_names) names[std::to_string(k)] = v;
  nlohmann::json j{{"schema_version", 1},
                   {"kind", "evaluation"},
                   {"protocol", r.protocol},
                   {"feature_set", r.feature_set},
                   {"scheme", r.scheme},
                   {"model", r.model},
                   {"seed", r.seed},
                   {"median", r.median},
                   {"mad", r.mad},
                   {"chance_level", r.chance_level ? nlohmann::json(*r.chance_level) : nlohmann::json()},
                   {"models_trained", r.models_trained},
                   {"label_names", names},
                   {"subjects", subjects},
                   {"confusion", to_json(r.confusion, r.label_names)},
                   {"warnings", r.warnings},
                   {"config", r.config}};
  if (!r.splits.empty()) {
    nlohmann::json splits = nlohmann::json::array();
    for (const auto& s : r.splits)
      splits.push_back({{"subject_id", s.subject_id},
                        {"run", s.run},
                        {"accuracy", s.accuracy},
                        {"train", s.train_ids},
                        {"test", s.test_ids},
                        {"scaler", to_json(s.scaler)}});
    j["splits"] = splits;
  }
  return j;
}

nlohmann::json to_json(const BlockAblationReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"k", row.k},
                    {"mean", row.mean},
                    {"std", row.std},
                    {"mean_train_samples", row.mean_train_samples},
                    {"accuracies", row.accuracies}});
  return {{"schema_version", 1}, {"kind", "block_ablation"}, {"feature_set", r.feature_set},
          {"seed", r.seed},      {"rows", rows},               {"warnings", r.warnings}};
}

void write_summary_csv(const EvalReport& r, std::ostream& out) {
  out << std::setprecision(10);
  out << "subject_id,samples,accuracy\n";
  for (const auto& s : r.subjects) out << s.subject_id << ',' << s.samples << ',' << s.accuracy << '\n';
  out << "median,," << r.median << '\n';
  out << "mad,," << r.mad << '\n';
}

void write_confusion_csv(const ConfusionMatrix& c, const std::map<int, std::string>& names,
                         std::ostream& out) {
  auto name = [&](int k) {
    auto it = names.find(k);
    return it == names.end() ? std::to_string(k) : it->second;
  };
  out << "true\\pred";
  for (int k : c.classes) out << ',' << name(k);
  out << '\n';
  for (std::size_t i = 0; i < c.classes.size(); ++i) {
    out << name(c.classes[i]);
    for (long v : c.counts[i]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace readtask
