#include "readtask/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "readtask/error.hpp"
#include "readtask/feature_sets.hpp"
#include "readtask/gaze_features.hpp"

namespace readtask {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("Welch test needs at least two values per group");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = sample_var(a) / na, vb = sample_var(b) / nb;
  const double diff = mean_of(a) - mean_of(b);
  WelchResult r;
  if (va + vb == 0.0) {
    r.t = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
    r.df = na + nb - 2;
    r.p = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = diff / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1) + vb * vb / (nb - 1));
  r.p = two_sided_p(r.t, r.df);
  return r;
}

std::vector<DescriptiveRow> descriptive_stats(const Corpus& corpus) {
  static const std::vector<std::string> names{"sentence_length", "reading_time_s", "omission_rate"};
  std::vector<std::vector<double>> nr(3), tsr(3);
  for (const auto& subj : corpus.subjects)
    for (const auto& s : subj.sentences) {
      if (s.task == TaskLabel::SR) continue;
      auto& dst = s.task == TaskLabel::NR ? nr : tsr;
      dst[0].push_back(static_cast<double>(s.words.size()));
      dst[1].push_back(s.total_reading_ms / 1000.0);
      dst[2].push_back(sentence_gaze_features(s).omission_rate);
    }
  if (nr[0].empty() || tsr[0].empty()) throw DataError("descriptive statistics need NR and TSR sentences");
  std::vector<DescriptiveRow> rows;
  for (std::size_t q = 0; q < 3; ++q) {
    DescriptiveRow r;
    r.quantity = names[q];
    r.n_nr = nr[q].size();
    r.n_tsr = tsr[q].size();
    r.nr_mean = mean_of(nr[q]);
    r.tsr_mean = mean_of(tsr[q]);
    r.nr_std = std::sqrt(sample_var(nr[q]));
    r.tsr_std = std::sqrt(sample_var(tsr[q]));
    r.p_value = (nr[q].size() >= 2 && tsr[q].size() >= 2) ? welch_t_test(nr[q], tsr[q]).p : 1.0;
    rows.push_back(r);
  }
  return rows;
}

OutlierReport detect_outliers(std::vector<std::pair<std::string, double>> subject_means,
                              std::string feature) {
  if (subject_means.size() < 3)
    throw DataError("outlier detection needs at least 3 subjects (got " +
                    std::to_string(subject_means.size()) + ")");
  OutlierReport r;
  r.feature = std::move(feature);
  r.subject_means = std::move(subject_means);
  std::vector<double> v;
  for (const auto& [id, x] : r.subject_means) v.push_back(x);
  r.group_mean = mean_of(v);
  r.group_std = std::sqrt(sample_var(v));
  if (r.group_std > 0.0)
    for (const auto& [id, x] : r.subject_means)
      if (std::abs(x - r.group_mean) > 2.0 * r.group_std) r.flagged.push_back(id);
  return r;
}

OutlierReport detect_outliers(const Corpus& corpus, const std::string& feature) {
  const auto m = assemble_feature_set(corpus, feature);
  if (m.dim() != 1)
    throw UsageError("outlier detection needs a single-valued feature; '" + feature + "' has " +
                     std::to_string(m.dim()) + " columns");
  std::vector<std::pair<std::string, double>> means;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& id = m.groups[i].subject_id;
    if (means.empty() || means.back().first != id) {
      means.push_back({id, 0.0});
      counts.push_back(0);
    }
    means.back().second += m.rows[i][0];
    ++counts.back();
  }
  for (std::size_t s = 0; s < means.size(); ++s) means[s].second /= static_cast<double>(counts[s]);
  return detect_outliers(std::move(means), feature);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthError("spearman inputs differ in length");
  if (x.size() < 3) throw DataError("spearman needs at least 3 pairs");
  SpearmanResult r;
  r.n = x.size();
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double mx = mean_of(rx), my = mean_of(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return r;
  const double rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  r.rho = rho;
  const double df = static_cast<double>(r.n) - 2.0;
  r.p = std::abs(rho) == 1.0 ? 0.0 : two_sided_p(rho * std::sqrt(df / (1.0 - rho * rho)), df);
  return r;
}

const std::vector<std::string>& covariate_names() {
  static const std::vector<std::string> names{"score_nr", "score_tsr", "speed_nr", "speed_tsr", "lextale"};
  return names;
}

namespace {

std::optional<double> covariate(const SubjectMeta& m, const std::string& name) {
  if (name == "score_nr") return m.score_nr;
  if (name == "score_tsr") return m.score_tsr;
  if (name == "speed_nr") return m.speed_nr;
  if (name == "speed_tsr") return m.speed_tsr;
  return m.lextale;
}

}  // namespace

std::vector<CorrelationRow> correlation_table(const std::vector<EvalReport>& reports,
                                              const std::vector<SubjectMeta>& meta) {
  std::map<std::string, const SubjectMeta*> by_id;
  for (const auto& m : meta) by_id[m.subject_id] = &m;
  std::vector<CorrelationRow> rows;
  for (const auto& rep : reports) {
    for (const auto& s : rep.subjects)
      if (!by_id.count(s.subject_id))
        throw DataError("subject " + s.subject_id + " of report '" + rep.feature_set +
                        "' has no metadata");
    for (const auto& cov : covariate_names()) {
      std::vector<double> acc, val;
      for (const auto& s : rep.subjects)
        if (auto v = covariate(*by_id.at(s.subject_id), cov)) {
          acc.push_back(s.accuracy);
          val.push_back(*v);
        }
      CorrelationRow row{rep.protocol, rep.feature_set, cov, {}, false};
      if (acc.size() >= 3) row.result = spearman(acc, val);
      else row.result.n = acc.size();
      row.significant = row.result.p && *row.result.p < 0.05;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<std::vector<double>> forward_model_pattern(const LinearSvmModel& model,
                                                       const FeatureMatrix& train) {
  train.check();
  if (model.dim() != train.dim())
    throw LengthError("model has " + std::to_string(model.dim()) + " weights but the data has " +
                      std::to_string(train.dim()) + " features");
  if (train.size() < 2) throw DataError("pattern needs at least two training samples");
  const std::size_t n = train.size(), d = train.dim();
  Eigen::MatrixXd X(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = train.rows[i][j];
  const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  std::vector<std::vector<double>> out;
  for (const auto& w : model.weights) {
    const Eigen::VectorXd a = cov * Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(d));
    const double norm = a.norm();
    std::vector<double> v(d, 0.0);
    if (norm > 0.0)
      for (std::size_t j = 0; j < d; ++j) v[j] = a(static_cast<Eigen::Index>(j)) / norm;
    out.push_back(std::move(v));
  }
  return out;
}

std::map<std::string, std::vector<double>> band_patterns(const std::vector<double>& pattern,
                                                         const std::vector<std::string>& names) {
  if (pattern.size() != names.size()) throw LengthError("pattern and feature names differ in length");
  std::map<std::string, std::vector<double>> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto pos = names[i].rfind("_e");
    if (pos == std::string::npos) throw DataError("feature '" + names[i] + "' is not an electrode feature");
    const std::string band = names[i].substr(0, pos);
    const int channel = std::stoi(names[i].substr(pos + 2));
    if (channel < 1 || channel > static_cast<int>(kChannels))
      throw RangeError("channel number out of range in '" + names[i] + "'");
    auto& v = out[band];
    v.resize(kChannels, 0.0);
    v[static_cast<std::size_t>(channel - 1)] = pattern[i];
  }
  return out;
}

nlohmann::json pattern_json(const std::string& band, const std::vector<double>& channel_values) {
  if (channel_values.size() != kChannels)
    throw LengthError("pattern has " + std::to_string(channel_values.size()) + " channel values, expected " +
                      std::to_string(kChannels));
  return {{"schema_version", 1}, {"band", band}, {"channel_values", channel_values}};
}

nlohmann::json to_json(const std::vector<DescriptiveRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows)
    out.push_back({{"quantity", r.quantity},
                   {"NR", {{"n", r.n_nr}, {"mean", r.nr_mean}, {"std", r.nr_std}}},
                   {"TSR", {{"n", r.n_tsr}, {"mean", r.tsr_mean}, {"std", r.tsr_std}}},
                   {"welch_p", r.p_value}});
  return out;
}

nlohmann::json to_json(const OutlierReport& r) {
  nlohmann::json means = nlohmann::json::array();
  for (const auto& [id, v] : r.subject_means) means.push_back({{"subject_id", id}, {"mean", v}});
  return {{"feature", r.feature},     {"subject_means", means}, {"group_mean", r.group_mean},
          {"group_std", r.group_std}, {"lower", r.group_mean - 2 * r.group_std},
          {"upper", r.group_mean + 2 * r.group_std}, {"flagged", r.flagged}};
}

nlohmann::json to_json(const SpearmanResult& r) {
  if (!r.defined()) return {{"rho", "undefined"}, {"p", nullptr}, {"n", r.n}};
  return {{"rho", *r.rho}, {"p", *r.p}, {"n", r.n}};
}

nlohmann::json to_json(const std::vector<CorrelationRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    auto j = to_json(r.result);
    j["protocol"] = r.protocol;
    j["feature_set"] = r.feature_set;
    j["covariate"] = r.covariate;
    j["significant"] = r.significant;
    out.push_back(j);
  }
  return out;
}

}  // namespace readtask
