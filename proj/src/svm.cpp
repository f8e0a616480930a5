#include "readtask/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "readtask/error.hpp"
#include "readtask/parallel.hpp"

namespace readtask {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double svm_objective(std::span<const double> w, double b,
                     const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     double C) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    loss += std::max(0.0, 1.0 - y[i] * (dot(w, x[i]) + b));
  return 0.5 * (dot(w, w) + b * b) + C * loss;
}

BinarySvmSolution solve_binary_svm(const std::vector<std::vector<double>>& x,
                                   const std::vector<int>& y, const SvmOptions& opts) {
  const std::size_t n = x.size();
  if (n == 0) throw DataError("SVM training set is empty");
  if (!(opts.C > 0.0)) throw ParameterError("SVM C must be > 0");
  const std::size_t d = x.front().size();
  const double C = opts.C;

  BinarySvmSolution sol;
  sol.w.assign(d, 0.0);
  sol.alpha.assign(n, 0.0);
  std::vector<double> qdiag(n);
  for (std::size_t i = 0; i < n; ++i) qdiag[i] = dot(x[i], x[i]) + 1.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(opts.seed);

  auto gap = [&] {
    double sum_alpha = std::accumulate(sol.alpha.begin(), sol.alpha.end(), 0.0);
    const double wn = dot(sol.w, sol.w) + sol.b * sol.b;
    sol.primal = svm_objective(sol.w, sol.b, x, y, C);
    sol.dual = sum_alpha - 0.5 * wn;
    return sol.primal - sol.dual;
  };

  for (sol.epochs = 1; sol.epochs <= opts.max_epochs; ++sol.epochs) {
    std::shuffle(order.begin(), order.end(), rng);
    double max_pg = 0.0;
    for (std::size_t i : order) {
      const double yi = y[i];
      const double g = yi * (dot(sol.w, x[i]) + sol.b) - 1.0;
      double pg = g;
      if (sol.alpha[i] == 0.0)
        pg = std::min(g, 0.0);
      else if (sol.alpha[i] == C)
        pg = std::max(g, 0.0);
      max_pg = std::max(max_pg, std::abs(pg));
      if (pg == 0.0) continue;
      const double old = sol.alpha[i];
      sol.alpha[i] = std::clamp(old - g / qdiag[i], 0.0, C);
      const double delta = (sol.alpha[i] - old) * yi;
      if (delta != 0.0) {
        for (std::size_t k = 0; k < d; ++k) sol.w[k] += delta * x[i][k];
        sol.b += delta;
      }
    }
    if (max_pg < 1e-12) break;
    if (gap() <= opts.gap_tol * std::max(sol.primal, 1e-12)) return sol;
  }
  gap();
  return sol;
}

std::vector<double> LinearSvmModel::decision(std::span<const double> x) const {
  if (x.size() != dim())
    throw DataError("SVM input dimension " + std::to_string(x.size()) + " ≠ model dimension " +
                    std::to_string(dim()));
  std::vector<double> out;
  for (std::size_t k = 0; k < weights.size(); ++k) out.push_back(dot(weights[k], x) + bias[k]);
  return out;
}

int LinearSvmModel::predict(std::span<const double> x) const {
  const auto s = decision(x);
  if (binary()) return s[0] > 0.0 ? classes[1] : classes[0];
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.size(); ++k)
    if (s[k] > s[best]) best = k;
  return classes[best];
}

std::vector<int> LinearSvmModel::predict(const FeatureMatrix& m) const {
  std::vector<int> out;
  out.reserve(m.size());
  for (const auto& r : m.rows) out.push_back(predict(r));
  return out;
}

LinearSvmModel train_svm(const FeatureMatrix& train, const SvmOptions& opts) {
  train.check();
  const std::set<int> cls(train.labels.begin(), train.labels.end());
  if (cls.size() < 2)
    throw DataError("SVM training needs at least two classes (got " + std::to_string(cls.size()) +
                    ")");
  LinearSvmModel model;
  model.classes.assign(cls.begin(), cls.end());
  model.C = opts.C;

  auto fit = [&](int positive, std::uint64_t seed) {
    std::vector<int> y(train.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = train.labels[i] == positive ? 1 : -1;
    SvmOptions o = opts;
    o.seed = seed;
    auto sol = solve_binary_svm(train.rows, y, o);
    model.weights.push_back(std::move(sol.w));
    model.bias.push_back(sol.b);
  };

  if (model.binary()) {
    fit(model.classes[1], opts.seed);
  } else {
    for (int c : model.classes)
      fit(c, derive_seed(opts.seed, {static_cast<std::uint64_t>(c)}));
  }
  return model;
}

nlohmann::json to_json(const LinearSvmModel& m) {
  return {{"format", "readtask-linear-svm"},
          {"version", 1},
          {"classes", m.classes},
          {"weights", m.weights},
          {"bias", m.bias},
          {"C", m.C}};
}

LinearSvmModel svm_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != "readtask-linear-svm" || j.value("version", 0) != 1)
    throw ValidationError("not a version-1 readtask linear SVM model");
  LinearSvmModel m;
  m.classes = j.at("classes").get<std::vector<int>>();
  m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  m.bias = j.at("bias").get<std::vector<double>>();
  m.C = j.at("C").get<double>();
  const std::size_t expected = m.classes.size() == 2 ? 1 : m.classes.size();
  if (m.weights.size() != expected || m.bias.size() != expected)
    throw ValidationError("SVM model weight count does not match its classes");
  return m;
}

}  // namespace readtask
