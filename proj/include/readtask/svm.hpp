#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "readtask/feature_matrix.hpp"

namespace readtask {

// Linear SVM with hinge loss. The bias is learned as the weight of a
// constant unit feature, so the objective minimized per binary problem is
//   0.5 * (|w|^2 + b^2) + C * sum_i max(0, 1 - y_i (w.x_i + b)).
struct LinearSvmModel {
  std::vector<int> classes;                  // ascending label ids
  std::vector<std::vector<double>> weights;  // 1 row (binary) or one per class
  std::vector<double> bias;
  double C = 1.0;

  bool binary() const { return classes.size() == 2; }
  std::size_t dim() const { return weights.empty() ? 0 : weights.front().size(); }

  // Decision values: one for binary (positive => classes[1]), else per class.
  std::vector<double> decision(std::span<const double> x) const;
  // Ties go to the smaller label id.
  int predict(std::span<const double> x) const;
  std::vector<int> predict(const FeatureMatrix& m) const;
};

struct SvmOptions {
  double C = 1.0;
  // Stop once the duality gap is at most gap_tol * primal objective.
  double gap_tol = 1e-4;
  int max_epochs = 20000;
  std::uint64_t seed = 0;
};

struct BinarySvmSolution {
  std::vector<double> w;
  double b = 0.0;
  std::vector<double> alpha;
  int epochs = 0;
  double primal = 0.0;
  double dual = 0.0;
};

// Dual coordinate descent on one binary problem; y in {-1, +1}.
BinarySvmSolution solve_binary_svm(const std::vector<std::vector<double>>& x,
                                   const std::vector<int>& y, const SvmOptions& opts);

double svm_objective(std::span<const double> w, double b,
                     const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     double C);

// Binary when two classes are present, one-vs-rest otherwise.
LinearSvmModel train_svm(const FeatureMatrix& train, const SvmOptions& opts = {});

nlohmann::json to_json(const LinearSvmModel& m);
LinearSvmModel svm_from_json(const nlohmann::json& j);

}  // namespace readtask
