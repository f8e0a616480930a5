#pragma once

#include <vector>

#include <json.hpp>

#include "readtask/feature_matrix.hpp"

namespace readtask {

// Per-column min/max from training data; maps training columns onto [-1, 1].
struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;

  double apply(std::size_t col, double v) const {
    const double range = max[col] - min[col];
    if (!(range > 0.0)) return 0.0;
    return 2.0 * (v - min[col]) / range - 1.0;
  }
  void apply_inplace(std::vector<double>& row) const;
};

ScalerParams fit_scaler(const FeatureMatrix& train);
FeatureMatrix apply_scaler(const ScalerParams& params, const FeatureMatrix& m);

// Sequence variant: statistics over every word step of every training sequence.
ScalerParams fit_scaler(const SequenceSet& train);
SequenceSet apply_scaler(const ScalerParams& params, const SequenceSet& s);

nlohmann::json to_json(const ScalerParams& p);
ScalerParams scaler_from_json(const nlohmann::json& j);

}  // namespace readtask
