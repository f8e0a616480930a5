#include "readtask/scaler.hpp"

#include <algorithm>
#include <limits>

#include "readtask/error.hpp"

namespace readtask {

void ScalerParams::apply_inplace(std::vector<double>& row) const {
  if (row.size() != min.size())
    throw DataError("scaler dimension " + std::to_string(min.size()) + " ≠ row width " +
                    std::to_string(row.size()));
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = apply(c, row[c]);
}

namespace {

ScalerParams empty_params(std::size_t d) {
  ScalerParams p;
  p.min.assign(d, std::numeric_limits<double>::infinity());
  p.max.assign(d, -std::numeric_limits<double>::infinity());
  return p;
}

void extend(ScalerParams& p, const std::vector<double>& row) {
  for (std::size_t c = 0; c < row.size(); ++c) {
    p.min[c] = std::min(p.min[c], row[c]);
    p.max[c] = std::max(p.max[c], row[c]);
  }
}

}  // namespace

ScalerParams fit_scaler(const FeatureMatrix& train) {
  train.check();
  if (train.size() == 0) throw DataError("cannot fit a scaler on an empty matrix");
  auto p = empty_params(train.dim());
  for (const auto& r : train.rows) extend(p, r);
  return p;
}

FeatureMatrix apply_scaler(const ScalerParams& params, const FeatureMatrix& m) {
  FeatureMatrix out = m;
  for (auto& r : out.rows) params.apply_inplace(r);
  return out;
}

ScalerParams fit_scaler(const SequenceSet& train) {
  train.check();
  auto p = empty_params(train.dim());
  bool any = false;
  for (const auto& seq : train.sequences)
    for (const auto& step : seq) {
      extend(p, step);
      any = true;
    }
  if (!any) throw DataError("cannot fit a scaler on an empty sequence set");
  return p;
}

SequenceSet apply_scaler(const ScalerParams& params, const SequenceSet& s) {
  SequenceSet out = s;
  for (auto& seq : out.sequences)
    for (auto& step : seq) params.apply_inplace(step);
  return out;
}

nlohmann::json to_json(const ScalerParams& p) { return {{"min", p.min}, {"max", p.max}}; }

ScalerParams scaler_from_json(const nlohmann::json& j) {
  ScalerParams p;
  p.min = j.at("min").get<std::vector<double>>();
  p.max = j.at("max").get<std::vector<double>>();
  if (p.min.size() != p.max.size()) throw ValidationError("scaler min/max size mismatch");
  return p;
}

}  // namespace readtask
