#include "readtask/feature_matrix.hpp"

#include <iomanip>
#include <sstream>

#include "readtask/error.hpp"

namespace readtask {

FeatureMatrix FeatureMatrix::subset(const std::vector<std::size_t>& idx) const {
  FeatureMatrix out;
  out.set_name = set_name;
  out.feature_names = feature_names;
  out.label_names = label_names;
  out.rows.reserve(idx.size());
  for (auto i : idx) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
    out.groups.push_back(groups.at(i));
  }
  return out;
}

void FeatureMatrix::push_back(std::vector<double> row, int label, SampleGroup group) {
  rows.push_back(std::move(row));
  labels.push_back(label);
  groups.push_back(std::move(group));
}

void FeatureMatrix::check() const {
  if (labels.size() != rows.size() || groups.size() != rows.size())
    throw DataError("feature matrix '" + set_name + "': label/group count mismatch");
  for (const auto& r : rows)
    if (r.size() != dim())
      throw DataError("feature matrix '" + set_name + "': row width " + std::to_string(r.size()) +
                      " ≠ " + std::to_string(dim()));
}

SequenceSet SequenceSet::subset(const std::vector<std::size_t>& idx) const {
  SequenceSet out;
  out.set_name = set_name;
  out.feature_names = feature_names;
  out.label_names = label_names;
  for (auto i : idx) {
    out.sequences.push_back(sequences.at(i));
    out.labels.push_back(labels.at(i));
    out.groups.push_back(groups.at(i));
  }
  return out;
}

void SequenceSet::check() const {
  if (labels.size() != sequences.size() || groups.size() != sequences.size())
    throw DataError("sequence set '" + set_name + "': label/group count mismatch");
  for (const auto& seq : sequences)
    for (const auto& step : seq)
      if (step.size() != dim())
        throw DataError("sequence set '" + set_name + "': step width mismatch");
}

std::map<int, std::string> task_label_names() {
  return {{static_cast<int>(TaskLabel::NR), "NR"},
          {static_cast<int>(TaskLabel::TSR), "TSR"},
          {static_cast<int>(TaskLabel::SR), "SR"}};
}

namespace {
std::string label_text(const std::map<int, std::string>& names, int label) {
  if (auto it = names.find(label); it != names.end()) return it->second;
  return std::to_string(label);
}
}  // namespace

void write_csv(const FeatureMatrix& m, std::ostream& out) {
  m.check();
  for (const auto& n : m.feature_names) out << n << ',';
  out << "label\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (double v : m.rows[i]) out << v << ',';
    out << label_text(m.label_names, m.labels[i]) << '\n';
  }
}

void write_csv(const SequenceSet& s, std::ostream& out) {
  s.check();
  out << "sample,";
  for (const auto& n : s.feature_names) out << n << ',';
  out << "label\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (const auto& step : s.sequences[i]) {
      out << i << ',';
      for (double v : step) out << v << ',';
      out << label_text(s.label_names, s.labels[i]) << '\n';
    }
}

}  // namespace readtask
