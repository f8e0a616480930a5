#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "readtask/corpus.hpp"

namespace readtask {

// Provenance of one sample.
struct SampleGroup {
  std::string subject_id;
  int session_id = 1;
  int block_id = 1;
  std::string sentence_id;
  TaskLabel task = TaskLabel::NR;
};

// Fixed-width samples: rows x dim, one label per row.
struct FeatureMatrix {
  std::string set_name;
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<SampleGroup> groups;
  std::map<int, std::string> label_names;

  std::size_t size() const { return rows.size(); }
  std::size_t dim() const { return feature_names.size(); }

  FeatureMatrix subset(const std::vector<std::size_t>& idx) const;
  void push_back(std::vector<double> row, int label, SampleGroup group);
  // Throws DataError on a ragged matrix or mismatched label/group counts.
  void check() const;
};

// Variable-length word sequences, one per sentence.
struct SequenceSet {
  std::string set_name;
  std::vector<std::string> feature_names;
  std::vector<std::vector<std::vector<double>>> sequences;  // [sample][step][feature]
  std::vector<int> labels;
  std::vector<SampleGroup> groups;
  std::map<int, std::string> label_names;

  std::size_t size() const { return sequences.size(); }
  std::size_t dim() const { return feature_names.size(); }

  SequenceSet subset(const std::vector<std::size_t>& idx) const;
  void check() const;
};

// Label names for the task scheme.
std::map<int, std::string> task_label_names();

// CSV with a header of feature names and a final "label" column.
void write_csv(const FeatureMatrix& m, std::ostream& out);
// One row per word; a leading "sample" column holds the sentence index.
void write_csv(const SequenceSet& s, std::ostream& out);

}  // namespace readtask
