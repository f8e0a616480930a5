#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "readtask/feature_matrix.hpp"

namespace readtask {

// Word-level model hyper-parameters.
struct BiLstmHyper {
  int hidden = 64;
  int dense = 64;
  double learning_rate = 0.001;
  int batch_size = 40;
  int max_epochs = 200;
  int patience = 104;
  double min_delta = 1e-7;
  double validation_fraction = 0.1;
};

// One direction of an LSTM. Gate blocks are stacked i, f, g, o.
struct LstmParams {
  Eigen::MatrixXd Wx;  // 4H x d
  Eigen::MatrixXd Wh;  // 4H x H
  Eigen::VectorXd b;   // 4H
};

// A sequence padded to a fixed number of steps: columns are time steps and
// only the first `length` columns are valid.
struct PaddedSequence {
  Eigen::MatrixXd x;  // d x T_pad
  int length = 0;
};

// Bidirectional LSTM classifier. The readout concatenates the last valid
// forward state with the backward state at the first step, then applies a
// tanh dense layer and a softmax output layer.
struct BiLstmModel {
  int input_dim = 0;
  int hidden = 0;
  int dense = 0;
  std::vector<int> classes;  // ascending label ids
  LstmParams fwd, bwd;
  Eigen::MatrixXd Wd;  // D x 2H
  Eigen::VectorXd bd;
  Eigen::MatrixXd Wo;  // K x D
  Eigen::VectorXd bo;

  static BiLstmModel init(int input_dim, int hidden, int dense, std::vector<int> classes,
                          std::uint64_t seed);

  std::size_t parameter_count() const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& p);

  Eigen::VectorXd probabilities(const PaddedSequence& s) const;
  // Ties go to the smaller label id.
  int predict(const PaddedSequence& s) const;
  std::vector<int> predict(const SequenceSet& set) const;
};

PaddedSequence to_padded(const std::vector<std::vector<double>>& seq, std::size_t dim,
                         int pad_to = 0);

// Mean softmax cross-entropy over a batch and its gradient, flattened in
// flat_parameters() order. `targets` are class indices (not label ids).
double loss_and_gradient(const BiLstmModel& model, const std::vector<PaddedSequence>& batch,
                         const std::vector<int>& targets, std::vector<double>* grad);

struct BiLstmTrainLog {
  int epochs_run = 0;
  int best_epoch = 0;
  double best_validation_accuracy = 0.0;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> validation_accuracy;
};

// Adam on mini-batches with early stopping on validation accuracy. A random
// validation_fraction of `train` is held out; the parameters of the best
// validation epoch are returned.
BiLstmModel train_bilstm(const SequenceSet& train, const BiLstmHyper& hyper, std::uint64_t seed,
                         BiLstmTrainLog* log = nullptr);

nlohmann::json to_json(const BiLstmModel& m);
BiLstmModel bilstm_from_json(const nlohmann::json& j);

}  // namespace readtask
