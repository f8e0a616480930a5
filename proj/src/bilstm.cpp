#include "readtask/bilstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "readtask/error.hpp"

namespace readtask {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd sigmoid(const VectorXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

void glorot(MatrixXd& m, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
}

LstmParams init_lstm(int d, int h, std::mt19937_64& rng) {
  LstmParams p;
  p.Wx.resize(4 * h, d);
  p.Wh.resize(4 * h, h);
  glorot(p.Wx, rng);
  glorot(p.Wh, rng);
  p.b = VectorXd::Zero(4 * h);
  p.b.segment(h, h).setOnes();  // forget gate bias
  return p;
}

LstmParams zeros_like(const LstmParams& p) {
  return {MatrixXd::Zero(p.Wx.rows(), p.Wx.cols()), MatrixXd::Zero(p.Wh.rows(), p.Wh.cols()),
          VectorXd::Zero(p.b.size())};
}

BiLstmModel zeros_like(const BiLstmModel& m) {
  BiLstmModel g = m;
  g.fwd = zeros_like(m.fwd);
  g.bwd = zeros_like(m.bwd);
  g.Wd.setZero();
  g.bd.setZero();
  g.Wo.setZero();
  g.bo.setZero();
  return g;
}

template <class F>
void for_each_block(BiLstmModel& m, F&& f) {
  f(m.fwd.Wx.data(), m.fwd.Wx.size());
  f(m.fwd.Wh.data(), m.fwd.Wh.size());
  f(m.fwd.b.data(), m.fwd.b.size());
  f(m.bwd.Wx.data(), m.bwd.Wx.size());
  f(m.bwd.Wh.data(), m.bwd.Wh.size());
  f(m.bwd.b.data(), m.bwd.b.size());
  f(m.Wd.data(), m.Wd.size());
  f(m.bd.data(), m.bd.size());
  f(m.Wo.data(), m.Wo.size());
  f(m.bo.data(), m.bo.size());
}

// Activations of one direction over the columns of X (already in
// processing order).
struct LstmTrace {
  MatrixXd I, F, G, O, C, TC, H;
};

LstmTrace run_lstm(const LstmParams& p, const MatrixXd& X) {
  const Eigen::Index h = p.Wh.cols();
  const Eigen::Index L = X.cols();
  LstmTrace tr;
  for (auto* m : {&tr.I, &tr.F, &tr.G, &tr.O, &tr.C, &tr.TC, &tr.H}) m->resize(h, L);
  const MatrixXd Z = (p.Wx * X).colwise() + p.b;
  VectorXd hprev = VectorXd::Zero(h), cprev = VectorXd::Zero(h);
  for (Eigen::Index t = 0; t < L; ++t) {
    const VectorXd z = Z.col(t) + p.Wh * hprev;
    tr.I.col(t) = sigmoid(z.segment(0, h));
    tr.F.col(t) = sigmoid(z.segment(h, h));
    tr.G.col(t) = z.segment(2 * h, h).array().tanh().matrix();
    tr.O.col(t) = sigmoid(z.segment(3 * h, h));
    tr.C.col(t) = tr.F.col(t).cwiseProduct(cprev) + tr.I.col(t).cwiseProduct(tr.G.col(t));
    tr.TC.col(t) = tr.C.col(t).array().tanh().matrix();
    tr.H.col(t) = tr.O.col(t).cwiseProduct(tr.TC.col(t));
    hprev = tr.H.col(t);
    cprev = tr.C.col(t);
  }
  return tr;
}

// Backpropagates a gradient on the final hidden state through time.
void backprop_lstm(const LstmParams& p, const MatrixXd& X, const LstmTrace& tr,
                   const VectorXd& dh_last, LstmParams& g) {
  const Eigen::Index h = p.Wh.cols();
  const Eigen::Index L = X.cols();
  MatrixXd dZ(4 * h, L);
  VectorXd dh = dh_last, dc_next = VectorXd::Zero(h);
  for (Eigen::Index t = L - 1; t >= 0; --t) {
    const auto i = tr.I.col(t).array();
    const auto f = tr.F.col(t).array();
    const auto gg = tr.G.col(t).array();
    const auto o = tr.O.col(t).array();
    const auto tc = tr.TC.col(t).array();
    const VectorXd cprev = t > 0 ? VectorXd(tr.C.col(t - 1)) : VectorXd::Zero(h);

    const Eigen::ArrayXd d_o = dh.array() * tc;
    const Eigen::ArrayXd dc = dc_next.array() + dh.array() * o * (1.0 - tc * tc);
    dZ.col(t).segment(0, h) = (dc * gg * i * (1.0 - i)).matrix();
    dZ.col(t).segment(h, h) = (dc * cprev.array() * f * (1.0 - f)).matrix();
    dZ.col(t).segment(2 * h, h) = (dc * i * (1.0 - gg * gg)).matrix();
    dZ.col(t).segment(3 * h, h) = (d_o * o * (1.0 - o)).matrix();
    dc_next = (dc * f).matrix();
    dh = p.Wh.transpose() * dZ.col(t);
  }
  g.Wx.noalias() += dZ * X.transpose();
  if (L > 1) g.Wh.noalias() += dZ.rightCols(L - 1) * tr.H.leftCols(L - 1).transpose();
  g.b += dZ.rowwise().sum();
}

MatrixXd valid_columns(const PaddedSequence& s) {
  if (s.length < 1 || s.length > s.x.cols())
    throw DataError("sequence length must be in [1, padded length]");
  return s.x.leftCols(s.length);
}

struct Forward {
  MatrixXd X, Xr;
  LstmTrace f, b;
  VectorXd r, u, p;
};

Forward forward(const BiLstmModel& m, const PaddedSequence& s) {
  if (s.x.rows() != m.input_dim)
    throw DataError("BiLSTM input dimension " + std::to_string(s.x.rows()) + " ≠ model dimension " +
                    std::to_string(m.input_dim));
  Forward fw;
  fw.X = valid_columns(s);
  fw.Xr = fw.X.rowwise().reverse();
  fw.f = run_lstm(m.fwd, fw.X);
  fw.b = run_lstm(m.bwd, fw.Xr);
  const Eigen::Index L = fw.X.cols();
  fw.r.resize(2 * m.hidden);
  fw.r << fw.f.H.col(L - 1), fw.b.H.col(L - 1);
  fw.u = ((m.Wd * fw.r + m.bd).array().tanh()).matrix();
  const VectorXd logits = m.Wo * fw.u + m.bo;
  const VectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
  fw.p = e / e.sum();
  return fw;
}

}  // namespace

BiLstmModel BiLstmModel::init(int input_dim, int hidden, int dense, std::vector<int> classes,
                              std::uint64_t seed) {
  if (input_dim < 1 || hidden < 1 || dense < 1) throw ParameterError("BiLSTM sizes must be ≥ 1");
  if (classes.size() < 2) throw ParameterError("BiLSTM needs at least two output classes");
  std::mt19937_64 rng(seed);
  BiLstmModel m;
  m.input_dim = input_dim;
  m.hidden = hidden;
  m.dense = dense;
  m.classes = std::move(classes);
  m.fwd = init_lstm(input_dim, hidden, rng);
  m.bwd = init_lstm(input_dim, hidden, rng);
  m.Wd.resize(dense, 2 * hidden);
  glorot(m.Wd, rng);
  m.bd = VectorXd::Zero(dense);
  m.Wo.resize(static_cast<Eigen::Index>(m.classes.size()), dense);
  glorot(m.Wo, rng);
  m.bo = VectorXd::Zero(static_cast<Eigen::Index>(m.classes.size()));
  return m;
}

std::size_t BiLstmModel::parameter_count() const {
  std::size_t n = 0;
  auto& self = const_cast<BiLstmModel&>(*this);
  for_each_block(self, [&](double*, Eigen::Index size) { n += static_cast<std::size_t>(size); });
  return n;
}

std::vector<double> BiLstmModel::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  auto& self = const_cast<BiLstmModel&>(*this);
  for_each_block(self, [&](double* p, Eigen::Index size) { out.insert(out.end(), p, p + size); });
  return out;
}

void BiLstmModel::set_flat_parameters(const std::vector<double>& p) {
  if (p.size() != parameter_count()) throw DataError("parameter vector size mismatch");
  std::size_t off = 0;
  for_each_block(*this, [&](double* dst, Eigen::Index size) {
    std::copy(p.begin() + static_cast<std::ptrdiff_t>(off),
              p.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(size)), dst);
    off += static_cast<std::size_t>(size);
  });
}

Eigen::VectorXd BiLstmModel::probabilities(const PaddedSequence& s) const {
  return forward(*this, s).p;
}

int BiLstmModel::predict(const PaddedSequence& s) const {
  const auto p = probabilities(s);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < p.size(); ++k)
    if (p[k] > p[best]) best = k;
  return classes[static_cast<std::size_t>(best)];
}

std::vector<int> BiLstmModel::predict(const SequenceSet& set) const {
  std::vector<int> out;
  out.reserve(set.size());
  for (const auto& seq : set.sequences)
    out.push_back(predict(to_padded(seq, static_cast<std::size_t>(input_dim))));
  return out;
}

PaddedSequence to_padded(const std::vector<std::vector<double>>& seq, std::size_t dim,
                         int pad_to) {
  PaddedSequence s;
  s.length = static_cast<int>(seq.size());
  const auto cols = std::max<Eigen::Index>(static_cast<Eigen::Index>(seq.size()), pad_to);
  s.x = MatrixXd::Zero(static_cast<Eigen::Index>(dim), cols);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (seq[t].size() != dim) throw DataError("sequence step width ≠ feature dimension");
    for (std::size_t k = 0; k < dim; ++k)
      s.x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = seq[t][k];
  }
  return s;
}

double loss_and_gradient(const BiLstmModel& m, const std::vector<PaddedSequence>& batch,
                         const std::vector<int>& targets, std::vector<double>* grad) {
  if (batch.empty()) throw DataError("empty batch");
  BiLstmModel g = zeros_like(m);
  double loss = 0.0;
  const Eigen::Index H = m.hidden;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const auto fw = forward(m, batch[n]);
    const int y = targets[n];
    loss -= std::log(std::max(fw.p[y], 1e-300));
    if (!grad) continue;
    VectorXd dlogits = fw.p;
    dlogits[y] -= 1.0;
    g.Wo.noalias() += dlogits * fw.u.transpose();
    g.bo += dlogits;
    const VectorXd da = ((m.Wo.transpose() * dlogits).array() * (1.0 - fw.u.array().square())).matrix();
    g.Wd.noalias() += da * fw.r.transpose();
    g.bd += da;
    const VectorXd dr = m.Wd.transpose() * da;
    backprop_lstm(m.fwd, fw.X, fw.f, dr.head(H), g.fwd);
    backprop_lstm(m.bwd, fw.Xr, fw.b, dr.tail(H), g.bwd);
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  if (grad) {
    *grad = g.flat_parameters();
    for (double& v : *grad) v *= scale;
  }
  return loss * scale;
}

namespace {

double accuracy(const BiLstmModel& m, const std::vector<PaddedSequence>& xs,
                const std::vector<int>& targets, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  std::size_t ok = 0;
  for (auto i : idx)
    if (m.predict(xs[i]) == m.classes[static_cast<std::size_t>(targets[i])]) ++ok;
  return static_cast<double>(ok) / static_cast<double>(idx.size());
}

}  // namespace

BiLstmModel train_bilstm(const SequenceSet& train, const BiLstmHyper& hyper, std::uint64_t seed,
                         BiLstmTrainLog* log) {
  train.check();
  if (train.size() == 0) throw DataError("BiLSTM training set is empty");
  if (hyper.batch_size < 1 || hyper.max_epochs < 1 || !(hyper.learning_rate > 0.0))
    throw ParameterError("invalid BiLSTM hyper-parameters");

  std::set<int> cls(train.labels.begin(), train.labels.end());
  for (const auto& [id, name] : train.label_names)
    if (cls.size() < 2 && !cls.count(id)) cls.insert(id);
  if (cls.size() < 2) cls.insert(*cls.rbegin() + 1);
  std::vector<int> classes(cls.begin(), cls.end());

  std::mt19937_64 rng(seed);
  BiLstmModel model = BiLstmModel::init(static_cast<int>(train.dim()), hyper.hidden, hyper.dense,
                                        classes, rng());

  std::vector<PaddedSequence> xs;
  std::vector<int> targets;
  for (std::size_t i = 0; i < train.size(); ++i) {
    xs.push_back(to_padded(train.sequences[i], train.dim()));
    targets.push_back(static_cast<int>(
        std::lower_bound(classes.begin(), classes.end(), train.labels[i]) - classes.begin()));
  }

  std::vector<std::size_t> perm(train.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::size_t n_val = 0;
  if (train.size() >= 2)
    n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(hyper.validation_fraction * train.size())));
  if (hyper.validation_fraction <= 0.0) n_val = 0;
  const std::vector<std::size_t> val(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> tr(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());

  // Adam state.
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  auto params = model.flat_parameters();
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0), grad;
  long step = 0;

  BiLstmModel best = model;
  double best_acc = -1.0;
  int wait = 0;
  BiLstmTrainLog local;

  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    std::shuffle(tr.begin(), tr.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < tr.size(); start += static_cast<std::size_t>(hyper.batch_size)) {
      const auto end = std::min(tr.size(), start + static_cast<std::size_t>(hyper.batch_size));
      std::vector<PaddedSequence> bx;
      std::vector<int> by;
      for (auto k = start; k < end; ++k) {
        bx.push_back(xs[tr[k]]);
        by.push_back(targets[tr[k]]);
      }
      epoch_loss += loss_and_gradient(model, bx, by, &grad) * static_cast<double>(end - start);
      ++step;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      for (std::size_t k = 0; k < params.size(); ++k) {
        m1[k] = b1 * m1[k] + (1 - b1) * grad[k];
        m2[k] = b2 * m2[k] + (1 - b2) * grad[k] * grad[k];
        params[k] -= hyper.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + eps);
      }
      model.set_flat_parameters(params);
    }
    local.train_loss.push_back(tr.empty() ? 0.0 : epoch_loss / static_cast<double>(tr.size()));
    const double acc = val.empty() ? accuracy(model, xs, targets, tr) : accuracy(model, xs, targets, val);
    local.validation_accuracy.push_back(acc);
    local.epochs_run = epoch;
    if (acc > best_acc + hyper.min_delta) {
      best_acc = acc;
      best = model;
      local.best_epoch = epoch;
      wait = 0;
    } else if (++wait >= hyper.patience) {
      break;
    }
  }
  local.best_validation_accuracy = best_acc;
  if (log) *log = std::move(local);
  return best;
}

namespace {

nlohmann::json mat_json(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

MatrixXd json_mat(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(j.size()) != rows)
    throw ValidationError("BiLSTM model matrix has wrong row count");
  MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = j.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError("BiLSTM model matrix has wrong column count");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

nlohmann::json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd json_vec(const nlohmann::json& j, Eigen::Index n) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != n) throw ValidationError("BiLSTM vector size mismatch");
  return Eigen::Map<const VectorXd>(v.data(), n);
}

}  // namespace

nlohmann::json to_json(const BiLstmModel& m) {
  auto lstm = [](const LstmParams& p) {
    return nlohmann::json{{"Wx", mat_json(p.Wx)}, {"Wh", mat_json(p.Wh)}, {"b", vec_json(p.b)}};
  };
  return {{"format", "readtask-bilstm"}, {"version", 1},       {"input_dim", m.input_dim},
          {"hidden", m.hidden},          {"dense", m.dense},   {"classes", m.classes},
          {"forward", lstm(m.fwd)},      {"backward", lstm(m.bwd)},
          {"Wd", mat_json(m.Wd)},        {"bd", vec_json(m.bd)},
          {"Wo", mat_json(m.Wo)},        {"bo", vec_json(m.bo)}};
}

BiLstmModel bilstm_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != "readtask-bilstm" || j.value("version", 0) != 1)
    throw ValidationError("not a version-1 readtask BiLSTM model");
  BiLstmModel m;
  m.input_dim = j.at("input_dim").get<int>();
  m.hidden = j.at("hidden").get<int>();
  m.dense = j.at("dense").get<int>();
  m.classes = j.at("classes").get<std::vector<int>>();
  const Eigen::Index d = m.input_dim, h = m.hidden, D = m.dense,
                     K = static_cast<Eigen::Index>(m.classes.size());
  auto lstm = [&](const nlohmann::json& jl) {
    return LstmParams{json_mat(jl.at("Wx"), 4 * h, d), json_mat(jl.at("Wh"), 4 * h, h),
                      json_vec(jl.at("b"), 4 * h)};
  };
  m.fwd = lstm(j.at("forward"));
  m.bwd = lstm(j.at("backward"));
  m.Wd = json_mat(j.at("Wd"), D, 2 * h);
  m.bd = json_vec(j.at("bd"), D);
  m.Wo = json_mat(j.at("Wo"), K, D);
  m.bo = json_vec(j.at("bo"), K);
  return m;
}

}  // namespace readtask
