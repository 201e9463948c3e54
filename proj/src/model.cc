// Copyright 2026 The privtune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privtune/model.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "privtune/errors.h"
#include "privtune/rng.h"

namespace privtune {
namespace {

std::uint64_t NextInstanceId() {
  static std::atomic<std::uint64_t> next{1};
  return next.fetch_add(1);
}

MatrixXd Gaussian(Eigen::Index rows, Eigen::Index cols, double stddev,
                  StreamRng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  MatrixXd out(rows, cols);
  // Fill in row-major order so the draw sequence does not depend on the
  // storage order.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = normal(rng);
  }
  return out;
}

void SoftmaxRowsInPlace(MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

VectorXd Softmax(const VectorXd& logits) {
  VectorXd out = (logits.array() - logits.maxCoeff()).exp().matrix();
  return out / out.sum();
}

Eigen::Index ArgMax(const auto& v) {
  Eigen::Index idx = 0;
  v.maxCoeff(&idx);
  return idx;
}

}  // namespace

void ModelShape::Validate() const {
  if (hidden < 1) throw ArgumentError("hidden size must be >= 1");
  if (prompt_length < 1) throw ArgumentError("prompt length must be >= 1");
  if (recon_hidden < 1) {
    throw ArgumentError("reconstruction hidden size must be >= 1");
  }
  if (recon_vocab == 1 || recon_vocab < 0) {
    throw ArgumentError("reconstruction vocabulary must be 0 or >= 2");
  }
  if (num_classes < 2) throw ArgumentError("need at least 2 classes");
}

TrainableParams TrainableParams::ZerosLike(const TrainableParams& other) {
  TrainableParams out;
  out.prompt = MatrixXd::Zero(other.prompt.rows(), other.prompt.cols());
  out.w1 = MatrixXd::Zero(other.w1.rows(), other.w1.cols());
  out.w2 = MatrixXd::Zero(other.w2.rows(), other.w2.cols());
  out.w_task = MatrixXd::Zero(other.w_task.rows(), other.w_task.cols());
  out.b_task = VectorXd::Zero(other.b_task.size());
  return out;
}

std::int64_t TrainableParams::Count() const {
  std::int64_t count = 0;
  ForEach([&](const char*, const auto& t) { count += t.size(); });
  return count;
}

bool TrainableParams::AllFinite() const {
  bool finite = true;
  ForEach([&](const char*, const auto& t) { finite = finite && t.allFinite(); });
  return finite;
}

FrozenEncoder FrozenEncoder::Random(int hidden, std::uint64_t seed) {
  StreamRng rng(DeriveSeed(seed, "frozen-encoder"));
  const double stddev = 1.0 / std::sqrt(static_cast<double>(hidden));
  FrozenEncoder enc;
  enc.wq = Gaussian(hidden, hidden, stddev, rng);
  enc.wk = Gaussian(hidden, hidden, stddev, rng);
  enc.wv = Gaussian(hidden, hidden, stddev, rng);
  enc.wf = Gaussian(hidden, hidden, stddev, rng);
  return enc;
}

MatrixXd PositionTable(int rows, int hidden) {
  MatrixXd table(rows, hidden);
  for (int pos = 0; pos < rows; ++pos) {
    for (int i = 0; i < hidden; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / hidden);
      table(pos, i) = (i % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return table;
}

PromptModel::PromptModel(std::shared_ptr<const EmbeddingMatrix> embeddings,
                         ModelShape shape, std::uint64_t seed)
    : embeddings_(std::move(embeddings)),
      shape_(shape),
      encoder_(FrozenEncoder::Random(shape.hidden, seed)),
      instance_id_(NextInstanceId()) {
  shape_.Validate();
  if (!embeddings_ || embeddings_->dim() != shape_.hidden) {
    throw DimensionError("embedding dimension must equal the hidden size");
  }
  StreamRng rng(DeriveSeed(seed, "trainable-init"));
  const int h = shape_.hidden;
  const int c = shape_.recon_hidden;
  params_.prompt = Gaussian(shape_.prompt_length, h, 0.02, rng);
  if (has_recon_head()) {
    params_.w1 = Gaussian(shape_.recon_vocab, c, 1.0 / std::sqrt(c), rng);
    params_.w2 = Gaussian(c, h, 1.0 / std::sqrt(h), rng);
  } else {
    params_.w1 = MatrixXd(0, c);
    params_.w2 = MatrixXd(c, 0);
  }
  params_.w_task = MatrixXd::Zero(shape_.num_classes, h);
  params_.b_task = VectorXd::Zero(shape_.num_classes);
}

PromptModel::PromptModel(std::shared_ptr<const EmbeddingMatrix> embeddings,
                         ModelShape shape, FrozenEncoder encoder,
                         TrainableParams params)
    : embeddings_(std::move(embeddings)),
      shape_(shape),
      encoder_(std::move(encoder)),
      params_(std::move(params)),
      instance_id_(NextInstanceId()) {
  shape_.Validate();
  const int h = shape_.hidden;
  if (!embeddings_ || embeddings_->dim() != h) {
    throw DimensionError("embedding dimension must equal the hidden size");
  }
  auto check = [](const auto& m, Eigen::Index rows, Eigen::Index cols,
                  const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
      throw DimensionError(std::string("bad shape for ") + name);
    }
  };
  check(encoder_.wq, h, h, "wq");
  check(encoder_.wk, h, h, "wk");
  check(encoder_.wv, h, h, "wv");
  check(encoder_.wf, h, h, "wf");
  check(params_.prompt, shape_.prompt_length, h, "prompt");
  if (has_recon_head()) {
    check(params_.w1, shape_.recon_vocab, shape_.recon_hidden, "w1");
    check(params_.w2, shape_.recon_hidden, h, "w2");
  }
  check(params_.w_task, shape_.num_classes, h, "w_task");
  if (params_.b_task.size() != shape_.num_classes) {
    throw DimensionError("bad shape for b_task");
  }
}

void PromptModel::DropReconstructionHead() {
  shape_.recon_vocab = 0;
  params_.w1 = MatrixXd(0, shape_.recon_hidden);
  params_.w2 = MatrixXd(shape_.recon_hidden, 0);
  ++version_;
}

std::int64_t PromptModel::TrainableParameterCount() const {
  const std::int64_t n = shape_.prompt_length;
  const std::int64_t h = shape_.hidden;
  const std::int64_t c = shape_.recon_hidden;
  const std::int64_t t = shape_.recon_vocab;
  const std::int64_t k = shape_.num_classes;
  const std::int64_t recon = t > 0 ? t * c + c * h : 0;
  return n * h + recon + k * h + k;
}

ForwardTrace Forward(const PromptModel& model, std::span<const TokenId> tokens,
                     int plain_length) {
  const ModelShape& shape = model.shape();
  const int total = static_cast<int>(tokens.size());
  if (plain_length < 0 || plain_length >= total) {
    throw DimensionError("need at least one task token after " +
                         std::to_string(plain_length) + " plain tokens");
  }
  if (plain_length > 0 && !model.has_recon_head()) {
    throw DimensionError("plain tokens given to a model without a "
                         "reconstruction head");
  }
  const int h = shape.hidden;
  const int rows = shape.prompt_length + total;
  const FrozenEncoder& enc = model.encoder();
  const TrainableParams& p = model.params();

  ForwardTrace tr;
  tr.model_id = model.instance_id();
  tr.model_version = model.version();
  tr.prompt_length = shape.prompt_length;
  tr.plain_length = plain_length;
  tr.input_length = total - plain_length;

  tr.u.resize(rows, h);
  tr.u.topRows(shape.prompt_length) = p.prompt;
  tr.u.bottomRows(total) = EmbedSequence(tokens, model.embeddings());
  tr.u += PositionTable(rows, h);

  tr.q.noalias() = tr.u * enc.wq;
  tr.k.noalias() = tr.u * enc.wk;
  tr.v.noalias() = tr.u * enc.wv;
  tr.attn.noalias() = tr.q * tr.k.transpose();
  tr.attn /= std::sqrt(static_cast<double>(h));
  SoftmaxRowsInPlace(tr.attn);
  tr.residual = tr.u;
  tr.residual.noalias() += tr.attn * tr.v;
  tr.ff.noalias() = tr.residual * enc.wf;
  tr.ff = tr.ff.array().tanh().matrix();
  tr.out = tr.residual + tr.ff;

  const auto g = tr.activations();
  if (plain_length > 0) {
    tr.recon_hidden.noalias() = g.topRows(plain_length) * p.w2.transpose();
    tr.recon_probs.noalias() = tr.recon_hidden * p.w1.transpose();
    SoftmaxRowsInPlace(tr.recon_probs);
  }
  tr.pooled = g.bottomRows(tr.input_length).colwise().mean().transpose();
  tr.task_probs = Softmax(p.w_task * tr.pooled + p.b_task);
  return tr;
}

ForwardTrace Forward(const PromptModel& model,
                     const PrivatizedExample& example) {
  return Forward(model, example.tokens, example.plain_length());
}

double ReconLoss(const ForwardTrace& trace, std::span<const int> targets) {
  if (static_cast<int>(targets.size()) != trace.plain_length) {
    throw DimensionError("expected " + std::to_string(trace.plain_length) +
                         " reconstruction targets");
  }
  double loss = 0.0;
  for (int i = 0; i < trace.plain_length; ++i) {
    if (targets[i] < 0 || targets[i] >= trace.recon_probs.cols()) {
      throw IndexError("reconstruction target " + std::to_string(targets[i]) +
                       " out of range");
    }
    loss -= std::log(trace.recon_probs(i, targets[i]));
  }
  return loss;
}

double ReconLoss(const ForwardTrace& trace, const PlainTokenSpec& targets,
                 const ReconVocab& vocab) {
  const auto idx = ReconTargets(targets.tokens, vocab);
  return ReconLoss(trace, idx);
}

double TaskLoss(const ForwardTrace& trace, int label) {
  if (label < 0 || label >= trace.task_probs.size()) {
    throw IndexError("label " + std::to_string(label) + " out of range");
  }
  return -std::log(trace.task_probs[label]);
}

double TotalLoss(const ForwardTrace& trace, std::span<const int> targets,
                 int label) {
  return TaskLoss(trace, label) + ReconLoss(trace, targets);
}

std::vector<int> ReconTargets(std::span<const TokenId> plain_tokens,
                              const ReconVocab& vocab) {
  std::vector<int> out;
  out.reserve(plain_tokens.size());
  for (TokenId t : plain_tokens) {
    auto j = vocab.IndexOf(t);
    if (!j) {
      throw IndexError("plain token id " + std::to_string(t.index) +
                       " is not in the reconstruction vocabulary");
    }
    out.push_back(*j);
  }
  return out;
}

GradientBundle Backward(const PromptModel& model, const ForwardTrace& tr,
                        std::span<const int> targets, int label) {
  if (tr.model_id != model.instance_id() ||
      tr.model_version != model.version()) {
    throw NumericError("forward trace is stale for this model");
  }
  if (static_cast<int>(targets.size()) != tr.plain_length) {
    throw DimensionError("expected " + std::to_string(tr.plain_length) +
                         " reconstruction targets");
  }
  if (label < 0 || label >= tr.task_probs.size()) {
    throw IndexError("label " + std::to_string(label) + " out of range");
  }
  const TrainableParams& p = model.params();
  const FrozenEncoder& enc = model.encoder();
  const int n_prompt = tr.prompt_length;
  const int m = tr.plain_length;
  const int n = tr.input_length;
  const double scale = 1.0 / std::sqrt(static_cast<double>(model.shape().hidden));

  GradientBundle grad = TrainableParams::ZerosLike(p);
  MatrixXd d_out = MatrixXd::Zero(tr.out.rows(), tr.out.cols());

  if (m > 0) {
    MatrixXd d_logits = tr.recon_probs;
    for (int i = 0; i < m; ++i) {
      if (targets[i] < 0 || targets[i] >= d_logits.cols()) {
        throw IndexError("reconstruction target out of range");
      }
      d_logits(i, targets[i]) -= 1.0;
    }
    grad.w1.noalias() = d_logits.transpose() * tr.recon_hidden;
    const MatrixXd d_hidden = d_logits * p.w1;
    grad.w2.noalias() =
        d_hidden.transpose() * tr.out.middleRows(n_prompt, m);
    d_out.middleRows(n_prompt, m).noalias() = d_hidden * p.w2;
  }

  VectorXd d_task = tr.task_probs;
  d_task[label] -= 1.0;
  grad.w_task.noalias() = d_task * tr.pooled.transpose();
  grad.b_task = d_task;
  const Eigen::RowVectorXd d_pooled =
      (p.w_task.transpose() * d_task).transpose() / static_cast<double>(n);
  d_out.bottomRows(n).rowwise() += d_pooled;

  // O = R + tanh(R Wf)
  const MatrixXd d_pre =
      (d_out.array() * (1.0 - tr.ff.array().square())).matrix();
  MatrixXd d_res = d_out;
  d_res.noalias() += d_pre * enc.wf.transpose();

  // R = U + A V
  MatrixXd d_u = d_res;
  const MatrixXd d_attn = d_res * tr.v.transpose();
  const MatrixXd d_v = tr.attn.transpose() * d_res;
  const Eigen::VectorXd row_dot =
      (d_attn.array() * tr.attn.array()).rowwise().sum();
  MatrixXd d_scores =
      (tr.attn.array() * (d_attn.array().colwise() - row_dot.array()))
          .matrix();
  d_scores *= scale;
  const MatrixXd d_q = d_scores * tr.k;
  const MatrixXd d_k = d_scores.transpose() * tr.q;
  d_u.noalias() += d_q * enc.wq.transpose();
  d_u.noalias() += d_k * enc.wk.transpose();
  d_u.noalias() += d_v * enc.wv.transpose();

  grad.prompt = d_u.topRows(n_prompt);
  return grad;
}

Adam::Adam(const TrainableParams& like, AdamConfig config)
    : config_(config),
      m_(TrainableParams::ZerosLike(like)),
      v_(TrainableParams::ZerosLike(like)) {
  if (!(config_.learning_rate > 0.0) || !(config_.epsilon > 0.0) ||
      config_.beta1 < 0.0 || config_.beta1 >= 1.0 || config_.beta2 < 0.0 ||
      config_.beta2 >= 1.0) {
    throw ArgumentError("invalid Adam hyperparameters");
  }
}

void Adam::Step(TrainableParams& params, const GradientBundle& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, t_);
  const double c2 = 1.0 - std::pow(config_.beta2, t_);
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    if (param.size() == 0) return;
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseProduct(g);
    param.array() -= config_.learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + config_.epsilon);
  };
  update(params.prompt, grads.prompt, m_.prompt, v_.prompt);
  update(params.w1, grads.w1, m_.w1, v_.w1);
  update(params.w2, grads.w2, m_.w2, v_.w2);
  update(params.w_task, grads.w_task, m_.w_task, v_.w_task);
  update(params.b_task, grads.b_task, m_.b_task, v_.b_task);
}

Metrics Evaluate(const PromptModel& model,
                 std::span<const PrivatizedExample> data,
                 const ReconVocab* vocab) {
  Metrics out;
  if (data.empty()) return out;
  std::int64_t rec_positions = 0;
  std::int64_t rec_correct = 0;
  std::int64_t task_correct = 0;
  for (const auto& ex : data) {
    const ForwardTrace tr = Forward(model, ex);
    out.task_loss += TaskLoss(tr, ex.label);
    task_correct += ArgMax(tr.task_probs) == ex.label;
    if (ex.plain_length() > 0) {
      if (vocab == nullptr) {
        throw ArgumentError("plain tokens present but no reconstruction "
                            "vocabulary given");
      }
      const auto targets = ReconTargets(ex.plain_targets, *vocab);
      out.rec_loss += ReconLoss(tr, targets);
      for (int i = 0; i < ex.plain_length(); ++i) {
        rec_correct += ArgMax(tr.recon_probs.row(i)) == targets[i];
      }
      rec_positions += ex.plain_length();
    }
  }
  const double count = static_cast<double>(data.size());
  out.task_loss /= count;
  out.rec_loss /= count;
  out.task_acc = static_cast<double>(task_correct) / count;
  out.rec_acc = rec_positions > 0 ? static_cast<double>(rec_correct) /
                                        static_cast<double>(rec_positions)
                                  : 0.0;
  return out;
}

std::vector<EpochLog> Train(PromptModel& model,
                            std::span<const PrivatizedExample> data,
                            const ReconVocab* vocab, const TrainConfig& config,
                            const EpochCallback& on_epoch) {
  if (data.empty()) throw ArgumentError("training set is empty");
  if (config.batch_size < 1 || config.epochs < 1) {
    throw ArgumentError("batch size and epochs must be >= 1");
  }
  std::vector<std::vector<int>> targets(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].plain_length() > 0) {
      if (vocab == nullptr) {
        throw ArgumentError("plain tokens present but no reconstruction "
                            "vocabulary given");
      }
      targets[i] = ReconTargets(data[i].plain_targets, *vocab);
    }
  }

  Adam adam(model.params(), config.adam);
  StreamRng shuffle_rng(DeriveSeed(config.seed, "shuffle"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochLog> log;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(
                                             config.batch_size));
      GradientBundle batch_grad = TrainableParams::ZerosLike(model.params());
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const ForwardTrace tr = Forward(model, data[i]);
        batch_loss += TotalLoss(tr, targets[i], data[i].label);
        const GradientBundle g = Backward(model, tr, targets[i], data[i].label);
        batch_grad.prompt += g.prompt;
        batch_grad.w1 += g.w1;
        batch_grad.w2 += g.w2;
        batch_grad.w_task += g.w_task;
        batch_grad.b_task += g.b_task;
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite training loss in epoch " +
                           std::to_string(epoch));
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      batch_grad.ForEach([inv](const char*, auto& t) { t *= inv; });
      adam.Step(model.mutable_params(), batch_grad);
      if (!model.params().AllFinite()) {
        throw NumericError("parameters diverged in epoch " +
                           std::to_string(epoch));
      }
    }
    const Metrics metrics = Evaluate(model, data, vocab);
    EpochLog entry{epoch, metrics.task_loss, metrics.rec_loss,
                   metrics.task_acc, metrics.rec_acc};
    if (!std::isfinite(entry.task_loss) || !std::isfinite(entry.rec_loss)) {
      throw NumericError("non-finite evaluation loss after epoch " +
                         std::to_string(epoch));
    }
    log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return log;
}

int PredictPrivatized(const PromptModel& model,
                      std::span<const TokenId> tokens) {
  const ForwardTrace tr = Forward(model, tokens, 0);
  return static_cast<int>(ArgMax(tr.task_probs));
}

int Predict(const PromptModel& model, std::span<const TokenId> tokens,
            const MechanismParams& params, std::uint64_t example_index) {
  const auto privatized = PrepareInferenceInput(tokens, model.embeddings(),
                                                params, example_index);
  return PredictPrivatized(model, privatized);
}

}  // namespace privtune
