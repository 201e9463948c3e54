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

// Prompt-tuned classifier trained jointly on the downstream task and on
// reconstructing privatized plain tokens.
//
// Forward pass for an input of m plain tokens followed by n task tokens,
// with a trainable prompt P of N rows (all matrices are row-per-position):
//
//   U   = [P; E(z)] + positions                      (N+m+n) x h
//   A   = softmax_rows(U Wq (U Wk)^T / sqrt(h))
//   R   = U + A (U Wv)
//   O   = R + tanh(R Wf)
//   G   = rows N .. N+m+n of O
//   p_i = softmax(W1 W2 g_i)            i < m        reconstruction head
//   p   = softmax(Wt mean(G[m:]) + bt)               task head
//
//   L = -log p[y] - sum_i log p_i[j_i]
//
// Only P, W1, W2, Wt and bt are trainable. The embedding table, encoder
// weights and position table are frozen.

#ifndef PRIVTUNE_MODEL_H_
#define PRIVTUNE_MODEL_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "privtune/dataset.h"
#include "privtune/embedding_store.h"
#include "privtune/privatizer.h"
#include "privtune/types.h"

namespace privtune {

inline constexpr int kDefaultPromptLength = 10;
inline constexpr int kDefaultReconHidden = 96;

struct ModelShape {
  int hidden = 0;  // h; must equal the embedding dimension
  int prompt_length = kDefaultPromptLength;  // N
  int recon_hidden = kDefaultReconHidden;    // c
  int recon_vocab = 0;                       // |T|; 0 disables the head
  int num_classes = 2;                       // |C|

  void Validate() const;
};

// Trainable tensors. Also used for gradients and optimizer moments.
struct TrainableParams {
  MatrixXd prompt;  // N x h
  MatrixXd w1;      // |T| x c
  MatrixXd w2;      // c x h
  MatrixXd w_task;  // |C| x h
  VectorXd b_task;  // |C|

  static TrainableParams ZerosLike(const TrainableParams& other);

  // Visits (name, tensor) pairs in a fixed order.
  template <typename Fn>
  void ForEach(Fn&& fn) {
    fn("prompt", prompt);
    fn("w1", w1);
    fn("w2", w2);
    fn("w_task", w_task);
    fn("b_task", b_task);
  }
  template <typename Fn>
  void ForEach(Fn&& fn) const {
    fn("prompt", prompt);
    fn("w1", w1);
    fn("w2", w2);
    fn("w_task", w_task);
    fn("b_task", b_task);
  }

  std::int64_t Count() const;
  bool AllFinite() const;
};

using GradientBundle = TrainableParams;

struct FrozenEncoder {
  MatrixXd wq, wk, wv, wf;  // h x h

  // Gaussian entries with standard deviation 1/sqrt(h).
  static FrozenEncoder Random(int hidden, std::uint64_t seed);
};

// Sinusoidal position table, rows x h.
MatrixXd PositionTable(int rows, int hidden);

class PromptModel {
 public:
  PromptModel(std::shared_ptr<const EmbeddingMatrix> embeddings,
              ModelShape shape, std::uint64_t seed);
  PromptModel(std::shared_ptr<const EmbeddingMatrix> embeddings,
              ModelShape shape, FrozenEncoder encoder, TrainableParams params);

  const ModelShape& shape() const { return shape_; }
  const EmbeddingMatrix& embeddings() const { return *embeddings_; }
  const std::shared_ptr<const EmbeddingMatrix>& shared_embeddings() const {
    return embeddings_;
  }
  const FrozenEncoder& encoder() const { return encoder_; }
  const TrainableParams& params() const { return params_; }

  // Every call invalidates traces taken before it.
  TrainableParams& mutable_params() {
    ++version_;
    return params_;
  }
  std::uint64_t version() const { return version_; }
  std::uint64_t instance_id() const { return instance_id_; }

  bool has_recon_head() const { return shape_.recon_vocab > 0; }
  // Discards W1 and W2; predictions are unaffected.
  void DropReconstructionHead();

  // N*h + |T|*c + c*h + |C|*h + |C|.
  std::int64_t TrainableParameterCount() const;

 private:
  std::shared_ptr<const EmbeddingMatrix> embeddings_;
  ModelShape shape_;
  FrozenEncoder encoder_;
  TrainableParams params_;
  std::uint64_t version_ = 0;
  std::uint64_t instance_id_;
};

struct ForwardTrace {
  std::uint64_t model_id = 0;
  std::uint64_t model_version = 0;
  int prompt_length = 0;  // N
  int plain_length = 0;   // m
  int input_length = 0;   // n

  MatrixXd u, q, k, v, attn, residual, ff, out;
  MatrixXd recon_hidden;  // m x c, rows W2 g_i
  MatrixXd recon_probs;   // m x |T|
  VectorXd pooled;        // h
  VectorXd task_probs;    // |C|

  // G: activations of the m + n non-prompt positions.
  auto activations() const {
    return out.bottomRows(plain_length + input_length);
  }
};

// `tokens` holds m plain tokens followed by n >= 1 task tokens.
ForwardTrace Forward(const PromptModel& model, std::span<const TokenId> tokens,
                     int plain_length);
ForwardTrace Forward(const PromptModel& model,
                     const PrivatizedExample& example);

// -sum_i log p_i[j_i] over the m plain positions. `targets` are indices
// into the reconstruction vocabulary.
double ReconLoss(const ForwardTrace& trace, std::span<const int> targets);
double ReconLoss(const ForwardTrace& trace, const PlainTokenSpec& targets,
                 const ReconVocab& vocab);
double TaskLoss(const ForwardTrace& trace, int label);
double TotalLoss(const ForwardTrace& trace, std::span<const int> targets,
                 int label);

// Maps plain tokens onto reconstruction-vocabulary indices; IndexError if
// one is missing.
std::vector<int> ReconTargets(std::span<const TokenId> plain_tokens,
                              const ReconVocab& vocab);

// Exact gradient of TotalLoss with respect to the trainable parameters.
// Throws NumericError if `trace` was not produced by the model's current
// parameters.
GradientBundle Backward(const PromptModel& model, const ForwardTrace& trace,
                        std::span<const int> targets, int label);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const TrainableParams& like, AdamConfig config);
  void Step(TrainableParams& params, const GradientBundle& grads);

 private:
  AdamConfig config_;
  TrainableParams m_;
  TrainableParams v_;
  int t_ = 0;
};

struct TrainConfig {
  AdamConfig adam;
  int batch_size = 128;
  int epochs = 4;
  std::uint64_t seed = 0;
};

struct EpochLog {
  int epoch = 0;
  double task_loss = 0.0;  // mean over the training set after the epoch
  double rec_loss = 0.0;
  double task_acc = 0.0;
  double rec_acc = 0.0;  // fraction of plain positions argmax-correct
};

struct Metrics {
  double task_loss = 0.0;
  double rec_loss = 0.0;
  double task_acc = 0.0;
  double rec_acc = 0.0;
};

// Forward-only evaluation over a dataset. `vocab` may be null when no
// example carries plain tokens.
Metrics Evaluate(const PromptModel& model,
                 std::span<const PrivatizedExample> data,
                 const ReconVocab* vocab);

using EpochCallback = std::function<void(const EpochLog&)>;

// Mini-batch Adam on the mean total loss. Deterministic in config.seed.
// Throws NumericError on a non-finite loss or parameter; epochs completed
// before that are reported through `on_epoch`.
std::vector<EpochLog> Train(PromptModel& model,
                            std::span<const PrivatizedExample> data,
                            const ReconVocab* vocab, const TrainConfig& config,
                            const EpochCallback& on_epoch = {});

// Argmax of the task head on already-privatized tokens (no plain tokens).
int PredictPrivatized(const PromptModel& model,
                      std::span<const TokenId> tokens);

// Privatizes `tokens` on stream `example_index`, then PredictPrivatized.
int Predict(const PromptModel& model, std::span<const TokenId> tokens,
            const MechanismParams& params, std::uint64_t example_index);

}  // namespace privtune

#endif  // PRIVTUNE_MODEL_H_
