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

#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "privtune/checkpoint.h"
#include "privtune/errors.h"
#include "gradcheck.h"
#include "synthetic.h"

namespace privtune {
namespace {

using testing::RandomVocab;

std::shared_ptr<const EmbeddingMatrix> SharedVocab(int size, int dim,
                                                   std::uint64_t seed) {
  return std::make_shared<const EmbeddingMatrix>(RandomVocab(size, dim, seed));
}

std::vector<TokenId> RandomTokens(int count, int vocab, std::mt19937_64& gen) {
  std::vector<TokenId> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(TokenId{static_cast<int>(gen() % vocab)});
  }
  return out;
}

void Randomize(TrainableParams& p, std::mt19937_64& gen, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  p.ForEach([&](const char*, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = normal(gen);
  });
}

TEST(ModelShapeTest, Validation) {
  EXPECT_THROW((ModelShape{0}).Validate(), ArgumentError);
  EXPECT_THROW((ModelShape{4, 0}).Validate(), ArgumentError);
  EXPECT_THROW((ModelShape{4, 2, 0, 5}).Validate(), ArgumentError);
  EXPECT_THROW((ModelShape{4, 2, 3, 1}).Validate(), ArgumentError);
  EXPECT_THROW((ModelShape{4, 2, 3, 5, 1}).Validate(), ArgumentError);
  EXPECT_NO_THROW((ModelShape{4, 2, 3, 0}).Validate());
}

TEST(PromptModelTest, HiddenMustMatchEmbeddings) {
  EXPECT_THROW(PromptModel(SharedVocab(10, 6, 1), ModelShape{8}, 1),
               DimensionError);
}

TEST(ForwardTest, Shapes) {
  const auto emb = SharedVocab(300, 64, 2);
  const PromptModel model(emb, ModelShape{64, 10, 96, 50, 3}, 7);
  std::mt19937_64 gen(1);
  const ForwardTrace tr = Forward(model, RandomTokens(60, 300, gen), 40);
  EXPECT_EQ(tr.u.rows(), 70);
  EXPECT_EQ(tr.attn.rows(), 70);
  EXPECT_EQ(tr.attn.cols(), 70);
  EXPECT_EQ(tr.activations().rows(), 60);
  EXPECT_EQ(tr.activations().cols(), 64);
  EXPECT_EQ(tr.recon_probs.rows(), 40);
  EXPECT_EQ(tr.recon_probs.cols(), 50);
  EXPECT_EQ(tr.task_probs.size(), 3);
}

TEST(ForwardTest, SoftmaxRowsSumToOne) {
  const auto emb = SharedVocab(100, 16, 3);
  PromptModel model(emb, ModelShape{16, 4, 8, 20, 4}, 9);
  std::mt19937_64 gen(5);
  Randomize(model.mutable_params(), gen, 1.0);
  const ForwardTrace tr = Forward(model, RandomTokens(12, 100, gen), 5);
  for (Eigen::Index r = 0; r < tr.attn.rows(); ++r)
    EXPECT_NEAR(tr.attn.row(r).sum(), 1.0, 1e-6);
  for (Eigen::Index r = 0; r < tr.recon_probs.rows(); ++r)
    EXPECT_NEAR(tr.recon_probs.row(r).sum(), 1.0, 1e-6);
  EXPECT_NEAR(tr.task_probs.sum(), 1.0, 1e-6);
}

TEST(ForwardTest, ZeroTaskHeadGivesUniformProbabilities) {
  const auto emb = SharedVocab(50, 8, 4);
  PromptModel model(emb, ModelShape{8, 3, 4, 0, 5}, 2);
  model.mutable_params().prompt.setZero();
  std::mt19937_64 gen(2);
  const ForwardTrace tr = Forward(model, RandomTokens(6, 50, gen), 0);
  for (int c = 0; c < 5; ++c) EXPECT_DOUBLE_EQ(tr.task_probs[c], 0.2);
}

TEST(ForwardTest, Errors) {
  const auto emb = SharedVocab(20, 8, 4);
  const PromptModel no_head(emb, ModelShape{8, 2, 4, 0, 2}, 1);
  const std::vector<TokenId> toks = {TokenId{1}, TokenId{2}, TokenId{3}};
  EXPECT_THROW(Forward(no_head, toks, 1), DimensionError);
  EXPECT_THROW(Forward(no_head, toks, 3), DimensionError);
  const std::vector<TokenId> bad = {TokenId{99}};
  EXPECT_THROW(Forward(no_head, bad, 0), IndexError);
}

ForwardTrace ProbTrace(MatrixXd recon, VectorXd task) {
  ForwardTrace tr;
  tr.plain_length = static_cast<int>(recon.rows());
  tr.recon_probs = std::move(recon);
  tr.task_probs = std::move(task);
  return tr;
}

TEST(LossTest, ReconLossExamples) {
  const VectorXd half = VectorXd::Constant(2, 0.5);
  const ForwardTrace uniform = ProbTrace(MatrixXd::Constant(1, 4, 0.25), half);
  const std::vector<int> t0 = {2};
  EXPECT_NEAR(ReconLoss(uniform, t0), std::log(4.0), 1e-12);

  MatrixXd perfect = MatrixXd::Zero(2, 3);
  perfect(0, 1) = 1.0;
  perfect(1, 2) = 1.0;
  const std::vector<int> t1 = {1, 2};
  EXPECT_EQ(ReconLoss(ProbTrace(perfect, half), t1), 0.0);

  MatrixXd mixed(2, 4);
  mixed << 0.5, 0.5, 0.0, 0.0, 0.25, 0.25, 0.25, 0.25;
  EXPECT_NEAR(ReconLoss(ProbTrace(mixed, half), t1),
              std::log(2.0) + std::log(4.0), 1e-12);

  const std::vector<int> out_of_range = {7};
  EXPECT_THROW(ReconLoss(uniform, out_of_range), IndexError);
  const std::vector<int> wrong_count = {0, 1};
  EXPECT_THROW(ReconLoss(uniform, wrong_count), DimensionError);
}

TEST(LossTest, ReconLossRejectsTokenOutsideVocab) {
  const ForwardTrace tr =
      ProbTrace(MatrixXd::Constant(1, 2, 0.5), VectorXd::Constant(2, 0.5));
  const ReconVocab vocab({TokenId{4}, TokenId{6}});
  EXPECT_NEAR(ReconLoss(tr, PlainTokenSpec{{TokenId{6}}, 0}, vocab),
              std::log(2.0), 1e-12);
  EXPECT_THROW(ReconLoss(tr, PlainTokenSpec{{TokenId{5}}, 0}, vocab),
               IndexError);
}

TEST(LossTest, TaskAndTotalLoss) {
  const ForwardTrace uniform =
      ProbTrace(MatrixXd::Constant(1, 4, 0.25), VectorXd::Constant(2, 0.5));
  EXPECT_NEAR(TaskLoss(uniform, 1), std::log(2.0), 1e-12);
  const std::vector<int> t = {0};
  EXPECT_NEAR(TotalLoss(uniform, t, 0), std::log(2.0) + std::log(4.0), 1e-12);
  EXPECT_THROW(TaskLoss(uniform, 2), IndexError);
  EXPECT_THROW(TaskLoss(uniform, -1), IndexError);

  VectorXd p(3);
  p << 0.1, 0.9, 0.0;
  const ForwardTrace skewed = ProbTrace(MatrixXd(0, 4), p);
  EXPECT_NEAR(TaskLoss(skewed, 0), std::log(10.0), 1e-12);
  VectorXd one(2);
  one << 0.0, 1.0;
  EXPECT_EQ(TaskLoss(ProbTrace(MatrixXd(0, 4), one), 1), 0.0);
  EXPECT_EQ(TotalLoss(skewed, {}, 1), TaskLoss(skewed, 1));
}

TEST(BackwardTest, TaskLogitGradientIsPMinusY) {
  const auto emb = SharedVocab(30, 8, 5);
  PromptModel model(emb, ModelShape{8, 2, 4, 0, 3}, 4);
  std::mt19937_64 gen(8);
  Randomize(model.mutable_params(), gen, 0.5);
  const ForwardTrace tr = Forward(model, RandomTokens(5, 30, gen), 0);
  const GradientBundle g = Backward(model, tr, {}, 2);
  VectorXd expected = tr.task_probs;
  expected[2] -= 1.0;
  EXPECT_LT((g.b_task - expected).norm(), 1e-14);
  EXPECT_LT((g.w_task - expected * tr.pooled.transpose()).norm(), 1e-12);
}

TEST(BackwardTest, MatchesFiniteDifferences) {
  for (int seed = 0; seed < 20; ++seed) {
    for (const auto& e : testing::RandomSmallModelErrors(seed)) {
      EXPECT_LE(e.relative_error, 1e-3) << "seed " << seed << " " << e.name;
    }
  }
}

TEST(BackwardTest, FixedPointHasZeroGradient) {
  const auto emb = SharedVocab(10, 8, 6);
  PromptModel model(emb, ModelShape{8, 2, 4, 3, 2}, 3);
  const std::vector<TokenId> tokens = {TokenId{1}, TokenId{4}, TokenId{7}};
  const std::vector<int> targets = {2};
  {
    const ForwardTrace tr = Forward(model, tokens, 1);
    const VectorXd hidden = tr.recon_hidden.row(0).transpose();
    TrainableParams& p = model.mutable_params();
    p.w1.setZero();
    p.w1.row(2) = 1000.0 * hidden.transpose() / hidden.squaredNorm();
    p.w_task.setZero();
    p.b_task << 1000.0, -1000.0;
  }
  const ForwardTrace tr = Forward(model, tokens, 1);
  const GradientBundle g = Backward(model, tr, targets, 0);
  double norm_sq = 0.0;
  g.ForEach([&](const char*, const auto& t) { norm_sq += t.squaredNorm(); });
  EXPECT_LT(std::sqrt(norm_sq), 1e-8);
  EXPECT_EQ(TotalLoss(tr, targets, 0), 0.0);
}

TEST(BackwardTest, StaleTraceRejected) {
  const auto emb = SharedVocab(10, 8, 6);
  PromptModel model(emb, ModelShape{8, 2, 4, 0, 2}, 3);
  const std::vector<TokenId> tokens = {TokenId{1}, TokenId{4}};
  const ForwardTrace tr = Forward(model, tokens, 0);
  model.mutable_params().b_task[0] = 0.5;
  EXPECT_THROW(Backward(model, tr, {}, 0), NumericError);
  const PromptModel other(emb, ModelShape{8, 2, 4, 0, 2}, 3);
  EXPECT_THROW(Backward(other, Forward(model, tokens, 0), {}, 0),
               NumericError);
}

TEST(PromptModelTest, ParameterCount) {
  const auto emb = SharedVocab(20, 8, 1);
  PromptModel model(emb, ModelShape{8, 10, 96, 7, 3}, 1);
  const std::int64_t expected = 10 * 8 + 7 * 96 + 96 * 8 + 3 * 8 + 3;
  EXPECT_EQ(model.TrainableParameterCount(), expected);
  EXPECT_EQ(model.params().Count(), expected);
  model.DropReconstructionHead();
  EXPECT_EQ(model.TrainableParameterCount(), 10 * 8 + 3 * 8 + 3);
  EXPECT_EQ(model.params().Count(), 10 * 8 + 3 * 8 + 3);
}

struct TrainedFixture {
  testing::SyntheticTask task;
  std::vector<PrivatizedExample> data;
  ReconVocab vocab;
};

TrainedFixture SmallSyntheticData(double eta, int plain_length) {
  auto task = testing::MakeSyntheticTask(40, 16, 6, 200, 3);
  const auto lists = testing::TokenLists(task.examples);
  ReconVocab vocab = BuildReconVocab(lists, 20);
  const PlainTokenSpec spec = GeneratePlainTokens(
      std::max(plain_length, 1), vocab, 5);
  std::vector<PrivatizedExample> data;
  const MechanismParams params{eta, 1};
  for (std::size_t i = 0; i < task.examples.size(); ++i) {
    if (plain_length > 0) {
      data.push_back(PrepareExample(task.examples[i], spec, *task.embeddings,
                                    params, i));
    } else {
      data.push_back({PrepareInferenceInput(task.examples[i].tokens,
                                            *task.embeddings, params, i),
                      {}, task.examples[i].label});
    }
  }
  return {std::move(task), std::move(data), std::move(vocab)};
}

TEST(TrainTest, LossDecreasesAndEncoderStaysFrozen) {
  const auto fx = SmallSyntheticData(1e9, 8);
  PromptModel model(fx.task.embeddings, ModelShape{16, 4, 12, 20, 2}, 11);
  const FrozenEncoder before = model.encoder();
  const RowMatrixXd emb_before = model.embeddings().vectors();
  const Metrics start = Evaluate(model, fx.data, &fx.vocab);
  TrainConfig config;
  config.adam.learning_rate = 1e-2;
  config.batch_size = 32;
  config.epochs = 5;
  int calls = 0;
  const auto log = Train(model, fx.data, &fx.vocab, config,
                         [&](const EpochLog&) { ++calls; });
  ASSERT_EQ(log.size(), 5u);
  EXPECT_EQ(calls, 5);
  EXPECT_LT(log.back().task_loss, start.task_loss);
  EXPECT_LT(log.back().rec_loss, start.rec_loss);
  EXPECT_GT(log.back().task_acc, 0.9);
  EXPECT_EQ(model.encoder().wq, before.wq);
  EXPECT_EQ(model.encoder().wk, before.wk);
  EXPECT_EQ(model.encoder().wv, before.wv);
  EXPECT_EQ(model.encoder().wf, before.wf);
  EXPECT_EQ(model.embeddings().vectors(), emb_before);
}

TEST(TrainTest, SameSeedIsBitIdentical) {
  const auto fx = SmallSyntheticData(2.0, 4);
  TrainConfig config;
  config.batch_size = 16;
  config.epochs = 2;
  config.seed = 77;
  auto run = [&]() {
    PromptModel model(fx.task.embeddings, ModelShape{16, 3, 8, 20, 2}, 5);
    const auto log = Train(model, fx.data, &fx.vocab, config);
    return std::make_pair(log, model.params());
  };
  const auto [log_a, params_a] = run();
  const auto [log_b, params_b] = run();
  for (std::size_t e = 0; e < log_a.size(); ++e) {
    EXPECT_EQ(log_a[e].task_loss, log_b[e].task_loss);
    EXPECT_EQ(log_a[e].rec_loss, log_b[e].rec_loss);
  }
  EXPECT_EQ(params_a.prompt, params_b.prompt);
  EXPECT_EQ(params_a.w1, params_b.w1);
}

TEST(TrainTest, Errors) {
  const auto fx = SmallSyntheticData(1e9, 4);
  PromptModel model(fx.task.embeddings, ModelShape{16, 3, 8, 20, 2}, 5);
  EXPECT_THROW(Train(model, {}, &fx.vocab, TrainConfig{}), ArgumentError);
  EXPECT_THROW(Train(model, fx.data, nullptr, TrainConfig{}), ArgumentError);
  TrainConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(Train(model, fx.data, &fx.vocab, bad), ArgumentError);
}

TEST(TrainTest, DivergenceAborts) {
  const auto fx = SmallSyntheticData(1e9, 0);
  PromptModel model(fx.task.embeddings, ModelShape{16, 3, 8, 0, 2}, 5);
  model.mutable_params().b_task[0] = std::nan("");
  EXPECT_THROW(Train(model, fx.data, nullptr, TrainConfig{}), NumericError);
}

TEST(PredictTest, DroppingHeadKeepsPredictions) {
  const auto fx = SmallSyntheticData(1e9, 4);
  PromptModel model(fx.task.embeddings, ModelShape{16, 3, 8, 20, 2}, 5);
  TrainConfig config;
  config.adam.learning_rate = 1e-2;
  config.epochs = 1;
  config.batch_size = 32;
  Train(model, fx.data, &fx.vocab, config);
  const MechanismParams params{3.0, 8};
  std::vector<int> before;
  for (std::size_t i = 0; i < 50; ++i) {
    before.push_back(Predict(model, fx.task.examples[i].tokens, params, i));
  }
  model.DropReconstructionHead();
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(Predict(model, fx.task.examples[i].tokens, params, i), before[i]);
  }
}

TEST(CheckpointTest, ReloadGivesIdenticalPredictions) {
  const auto fx = SmallSyntheticData(1e9, 4);
  PromptModel model(fx.task.embeddings, ModelShape{16, 3, 8, 20, 2}, 5);
  TrainConfig config;
  config.adam.learning_rate = 1e-2;
  config.epochs = 1;
  config.batch_size = 32;
  Train(model, fx.data, &fx.vocab, config);

  const auto path =
      std::filesystem::temp_directory_path() / "privtune_model_test_ckpt.json";
  const Checkpoint saved{model, fx.vocab, {GeneratePlainTokens(4, fx.vocab, 5)},
                         MechanismParams{1e9, 1}, config, "abc"};
  SaveCheckpoint(path, saved);
  const Checkpoint loaded = LoadCheckpoint(path, fx.task.embeddings);
  EXPECT_EQ(loaded.model.params().prompt, model.params().prompt);
  EXPECT_EQ(loaded.model.params().w1, model.params().w1);
  EXPECT_EQ(loaded.model.encoder().wf, model.encoder().wf);
  EXPECT_EQ(loaded.config_hash, "abc");
  EXPECT_EQ(loaded.plain_specs.at(0).tokens, saved.plain_specs.at(0).tokens);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& toks = fx.data[i].tokens;
    const ForwardTrace a = Forward(model, toks, 4);
    const ForwardTrace b = Forward(loaded.model, toks, 4);
    EXPECT_EQ(a.task_probs, b.task_probs);
    EXPECT_EQ(a.recon_probs, b.recon_probs);
  }
  const auto other = testing::SyntheticEmbeddings(40, 16, 99);
  EXPECT_THROW(LoadCheckpoint(path, other), DataError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace privtune
