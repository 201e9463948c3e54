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

#include "privtune/privatizer.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "privtune/errors.h"

namespace privtune {
namespace {

using testing::PlanarMechanismOracle;
using testing::RandomVocab;
using testing::TinyVocab;

std::vector<double> MechanismDistribution(const EmbeddingMatrix& m, int input,
                                          double eta, int draws,
                                          std::uint64_t seed) {
  std::vector<double> p(m.size(), 0.0);
  const MechanismParams params{eta, seed};
  for (int i = 0; i < draws; ++i) {
    StreamRng rng = StreamRng::ForKey(seed, 0, i);
    p[PrivatizeToken(TokenId{input}, m, params, rng).index] += 1.0;
  }
  for (double& v : p) v /= draws;
  return p;
}

TEST(SampleNoiseTest, RejectsNonPositiveEta) {
  StreamRng rng(1);
  EXPECT_THROW(SampleNoise(4, MechanismParams{0.0, 1}, rng), ArgumentError);
  EXPECT_THROW(SampleNoise(4, MechanismParams{-2.0, 1}, rng), ArgumentError);
  EXPECT_THROW(SampleNoise(0, MechanismParams{1.0, 1}, rng), ArgumentError);
}

TEST(SampleNoiseTest, MagnitudeFollowsGammaLaw) {
  // d = 4, eta = 2: E[l] = d/eta = 2, Var[l] = d/eta^2 = 1.
  const MechanismParams params{2.0, 7};
  StreamRng rng(7);
  const int draws = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const NoiseSample s = SampleNoise(4, params, rng);
    ASSERT_GE(s.magnitude, 0.0);
    ASSERT_NEAR(s.direction.norm(), 1.0, 1e-9);
    ASSERT_NEAR(s.z.norm(), s.magnitude, 1e-9 * (1.0 + s.magnitude));
    sum += s.magnitude;
    sum_sq += s.magnitude * s.magnitude;
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  EXPECT_GE(mean, 1.95);
  EXPECT_LE(mean, 2.05);
  EXPECT_NEAR(var, 1.0, 0.1);
}

TEST(SampleNoiseTest, HugeEtaGivesVanishingNoise) {
  const MechanismParams params{1e6, 3};
  StreamRng rng(3);
  for (int i = 0; i < 10000; ++i) {
    ASSERT_LT(SampleNoise(2, params, rng).z.norm(), 1e-4);
  }
}

TEST(SampleNoiseTest, DirectionIsIsotropic) {
  for (int d : {2, 8, 32}) {
    StreamRng rng(d);
    VectorXd mean = VectorXd::Zero(d);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      mean += SampleNoise(d, MechanismParams{1.0, 0}, rng).direction;
    }
    EXPECT_LT((mean / draws).norm(), 0.02) << "d=" << d;
  }
}

TEST(PrivatizeEmbeddingTest, VanishingNoise) {
  VectorXd x(3);
  x << 0.3, -1.0, 2.0;
  StreamRng rng(5);
  EXPECT_LT((PrivatizeEmbedding(x, MechanismParams{1e9, 5}, rng) - x).norm(),
            1e-6);
}

TEST(PrivatizeEmbeddingTest, FixedSeedIsDeterministic) {
  VectorXd x = VectorXd::Ones(6);
  StreamRng a = StreamRng::ForKey(42, 3, 9);
  StreamRng b = StreamRng::ForKey(42, 3, 9);
  const MechanismParams params{1.5, 42};
  EXPECT_EQ(PrivatizeEmbedding(x, params, a), PrivatizeEmbedding(x, params, b));
}

TEST(PrivatizeEmbeddingTest, NoiseHasZeroMean) {
  const int d = 3;
  const double eta = 2.0;
  VectorXd x = VectorXd::Zero(d);
  StreamRng rng(8);
  VectorXd sum = VectorXd::Zero(d);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    sum += PrivatizeEmbedding(x, MechanismParams{eta, 8}, rng);
  }
  // Per-coordinate variance is E[l^2]/d = (d(d+1)/eta^2)/d.
  const double se = std::sqrt((d + 1) / (eta * eta) / draws);
  for (int c = 0; c < d; ++c) EXPECT_LT(std::abs(sum[c] / draws), 3 * se);
}

TEST(PrivatizeTokenTest, HugeEtaKeepsToken) {
  const EmbeddingMatrix m = RandomVocab(200, 10, 2);
  const MechanismParams params{1e9, 1};
  for (int t = 0; t < m.size(); ++t) {
    StreamRng rng = StreamRng::ForKey(1, 0, t);
    ASSERT_EQ(PrivatizeToken(TokenId{t}, m, params, rng).index, t);
  }
}

// Distribution of M(a) on {a, b, c} against the independent planar sampler.
TEST(PrivatizeTokenTest, MatchesPlanarOracle) {
  const EmbeddingMatrix m = TinyVocab();
  const int draws = 1000000;
  const auto mech = MechanismDistribution(m, 0, 2.0, draws, 17);
  const auto oracle = PlanarMechanismOracle(m.vectors(), 0, 2.0, draws, 1234);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(mech[k], oracle[k], 0.01) << "outcome " << k;
  }
  // Larger eta keeps the input more often.
  const auto oracle20 =
      PlanarMechanismOracle(m.vectors(), 0, 20.0, draws, 4321);
  const auto mech20 = MechanismDistribution(m, 0, 20.0, draws, 18);
  EXPECT_GT(oracle20[0], oracle[0]);
  EXPECT_GT(mech20[0], mech[0]);
}

// Pr[M(x) = w] <= exp(eta * |x - x'|) Pr[M(x') = w], checked on outcomes with
// enough mass for the estimate to be tight.
TEST(PrivatizeTokenTest, DistanceBoundHolds) {
  const EmbeddingMatrix m = TinyVocab();
  const double eta = 1.0;
  const int draws = 400000;
  const auto from_a = MechanismDistribution(m, 0, eta, draws, 51);
  const auto from_b = MechanismDistribution(m, 1, eta, draws, 52);
  const double bound = std::exp(eta * 1.0);
  for (int w = 0; w < 3; ++w) {
    ASSERT_GT(from_a[w], 0.01);
    ASSERT_GT(from_b[w], 0.01);
    EXPECT_LE(from_a[w] / from_b[w], bound * 1.05) << "w=" << w;
    EXPECT_LE(from_b[w] / from_a[w], bound * 1.05) << "w=" << w;
  }
}

TEST(PrivatizeSequenceTest, EmptyAndLength) {
  const EmbeddingMatrix m = RandomVocab(50, 4, 3);
  const MechanismParams params{1.0, 3};
  EXPECT_TRUE(PrivatizeSequence({}, m, params, 0).empty());
  std::vector<TokenId> seq;
  for (int i = 0; i < 50; ++i) seq.push_back(TokenId{i});
  EXPECT_EQ(PrivatizeSequence(seq, m, params, 0).size(), 50u);
}

TEST(PrivatizeSequenceTest, DeterministicAndOrderIndependent) {
  const EmbeddingMatrix m = RandomVocab(80, 6, 4);
  const MechanismParams params{0.8, 99};
  std::vector<TokenId> seq;
  for (int i = 0; i < 40; ++i) seq.push_back(TokenId{(i * 7) % 80});
  const auto a = PrivatizeSequence(seq, m, params, 5);
  const auto b = PrivatizeSequence(seq, m, params, 5);
  EXPECT_EQ(a, b);
  // Position t depends only on (seed, stream, t): privatizing one token on
  // its own key reproduces it.
  for (std::size_t t = 0; t < seq.size(); ++t) {
    StreamRng rng = StreamRng::ForKey(99, 5, t);
    EXPECT_EQ(PrivatizeToken(seq[t], m, params, rng), a[t]);
  }
  EXPECT_NE(a, PrivatizeSequence(seq, m, MechanismParams{0.8, 100}, 5));
}

TEST(PrivatizeSequenceTest, OutOfRangeToken) {
  const EmbeddingMatrix m = TinyVocab();
  const std::vector<TokenId> bad = {TokenId{0}, TokenId{7}};
  EXPECT_THROW(PrivatizeSequence(bad, m, MechanismParams{1.0, 0}, 0),
               IndexError);
}

TEST(PrivatizeSequenceEmbeddingsTest, NearestRowIsPrivatizedToken) {
  const EmbeddingMatrix m = RandomVocab(60, 5, 8);
  const MechanismParams params{1.2, 4};
  std::vector<TokenId> seq;
  for (int i = 0; i < 30; ++i) seq.push_back(TokenId{i});
  const auto tokens = PrivatizeSequence(seq, m, params, 2);
  const RowMatrixXd rows = PrivatizeSequenceEmbeddings(seq, m, params, 2);
  for (int t = 0; t < 30; ++t) {
    EXPECT_EQ(NearestToken(rows.row(t).transpose(), m).token, tokens[t]);
  }
}

TEST(ReplacementProbabilityTest, ZeroAtHugeEta) {
  const EmbeddingMatrix m = RandomVocab(100, 8, 6);
  std::vector<std::vector<TokenId>> corpus(20);
  for (int i = 0; i < 20; ++i)
    for (int t = 0; t < 50; ++t) corpus[i].push_back(TokenId{(i + t) % 100});
  EXPECT_EQ(EstimateReplacementProbability(corpus, m, {1e9, 1}, 100), 0.0);
}

TEST(ReplacementProbabilityTest, Errors) {
  const EmbeddingMatrix m = TinyVocab();
  std::vector<std::vector<TokenId>> empty;
  EXPECT_THROW(EstimateReplacementProbability(empty, m, {1.0, 0}, 1),
               ArgumentError);
  std::vector<std::vector<TokenId>> one = {{TokenId{0}}};
  EXPECT_THROW(EstimateReplacementProbability(one, m, {1.0, 0}, 0),
               ArgumentError);
}

TEST(ReplacementProbabilityTest, MatchesOracleOnTinyVocab) {
  const EmbeddingMatrix m = TinyVocab();
  std::vector<std::vector<TokenId>> corpus = {{TokenId{0}}};
  const double p =
      EstimateReplacementProbability(corpus, m, {2.0, 77}, 200000);
  const auto oracle = PlanarMechanismOracle(m.vectors(), 0, 2.0, 1000000, 5);
  EXPECT_NEAR(p, 1.0 - oracle[0], 0.01);
}

TEST(ReplacementProbabilityTest, NonIncreasingInEta) {
  const EmbeddingMatrix m = testing::ToyVocab();
  std::vector<std::vector<TokenId>> corpus = {
      {TokenId{0}, TokenId{1}, TokenId{2}, TokenId{3}, TokenId{4}}};
  double previous = 1.0;
  for (double eta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double p = EstimateReplacementProbability(corpus, m, {eta, 3}, 20000);
    EXPECT_LE(p, previous + 0.01) << "eta=" << eta;
    previous = p;
  }
}

TEST(BulkPrivatizerTest, DoublePathMatchesReferencePath) {
  const EmbeddingMatrix m = RandomVocab(3000, 24, 12);
  const MechanismParams params{0.5, 31};
  std::vector<std::vector<TokenId>> corpus(40);
  for (int i = 0; i < 40; ++i)
    for (int t = 0; t < 25; ++t) corpus[i].push_back(TokenId{(i * 31 + t) % 3000});
  const BulkPrivatizer<double> bulk(m, params, 64);
  const auto out = bulk.PrivatizeCorpus(corpus, 10);
  for (int i = 0; i < 40; ++i) {
    EXPECT_EQ(out[i], PrivatizeSequence(corpus[i], m, params, 10 + i));
  }
}

TEST(BulkPrivatizerTest, WorkerCountDoesNotChangeResult) {
  const EmbeddingMatrix m = RandomVocab(2000, 16, 13);
  const BulkPrivatizer<float> bulk(m, MechanismParams{0.7, 2}, 32);
  std::vector<std::vector<TokenId>> corpus(64);
  for (int i = 0; i < 64; ++i)
    for (int t = 0; t < 20; ++t) corpus[i].push_back(TokenId{(i + 13 * t) % 2000});
  EXPECT_EQ(bulk.PrivatizeCorpus(corpus, 0, 1), bulk.PrivatizeCorpus(corpus, 0, 4));
}

TEST(BulkPrivatizerTest, FloatPathAgreesWithDoublePath) {
  const EmbeddingMatrix m = RandomVocab(4000, 50, 14);
  const MechanismParams params{0.3, 6};
  std::vector<std::vector<TokenId>> corpus(100);
  for (int i = 0; i < 100; ++i)
    for (int t = 0; t < 30; ++t) corpus[i].push_back(TokenId{(i * 37 + t) % 4000});
  const auto f = BulkPrivatizer<float>(m, params).PrivatizeCorpus(corpus);
  const auto d = BulkPrivatizer<double>(m, params).PrivatizeCorpus(corpus);
  int events = 0, agree = 0;
  for (int i = 0; i < 100; ++i) {
    for (int t = 0; t < 30; ++t) {
      ++events;
      agree += f[i][t] == d[i][t];
    }
  }
  EXPECT_GE(static_cast<double>(agree) / events, 0.999);
}

}  // namespace
}  // namespace privtune
