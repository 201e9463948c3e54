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

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "privtune/errors.h"

namespace privtune {

void MechanismParams::Validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ArgumentError("privacy parameter eta must be finite and > 0, got " +
                        std::to_string(eta));
  }
}

NoiseSample SampleNoise(int dim, const MechanismParams& params,
                        StreamRng& rng) {
  params.Validate();
  if (dim < 1) throw ArgumentError("noise dimension must be >= 1");
  NoiseSample sample;
  sample.magnitude =
      std::gamma_distribution<double>(dim, 1.0 / params.eta)(rng);
  std::normal_distribution<double> normal;
  sample.direction.resize(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) sample.direction[i] = normal(rng);
    norm = sample.direction.norm();
  } while (!(norm > 0.0));
  sample.direction /= norm;
  sample.z = sample.magnitude * sample.direction;
  return sample;
}

VectorXd PrivatizeEmbedding(const Eigen::Ref<const VectorXd>& x,
                            const MechanismParams& params, StreamRng& rng) {
  return x + SampleNoise(static_cast<int>(x.size()), params, rng).z;
}

TokenId PrivatizeToken(TokenId token, const EmbeddingMatrix& matrix,
                       const MechanismParams& params, StreamRng& rng) {
  const VectorXd x = matrix.row(token).transpose();
  return NearestToken(PrivatizeEmbedding(x, params, rng), matrix).token;
}

std::vector<TokenId> PrivatizeSequence(std::span<const TokenId> tokens,
                                       const EmbeddingMatrix& matrix,
                                       const MechanismParams& params,
                                       std::uint64_t stream) {
  params.Validate();
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    matrix.token(tokens[t]);  // range check
    StreamRng rng = StreamRng::ForKey(params.seed, stream, t);
    out.push_back(PrivatizeToken(tokens[t], matrix, params, rng));
  }
  return out;
}

RowMatrixXd PrivatizeSequenceEmbeddings(std::span<const TokenId> tokens,
                                        const EmbeddingMatrix& matrix,
                                        const MechanismParams& params,
                                        std::uint64_t stream) {
  params.Validate();
  RowMatrixXd out = EmbedSequence(tokens, matrix);
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    StreamRng rng = StreamRng::ForKey(params.seed, stream, t);
    out.row(t) += SampleNoise(static_cast<int>(matrix.dim()), params, rng)
                      .z.transpose();
  }
  return out;
}

double EstimateReplacementProbability(
    std::span<const std::vector<TokenId>> corpus,
    const EmbeddingMatrix& matrix, const MechanismParams& params,
    int trials) {
  if (corpus.empty()) throw ArgumentError("corpus is empty");
  if (trials < 1) throw ArgumentError("trials must be >= 1");
  std::uint64_t events = 0;
  std::uint64_t replaced = 0;
  for (int r = 0; r < trials; ++r) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const std::uint64_t stream =
          static_cast<std::uint64_t>(r) * corpus.size() + i;
      const auto out = PrivatizeSequence(corpus[i], matrix, params, stream);
      for (std::size_t t = 0; t < out.size(); ++t) {
        ++events;
        replaced += out[t] != corpus[i][t];
      }
    }
  }
  if (events == 0) throw ArgumentError("corpus contains no tokens");
  return static_cast<double>(replaced) / static_cast<double>(events);
}

template <typename Scalar>
BulkPrivatizer<Scalar>::BulkPrivatizer(const EmbeddingMatrix& matrix,
                                       MechanismParams params,
                                       Eigen::Index batch_rows)
    : matrix_(&matrix),
      params_(params),
      batch_rows_(std::max<Eigen::Index>(1, batch_rows)),
      index_(matrix.vectors()) {
  params_.Validate();
}

template <typename Scalar>
std::vector<TokenId> BulkPrivatizer<Scalar>::PrivatizeSequence(
    std::span<const TokenId> tokens, std::uint64_t stream) const {
  const std::vector<TokenId> copy(tokens.begin(), tokens.end());
  return PrivatizeCorpus(std::span<const std::vector<TokenId>>(&copy, 1),
                         stream, 1)
      .front();
}

template <typename Scalar>
std::vector<std::vector<TokenId>> BulkPrivatizer<Scalar>::PrivatizeCorpus(
    std::span<const std::vector<TokenId>> corpus, std::uint64_t first_stream,
    int workers) const {
  struct Event {
    std::size_t sequence;
    std::size_t position;
  };
  std::vector<Event> events;
  std::vector<std::vector<TokenId>> out(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out[i].resize(corpus[i].size());
    for (std::size_t t = 0; t < corpus[i].size(); ++t) {
      matrix_->token(corpus[i][t]);  // range check
      events.push_back({i, t});
    }
  }

  const int dim = static_cast<int>(matrix_->dim());
  auto run_range = [&](std::size_t begin, std::size_t end) {
    RowMatrixX<Scalar> queries;
    std::vector<Neighbor> found;
    for (std::size_t start = begin; start < end;
         start += static_cast<std::size_t>(batch_rows_)) {
      const std::size_t len =
          std::min<std::size_t>(batch_rows_, end - start);
      queries.resize(static_cast<Eigen::Index>(len), dim);
      for (std::size_t k = 0; k < len; ++k) {
        const Event& e = events[start + k];
        StreamRng rng =
            StreamRng::ForKey(params_.seed, first_stream + e.sequence,
                              e.position);
        const VectorXd noisy =
            matrix_->row(corpus[e.sequence][e.position]).transpose() +
            SampleNoise(dim, params_, rng).z;
        queries.row(static_cast<Eigen::Index>(k)) =
            noisy.transpose().template cast<Scalar>();
      }
      found.resize(len);
      index_.QueryBatch(queries, found);
      for (std::size_t k = 0; k < len; ++k) {
        const Event& e = events[start + k];
        out[e.sequence][e.position] = found[k].token;
      }
    }
  };

  const std::size_t total = events.size();
  const int threads =
      std::clamp<int>(workers, 1, static_cast<int>(std::max<std::size_t>(
                                      1, total / batch_rows_)));
  if (threads <= 1) {
    run_range(0, total);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (total + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const std::size_t begin = std::min(total, w * chunk);
    const std::size_t end = std::min(total, begin + chunk);
    pool.emplace_back(run_range, begin, end);
  }
  pool.clear();
  return out;
}

template class BulkPrivatizer<float>;
template class BulkPrivatizer<double>;

}  // namespace privtune
