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

// Metric-DP text-to-text privatization over an embedding space.
//
// A token is privatized by perturbing its embedding x with noise z whose
// density is proportional to exp(-eta * ||z||_2) and emitting the vocabulary
// word nearest to x + z. The noise is drawn as z = l * v with
// l ~ Gamma(shape = d, scale = 1 / eta) and v uniform on the unit sphere.
// The mechanism satisfies
//
//   P(M(x) = y) / P(M(x') = y) <= exp(eta * ||x - x'||_2)
//
// for every output word y. Each (seed, stream, position) triple owns its own
// generator, so a privatized corpus is a pure function of its inputs.

#ifndef PRIVTUNE_PRIVATIZER_H_
#define PRIVTUNE_PRIVATIZER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "privtune/embedding_store.h"
#include "privtune/nearest.h"
#include "privtune/rng.h"
#include "privtune/types.h"

namespace privtune {

struct MechanismParams {
  double eta = 1.0;
  std::uint64_t seed = 0;

  // Throws ArgumentError unless eta is finite and > 0.
  void Validate() const;
};

struct NoiseSample {
  double magnitude = 0.0;
  VectorXd direction;
  VectorXd z;
};

NoiseSample SampleNoise(int dim, const MechanismParams& params,
                        StreamRng& rng);

// x + z.
VectorXd PrivatizeEmbedding(const Eigen::Ref<const VectorXd>& x,
                            const MechanismParams& params, StreamRng& rng);

// Nearest vocabulary word to embed(token) + z. May return `token` itself.
TokenId PrivatizeToken(TokenId token, const EmbeddingMatrix& matrix,
                       const MechanismParams& params, StreamRng& rng);

// Privatizes position t with the generator keyed (params.seed, stream, t).
// `stream` distinguishes sequences within one corpus.
std::vector<TokenId> PrivatizeSequence(std::span<const TokenId> tokens,
                                       const EmbeddingMatrix& matrix,
                                       const MechanismParams& params,
                                       std::uint64_t stream);

// Continuous perturbed embeddings M(x_t) for every position, with the same
// keying as PrivatizeSequence (so nearest-row of each output row is exactly
// the privatized token).
RowMatrixXd PrivatizeSequenceEmbeddings(std::span<const TokenId> tokens,
                                        const EmbeddingMatrix& matrix,
                                        const MechanismParams& params,
                                        std::uint64_t stream);

// Fraction of (token, trial) events whose output differs from the input.
// Trial r of sequence i uses stream r * corpus.size() + i.
double EstimateReplacementProbability(
    std::span<const std::vector<TokenId>> corpus,
    const EmbeddingMatrix& matrix, const MechanismParams& params, int trials);

// Batched privatizer for large vocabularies. Noise is drawn in double
// precision exactly as in PrivatizeSequence; only the nearest-neighbour
// search runs at `Scalar` precision, batched into GEMM calls. The float
// instantiation is the throughput path.
template <typename Scalar>
class BulkPrivatizer {
 public:
  BulkPrivatizer(const EmbeddingMatrix& matrix, MechanismParams params,
                 Eigen::Index batch_rows = 256);

  std::vector<TokenId> PrivatizeSequence(std::span<const TokenId> tokens,
                                         std::uint64_t stream) const;

  // Sequence i uses stream `first_stream + i`. `workers` > 1 splits the
  // corpus across threads; the result is identical for every worker count.
  std::vector<std::vector<TokenId>> PrivatizeCorpus(
      std::span<const std::vector<TokenId>> corpus,
      std::uint64_t first_stream = 0, int workers = 1) const;

 private:
  const EmbeddingMatrix* matrix_;
  MechanismParams params_;
  Eigen::Index batch_rows_;
  NearestIndex<Scalar> index_;
};

extern template class BulkPrivatizer<float>;
extern template class BulkPrivatizer<double>;

}  // namespace privtune

#endif  // PRIVTUNE_PRIVATIZER_H_
