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

#ifndef PRIVTUNE_DATASET_H_
#define PRIVTUNE_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "privtune/embedding_store.h"
#include "privtune/privatizer.h"
#include "privtune/types.h"

namespace privtune {

inline constexpr int kDefaultPlainTokenLength = 40;
inline constexpr int kDefaultReconVocabSize = 7630;

struct LabeledExample {
  std::vector<TokenId> tokens;
  int label = 0;
};

// Private attributes carried by attribute corpora. Age bins follow the six
// ranges [<=1955, 1956-1963, 1964-1971, 1972-1978, 1979-1985, >=1986].
struct AttributeExample {
  LabeledExample example;
  int gender = 0;
  int age_bin = 0;
};

inline constexpr int kNumGenderClasses = 2;
inline constexpr int kNumAgeBins = 6;

// Inclusive upper edges of the first five age bins; years above the last
// edge fall in the final bin.
std::vector<int> DefaultAgeBinEdges();
int AgeBin(int birth_year, std::span<const int> upper_edges);

enum class OovPolicy { kReject, kSkip };

struct Corpus {
  std::vector<LabeledExample> examples;
  int num_classes = 0;  // 1 + max label
};

struct AttributeCorpus {
  std::vector<AttributeExample> examples;
  int num_classes = 0;
};

// "label TAB text" per line. Lines starting with '#' are comments. Tokens
// are whitespace separated; an out-of-vocabulary token is a DataError under
// kReject and is dropped under kSkip.
Corpus ParseCorpus(std::istream& in, const EmbeddingMatrix& matrix,
                   OovPolicy policy);
Corpus ReadCorpus(const std::filesystem::path& path,
                  const EmbeddingMatrix& matrix, OovPolicy policy);

// "label TAB gender TAB age_bin TAB text".
AttributeCorpus ParseAttributeCorpus(std::istream& in,
                                     const EmbeddingMatrix& matrix,
                                     OovPolicy policy);
AttributeCorpus ReadAttributeCorpus(const std::filesystem::path& path,
                                    const EmbeddingMatrix& matrix,
                                    OovPolicy policy);

std::string JoinTokens(std::span<const TokenId> tokens,
                       const EmbeddingMatrix& matrix);

// Output vocabulary of the reconstruction head.
class ReconVocab {
 public:
  explicit ReconVocab(std::vector<TokenId> tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<TokenId>& tokens() const { return tokens_; }
  TokenId at(int j) const { return tokens_.at(j); }
  std::optional<int> IndexOf(TokenId token) const;

 private:
  std::vector<TokenId> tokens_;
  std::unordered_map<std::int32_t, int> index_;
};

// The `size` most frequent tokens of the corpus, ties broken by first
// occurrence.
ReconVocab BuildReconVocab(std::span<const std::vector<TokenId>> corpus,
                           int size = kDefaultReconVocabSize);

struct PlainTokenSpec {
  std::vector<TokenId> tokens;
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(tokens.size()); }
};

// m tokens drawn uniformly with replacement from `vocab`.
PlainTokenSpec GeneratePlainTokens(int m, const ReconVocab& vocab,
                                   std::uint64_t seed);

// One or more plain-token specs. With several specs each example picks one
// by a hash of (seed, example index).
class PlainTokenPool {
 public:
  PlainTokenPool(int m, int num_specs, const ReconVocab& vocab,
                 std::uint64_t seed);

  const PlainTokenSpec& ForExample(std::uint64_t example_index) const;
  const std::vector<PlainTokenSpec>& specs() const { return specs_; }

 private:
  std::vector<PlainTokenSpec> specs_;
  std::uint64_t seed_;
};

struct PrivatizedExample {
  std::vector<TokenId> tokens;        // M([k; x]), length m + n
  std::vector<TokenId> plain_targets; // the original k
  int label = 0;

  int plain_length() const { return static_cast<int>(plain_targets.size()); }
};

// Privatizes [k; x] as one sequence on stream `example_index`.
PrivatizedExample PrepareExample(const LabeledExample& example,
                                 const PlainTokenSpec& spec,
                                 const EmbeddingMatrix& matrix,
                                 const MechanismParams& params,
                                 std::uint64_t example_index);

// Inference-time privatization: no plain tokens are prepended.
std::vector<TokenId> PrepareInferenceInput(std::span<const TokenId> tokens,
                                           const EmbeddingMatrix& matrix,
                                           const MechanismParams& params,
                                           std::uint64_t example_index);

}  // namespace privtune

#endif  // PRIVTUNE_DATASET_H_
