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

#ifndef PRIVTUNE_EMBEDDING_STORE_H_
#define PRIVTUNE_EMBEDDING_STORE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "privtune/nearest.h"
#include "privtune/types.h"

namespace privtune {

// Vocabulary plus one d-dimensional vector per token. Immutable after
// construction and safe to share between threads.
class EmbeddingMatrix {
 public:
  // Throws DuplicateTokenError, DimensionError or DataError when the
  // invariants (unique tokens, |V| >= 2, finite entries) do not hold.
  EmbeddingMatrix(std::vector<std::string> vocab, RowMatrixXd vectors);

  Eigen::Index size() const { return vectors_.rows(); }
  Eigen::Index dim() const { return vectors_.cols(); }

  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> Find(std::string_view token) const;
  bool Contains(TokenId id) const {
    return id.index >= 0 && id.index < size();
  }

  const RowMatrixXd& vectors() const { return vectors_; }
  const VectorXd& squared_norms() const { return sq_norms_; }
  auto row(TokenId id) const { return vectors_.row(id.index); }

  // Hash of the vocabulary and raw vector bytes; checkpoints record it so a
  // model is never reloaded against a different embedding table.
  std::uint64_t Fingerprint() const;

 private:
  std::vector<std::string> vocab_;
  RowMatrixXd vectors_;
  VectorXd sq_norms_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// Plain-text word vectors: "token v1 ... vd" per line, optional "count dim"
// header line.
EmbeddingMatrix ParseEmbeddings(std::istream& in);
EmbeddingMatrix LoadEmbeddings(const std::filesystem::path& path);
void WriteEmbeddings(const EmbeddingMatrix& matrix, std::ostream& out);

// Exact argmin_k ||w_k - query||_2, ties to the smallest index.
Neighbor NearestToken(const Eigen::Ref<const VectorXd>& query,
                      const EmbeddingMatrix& matrix);

// Rows of `tokens` stacked into a (tokens.size() x d) matrix.
RowMatrixXd EmbedSequence(std::span<const TokenId> tokens,
                          const EmbeddingMatrix& matrix);

}  // namespace privtune

#endif  // PRIVTUNE_EMBEDDING_STORE_H_
