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

#include "privtune/embedding_store.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

#include "privtune/errors.h"
#include "privtune/rng.h"

namespace privtune {
namespace {

std::vector<std::string_view> SplitSpaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    std::size_t next = line.find(' ', pos);
    if (next == std::string_view::npos) next = line.size();
    if (next > pos) fields.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return fields;
}

bool ParseDouble(std::string_view text, double& value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

bool ParseInt(std::string_view text, long long& value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> vocab,
                                 RowMatrixXd vectors)
    : vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(vocab_.size()) != vectors_.rows()) {
    throw DimensionError("vocabulary has " + std::to_string(vocab_.size()) +
                         " tokens but the matrix has " +
                         std::to_string(vectors_.rows()) + " rows");
  }
  if (vocab_.size() < 2) {
    throw DataError("embedding vocabulary needs at least 2 tokens");
  }
  if (vectors_.cols() < 1) throw DataError("embedding dimension must be >= 1");
  if (!vectors_.allFinite()) throw DataError("non-finite embedding value");
  index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], static_cast<std::int32_t>(i)).second) {
      throw DuplicateTokenError("duplicate token '" + vocab_[i] + "'");
    }
  }
  sq_norms_ = vectors_.rowwise().squaredNorm();
}

const std::string& EmbeddingMatrix::token(TokenId id) const {
  if (!Contains(id)) {
    throw IndexError("token id " + std::to_string(id.index) +
                     " out of range [0, " + std::to_string(size()) + ")");
  }
  return vocab_[id.index];
}

std::optional<TokenId> EmbeddingMatrix::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return TokenId{it->second};
}

std::uint64_t EmbeddingMatrix::Fingerprint() const {
  std::uint64_t hash = Fnv1a64(std::to_string(size()) + "x" +
                               std::to_string(dim()));
  for (const auto& token : vocab_) {
    hash = Fnv1a64(token, hash);
    hash = Fnv1a64(std::string_view("\n", 1), hash);
  }
  hash = Fnv1a64(
      std::string_view(reinterpret_cast<const char*>(vectors_.data()),
                       sizeof(double) * vectors_.size()),
      hash);
  return hash;
}

EmbeddingMatrix ParseEmbeddings(std::istream& in) {
  std::vector<std::string> vocab;
  std::vector<double> values;
  Eigen::Index dim = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = SplitSpaces(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2) {
      long long count = 0;
      long long header_dim = 0;
      if (ParseInt(fields[0], count) && ParseInt(fields[1], header_dim)) {
        if (header_dim < 1) {
          throw MalformedFileError("header dimension must be positive",
                                   line_no);
        }
        dim = header_dim;
        vocab.reserve(static_cast<std::size_t>(std::max(0LL, count)));
        continue;
      }
    }
    if (fields.size() < 2) {
      throw MalformedFileError("record has no vector components", line_no);
    }
    const auto row_dim = static_cast<Eigen::Index>(fields.size() - 1);
    if (dim < 0) dim = row_dim;
    if (row_dim != dim) {
      throw MalformedFileError("expected " + std::to_string(dim) +
                                   " components, found " +
                                   std::to_string(row_dim),
                               line_no);
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double value = 0.0;
      if (!ParseDouble(fields[i], value) || !std::isfinite(value)) {
        throw DataError("cannot parse finite value '" +
                        std::string(fields[i]) + "' (line " +
                        std::to_string(line_no) + ")");
      }
      values.push_back(value);
    }
    vocab.emplace_back(fields[0]);
  }
  if (dim < 0) throw DataError("embedding file has no records");
  RowMatrixXd vectors = Eigen::Map<const RowMatrixXd>(
      values.data(), static_cast<Eigen::Index>(vocab.size()), dim);
  return EmbeddingMatrix(std::move(vocab), std::move(vectors));
}

EmbeddingMatrix LoadEmbeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  return ParseEmbeddings(in);
}

void WriteEmbeddings(const EmbeddingMatrix& matrix, std::ostream& out) {
  out << matrix.size() << ' ' << matrix.dim() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < matrix.size(); ++i) {
    out << matrix.vocab()[i];
    for (Eigen::Index j = 0; j < matrix.dim(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf),
                                     matrix.vectors()(i, j));
      out << ' ' << std::string_view(buf, ptr - buf);
    }
    out << '\n';
  }
}

Neighbor NearestToken(const Eigen::Ref<const VectorXd>& query,
                      const EmbeddingMatrix& matrix) {
  if (query.size() != matrix.dim()) {
    throw DimensionError("query dimension " + std::to_string(query.size()) +
                         " does not match embedding dimension " +
                         std::to_string(matrix.dim()));
  }
  const RowMatrixXd q = query.transpose();
  Neighbor result;
  NearestRows<double>(matrix.vectors(), matrix.squared_norms(), q,
                      std::span<Neighbor>(&result, 1));
  return result;
}

RowMatrixXd EmbedSequence(std::span<const TokenId> tokens,
                          const EmbeddingMatrix& matrix) {
  RowMatrixXd out(static_cast<Eigen::Index>(tokens.size()), matrix.dim());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (!matrix.Contains(tokens[t])) {
      throw IndexError("token id " + std::to_string(tokens[t].index) +
                       " out of range at position " + std::to_string(t));
    }
    out.row(static_cast<Eigen::Index>(t)) = matrix.row(tokens[t]);
  }
  return out;
}

}  // namespace privtune
