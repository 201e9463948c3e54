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

#include "privtune/dataset.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>

#include "privtune/errors.h"
#include "privtune/rng.h"

namespace privtune {
namespace {

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find('\t', pos);
    if (next == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

int ParseField(std::string_view text, const char* what, int line_no) {
  int value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || value < 0) {
    throw DataError(std::string("invalid ") + what + " '" + std::string(text) +
                    "' (line " + std::to_string(line_no) + ")");
  }
  return value;
}

std::vector<TokenId> Tokenize(std::string_view text,
                              const EmbeddingMatrix& matrix, OovPolicy policy,
                              int line_no) {
  std::vector<TokenId> tokens;
  std::istringstream words{std::string(text)};
  std::string word;
  while (words >> word) {
    if (auto id = matrix.Find(word)) {
      tokens.push_back(*id);
    } else if (policy == OovPolicy::kReject) {
      throw DataError("out-of-vocabulary token '" + word + "' (line " +
                      std::to_string(line_no) +
                      "); pass --skip-oov to drop such tokens");
    }
  }
  if (tokens.empty()) {
    throw DataError("example has no in-vocabulary tokens (line " +
                    std::to_string(line_no) + ")");
  }
  return tokens;
}

// Calls `fn(fields, line_no)` for every non-comment, non-blank line.
template <typename Fn>
void ForEachRecord(std::istream& in, std::size_t min_fields, Fn fn) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = SplitTabs(line);
    if (fields.size() < min_fields) {
      throw DataError("expected " + std::to_string(min_fields) +
                      " tab-separated fields (line " +
                      std::to_string(line_no) + ")");
    }
    fn(fields, line_no);
  }
}

std::ifstream OpenOrThrow(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return in;
}

}  // namespace

std::vector<int> DefaultAgeBinEdges() { return {1955, 1963, 1971, 1978, 1985}; }

int AgeBin(int birth_year, std::span<const int> upper_edges) {
  const auto it =
      std::lower_bound(upper_edges.begin(), upper_edges.end(), birth_year);
  return static_cast<int>(it - upper_edges.begin());
}

Corpus ParseCorpus(std::istream& in, const EmbeddingMatrix& matrix,
                   OovPolicy policy) {
  Corpus corpus;
  ForEachRecord(in, 2, [&](const auto& fields, int line_no) {
    LabeledExample ex;
    ex.label = ParseField(fields[0], "label", line_no);
    ex.tokens = Tokenize(fields.back(), matrix, policy, line_no);
    corpus.num_classes = std::max(corpus.num_classes, ex.label + 1);
    corpus.examples.push_back(std::move(ex));
  });
  return corpus;
}

Corpus ReadCorpus(const std::filesystem::path& path,
                  const EmbeddingMatrix& matrix, OovPolicy policy) {
  auto in = OpenOrThrow(path);
  return ParseCorpus(in, matrix, policy);
}

AttributeCorpus ParseAttributeCorpus(std::istream& in,
                                     const EmbeddingMatrix& matrix,
                                     OovPolicy policy) {
  AttributeCorpus corpus;
  ForEachRecord(in, 4, [&](const auto& fields, int line_no) {
    AttributeExample ex;
    ex.example.label = ParseField(fields[0], "label", line_no);
    ex.gender = ParseField(fields[1], "gender", line_no);
    ex.age_bin = ParseField(fields[2], "age bin", line_no);
    if (ex.gender >= kNumGenderClasses || ex.age_bin >= kNumAgeBins) {
      throw DataError("attribute out of range (line " +
                      std::to_string(line_no) + ")");
    }
    ex.example.tokens = Tokenize(fields[3], matrix, policy, line_no);
    corpus.num_classes = std::max(corpus.num_classes, ex.example.label + 1);
    corpus.examples.push_back(std::move(ex));
  });
  return corpus;
}

AttributeCorpus ReadAttributeCorpus(const std::filesystem::path& path,
                                    const EmbeddingMatrix& matrix,
                                    OovPolicy policy) {
  auto in = OpenOrThrow(path);
  return ParseAttributeCorpus(in, matrix, policy);
}

std::string JoinTokens(std::span<const TokenId> tokens,
                       const EmbeddingMatrix& matrix) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += matrix.token(tokens[i]);
  }
  return out;
}

ReconVocab::ReconVocab(std::vector<TokenId> tokens)
    : tokens_(std::move(tokens)) {
  if (tokens_.size() < 2) {
    throw ArgumentError("reconstruction vocabulary needs at least 2 tokens");
  }
  for (std::size_t j = 0; j < tokens_.size(); ++j) {
    if (!index_.emplace(tokens_[j].index, static_cast<int>(j)).second) {
      throw DuplicateTokenError("duplicate reconstruction token id " +
                                std::to_string(tokens_[j].index));
    }
  }
}

std::optional<int> ReconVocab::IndexOf(TokenId token) const {
  auto it = index_.find(token.index);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ReconVocab BuildReconVocab(std::span<const std::vector<TokenId>> corpus,
                           int size) {
  if (corpus.empty()) throw ArgumentError("corpus is empty");
  if (size < 1) {
    throw ArgumentError("reconstruction vocabulary size must be >= 1");
  }
  struct Count {
    std::int64_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::int32_t, Count> counts;
  std::vector<TokenId> order;
  for (const auto& seq : corpus) {
    for (TokenId t : seq) {
      auto [it, inserted] = counts.try_emplace(t.index);
      if (inserted) {
        it->second.first = order.size();
        order.push_back(t);
      }
      ++it->second.count;
    }
  }
  if (static_cast<std::size_t>(size) > order.size()) {
    throw ArgumentError("reconstruction vocabulary size " +
                        std::to_string(size) + " exceeds the " +
                        std::to_string(order.size()) +
                        " distinct tokens available in the corpus");
  }
  std::stable_sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
    return counts[a.index].count > counts[b.index].count;
  });
  order.resize(size);
  return ReconVocab(std::move(order));
}

PlainTokenSpec GeneratePlainTokens(int m, const ReconVocab& vocab,
                                   std::uint64_t seed) {
  if (m < 1) throw ArgumentError("plain-token length must be >= 1");
  StreamRng rng(seed);
  std::uniform_int_distribution<int> pick(0, vocab.size() - 1);
  PlainTokenSpec spec;
  spec.seed = seed;
  spec.tokens.reserve(m);
  for (int i = 0; i < m; ++i) spec.tokens.push_back(vocab.at(pick(rng)));
  return spec;
}

PlainTokenPool::PlainTokenPool(int m, int num_specs, const ReconVocab& vocab,
                               std::uint64_t seed)
    : seed_(seed) {
  if (num_specs < 1) throw ArgumentError("need at least one plain-token spec");
  for (int s = 0; s < num_specs; ++s) {
    specs_.push_back(GeneratePlainTokens(
        m, vocab, s == 0 ? seed : SplitMix64(seed + s)));
  }
}

const PlainTokenSpec& PlainTokenPool::ForExample(
    std::uint64_t example_index) const {
  if (specs_.size() == 1) return specs_.front();
  return specs_[SplitMix64(seed_ ^ SplitMix64(example_index)) %
                specs_.size()];
}

PrivatizedExample PrepareExample(const LabeledExample& example,
                                 const PlainTokenSpec& spec,
                                 const EmbeddingMatrix& matrix,
                                 const MechanismParams& params,
                                 std::uint64_t example_index) {
  std::vector<TokenId> joined = spec.tokens;
  joined.insert(joined.end(), example.tokens.begin(), example.tokens.end());
  PrivatizedExample out;
  out.tokens = PrivatizeSequence(joined, matrix, params, example_index);
  out.plain_targets = spec.tokens;
  out.label = example.label;
  return out;
}

std::vector<TokenId> PrepareInferenceInput(std::span<const TokenId> tokens,
                                           const EmbeddingMatrix& matrix,
                                           const MechanismParams& params,
                                           std::uint64_t example_index) {
  return PrivatizeSequence(tokens, matrix, params, example_index);
}

}  // namespace privtune
