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

// Simulated adversaries. Each attack reports its success rate X and the
// empirical privacy 1 - X.

#ifndef PRIVTUNE_ATTACKS_H_
#define PRIVTUNE_ATTACKS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "privtune/embedding_store.h"
#include "privtune/types.h"

namespace privtune {

struct AttackReport {
  std::string kind;            // "inversion" or "attribute"
  std::string representation;  // what the attacker observed
  std::string attribute;       // attribute attacks only
  double eta = 0.0;
  double success_rate = 0.0;
  double empirical_privacy = 1.0;
  std::int64_t n_events = 0;
  std::int64_t n_successes = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Fills success_rate = successes / events and empirical_privacy =
// 1 - success_rate.
AttackReport MakeReport(std::string kind, std::int64_t n_events,
                        std::int64_t n_successes, double eta,
                        std::uint64_t seed);
AttackReport ReportFromSuccessRate(std::string kind, double success_rate,
                                   std::int64_t n_events, double eta,
                                   std::uint64_t seed);

nlohmann::ordered_json ToJson(const AttackReport& report);
AttackReport AttackReportFromJson(const nlohmann::json& j);

// Nearest-neighbour inversion: each observed row is mapped back to its
// closest vocabulary word; success means exact identity with the original.
AttackReport InversionAttack(const Eigen::Ref<const RowMatrixXd>& observed,
                             std::span<const TokenId> originals,
                             const EmbeddingMatrix& matrix, double eta,
                             std::uint64_t seed);

VectorXd MeanRepresentation(const Eigen::Ref<const RowMatrixXd>& vectors);

// Two-layer ReLU MLP: p = softmax(W2 relu(W1 x + b1) + b2).
struct AttributeAttacker {
  MatrixXd w1;  // H x h
  VectorXd b1;
  MatrixXd w2;  // C x H
  VectorXd b2;

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int num_classes() const { return static_cast<int>(w2.rows()); }

  VectorXd Probabilities(const Eigen::Ref<const VectorXd>& x) const;
  int Predict(const Eigen::Ref<const VectorXd>& x) const;
  // -log p[label].
  double Loss(const Eigen::Ref<const VectorXd>& x, int label) const;
  // Gradient of Loss, laid out like the attacker itself.
  AttributeAttacker Gradient(const Eigen::Ref<const VectorXd>& x,
                             int label) const;
};

struct AttackerConfig {
  int hidden = 768;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 30;
  std::uint64_t seed = 0;
};

// Adam on mean cross-entropy. Rows of `representations` are examples.
// Throws DataError if fewer than two classes are present.
AttributeAttacker TrainAttributeAttacker(
    const Eigen::Ref<const RowMatrixXd>& representations,
    std::span<const int> labels, int num_classes,
    const AttackerConfig& config);

AttackReport AttributeAttackEval(
    const AttributeAttacker& attacker,
    const Eigen::Ref<const RowMatrixXd>& representations,
    std::span<const int> labels, double eta, std::uint64_t seed);

// Exported representations: one row per example with its private
// attributes. Written as TSV "id TAB gender TAB age_bin TAB v1 ... vd" with
// '#' comment lines for provenance.
struct RepresentationTable {
  std::string source;  // "mean-privatized-embeddings" or "model-activations"
  RowMatrixXd rows;
  std::vector<int> gender;
  std::vector<int> age_bin;
};

void WriteRepresentations(const RepresentationTable& table,
                          const std::string& provenance, std::ostream& out);
RepresentationTable ReadRepresentations(std::istream& in);
RepresentationTable ReadRepresentations(const std::filesystem::path& path);

}  // namespace privtune

#endif  // PRIVTUNE_ATTACKS_H_
