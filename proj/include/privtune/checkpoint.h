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

#ifndef PRIVTUNE_CHECKPOINT_H_
#define PRIVTUNE_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "privtune/dataset.h"
#include "privtune/model.h"
#include "privtune/privatizer.h"

namespace privtune {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  PromptModel model;
  std::optional<ReconVocab> recon_vocab;
  std::vector<PlainTokenSpec> plain_specs;
  MechanismParams mechanism;
  TrainConfig train_config;
  std::string config_hash;
};

// JSON container. Doubles are written in shortest round-trip form, so a
// reloaded model predicts bit-identically.
void SaveCheckpoint(const std::filesystem::path& path,
                    const Checkpoint& checkpoint);

// Throws DataError when the file's embedding fingerprint or format version
// does not match.
Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          std::shared_ptr<const EmbeddingMatrix> embeddings);

}  // namespace privtune

#endif  // PRIVTUNE_CHECKPOINT_H_
