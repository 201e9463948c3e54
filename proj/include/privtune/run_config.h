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

#ifndef PRIVTUNE_RUN_CONFIG_H_
#define PRIVTUNE_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "privtune/dataset.h"
#include "privtune/model.h"

namespace privtune {

// Every knob of a batch run. Keys accepted by SetConfigValue() match the
// long CLI flag names without the leading dashes.
struct RunConfig {
  std::filesystem::path embeddings;
  std::filesystem::path corpus;
  std::filesystem::path out = "run";
  std::filesystem::path privatized;       // output dir of `privatize`
  std::filesystem::path checkpoint;       // for activation-based attacks
  std::filesystem::path representations;  // pre-exported attack inputs

  double eta = 100.0;
  std::uint64_t seed = 0;

  int plain_token_length = kDefaultPlainTokenLength;
  int plain_token_specs = 1;
  int prompt_length = kDefaultPromptLength;
  int recon_hidden = kDefaultReconHidden;
  int recon_vocab = kDefaultReconVocabSize;
  bool no_reconstruction = false;
  bool skip_oov = false;

  double learning_rate = 1e-3;
  int batch_size = 128;
  int epochs = 4;

  std::string attack = "both";     // inversion | attribute | both
  std::string attribute = "both";  // gender | age | both
  std::string representation = "embeddings";  // embeddings | activations
  std::vector<double> eta_sweep;
  bool no_privatization = false;
  int attacker_hidden = 768;
  int attacker_epochs = 30;
  double holdout_fraction = 0.2;
  int workers = 1;

  // Effective plain-token length (0 when reconstruction is disabled).
  int plain_length() const { return no_reconstruction ? 0 : plain_token_length; }

  // Throws ArgumentError on out-of-range values.
  void Validate() const;

  // "key=value" lines over every field that influences results, sorted by
  // key. Paths are excluded so relocating a run does not change its hash.
  std::string Canonical() const;
  // 16 hex digits of FNV-1a over Canonical().
  std::string Hash() const;
};

// Assigns one field by key. Throws ArgumentError for unknown keys or
// unparsable values.
void SetConfigValue(RunConfig& config, std::string_view key,
                    std::string_view value);

// Flat "key = value" file; '#' starts a comment line.
void ApplyConfigFile(RunConfig& config, std::istream& in);
void ApplyConfigFile(RunConfig& config, const std::filesystem::path& path);

std::vector<double> ParseEtaList(std::string_view text);

}  // namespace privtune

#endif  // PRIVTUNE_RUN_CONFIG_H_
