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

#include "privtune/run_config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "privtune/errors.h"
#include "privtune/rng.h"

namespace privtune {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ArgumentError("invalid value '" + std::string(value) + "' for " +
                        std::string(key));
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ArgumentError("invalid boolean '" + std::string(value) + "' for " +
                      std::string(key));
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<double> ParseEtaList(std::string_view text) {
  std::vector<double> out;
  if (Trim(text).empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string_view::npos) next = text.size();
    const auto item = Trim(text.substr(pos, next - pos));
    if (item.empty()) throw ArgumentError("empty value in eta-sweep list");
    out.push_back(ParseNumber<double>("eta-sweep", item));
    pos = next + 1;
  }
  return out;
}

void RunConfig::Validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(eta)) throw ArgumentError("eta must be finite and > 0");
  for (double e : eta_sweep) {
    if (!positive(e)) throw ArgumentError("eta-sweep values must be > 0");
  }
  if (!no_reconstruction && plain_token_length < 1) {
    throw ArgumentError("plain-token-length must be >= 1");
  }
  if (plain_token_specs < 1) {
    throw ArgumentError("plain-token-specs must be >= 1");
  }
  if (prompt_length < 1 || recon_hidden < 1 || recon_vocab < 2) {
    throw ArgumentError(
        "prompt-length and recon-hidden must be >= 1, recon-vocab >= 2");
  }
  if (!positive(learning_rate) || batch_size < 1 || epochs < 1) {
    throw ArgumentError("learning-rate, batch-size and epochs must be > 0");
  }
  if (attack != "inversion" && attack != "attribute" && attack != "both") {
    throw ArgumentError("attack must be inversion, attribute or both");
  }
  if (attribute != "gender" && attribute != "age" && attribute != "both") {
    throw ArgumentError("attribute must be gender, age or both");
  }
  if (representation != "embeddings" && representation != "activations") {
    throw ArgumentError("representation must be embeddings or activations");
  }
  if (attacker_hidden < 1 || attacker_epochs < 1) {
    throw ArgumentError("attacker-hidden and attacker-epochs must be >= 1");
  }
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw ArgumentError("holdout-fraction must lie in (0, 1)");
  }
  if (workers < 1) throw ArgumentError("workers must be >= 1");
}

std::string RunConfig::Canonical() const {
  std::map<std::string, std::string> kv;
  kv["eta"] = FormatDouble(eta);
  kv["seed"] = std::to_string(seed);
  kv["plain-token-length"] = std::to_string(plain_length());
  kv["plain-token-specs"] = std::to_string(plain_token_specs);
  kv["prompt-length"] = std::to_string(prompt_length);
  kv["recon-hidden"] = std::to_string(recon_hidden);
  kv["recon-vocab"] = std::to_string(recon_vocab);
  kv["no-reconstruction"] = no_reconstruction ? "true" : "false";
  kv["skip-oov"] = skip_oov ? "true" : "false";
  kv["learning-rate"] = FormatDouble(learning_rate);
  kv["batch-size"] = std::to_string(batch_size);
  kv["epochs"] = std::to_string(epochs);
  kv["attack"] = attack;
  kv["attribute"] = attribute;
  kv["representation"] = representation;
  std::string sweep;
  for (double e : eta_sweep) {
    if (!sweep.empty()) sweep += ',';
    sweep += FormatDouble(e);
  }
  kv["eta-sweep"] = sweep;
  kv["no-privatization"] = no_privatization ? "true" : "false";
  kv["attacker-hidden"] = std::to_string(attacker_hidden);
  kv["attacker-epochs"] = std::to_string(attacker_epochs);
  kv["holdout-fraction"] = FormatDouble(holdout_fraction);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::Hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(Canonical())));
  return buf;
}

void SetConfigValue(RunConfig& c, std::string_view key,
                    std::string_view raw) {
  const std::string_view value = Trim(raw);
  if (key == "embeddings") c.embeddings = std::string(value);
  else if (key == "corpus") c.corpus = std::string(value);
  else if (key == "out") c.out = std::string(value);
  else if (key == "privatized") c.privatized = std::string(value);
  else if (key == "checkpoint") c.checkpoint = std::string(value);
  else if (key == "representations") c.representations = std::string(value);
  else if (key == "eta") c.eta = ParseNumber<double>(key, value);
  else if (key == "seed") c.seed = ParseNumber<std::uint64_t>(key, value);
  else if (key == "plain-token-length")
    c.plain_token_length = ParseNumber<int>(key, value);
  else if (key == "plain-token-specs")
    c.plain_token_specs = ParseNumber<int>(key, value);
  else if (key == "prompt-length") c.prompt_length = ParseNumber<int>(key, value);
  else if (key == "recon-hidden") c.recon_hidden = ParseNumber<int>(key, value);
  else if (key == "recon-vocab") c.recon_vocab = ParseNumber<int>(key, value);
  else if (key == "no-reconstruction") c.no_reconstruction = ParseBool(key, value);
  else if (key == "skip-oov") c.skip_oov = ParseBool(key, value);
  else if (key == "learning-rate")
    c.learning_rate = ParseNumber<double>(key, value);
  else if (key == "batch-size") c.batch_size = ParseNumber<int>(key, value);
  else if (key == "epochs") c.epochs = ParseNumber<int>(key, value);
  else if (key == "attack") c.attack = std::string(value);
  else if (key == "attribute") c.attribute = std::string(value);
  else if (key == "representation") c.representation = std::string(value);
  else if (key == "eta-sweep") c.eta_sweep = ParseEtaList(value);
  else if (key == "no-privatization") c.no_privatization = ParseBool(key, value);
  else if (key == "attacker-hidden")
    c.attacker_hidden = ParseNumber<int>(key, value);
  else if (key == "attacker-epochs")
    c.attacker_epochs = ParseNumber<int>(key, value);
  else if (key == "holdout-fraction")
    c.holdout_fraction = ParseNumber<double>(key, value);
  else if (key == "workers") c.workers = ParseNumber<int>(key, value);
  else throw ArgumentError("unknown config key '" + std::string(key) + "'");
}

void ApplyConfigFile(RunConfig& config, std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = Trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError("config line " + std::to_string(line_no) +
                          " is not key = value");
    }
    SetConfigValue(config, Trim(text.substr(0, eq)), text.substr(eq + 1));
  }
}

void ApplyConfigFile(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file " + path.string());
  ApplyConfigFile(config, in);
}

}  // namespace privtune
