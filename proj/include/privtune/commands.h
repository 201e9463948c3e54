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

// Batch commands behind the `privtune` executable. Each writes its
// artifacts into config.out:
//
//   privatize  privatized.tsv, plain_tokens.json, privatize_stats.json
//   train      metrics.jsonl, checkpoint.json (+ the privatize outputs when
//              starting from a raw corpus)
//   attack     attack_reports.json (+ representations.tsv)
//   report     summary.json
//
// Every artifact records eta, seed and the run's config hash.

#ifndef PRIVTUNE_COMMANDS_H_
#define PRIVTUNE_COMMANDS_H_

#include <filesystem>
#include <functional>
#include <iosfwd>

#include "json.hpp"
#include "privtune/run_config.h"

namespace privtune {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

inline constexpr char kPrivatizedFile[] = "privatized.tsv";
inline constexpr char kPlainTokensFile[] = "plain_tokens.json";
inline constexpr char kPrivatizeStatsFile[] = "privatize_stats.json";
inline constexpr char kMetricsFile[] = "metrics.jsonl";
inline constexpr char kCheckpointFile[] = "checkpoint.json";
inline constexpr char kAttackReportsFile[] = "attack_reports.json";
inline constexpr char kRepresentationsFile[] = "representations.tsv";
inline constexpr char kSummaryFile[] = "summary.json";

// The commands throw privtune::Error subclasses on failure; RunCommand maps
// them onto exit codes.
nlohmann::ordered_json CmdPrivatize(const RunConfig& config);
nlohmann::ordered_json CmdTrain(const RunConfig& config);
nlohmann::ordered_json CmdAttack(const RunConfig& config);
nlohmann::ordered_json CmdReport(const std::filesystem::path& run_dir);

// Runs `command`, prints its JSON result to `out` and diagnostics to `err`.
// ArgumentError -> 1, DataError/IndexError/DimensionError -> 2,
// NumericError -> 3.
int RunCommand(const std::function<nlohmann::ordered_json()>& command,
               std::ostream& out, std::ostream& err);

}  // namespace privtune

#endif  // PRIVTUNE_COMMANDS_H_
