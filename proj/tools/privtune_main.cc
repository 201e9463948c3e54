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

// privtune: privatize corpora, train prompt models, run attacks, report.
//
//   privtune privatize --embeddings vec.txt --corpus train.tsv --eta 8 --out run
//   privtune train     --embeddings vec.txt --corpus train.tsv --eta 8 --out run
//   privtune attack    --embeddings vec.txt --corpus attrs.tsv --attack both \
//                      --eta-sweep 0.5,1,2,4,8 --out run
//   privtune report    --out run
//
// Flags override values from --config (flat "key = value" file).

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "privtune/commands.h"
#include "privtune/errors.h"
#include "privtune/run_config.h"

namespace {

struct FlagSpec {
  const char* name;
  const char* help;
  bool is_switch = false;
};

// Long-flag names double as config-file keys.
const std::vector<FlagSpec>& Flags() {
  static const std::vector<FlagSpec> flags = {
      {"embeddings", "plain-text word vectors"},
      {"corpus", "TSV corpus: label<TAB>text, or label<TAB>gender<TAB>age<TAB>text"},
      {"out", "output run directory"},
      {"privatized", "directory written by `privatize` (train from it)"},
      {"checkpoint", "model checkpoint (attacks on activations)"},
      {"representations", "pre-exported representation table"},
      {"eta", "privacy parameter (> 0)"},
      {"seed", "run seed; every random stream derives from it"},
      {"plain-token-length", "number of plain tokens m"},
      {"plain-token-specs", "number of distinct plain-token sequences"},
      {"prompt-length", "prompt length N"},
      {"recon-hidden", "reconstruction head hidden size c"},
      {"recon-vocab", "reconstruction vocabulary size |T|"},
      {"no-reconstruction", "train on the task loss only (m = 0)", true},
      {"skip-oov", "drop out-of-vocabulary tokens instead of failing", true},
      {"learning-rate", "Adam learning rate"},
      {"batch-size", "mini-batch size"},
      {"epochs", "training epochs"},
      {"attack", "inversion | attribute | both"},
      {"attribute", "gender | age | both"},
      {"representation", "embeddings | activations"},
      {"eta-sweep", "comma-separated eta values; one report per value"},
      {"no-privatization", "attack the unprivatized input", true},
      {"attacker-hidden", "attribute attacker hidden units"},
      {"attacker-epochs", "attribute attacker epochs"},
      {"holdout-fraction", "held-out share for attribute attacks"},
      {"workers", "privatization threads"},
  };
  return flags;
}

struct Subcommand {
  CLI::App* app;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::string config_file;
};

void AddFlags(Subcommand& sub) {
  sub.app->add_option("--config", sub.config_file, "key = value config file");
  for (const auto& flag : Flags()) {
    const std::string name = std::string("--") + flag.name;
    if (flag.is_switch) {
      sub.app->add_flag(name, sub.switches[flag.name], flag.help);
    } else {
      sub.app->add_option(name, sub.values[flag.name], flag.help);
    }
  }
}

privtune::RunConfig Resolve(const Subcommand& sub) {
  privtune::RunConfig config;
  if (!sub.config_file.empty()) ApplyConfigFile(config, sub.config_file);
  for (const auto& flag : Flags()) {
    const std::string name = std::string("--") + flag.name;
    if (sub.app->count(name) == 0) continue;
    if (flag.is_switch) {
      privtune::SetConfigValue(config, flag.name,
                               sub.switches.at(flag.name) ? "true" : "false");
    } else {
      privtune::SetConfigValue(config, flag.name, sub.values.at(flag.name));
    }
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local text privatization, privatized prompt tuning and "
               "attack evaluation"};
  app.require_subcommand(1);

  Subcommand privatize{app.add_subcommand("privatize", "privatize a corpus")};
  Subcommand train{app.add_subcommand("train", "privatize, then train")};
  Subcommand attack{app.add_subcommand("attack", "run simulated attacks")};
  Subcommand report{app.add_subcommand("report", "summarize a run directory")};
  for (Subcommand* sub : {&privatize, &train, &attack, &report}) AddFlags(*sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? privtune::kExitOk : privtune::kExitUsage;
  }

  for (Subcommand* sub : {&privatize, &train, &attack, &report}) {
    if (!sub->app->parsed()) continue;
    return privtune::RunCommand(
        [&]() -> nlohmann::ordered_json {
          const privtune::RunConfig config = Resolve(*sub);
          if (sub == &privatize) return privtune::CmdPrivatize(config);
          if (sub == &train) return privtune::CmdTrain(config);
          if (sub == &attack) return privtune::CmdAttack(config);
          return privtune::CmdReport(config.out);
        },
        std::cout, std::cerr);
  }
  return privtune::kExitUsage;
}
