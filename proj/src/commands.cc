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

#include "privtune/commands.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>

#include "privtune/attacks.h"
#include "privtune/checkpoint.h"
#include "privtune/dataset.h"
#include "privtune/errors.h"
#include "privtune/model.h"
#include "privtune/privatizer.h"
#include "privtune/rng.h"

namespace privtune {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ordered_json Provenance(double eta, std::uint64_t seed,
                        const std::string& hash) {
  ordered_json j;
  j["eta"] = eta;
  j["seed"] = seed;
  j["config_hash"] = hash;
  return j;
}

std::string ProvenanceComment(double eta, std::uint64_t seed,
                              const std::string& hash) {
  return "# eta=" + FormatDouble(eta) + " seed=" + std::to_string(seed) +
         " config_hash=" + hash;
}

void RequirePath(const fs::path& path, const char* flag) {
  if (path.empty()) {
    throw ArgumentError(std::string("missing required --") + flag);
  }
  if (!fs::exists(path)) {
    throw ArgumentError(std::string("--") + flag + " path does not exist: " +
                        path.string());
  }
}

// Outputs never overwrite an input file.
void GuardOutput(const fs::path& output, std::initializer_list<fs::path> inputs) {
  for (const auto& in : inputs) {
    if (!in.empty() && fs::exists(in) && fs::exists(output) &&
        fs::equivalent(in, output)) {
      throw ArgumentError("refusing to overwrite input file " + in.string());
    }
  }
}

void WriteJsonFile(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

ordered_json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return ordered_json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::shared_ptr<const EmbeddingMatrix> LoadShared(const RunConfig& config) {
  RequirePath(config.embeddings, "embeddings");
  return std::make_shared<const EmbeddingMatrix>(
      LoadEmbeddings(config.embeddings));
}

OovPolicy Policy(const RunConfig& config) {
  return config.skip_oov ? OovPolicy::kSkip : OovPolicy::kReject;
}

ordered_json TokensJson(std::span<const TokenId> tokens,
                        const EmbeddingMatrix& emb) {
  ordered_json out = ordered_json::array();
  for (TokenId t : tokens) out.push_back(emb.token(t));
  return out;
}

std::vector<TokenId> TokensFromJson(const ordered_json& j,
                                    const EmbeddingMatrix& emb) {
  std::vector<TokenId> out;
  for (const auto& s : j) {
    auto id = emb.Find(s.get<std::string>());
    if (!id) throw DataError("token '" + s.get<std::string>() +
                             "' missing from embeddings");
    out.push_back(*id);
  }
  return out;
}

struct PrivatizedDataset {
  std::vector<PrivatizedExample> examples;
  std::optional<ReconVocab> vocab;
  std::vector<PlainTokenSpec> specs;
  int num_classes = 0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Privatizes [k; x] for every example and writes the privatize artifacts.
PrivatizedDataset PrivatizeAndWrite(const RunConfig& config,
                                    const EmbeddingMatrix& emb,
                                    ordered_json* stats_out) {
  RequirePath(config.corpus, "corpus");
  const Corpus corpus = ReadCorpus(config.corpus, emb, Policy(config));
  if (corpus.examples.empty()) throw DataError("corpus has no examples");
  const std::string hash = config.Hash();
  const int m = config.plain_length();

  PrivatizedDataset data;
  data.num_classes = corpus.num_classes;
  data.eta = config.eta;
  data.seed = config.seed;
  data.config_hash = hash;

  std::optional<PlainTokenPool> pool;
  if (m > 0) {
    std::vector<std::vector<TokenId>> sequences;
    for (const auto& ex : corpus.examples) sequences.push_back(ex.tokens);
    data.vocab = BuildReconVocab(sequences, config.recon_vocab);
    pool.emplace(m, config.plain_token_specs, *data.vocab,
                 DeriveSeed(config.seed, "plain-tokens"));
    data.specs = pool->specs();
  }

  std::vector<std::vector<TokenId>> joined;
  joined.reserve(corpus.examples.size());
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    std::vector<TokenId> seq;
    if (pool) seq = pool->ForExample(i).tokens;
    seq.insert(seq.end(), corpus.examples[i].tokens.begin(),
               corpus.examples[i].tokens.end());
    joined.push_back(std::move(seq));
  }
  const MechanismParams params{config.eta, config.seed};
  const BulkPrivatizer<double> privatizer(emb, params);
  const auto privatized = privatizer.PrivatizeCorpus(joined, 0, config.workers);

  std::int64_t n_tokens = 0, n_replaced = 0, task_tokens = 0, task_replaced = 0;
  for (std::size_t i = 0; i < joined.size(); ++i) {
    PrivatizedExample ex;
    ex.tokens = privatized[i];
    if (pool) ex.plain_targets = pool->ForExample(i).tokens;
    ex.label = corpus.examples[i].label;
    for (std::size_t t = 0; t < joined[i].size(); ++t) {
      const bool changed = privatized[i][t] != joined[i][t];
      ++n_tokens;
      n_replaced += changed;
      if (static_cast<int>(t) >= m) {
        ++task_tokens;
        task_replaced += changed;
      }
    }
    data.examples.push_back(std::move(ex));
  }

  fs::create_directories(config.out);
  const fs::path tsv_path = config.out / kPrivatizedFile;
  GuardOutput(tsv_path, {config.corpus, config.embeddings});
  {
    std::ofstream out(tsv_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + tsv_path.string());
    out << ProvenanceComment(config.eta, config.seed, hash) << '\n';
    for (const auto& ex : data.examples) {
      const std::span<const TokenId> all(ex.tokens);
      out << ex.label << '\t' << JoinTokens(all.subspan(m), emb);
      if (m > 0) out << '\t' << JoinTokens(all.first(m), emb);
      out << '\n';
    }
  }

  ordered_json plain = Provenance(config.eta, config.seed, hash);
  plain["plain_token_length"] = m;
  plain["plain_token_specs"] = config.plain_token_specs;
  plain["pool_seed"] = DeriveSeed(config.seed, "plain-tokens");
  plain["recon_vocab"] =
      data.vocab ? TokensJson(data.vocab->tokens(), emb) : ordered_json();
  ordered_json specs = ordered_json::array();
  for (const auto& spec : data.specs) {
    specs.push_back({{"seed", spec.seed}, {"tokens", TokensJson(spec.tokens, emb)}});
  }
  plain["specs"] = specs;
  WriteJsonFile(config.out / kPlainTokensFile, plain);

  ordered_json stats = Provenance(config.eta, config.seed, hash);
  stats["n_examples"] = data.examples.size();
  stats["n_tokens"] = n_tokens;
  stats["n_replaced"] = n_replaced;
  stats["replacement_probability"] =
      static_cast<double>(n_replaced) / static_cast<double>(n_tokens);
  stats["task_tokens"] = task_tokens;
  stats["task_replacement_probability"] =
      static_cast<double>(task_replaced) / static_cast<double>(task_tokens);
  WriteJsonFile(config.out / kPrivatizeStatsFile, stats);
  if (stats_out != nullptr) *stats_out = stats;
  return data;
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) out.push_back(field);
  return out;
}

std::vector<TokenId> Words(const std::string& text,
                           const EmbeddingMatrix& emb) {
  std::vector<TokenId> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) {
    auto id = emb.Find(w);
    if (!id) throw DataError("privatized token '" + w +
                             "' missing from embeddings");
    out.push_back(*id);
  }
  return out;
}

// Reads the artifacts written by PrivatizeAndWrite.
PrivatizedDataset ReadPrivatized(const fs::path& dir,
                                 const EmbeddingMatrix& emb) {
  const ordered_json plain = ReadJsonFile(dir / kPlainTokensFile);
  PrivatizedDataset data;
  data.eta = plain.at("eta").get<double>();
  data.seed = plain.at("seed").get<std::uint64_t>();
  data.config_hash = plain.at("config_hash").get<std::string>();
  const int m = plain.at("plain_token_length").get<int>();
  std::optional<PlainTokenPool> pool;
  if (m > 0) {
    data.vocab.emplace(TokensFromJson(plain.at("recon_vocab"), emb));
    pool.emplace(m, plain.at("plain_token_specs").get<int>(), *data.vocab,
                 plain.at("pool_seed").get<std::uint64_t>());
    data.specs = pool->specs();
    const auto& stored = plain.at("specs");
    for (std::size_t s = 0; s < data.specs.size(); ++s) {
      if (TokensFromJson(stored.at(s).at("tokens"), emb) !=
          data.specs[s].tokens) {
        throw DataError("plain-token specs do not match their seed");
      }
    }
  }

  std::ifstream in(dir / kPrivatizedFile);
  if (!in) throw DataError("cannot open " + (dir / kPrivatizedFile).string());
  std::string line;
  std::uint64_t index = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != (m > 0 ? 3u : 2u)) {
      throw DataError("unexpected column count in privatized corpus");
    }
    PrivatizedExample ex;
    ex.label = std::stoi(fields[0]);
    if (m > 0) {
      ex.tokens = Words(fields[2], emb);
      ex.plain_targets = pool->ForExample(index).tokens;
      if (static_cast<int>(ex.tokens.size()) != m) {
        throw DataError("privatized plain-token column has wrong length");
      }
    }
    const auto body = Words(fields[1], emb);
    ex.tokens.insert(ex.tokens.end(), body.begin(), body.end());
    data.num_classes = std::max(data.num_classes, ex.label + 1);
    data.examples.push_back(std::move(ex));
    ++index;
  }
  if (data.examples.empty()) throw DataError("privatized corpus is empty");
  return data;
}

// Deterministic train/holdout split of [0, n).
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> Split(
    Eigen::Index n, double holdout_fraction, std::uint64_t seed) {
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  StreamRng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto holdout = static_cast<Eigen::Index>(
      std::llround(holdout_fraction * static_cast<double>(n)));
  holdout = std::clamp<Eigen::Index>(holdout, 1, n - 1);
  std::vector<Eigen::Index> test(order.begin(), order.begin() + holdout);
  std::vector<Eigen::Index> train(order.begin() + holdout, order.end());
  return {train, test};
}

RowMatrixXd Rows(const RowMatrixXd& m, const std::vector<Eigen::Index>& idx) {
  RowMatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  }
  return out;
}

std::vector<int> Pick(const std::vector<int>& v,
                      const std::vector<Eigen::Index>& idx) {
  std::vector<int> out;
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

RepresentationTable BuildRepresentations(const RunConfig& config,
                                         const AttributeCorpus& corpus,
                                         const EmbeddingMatrix& emb,
                                         const PromptModel* model, double eta) {
  RepresentationTable table;
  const auto n = static_cast<Eigen::Index>(corpus.examples.size());
  const MechanismParams params{eta, config.seed};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ex = corpus.examples[i];
    const auto& tokens = ex.example.tokens;
    VectorXd rep;
    if (model != nullptr) {
      const auto input =
          config.no_privatization
              ? tokens
              : PrepareInferenceInput(tokens, emb, params, i);
      const ForwardTrace tr = Forward(*model, input, 0);
      rep = MeanRepresentation(tr.activations());
    } else {
      const RowMatrixXd rows =
          config.no_privatization
              ? EmbedSequence(tokens, emb)
              : PrivatizeSequenceEmbeddings(tokens, emb, params, i);
      rep = MeanRepresentation(rows);
    }
    if (i == 0) table.rows.resize(n, rep.size());
    table.rows.row(i) = rep.transpose();
    table.gender.push_back(ex.gender);
    table.age_bin.push_back(ex.age_bin);
  }
  table.source = model != nullptr ? "model-activations"
                                  : (config.no_privatization
                                         ? "mean-unprivatized-embeddings"
                                         : "mean-perturbed-embeddings");
  return table;
}

}  // namespace

ordered_json CmdPrivatize(const RunConfig& config) {
  config.Validate();
  const auto emb = LoadShared(config);
  ordered_json stats;
  PrivatizeAndWrite(config, *emb, &stats);
  return stats;
}

ordered_json CmdTrain(const RunConfig& config) {
  config.Validate();
  const auto emb = LoadShared(config);
  PrivatizedDataset data;
  if (!config.privatized.empty()) {
    RequirePath(config.privatized, "privatized");
    data = ReadPrivatized(config.privatized, *emb);
  } else {
    data = PrivatizeAndWrite(config, *emb, nullptr);
  }
  const std::string hash = config.Hash();

  ModelShape shape;
  shape.hidden = static_cast<int>(emb->dim());
  shape.prompt_length = config.prompt_length;
  shape.recon_hidden = config.recon_hidden;
  shape.recon_vocab = data.vocab ? data.vocab->size() : 0;
  shape.num_classes = std::max(2, data.num_classes);
  PromptModel model(emb, shape, DeriveSeed(config.seed, "model"));

  TrainConfig tc;
  tc.adam.learning_rate = config.learning_rate;
  tc.batch_size = config.batch_size;
  tc.epochs = config.epochs;
  tc.seed = DeriveSeed(config.seed, "train");

  fs::create_directories(config.out);
  const fs::path metrics_path = config.out / kMetricsFile;
  GuardOutput(metrics_path, {config.corpus, config.embeddings});
  std::ofstream metrics(metrics_path, std::ios::binary);
  if (!metrics) throw DataError("cannot write " + metrics_path.string());
  ordered_json epochs = ordered_json::array();
  auto on_epoch = [&](const EpochLog& e) {
    ordered_json line;
    line["epoch"] = e.epoch;
    line["task_loss"] = e.task_loss;
    line["rec_loss"] = e.rec_loss;
    line["task_acc"] = e.task_acc;
    line["rec_acc"] = e.rec_acc;
    line["eta"] = data.eta;
    line["seed"] = config.seed;
    line["config_hash"] = hash;
    metrics << line.dump() << '\n' << std::flush;
    epochs.push_back(line);
  };
  Train(model, data.examples, data.vocab ? &*data.vocab : nullptr, tc,
        on_epoch);

  const fs::path ck_path = config.out / kCheckpointFile;
  SaveCheckpoint(ck_path,
                 Checkpoint{model, data.vocab, data.specs,
                            MechanismParams{data.eta, data.seed}, tc, hash});
  ordered_json result = Provenance(data.eta, config.seed, hash);
  result["params_count"] = model.TrainableParameterCount();
  result["reconstruction"] = model.has_recon_head();
  result["epochs"] = epochs;
  result["checkpoint"] = ck_path.string();
  return result;
}

ordered_json CmdAttack(const RunConfig& config) {
  config.Validate();
  const auto emb = LoadShared(config);
  const std::string hash = config.Hash();
  std::vector<double> etas = config.eta_sweep;
  if (etas.empty()) etas.push_back(config.eta);
  fs::create_directories(config.out);
  const bool want_inversion = config.attack != "attribute";
  const bool want_attribute = config.attack != "inversion";

  std::optional<Corpus> corpus;
  if (want_inversion) {
    RequirePath(config.corpus, "corpus");
    corpus = ReadCorpus(config.corpus, *emb, Policy(config));
  }
  std::optional<AttributeCorpus> attr_corpus;
  std::optional<RepresentationTable> imported;
  std::optional<Checkpoint> checkpoint;
  if (want_attribute) {
    if (!config.representations.empty()) {
      RequirePath(config.representations, "representations");
      imported = ReadRepresentations(config.representations);
    } else {
      if (config.corpus.empty()) {
        throw DataError("attribute attack needs --representations or an "
                        "attribute corpus via --corpus");
      }
      RequirePath(config.corpus, "corpus");
      attr_corpus = ReadAttributeCorpus(config.corpus, *emb, Policy(config));
      if (config.representation == "activations") {
        if (config.checkpoint.empty()) {
          throw DataError("activation representations need --checkpoint");
        }
        RequirePath(config.checkpoint, "checkpoint");
        checkpoint.emplace(LoadCheckpoint(config.checkpoint, emb));
      }
    }
  }

  ordered_json reports = ordered_json::array();
  for (double eta : etas) {
    if (want_inversion) {
      std::int64_t events = 0, successes = 0;
      for (std::size_t i = 0; i < corpus->examples.size(); ++i) {
        const auto& tokens = corpus->examples[i].tokens;
        const RowMatrixXd observed =
            config.no_privatization
                ? EmbedSequence(tokens, *emb)
                : PrivatizeSequenceEmbeddings(
                      tokens, *emb, MechanismParams{eta, config.seed}, i);
        const AttackReport r = InversionAttack(observed, tokens, *emb, eta,
                                               config.seed);
        events += r.n_events;
        successes += r.n_successes;
      }
      AttackReport report =
          MakeReport("inversion", events, successes, eta, config.seed);
      report.representation = config.no_privatization
                                  ? "unprivatized-embeddings"
                                  : "perturbed-embeddings";
      report.config_hash = hash;
      reports.push_back(ToJson(report));
    }
    if (want_attribute) {
      RepresentationTable table =
          imported ? *imported
                   : BuildRepresentations(config, *attr_corpus, *emb,
                                          checkpoint ? &checkpoint->model
                                                     : nullptr,
                                          eta);
      if (!imported) {
        const std::string name =
            etas.size() == 1 ? std::string(kRepresentationsFile)
                             : "representations_eta" + FormatDouble(eta) +
                                   ".tsv";
        std::ofstream out(config.out / name, std::ios::binary);
        if (!out) throw DataError("cannot write representation export");
        WriteRepresentations(
            table, ProvenanceComment(eta, config.seed, hash).substr(2), out);
      }
      const auto [train_idx, test_idx] =
          Split(table.rows.rows(), config.holdout_fraction,
                DeriveSeed(config.seed, "attack-split"));
      AttackerConfig ac;
      ac.hidden = config.attacker_hidden;
      ac.epochs = config.attacker_epochs;
      ac.seed = DeriveSeed(config.seed, "attacker");
      const RowMatrixXd train_x = Rows(table.rows, train_idx);
      const RowMatrixXd test_x = Rows(table.rows, test_idx);
      struct Target {
        const char* name;
        const std::vector<int>* labels;
        int classes;
      };
      std::vector<Target> targets;
      if (config.attribute != "age") {
        targets.push_back({"gender", &table.gender, kNumGenderClasses});
      }
      if (config.attribute != "gender") {
        targets.push_back({"age", &table.age_bin, kNumAgeBins});
      }
      for (const auto& target : targets) {
        const AttributeAttacker attacker = TrainAttributeAttacker(
            train_x, Pick(*target.labels, train_idx), target.classes, ac);
        AttackReport report = AttributeAttackEval(
            attacker, test_x, Pick(*target.labels, test_idx), eta,
            config.seed);
        report.attribute = target.name;
        report.representation = table.source;
        report.config_hash = hash;
        reports.push_back(ToJson(report));
      }
    }
  }
  ordered_json result = Provenance(config.eta, config.seed, hash);
  result["reports"] = reports;
  WriteJsonFile(config.out / kAttackReportsFile, result);
  return result;
}

ordered_json CmdReport(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) {
    throw DataError("run directory not found: " + run_dir.string());
  }
  ordered_json summary;
  summary["eta"] = nullptr;
  summary["replacement_probability"] = nullptr;
  summary["task_accuracy"] = nullptr;
  summary["empirical_privacy_inversion"] = nullptr;
  summary["empirical_privacy_attribute"] = nullptr;
  summary["params_count"] = nullptr;
  summary["seed"] = nullptr;
  summary["config_hash"] = nullptr;
  ordered_json missing = ordered_json::array();

  auto note_provenance = [&](const ordered_json& j) {
    if (summary["eta"].is_null() && j.contains("eta")) summary["eta"] = j["eta"];
    if (summary["seed"].is_null() && j.contains("seed")) {
      summary["seed"] = j["seed"];
    }
    if (summary["config_hash"].is_null() && j.contains("config_hash")) {
      summary["config_hash"] = j["config_hash"];
    }
  };

  if (fs::exists(run_dir / kPrivatizeStatsFile)) {
    const auto stats = ReadJsonFile(run_dir / kPrivatizeStatsFile);
    note_provenance(stats);
    summary["replacement_probability"] = stats.at("replacement_probability");
  } else {
    missing.push_back(kPrivatizeStatsFile);
  }

  if (fs::exists(run_dir / kMetricsFile)) {
    std::ifstream in(run_dir / kMetricsFile);
    std::string line, last;
    while (std::getline(in, line)) {
      if (!line.empty()) last = line;
    }
    if (last.empty()) {
      missing.push_back(kMetricsFile);
    } else {
      const auto j = ordered_json::parse(last);
      note_provenance(j);
      summary["task_accuracy"] = j.at("task_acc");
    }
  } else {
    missing.push_back(kMetricsFile);
  }

  if (fs::exists(run_dir / kCheckpointFile)) {
    const auto ck = ReadJsonFile(run_dir / kCheckpointFile);
    note_provenance(ck);
    summary["params_count"] = ck.at("parameter_count");
  } else {
    missing.push_back(kCheckpointFile);
  }

  if (fs::exists(run_dir / kAttackReportsFile)) {
    const auto file = ReadJsonFile(run_dir / kAttackReportsFile);
    note_provenance(file);
    const double run_eta = summary["eta"].get<double>();
    // Prefer reports at the run's eta; otherwise fall back to any report.
    for (const bool exact : {true, false}) {
      std::optional<double> inversion, attribute;
      for (const auto& r : file.at("reports")) {
        if (exact && r.at("eta").get<double>() != run_eta) continue;
        const double ep = r.at("empirical_privacy").get<double>();
        if (r.at("kind") == "inversion" && !inversion) inversion = ep;
        // Worst case over the attacked attributes.
        if (r.at("kind") == "attribute") {
          attribute = attribute ? std::min(*attribute, ep) : ep;
        }
      }
      if (summary["empirical_privacy_inversion"].is_null() && inversion) {
        summary["empirical_privacy_inversion"] = *inversion;
      }
      if (summary["empirical_privacy_attribute"].is_null() && attribute) {
        summary["empirical_privacy_attribute"] = *attribute;
      }
    }
  } else {
    missing.push_back(kAttackReportsFile);
  }

  summary["missing"] = missing;
  WriteJsonFile(run_dir / kSummaryFile, summary);
  return summary;
}

int RunCommand(const std::function<ordered_json()>& command, std::ostream& out,
               std::ostream& err) {
  try {
    out << command().dump(2) << '\n';
    return kExitOk;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace privtune
