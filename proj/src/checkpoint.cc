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

#include "privtune/checkpoint.h"

#include <fstream>

#include "json.hpp"
#include "privtune/errors.h"

namespace privtune {
namespace {

using nlohmann::json;

json MatrixToJson(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

MatrixXd MatrixFromJson(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) {
    throw DataError("checkpoint matrix row count mismatch");
  }
  MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(data[r].size()) != cols) {
      throw DataError("checkpoint matrix column count mismatch");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r][c].get<double>();
  }
  return m;
}

json TokensToJson(std::span<const TokenId> tokens,
                  const EmbeddingMatrix& matrix) {
  json out = json::array();
  for (TokenId t : tokens) out.push_back(matrix.token(t));
  return out;
}

std::vector<TokenId> TokensFromJson(const json& j,
                                    const EmbeddingMatrix& matrix) {
  std::vector<TokenId> out;
  for (const auto& s : j) {
    auto id = matrix.Find(s.get<std::string>());
    if (!id) throw DataError("checkpoint token not in embedding vocabulary");
    out.push_back(*id);
  }
  return out;
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path,
                    const Checkpoint& ck) {
  const PromptModel& model = ck.model;
  const EmbeddingMatrix& emb = model.embeddings();
  const ModelShape& shape = model.shape();
  json j;
  j["format"] = "privtune-checkpoint";
  j["version"] = kCheckpointFormatVersion;
  j["eta"] = ck.mechanism.eta;
  j["seed"] = ck.mechanism.seed;
  j["config_hash"] = ck.config_hash;
  j["embedding_fingerprint"] = emb.Fingerprint();
  j["shape"] = {{"hidden", shape.hidden},
                {"prompt_length", shape.prompt_length},
                {"recon_hidden", shape.recon_hidden},
                {"recon_vocab", shape.recon_vocab},
                {"num_classes", shape.num_classes}};
  j["train"] = {{"learning_rate", ck.train_config.adam.learning_rate},
                {"beta1", ck.train_config.adam.beta1},
                {"beta2", ck.train_config.adam.beta2},
                {"epsilon", ck.train_config.adam.epsilon},
                {"batch_size", ck.train_config.batch_size},
                {"epochs", ck.train_config.epochs},
                {"seed", ck.train_config.seed}};
  const FrozenEncoder& enc = model.encoder();
  j["encoder"] = {{"wq", MatrixToJson(enc.wq)},
                  {"wk", MatrixToJson(enc.wk)},
                  {"wv", MatrixToJson(enc.wv)},
                  {"wf", MatrixToJson(enc.wf)}};
  json params;
  model.params().ForEach([&](const char* name, const auto& t) {
    params[name] = MatrixToJson(MatrixXd(t));
  });
  j["params"] = params;
  j["parameter_count"] = model.TrainableParameterCount();
  j["recon_vocab"] = ck.recon_vocab
                         ? TokensToJson(ck.recon_vocab->tokens(), emb)
                         : json(nullptr);
  json specs = json::array();
  for (const auto& spec : ck.plain_specs) {
    specs.push_back(
        {{"seed", spec.seed}, {"tokens", TokensToJson(spec.tokens, emb)}});
  }
  j["plain_tokens"] = specs;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          std::shared_ptr<const EmbeddingMatrix> embeddings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
    if (j.at("format") != "privtune-checkpoint" ||
        j.at("version").get<int>() != kCheckpointFormatVersion) {
      throw DataError("unsupported checkpoint format in " + path.string());
    }
    if (j.at("embedding_fingerprint").get<std::uint64_t>() !=
        embeddings->Fingerprint()) {
      throw DataError("checkpoint was trained against different embeddings");
    }
    ModelShape shape;
    const json& s = j.at("shape");
    shape.hidden = s.at("hidden");
    shape.prompt_length = s.at("prompt_length");
    shape.recon_hidden = s.at("recon_hidden");
    shape.recon_vocab = s.at("recon_vocab");
    shape.num_classes = s.at("num_classes");

    FrozenEncoder enc;
    const json& e = j.at("encoder");
    enc.wq = MatrixFromJson(e.at("wq"));
    enc.wk = MatrixFromJson(e.at("wk"));
    enc.wv = MatrixFromJson(e.at("wv"));
    enc.wf = MatrixFromJson(e.at("wf"));

    TrainableParams params;
    const json& p = j.at("params");
    params.prompt = MatrixFromJson(p.at("prompt"));
    params.w1 = MatrixFromJson(p.at("w1"));
    params.w2 = MatrixFromJson(p.at("w2"));
    params.w_task = MatrixFromJson(p.at("w_task"));
    const MatrixXd b = MatrixFromJson(p.at("b_task"));
    if (b.cols() != 1) throw DataError("b_task must be a column vector");
    params.b_task = b.col(0);

    const EmbeddingMatrix& emb = *embeddings;
    std::optional<ReconVocab> vocab;
    if (!j.at("recon_vocab").is_null()) {
      vocab.emplace(TokensFromJson(j.at("recon_vocab"), emb));
    }
    std::vector<PlainTokenSpec> specs;
    for (const auto& sj : j.at("plain_tokens")) {
      specs.push_back(PlainTokenSpec{TokensFromJson(sj.at("tokens"), emb),
                                     sj.at("seed").get<std::uint64_t>()});
    }
    MechanismParams mech{j.at("eta").get<double>(),
                         j.at("seed").get<std::uint64_t>()};
    TrainConfig tc;
    const json& t = j.at("train");
    tc.adam.learning_rate = t.at("learning_rate");
    tc.adam.beta1 = t.at("beta1");
    tc.adam.beta2 = t.at("beta2");
    tc.adam.epsilon = t.at("epsilon");
    tc.batch_size = t.at("batch_size");
    tc.epochs = t.at("epochs");
    tc.seed = t.at("seed");
    return Checkpoint{
        PromptModel(std::move(embeddings), shape, std::move(enc),
                    std::move(params)),
        std::move(vocab), std::move(specs), mech, tc,
        j.at("config_hash").get<std::string>()};
  } catch (const json::exception& ex) {
    throw DataError("malformed checkpoint " + path.string() + ": " +
                    ex.what());
  }
}

}  // namespace privtune
