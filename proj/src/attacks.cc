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

#include "privtune/attacks.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "privtune/errors.h"
#include "privtune/rng.h"

namespace privtune {
namespace {

AttributeAttacker ZerosLike(const AttributeAttacker& a) {
  return AttributeAttacker{MatrixXd::Zero(a.w1.rows(), a.w1.cols()),
                           VectorXd::Zero(a.b1.size()),
                           MatrixXd::Zero(a.w2.rows(), a.w2.cols()),
                           VectorXd::Zero(a.b2.size())};
}

template <typename Fn>
void ForEachTensor(AttributeAttacker& a, const AttributeAttacker& b,
                   AttributeAttacker& c, AttributeAttacker& d, Fn fn) {
  fn(a.w1, b.w1, c.w1, d.w1);
  fn(a.b1, b.b1, c.b1, d.b1);
  fn(a.w2, b.w2, c.w2, d.w2);
  fn(a.b2, b.b2, c.b2, d.b2);
}

void CheckLabels(std::span<const int> labels, int num_classes) {
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw IndexError("attribute label " + std::to_string(y) +
                       " out of range");
    }
  }
}

}  // namespace

AttackReport MakeReport(std::string kind, std::int64_t n_events,
                        std::int64_t n_successes, double eta,
                        std::uint64_t seed) {
  if (n_events <= 0 || n_successes < 0 || n_successes > n_events) {
    throw ArgumentError("inconsistent attack counts");
  }
  AttackReport r;
  r.kind = std::move(kind);
  r.eta = eta;
  r.seed = seed;
  r.n_events = n_events;
  r.n_successes = n_successes;
  r.success_rate =
      static_cast<double>(n_successes) / static_cast<double>(n_events);
  r.empirical_privacy = 1.0 - r.success_rate;
  return r;
}

AttackReport ReportFromSuccessRate(std::string kind, double success_rate,
                                   std::int64_t n_events, double eta,
                                   std::uint64_t seed) {
  if (!(success_rate >= 0.0 && success_rate <= 1.0)) {
    throw ArgumentError("success rate must lie in [0, 1]");
  }
  AttackReport r;
  r.kind = std::move(kind);
  r.eta = eta;
  r.seed = seed;
  r.n_events = n_events;
  r.n_successes = static_cast<std::int64_t>(
      std::llround(success_rate * static_cast<double>(n_events)));
  r.success_rate = success_rate;
  r.empirical_privacy = 1.0 - success_rate;
  return r;
}

nlohmann::ordered_json ToJson(const AttackReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind;
  j["eta"] = r.eta;
  j["success_rate"] = r.success_rate;
  j["empirical_privacy"] = r.empirical_privacy;
  j["n_events"] = r.n_events;
  j["n_successes"] = r.n_successes;
  j["seed"] = r.seed;
  j["representation"] = r.representation;
  if (!r.attribute.empty()) j["attribute"] = r.attribute;
  if (!r.config_hash.empty()) j["config_hash"] = r.config_hash;
  return j;
}

AttackReport AttackReportFromJson(const nlohmann::json& j) {
  AttackReport r;
  r.kind = j.at("kind").get<std::string>();
  r.eta = j.at("eta").get<double>();
  r.success_rate = j.at("success_rate").get<double>();
  r.empirical_privacy = j.at("empirical_privacy").get<double>();
  r.n_events = j.at("n_events").get<std::int64_t>();
  r.n_successes = j.value("n_successes", std::int64_t{0});
  r.seed = j.at("seed").get<std::uint64_t>();
  r.representation = j.value("representation", std::string());
  r.attribute = j.value("attribute", std::string());
  r.config_hash = j.value("config_hash", std::string());
  return r;
}

AttackReport InversionAttack(const Eigen::Ref<const RowMatrixXd>& observed,
                             std::span<const TokenId> originals,
                             const EmbeddingMatrix& matrix, double eta,
                             std::uint64_t seed) {
  if (observed.rows() != static_cast<Eigen::Index>(originals.size())) {
    throw ArgumentError("observed rows and original tokens differ in length");
  }
  if (originals.empty()) throw ArgumentError("nothing to invert");
  std::vector<Neighbor> recovered(originals.size());
  NearestRows<double>(matrix.vectors(), matrix.squared_norms(), observed,
                      recovered);
  std::int64_t successes = 0;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    successes += recovered[i].token == originals[i];
  }
  AttackReport report =
      MakeReport("inversion", static_cast<std::int64_t>(originals.size()),
                 successes, eta, seed);
  report.representation = "privatized-embeddings";
  return report;
}

VectorXd MeanRepresentation(const Eigen::Ref<const RowMatrixXd>& vectors) {
  if (vectors.rows() == 0) throw ArgumentError("no vectors to average");
  return vectors.colwise().mean().transpose();
}

VectorXd AttributeAttacker::Probabilities(
    const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != input_dim()) {
    throw DimensionError("attacker expects width " +
                         std::to_string(input_dim()) + ", got " +
                         std::to_string(x.size()));
  }
  const VectorXd hidden = (w1 * x + b1).cwiseMax(0.0);
  VectorXd logits = w2 * hidden + b2;
  logits.array() -= logits.maxCoeff();
  logits = logits.array().exp().matrix();
  return logits / logits.sum();
}

int AttributeAttacker::Predict(const Eigen::Ref<const VectorXd>& x) const {
  Eigen::Index idx = 0;
  Probabilities(x).maxCoeff(&idx);
  return static_cast<int>(idx);
}

double AttributeAttacker::Loss(const Eigen::Ref<const VectorXd>& x,
                               int label) const {
  return -std::log(Probabilities(x)[label]);
}

AttributeAttacker AttributeAttacker::Gradient(
    const Eigen::Ref<const VectorXd>& x, int label) const {
  const VectorXd pre = w1 * x + b1;
  const VectorXd hidden = pre.cwiseMax(0.0);
  VectorXd d_logits = Probabilities(x);
  d_logits[label] -= 1.0;
  AttributeAttacker g;
  g.w2 = d_logits * hidden.transpose();
  g.b2 = d_logits;
  VectorXd d_hidden = w2.transpose() * d_logits;
  d_hidden = (pre.array() > 0.0).select(d_hidden, 0.0);
  g.w1 = d_hidden * x.transpose();
  g.b1 = d_hidden;
  return g;
}

AttributeAttacker TrainAttributeAttacker(
    const Eigen::Ref<const RowMatrixXd>& reps, std::span<const int> labels,
    int num_classes, const AttackerConfig& config) {
  if (reps.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ArgumentError("representations and labels differ in length");
  }
  if (reps.rows() == 0) throw ArgumentError("no training representations");
  if (num_classes < 2) throw ArgumentError("need at least 2 attribute classes");
  CheckLabels(labels, num_classes);
  if (std::set<int>(labels.begin(), labels.end()).size() < 2) {
    throw DataError("attribute labels contain a single class");
  }
  if (config.hidden < 1 || config.batch_size < 1 || config.epochs < 1 ||
      !(config.learning_rate > 0.0)) {
    throw ArgumentError("invalid attacker configuration");
  }

  const int h = static_cast<int>(reps.cols());
  StreamRng rng(DeriveSeed(config.seed, "attribute-attacker"));
  std::normal_distribution<double> normal;
  AttributeAttacker a;
  a.w1.resize(config.hidden, h);
  a.w2.resize(num_classes, config.hidden);
  const double s1 = std::sqrt(2.0 / h);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  for (Eigen::Index r = 0; r < a.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < a.w1.cols(); ++c) a.w1(r, c) = s1 * normal(rng);
  for (Eigen::Index r = 0; r < a.w2.rows(); ++r)
    for (Eigen::Index c = 0; c < a.w2.cols(); ++c) a.w2(r, c) = s2 * normal(rng);
  a.b1 = VectorXd::Zero(config.hidden);
  a.b2 = VectorXd::Zero(num_classes);

  AttributeAttacker m = ZerosLike(a);
  AttributeAttacker v = ZerosLike(a);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  int step = 0;
  std::vector<Eigen::Index> order(reps.rows());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      AttributeAttacker grad = ZerosLike(a);
      for (std::size_t b = start; b < end; ++b) {
        const Eigen::Index i = order[b];
        const AttributeAttacker g = a.Gradient(reps.row(i).transpose(),
                                               labels[i]);
        grad.w1 += g.w1;
        grad.b1 += g.b1;
        grad.w2 += g.w2;
        grad.b2 += g.b2;
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, step);
      const double c2 = 1.0 - std::pow(kBeta2, step);
      ForEachTensor(a, grad, m, v,
                    [&](auto& param, const auto& g, auto& mom, auto& var) {
                      mom = kBeta1 * mom + (1.0 - kBeta1) * inv * g;
                      var = kBeta2 * var +
                            (1.0 - kBeta2) * (inv * g).cwiseProduct(inv * g);
                      param.array() -= config.learning_rate *
                                       (mom.array() / c1) /
                                       ((var.array() / c2).sqrt() + kEps);
                    });
    }
    if (!a.w1.allFinite() || !a.w2.allFinite()) {
      throw NumericError("attribute attacker diverged");
    }
  }
  return a;
}

AttackReport AttributeAttackEval(const AttributeAttacker& attacker,
                                 const Eigen::Ref<const RowMatrixXd>& reps,
                                 std::span<const int> labels, double eta,
                                 std::uint64_t seed) {
  if (reps.cols() != attacker.input_dim()) {
    throw DimensionError("attacker width " +
                         std::to_string(attacker.input_dim()) +
                         " does not match representation width " +
                         std::to_string(reps.cols()));
  }
  if (reps.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ArgumentError("representations and labels differ in length");
  }
  if (reps.rows() == 0) throw ArgumentError("no held-out representations");
  CheckLabels(labels, attacker.num_classes());
  std::int64_t correct = 0;
  for (Eigen::Index i = 0; i < reps.rows(); ++i) {
    correct += attacker.Predict(reps.row(i).transpose()) == labels[i];
  }
  return MakeReport("attribute", reps.rows(), correct, eta, seed);
}

void WriteRepresentations(const RepresentationTable& table,
                          const std::string& provenance, std::ostream& out) {
  out << "# source=" << table.source << ' ' << provenance << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < table.rows.rows(); ++i) {
    out << i << '\t' << table.gender[i] << '\t' << table.age_bin[i] << '\t';
    for (Eigen::Index c = 0; c < table.rows.cols(); ++c) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), table.rows(i, c));
      if (c > 0) out << ' ';
      out << std::string_view(buf, ptr - buf);
    }
    out << '\n';
  }
}

RepresentationTable ReadRepresentations(std::istream& in) {
  RepresentationTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("source=");
      if (pos != std::string::npos && table.source.empty()) {
        std::istringstream(line.substr(pos + 7)) >> table.source;
      }
      continue;
    }
    std::istringstream fields(line);
    long long id = 0;
    int gender = 0;
    int age = 0;
    if (!(fields >> id >> gender >> age)) {
      throw DataError("malformed representation row (line " +
                      std::to_string(line_no) + ")");
    }
    std::vector<double> values;
    double v = 0.0;
    while (fields >> v) values.push_back(v);
    if (values.empty() || (!rows.empty() && values.size() != rows[0].size())) {
      throw DataError("inconsistent representation width (line " +
                      std::to_string(line_no) + ")");
    }
    rows.push_back(std::move(values));
    table.gender.push_back(gender);
    table.age_bin.push_back(age);
  }
  if (rows.empty()) throw DataError("representation export is empty");
  table.rows.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      table.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          rows[i][c];
    }
  }
  return table;
}

RepresentationTable ReadRepresentations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open representation export " +
                           path.string());
  return ReadRepresentations(in);
}

}  // namespace privtune
