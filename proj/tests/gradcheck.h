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

// Central finite differences of the total loss against Backward().

#ifndef PRIVTUNE_TESTS_GRADCHECK_H_
#define PRIVTUNE_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oracles.h"
#include "privtune/model.h"

namespace privtune::testing {

struct TensorError {
  std::string name;
  double relative_error;
};

inline double RelativeError(const MatrixXd& a, const MatrixXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

inline std::vector<TensorError> FiniteDifferenceErrors(
    PromptModel& model, const std::vector<TokenId>& tokens, int plain_length,
    const std::vector<int>& targets, int label, double step) {
  const ForwardTrace tr = Forward(model, tokens, plain_length);
  const GradientBundle analytic = Backward(model, tr, targets, label);
  auto loss = [&]() {
    return TotalLoss(Forward(model, tokens, plain_length), targets, label);
  };
  std::vector<MatrixXd> numeric;
  const TrainableParams shapes = model.params();
  shapes.ForEach([&](const char* name, const auto& tensor) {
    MatrixXd grad(tensor.rows(), tensor.cols());
    for (Eigen::Index i = 0; i < tensor.size(); ++i) {
      auto coordinate = [&]() -> double& {
        double* out = nullptr;
        model.mutable_params().ForEach([&](const char* other, auto& t) {
          if (std::string(other) == name) out = t.data() + i;
        });
        return *out;
      };
      const double original = coordinate();
      coordinate() = original + step;
      const double up = loss();
      coordinate() = original - step;
      const double down = loss();
      coordinate() = original;
      grad.data()[i] = (up - down) / (2.0 * step);
    }
    numeric.push_back(grad);
  });
  std::vector<TensorError> out;
  std::size_t k = 0;
  analytic.ForEach([&](const char* name, const auto& tensor) {
    const MatrixXd a = tensor;
    out.push_back({name, RelativeError(a, numeric[k++])});
  });
  return out;
}

// Random small model (h=8, N=2, m=3, n=4, |T|=5, |C|=2) with every trainable
// tensor drawn N(0, 0.5^2); returns the per-tensor errors.
inline std::vector<TensorError> RandomSmallModelErrors(std::uint64_t seed,
                                                       double step = 1e-5) {
  auto emb = std::make_shared<const EmbeddingMatrix>(
      RandomVocab(15, 8, 100 + seed));
  PromptModel model(emb, ModelShape{8, 2, 6, 5, 2}, seed);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  model.mutable_params().ForEach([&](const char*, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = normal(gen);
  });
  std::vector<TokenId> tokens;
  for (int i = 0; i < 7; ++i) {
    tokens.push_back(TokenId{static_cast<int>(gen() % 15)});
  }
  std::vector<int> targets;
  for (int i = 0; i < 3; ++i) targets.push_back(static_cast<int>(gen() % 5));
  const int label = static_cast<int>(gen() % 2);
  return FiniteDifferenceErrors(model, tokens, 3, targets, label, step);
}

}  // namespace privtune::testing

#endif  // PRIVTUNE_TESTS_GRADCHECK_H_
