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

#ifndef PRIVTUNE_TYPES_H_
#define PRIVTUNE_TYPES_H_

#include <compare>
#include <cstdint>

#include <Eigen/Dense>

namespace privtune {

template <typename Scalar>
using RowMatrixX =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RowMatrixXd = RowMatrixX<double>;
using RowMatrixXf = RowMatrixX<float>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Row index into one EmbeddingMatrix.
struct TokenId {
  std::int32_t index = 0;

  friend constexpr auto operator<=>(TokenId, TokenId) = default;
};

}  // namespace privtune

#endif  // PRIVTUNE_TYPES_H_
