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

// Exact L2 nearest-neighbour search over a dense row matrix.
//
// Scores are computed blockwise as ||w||^2 - 2<w, q> with one GEMM per block
// of vocabulary rows. The expansion loses precision against a direct
// difference, so every row whose expanded score lies within a rounding slack
// of the running minimum is kept as a candidate and the winner is chosen by
// a direct ||w - q|| recomputation, ties going to the smallest index. The
// result is therefore the exact argmin at the kernel's scalar precision.

#ifndef PRIVTUNE_NEAREST_H_
#define PRIVTUNE_NEAREST_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "privtune/errors.h"
#include "privtune/types.h"

namespace privtune {

struct Neighbor {
  TokenId token;
  double distance = 0.0;
};

namespace internal {

inline constexpr Eigen::Index kVocabBlockRows = 4096;

template <typename Scalar>
Scalar RoundingSlack(Eigen::Index dim, Scalar query_sq_norm,
                     Scalar max_row_sq_norm) {
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  return Scalar(4) * Scalar(dim + 2) * eps * (query_sq_norm + max_row_sq_norm);
}

}  // namespace internal

// Nearest row of `rows` for every row of `queries`. `sq_norms` must hold the
// squared L2 norm of each row of `rows`.
template <typename Scalar>
void NearestRows(const Eigen::Ref<const RowMatrixX<Scalar>>& rows,
                 const Eigen::Ref<const VectorX<Scalar>>& sq_norms,
                 const Eigen::Ref<const RowMatrixX<Scalar>>& queries,
                 std::span<Neighbor> out) {
  const Eigen::Index vocab = rows.rows();
  const Eigen::Index batch = queries.rows();
  if (queries.cols() != rows.cols()) {
    throw DimensionError("query dimension " + std::to_string(queries.cols()) +
                         " does not match embedding dimension " +
                         std::to_string(rows.cols()));
  }
  if (static_cast<Eigen::Index>(out.size()) != batch) {
    throw DimensionError("output span does not match query count");
  }
  if (vocab == 0) throw ArgumentError("empty embedding matrix");
  if (batch == 0) return;

  const Scalar max_sq = sq_norms.maxCoeff();
  VectorX<Scalar> best(batch);
  VectorX<Scalar> slack(batch);
  best.setConstant(std::numeric_limits<Scalar>::infinity());
  for (Eigen::Index b = 0; b < batch; ++b) {
    slack[b] = internal::RoundingSlack<Scalar>(
        rows.cols(), queries.row(b).squaredNorm(), max_sq);
  }
  std::vector<std::vector<std::pair<Scalar, Eigen::Index>>> candidates(batch);

  RowMatrixX<Scalar> scores;
  for (Eigen::Index start = 0; start < vocab;
       start += internal::kVocabBlockRows) {
    const Eigen::Index len = std::min(internal::kVocabBlockRows, vocab - start);
    scores.noalias() = queries * rows.middleRows(start, len).transpose();
    for (Eigen::Index b = 0; b < batch; ++b) {
      const Scalar* score_row = scores.row(b).data();
      auto& cand = candidates[b];
      for (Eigen::Index r = 0; r < len; ++r) {
        const Scalar value = sq_norms[start + r] - Scalar(2) * score_row[r];
        if (value <= best[b] + slack[b]) {
          if (value < best[b]) {
            best[b] = value;
            const Scalar cutoff = best[b] + slack[b];
            std::erase_if(cand, [cutoff](const auto& c) {
              return c.first > cutoff;
            });
          }
          cand.emplace_back(value, start + r);
        }
      }
    }
  }

  for (Eigen::Index b = 0; b < batch; ++b) {
    Scalar best_dist = std::numeric_limits<Scalar>::infinity();
    Eigen::Index best_index = -1;
    // Candidates arrive in increasing row order, so strict `<` keeps the
    // smallest index on ties.
    for (const auto& [value, index] : candidates[b]) {
      const Scalar dist = (rows.row(index) - queries.row(b)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best_index = index;
      }
    }
    if (best_index < 0) {
      throw NumericError("nearest-neighbour search found no finite candidate");
    }
    out[b] = Neighbor{TokenId{static_cast<std::int32_t>(best_index)},
                      std::sqrt(static_cast<double>(best_dist))};
  }
}

// Owns a copy of an embedding table at precision `Scalar` together with its
// row norms. The float instantiation is the bulk-throughput path.
template <typename Scalar>
class NearestIndex {
 public:
  explicit NearestIndex(const Eigen::Ref<const RowMatrixXd>& rows)
      : rows_(rows.template cast<Scalar>()),
        sq_norms_(rows_.rowwise().squaredNorm()) {}

  Eigen::Index size() const { return rows_.rows(); }
  Eigen::Index dim() const { return rows_.cols(); }

  Neighbor Query(const Eigen::Ref<const VectorX<Scalar>>& query) const {
    RowMatrixX<Scalar> q = query.transpose();
    Neighbor result;
    NearestRows<Scalar>(rows_, sq_norms_, q, std::span<Neighbor>(&result, 1));
    return result;
  }

  void QueryBatch(const Eigen::Ref<const RowMatrixX<Scalar>>& queries,
                  std::span<Neighbor> out) const {
    NearestRows<Scalar>(rows_, sq_norms_, queries, out);
  }

 private:
  RowMatrixX<Scalar> rows_;
  VectorX<Scalar> sq_norms_;
};

}  // namespace privtune

#endif  // PRIVTUNE_NEAREST_H_
