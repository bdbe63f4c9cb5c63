// Copyright 2026 the xreid developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xreid/losses.hpp"

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "xreid/error.hpp"

namespace xreid {

namespace {

constexpr double kDistanceEpsilon = 1e-12;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Value and derivative of the margin term at gap = d_pos - d_neg, plus
// whether the term counts as active.
struct MarginEval {
  double value;
  double slope;
  bool active;
};

MarginEval eval_margin(const MarginMode& mode, double gap) {
  if (mode.kind == MarginMode::Kind::kHinge) {
    const double v = mode.margin + gap;
    if (v > 0.0) return {v, 1.0, true};
    return {0.0, 0.0, false};
  }
  return {stable_softplus(gap), sigmoid(gap), true};
}

void check_embeddings(const Matrix& e) {
  Require(e.rows() >= 1 && e.cols() >= 1, ErrorCode::kArgument,
          "empty embedding matrix");
  Require(e.allFinite(), ErrorCode::kNumeric, "non-finite embeddings");
}

// d D(a,b) / d a = (a - b) / D(a,b); D > 0 always because of the epsilon.
void accumulate_distance_gradient(Matrix& d_embed, const Matrix& e, Index a,
                                  Index b, double distance, double weight) {
  const Eigen::RowVectorXd diff =
      (e.row(a) - e.row(b)) * (weight / distance);
  d_embed.row(a) += diff;
  d_embed.row(b) -= diff;
}

}  // namespace

double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

MarginMode MarginMode::hinge(double margin) {
  Require(std::isfinite(margin) && margin >= 0.0, ErrorCode::kArgument,
          "hinge margin must be finite and >= 0");
  MarginMode m;
  m.kind = Kind::kHinge;
  m.margin = margin;
  return m;
}

Matrix pairwise_distances(const Matrix& a, const Matrix& b) {
  Require(a.cols() == b.cols(), ErrorCode::kArgument,
          "pairwise_distances: dimension mismatch");
  Require(a.allFinite() && b.allFinite(), ErrorCode::kNumeric,
          "pairwise_distances: non-finite input");

  const Vector a_sq = a.rowwise().squaredNorm();
  const Vector b_sq = b.rowwise().squaredNorm();
  Matrix sq = (-2.0 * a * b.transpose());
  sq.colwise() += a_sq;
  sq.rowwise() += b_sq.transpose();
  return (sq.array().max(0.0) + kDistanceEpsilon).sqrt().matrix();
}

LossResult full_triplet_loss(const Matrix& embeddings,
                             std::span<const std::int64_t> labels,
                             const MarginMode& mode) {
  check_embeddings(embeddings);
  const Index n = embeddings.rows();
  Require(static_cast<std::size_t>(n) == labels.size(), ErrorCode::kArgument,
          "one label per embedding row required");

  const Matrix dist = pairwise_distances(embeddings, embeddings);

  LossResult result;
  result.d_embed = Matrix::Zero(n, embeddings.cols());
  std::int64_t num_triplets = 0;
  for (Index a = 0; a < n; ++a) {
    for (Index p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      for (Index q = 0; q < n; ++q) {
        if (labels[q] == labels[a]) continue;
        ++num_triplets;
        const MarginEval term = eval_margin(mode, dist(a, p) - dist(a, q));
        result.loss += term.value;
        if (term.active) ++result.num_active;
        if (term.slope != 0.0) {
          accumulate_distance_gradient(result.d_embed, embeddings, a, p,
                                       dist(a, p), term.slope);
          accumulate_distance_gradient(result.d_embed, embeddings, a, q,
                                       dist(a, q), -term.slope);
        }
      }
    }
  }
  Require(num_triplets > 0, ErrorCode::kState,
          "no valid triplet (need two classes and a class with two members)");
  return result;
}

LossResult batch_hard_loss(const Matrix& embeddings,
                           std::span<const std::int64_t> labels,
                           const MarginMode& mode, bool average) {
  check_embeddings(embeddings);
  const Index n = embeddings.rows();
  Require(static_cast<std::size_t>(n) == labels.size(), ErrorCode::kArgument,
          "one label per embedding row required");

  // The batch must be a full P x K grid: P classes, K rows each.
  std::unordered_map<std::int64_t, Index> counts;
  for (std::int64_t y : labels) ++counts[y];
  const Index p_classes = static_cast<Index>(counts.size());
  Require(p_classes >= 2, ErrorCode::kArgument, "need P >= 2 classes");
  const Index k = counts.begin()->second;
  for (const auto& [y, c] : counts) {
    Require(c == k, ErrorCode::kArgument,
            "class " + std::to_string(y) + " has " + std::to_string(c) +
                " rows, expected " + std::to_string(k));
  }
  Require(k >= 2, ErrorCode::kArgument, "need K >= 2 rows per class");

  const Matrix dist = pairwise_distances(embeddings, embeddings);
  const double scale = average ? 1.0 / static_cast<double>(n) : 1.0;

  LossResult result;
  result.d_embed = Matrix::Zero(n, embeddings.cols());
  result.hardest_positive.reserve(static_cast<std::size_t>(n));
  result.hardest_negative.reserve(static_cast<std::size_t>(n));
  for (Index a = 0; a < n; ++a) {
    Index hardest_pos = -1, hardest_neg = -1;
    for (Index i = 0; i < n; ++i) {
      if (i == a) continue;
      if (labels[i] == labels[a]) {
        if (hardest_pos < 0 || dist(a, i) > dist(a, hardest_pos)) {
          hardest_pos = i;
        }
      } else if (hardest_neg < 0 || dist(a, i) < dist(a, hardest_neg)) {
        hardest_neg = i;
      }
    }
    result.hardest_positive.push_back(hardest_pos);
    result.hardest_negative.push_back(hardest_neg);
    const MarginEval term =
        eval_margin(mode, dist(a, hardest_pos) - dist(a, hardest_neg));
    result.loss += scale * term.value;
    if (term.active) ++result.num_active;
    if (term.slope != 0.0) {
      const double w = scale * term.slope;
      accumulate_distance_gradient(result.d_embed, embeddings, a, hardest_pos,
                                   dist(a, hardest_pos), w);
      accumulate_distance_gradient(result.d_embed, embeddings, a, hardest_neg,
                                   dist(a, hardest_neg), -w);
    }
  }
  return result;
}

LossResult positive_group_batch_hard_loss(const Matrix& embeddings, Index k,
                                          const MarginMode& mode,
                                          bool average) {
  check_embeddings(embeddings);
  const Index n = embeddings.rows();
  Require(k >= 2, ErrorCode::kArgument, "need K >= 2 anchors");
  Require(n % k == 0 && n / k >= 2, ErrorCode::kArgument,
          "batch must hold K positives plus (P-1)*K negatives, P >= 2");

  const Matrix dist = pairwise_distances(embeddings, embeddings);
  const double scale = average ? 1.0 / static_cast<double>(k) : 1.0;

  LossResult result;
  result.d_embed = Matrix::Zero(n, embeddings.cols());
  result.hardest_positive.reserve(static_cast<std::size_t>(k));
  result.hardest_negative.reserve(static_cast<std::size_t>(k));
  for (Index a = 0; a < k; ++a) {
    Index hardest_pos = -1;
    for (Index i = 0; i < k; ++i) {
      if (i == a) continue;
      if (hardest_pos < 0 || dist(a, i) > dist(a, hardest_pos)) hardest_pos = i;
    }
    Index hardest_neg = k;
    for (Index i = k + 1; i < n; ++i) {
      if (dist(a, i) < dist(a, hardest_neg)) hardest_neg = i;
    }
    result.hardest_positive.push_back(hardest_pos);
    result.hardest_negative.push_back(hardest_neg);
    const MarginEval term =
        eval_margin(mode, dist(a, hardest_pos) - dist(a, hardest_neg));
    result.loss += scale * term.value;
    if (term.active) ++result.num_active;
    if (term.slope != 0.0) {
      const double w = scale * term.slope;
      accumulate_distance_gradient(result.d_embed, embeddings, a, hardest_pos,
                                   dist(a, hardest_pos), w);
      accumulate_distance_gradient(result.d_embed, embeddings, a, hardest_neg,
                                   dist(a, hardest_neg), -w);
    }
  }
  return result;
}

}  // namespace xreid
