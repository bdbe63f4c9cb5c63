// xreid/losses.hpp

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

#ifndef XREID_LOSSES_HPP_
#define XREID_LOSSES_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "xreid/matrix.hpp"

namespace xreid {

// ln(1 + exp(x)) without overflow: max(x, 0) + ln(1 + exp(-|x|)).
double stable_softplus(double x);

// Margin handling for the triplet losses. HINGE is [margin + gap]_+ where
// gap = d_pos - d_neg; SOFTPLUS is ln(1 + exp(gap)) with no margin (the gap
// keeps being pushed negative past any fixed margin).
struct MarginMode {
  enum class Kind { kHinge, kSoftplus };

  static MarginMode hinge(double margin);
  static MarginMode softplus() { return MarginMode{}; }

  Kind kind = Kind::kSoftplus;
  double margin = 0.0;  // used by HINGE only
};

// Entry (i, j) = Euclidean distance between row i of `a` and row j of `b`,
// computed as sqrt(max(|a|^2 + |b|^2 - 2<a,b>, 0) + 1e-12); the epsilon keeps
// the gradient finite at zero distance.
Matrix pairwise_distances(const Matrix& a, const Matrix& b);

struct LossResult {
  double loss = 0.0;
  Matrix d_embed;            // gradient of loss w.r.t. the embeddings
  std::int64_t num_active = 0;  // triplets/anchors with nonzero contribution
  // Per-anchor selected row indices, filled by the batch-hard variants only
  // (entry i belongs to anchor i; the group variant has K entries).
  std::vector<Index> hardest_positive;
  std::vector<Index> hardest_negative;
};

// Sum over every valid triplet (anchor, positive, negative): same label for
// anchor/positive (distinct rows), different label for the negative. This is
// the exhaustive form the batch-hard variants subsample, and serves as their
// oracle in tests.
LossResult full_triplet_loss(const Matrix& embeddings,
                             std::span<const std::int64_t> labels,
                             const MarginMode& mode);

// Batch-hard loss over a P x K batch: per anchor, the farthest same-label row
// and the closest other-label row. Ties break toward the lowest row index.
// `average` divides by the anchor count (the default); otherwise the anchor
// terms are summed.
LossResult batch_hard_loss(const Matrix& embeddings,
                           std::span<const std::int64_t> labels,
                           const MarginMode& mode, bool average = true);

// Batch-hard over a presumed-positive group: rows 0..K-1 are treated as one
// identity and are the only anchors; rows K..n-1 are presumed negatives with
// no label structure among them. Gradient flows only through the anchors and
// their selected pairs.
LossResult positive_group_batch_hard_loss(const Matrix& embeddings, Index k,
                                          const MarginMode& mode,
                                          bool average = true);

}  // namespace xreid

#endif  // XREID_LOSSES_HPP_
