// xreid/mining.hpp

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

#ifndef XREID_MINING_HPP_
#define XREID_MINING_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xreid/dataset.hpp"
#include "xreid/model.hpp"

namespace xreid {

// Tracklet-level embeddings: one row per tracklet, first-appearance order.
struct TrackletEmbeddings {
  Matrix rows;                      // T x M
  std::vector<std::int64_t> ids;    // T entries
  Index row_of(std::int64_t tracklet) const;
};

// EVAL-mode per-image embeddings averaged per tracklet. Never reads person
// labels.
TrackletEmbeddings compute_tracklet_embeddings(const Model& model,
                                               const Dataset& ds);

// floor(alpha * min(n1, n2)), clamped to >= 1 whenever min(n1, n2) >= 1.
std::int64_t compute_np(std::int64_t n1, std::int64_t n2, double alpha);

// A selected cross-camera pair: row indices into the two embedding blocks.
struct ScoredPair {
  Index a = 0;
  Index b = 0;
  double distance = 0.0;
};

// Greedy minimum-distance selection over the full cross-distance matrix.
// With one_to_one (default) each selected pair removes both rows from the
// pool, producing a partial matching; otherwise the raw smallest num_pairs
// entries are returned (a tracklet may then repeat). Ties order by
// (distance, a, b). Selection order = ascending distance.
std::vector<ScoredPair> mine_positive_pairs(const Matrix& e1, const Matrix& e2,
                                            std::int64_t num_pairs,
                                            bool one_to_one = true);

// A presumed-positive pair with its presumed-negative tracklets.
struct MinedPair {
  std::int64_t tracklet_a = 0;  // on camera_a of the owning set
  std::int64_t tracklet_b = 0;  // on camera_b
  double distance = 0.0;
  std::vector<std::int64_t> negatives;
  // Filled by annotate_truth only; mining itself never touches labels.
  std::optional<bool> true_positive;
};

// All mined pairs for one unordered camera pair.
struct MinedPairSet {
  std::int32_t camera_a = 0;
  std::int32_t camera_b = 0;
  std::size_t n1 = 0;  // tracklets on camera_a
  std::size_t n2 = 0;  // tracklets on camera_b
  std::vector<MinedPair> pairs;
  std::optional<double> purity;  // set by annotate_truth
};

// Draws up to `count` distinct tracklets that co-occur in time with either
// endpoint, restricted to `pair_tracklets` (the camera pair's tracklets) and
// excluding the endpoints; when co-occurrence runs out the remainder is drawn
// uniformly from the rest of the camera pair (fallback for data without
// usable timestamps). The camera pair must hold >= 3 tracklets.
std::vector<std::int64_t> mine_negatives(
    std::int64_t tracklet_a, std::int64_t tracklet_b,
    const std::vector<std::int64_t>& pair_tracklets,
    const CooccurrenceIndex& coocc, std::int64_t count, Rng& rng);

struct MiningConfig {
  double alpha = 0.1;
  std::int64_t negatives_per_pair = 10;
  bool one_to_one = true;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Full mining pass: every unordered camera pair, in the dataset's camera
// order. Camera pairs are independent, so they run on `threads` workers with
// per-pair rng streams fixed up front; the result is identical for any
// thread count. No person labels are read.
std::vector<MinedPairSet> mine_all_pairs(const Model& model,
                                         const Dataset& target,
                                         const CooccurrenceIndex& coocc,
                                         const MiningConfig& config);

// Fraction of pairs whose endpoints share a person label. Reads labels.
double measure_purity(const MinedPairSet& set, const Dataset& ground_truth);

// Fills true_positive on every pair and purity on every set, and returns the
// unweighted mean purity across sets. Reads labels; call it only outside any
// label-audit window.
double annotate_truth(std::vector<MinedPairSet>& sets,
                      const Dataset& ground_truth);

// One line per pair: `c1 c2 tracklet_a tracklet_b distance [truth]`; the
// truth column appears once annotate_truth has run.
void write_pair_report(const std::vector<MinedPairSet>& sets,
                       const std::string& path);

// Rows 0..K-1: K images from the union of the pair's two tracklets, both
// tracklets represented, order shuffled. Rows K..P*K-1: images drawn with
// replacement from the pair's negative tracklets. Returns sample indices
// into `ds`.
std::vector<std::size_t> build_finetune_batch(const MinedPair& pair,
                                              const Dataset& ds, Index p,
                                              Index k, Rng& rng);

}  // namespace xreid

#endif  // XREID_MINING_HPP_
