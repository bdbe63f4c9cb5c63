// xreid/sampler.hpp

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

#ifndef XREID_SAMPLER_HPP_
#define XREID_SAMPLER_HPP_

#include <cstdint>
#include <vector>

#include "xreid/dataset.hpp"

namespace xreid {

// Batches drawn from the merged dataset carry this source marker.
inline constexpr std::int32_t kMergedSource = -1;

// A P x K batch: P identities, K rows each, rows grouped by identity.
struct BatchLayout {
  std::vector<std::size_t> rows;      // indices into the source dataset
  std::vector<std::int64_t> labels;   // one per row
  Index num_ids = 0;                  // P
  Index images_per_id = 0;            // K
  std::int32_t source_dataset = kMergedSource;
};

// Draws P identities uniformly without replacement, then K images per
// identity (without replacement when the identity has >= K images, with
// replacement otherwise). Reads person labels, so it is for labeled
// pre-training data only.
BatchLayout sample_pk(const Dataset& ds, Index p, Index k, Rng& rng,
                      std::int32_t source_dataset);

// Union dataset for merge-style training. Person and tracklet ids are
// renamed to fresh consecutive ids in first-encounter order, so identical
// integer ids from different datasets never collapse into one identity.
// Sample order is the concatenation order.
Dataset merge_datasets(const std::vector<const Dataset*>& datasets);

// Round-robin dataset index sequence of length `steps`: 0,1,...,D-1,0,...
std::vector<std::size_t> switch_schedule(std::size_t num_datasets,
                                         std::size_t steps);

// Size-proportional alternative: dataset d appears close to
// steps * size_d / total times, interleaved by largest accumulated credit
// (ties to the lowest index). Deterministic.
std::vector<std::size_t> switch_schedule_proportional(
    const std::vector<std::size_t>& sizes, std::size_t steps);

// floor(total_samples / (P*K)), clamped to >= 1.
std::int64_t steps_per_epoch(const std::vector<const Dataset*>& datasets,
                             Index p, Index k);

}  // namespace xreid

#endif  // XREID_SAMPLER_HPP_
