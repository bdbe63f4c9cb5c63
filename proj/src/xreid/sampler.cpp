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

#include "xreid/sampler.hpp"

#include <string>
#include <unordered_map>
#include <utility>

#include "xreid/error.hpp"

namespace xreid {

BatchLayout sample_pk(const Dataset& ds, Index p, Index k, Rng& rng,
                      std::int32_t source_dataset) {
  Require(p >= 2 && k >= 2, ErrorCode::kArgument, "need P >= 2 and K >= 2");
  const std::vector<std::int64_t>& ids = ds.person_ids();
  Require(static_cast<Index>(ids.size()) >= p, ErrorCode::kArgument,
          "dataset has " + std::to_string(ids.size()) +
              " identities, need P = " + std::to_string(p));
  Require(ds.fully_labeled(), ErrorCode::kArgument,
          "P x K sampling needs a fully labeled dataset");

  BatchLayout batch;
  batch.num_ids = p;
  batch.images_per_id = k;
  batch.source_dataset = source_dataset;
  batch.rows.reserve(static_cast<std::size_t>(p * k));
  batch.labels.reserve(static_cast<std::size_t>(p * k));

  // Partial Fisher-Yates: the first P slots become the chosen identities.
  std::vector<std::int64_t> pool(ids);
  for (Index i = 0; i < p; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) +
        draw_index(rng, pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    const std::int64_t person = pool[static_cast<std::size_t>(i)];

    const std::vector<std::size_t>& owned = ds.samples_of_person(person);
    if (static_cast<Index>(owned.size()) >= k) {
      std::vector<std::size_t> copy(owned);
      for (Index s = 0; s < k; ++s) {
        const std::size_t t =
            static_cast<std::size_t>(s) +
            draw_index(rng, copy.size() - static_cast<std::size_t>(s));
        std::swap(copy[static_cast<std::size_t>(s)], copy[t]);
        batch.rows.push_back(copy[static_cast<std::size_t>(s)]);
        batch.labels.push_back(person);
      }
    } else {
      for (Index s = 0; s < k; ++s) {
        batch.rows.push_back(owned[draw_index(rng, owned.size())]);
        batch.labels.push_back(person);
      }
    }
  }
  return batch;
}

Dataset merge_datasets(const std::vector<const Dataset*>& datasets) {
  Require(!datasets.empty(), ErrorCode::kArgument, "no datasets to merge");
  const Index dim = datasets.front()->feature_dim();
  for (const Dataset* ds : datasets) {
    Require(ds != nullptr, ErrorCode::kArgument, "null dataset");
    Require(ds->feature_dim() == dim, ErrorCode::kArgument,
            "feature dimension mismatch across datasets");
    Require(ds->fully_labeled(), ErrorCode::kArgument,
            "merge requires fully labeled datasets");
  }

  // Fresh ids are handed out in first-encounter order; the maps reset per
  // source dataset so equal ids from different sources stay distinct.
  std::int64_t next_person = 0, next_tracklet = 0;
  std::vector<Sample> merged;
  for (const Dataset* ds : datasets) {
    std::unordered_map<std::int64_t, std::int64_t> person_map, tracklet_map;
    auto samples = ds->to_samples();
    for (Sample& s : samples) {
      auto [pit, pnew] = person_map.try_emplace(*s.person_id, next_person);
      if (pnew) ++next_person;
      s.person_id = pit->second;

      auto [tit, tnew] = tracklet_map.try_emplace(s.tracklet_id, next_tracklet);
      if (tnew) ++next_tracklet;
      s.tracklet_id = tit->second;

      merged.push_back(std::move(s));
    }
  }
  return Dataset(std::move(merged));
}

std::vector<std::size_t> switch_schedule(std::size_t num_datasets,
                                         std::size_t steps) {
  Require(num_datasets >= 1, ErrorCode::kArgument, "no datasets");
  std::vector<std::size_t> schedule(steps);
  for (std::size_t b = 0; b < steps; ++b) schedule[b] = b % num_datasets;
  return schedule;
}

std::vector<std::size_t> switch_schedule_proportional(
    const std::vector<std::size_t>& sizes, std::size_t steps) {
  Require(!sizes.empty(), ErrorCode::kArgument, "no datasets");
  std::size_t total = 0;
  for (std::size_t s : sizes) {
    Require(s >= 1, ErrorCode::kArgument, "empty dataset in schedule");
    total += s;
  }

  // Error diffusion: each step the dataset with the largest accumulated
  // credit is emitted and pays one unit back.
  std::vector<double> credit(sizes.size(), 0.0);
  std::vector<std::size_t> schedule(steps);
  for (std::size_t b = 0; b < steps; ++b) {
    std::size_t best = 0;
    for (std::size_t d = 0; d < sizes.size(); ++d) {
      credit[d] +=
          static_cast<double>(sizes[d]) / static_cast<double>(total);
      if (credit[d] > credit[best]) best = d;
    }
    schedule[b] = best;
    credit[best] -= 1.0;
  }
  return schedule;
}

std::int64_t steps_per_epoch(const std::vector<const Dataset*>& datasets,
                             Index p, Index k) {
  Require(!datasets.empty(), ErrorCode::kArgument, "no datasets");
  Require(p >= 1 && k >= 1, ErrorCode::kArgument, "need P, K >= 1");
  std::int64_t total = 0;
  for (const Dataset* ds : datasets) {
    Require(ds != nullptr, ErrorCode::kArgument, "null dataset");
    total += static_cast<std::int64_t>(ds->size());
  }
  const std::int64_t steps = total / static_cast<std::int64_t>(p * k);
  return steps >= 1 ? steps : 1;
}

}  // namespace xreid
