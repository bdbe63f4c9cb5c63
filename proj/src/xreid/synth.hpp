// xreid/synth.hpp

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

#ifndef XREID_SYNTH_HPP_
#define XREID_SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "xreid/dataset.hpp"

namespace xreid {

// Generative model for desk-scale multi-camera benchmarks. Every identity is
// a latent point z ~ N(0, I_d); camera c renders it as
//
//   x = A_c z + b_c + u_s + eps,   eps ~ N(0, noise_sigma^2 I)
//
// where A_c = A_base + camera_transform_scale * D_c perturbs one shared base
// map, b_c is a per-camera offset (also scaled by camera_transform_scale) and
// u_s is a per-dataset shift scaled by dataset_shift_scale. Setting all three
// scales to zero collapses every image of an identity onto A_base z.
struct SynthConfig {
  std::int64_t num_datasets = 3;
  std::int64_t cameras_per_dataset = 3;
  std::int64_t ids_per_dataset = 40;
  std::int64_t tracklets_per_id_per_camera = 2;
  std::int64_t images_per_tracklet = 4;
  std::int64_t latent_dim = 8;
  std::int64_t feature_dim = 32;
  double camera_transform_scale = 0.35;
  double dataset_shift_scale = 1.5;
  double noise_sigma = 0.08;
  // Fraction of each dataset's identities placed on every camera; the rest
  // stay on a single camera. Rounded to the nearest whole count.
  double cross_camera_id_fraction = 0.75;
  std::uint64_t seed = 1;
};

// One Dataset per configured dataset, dataset_id 0..num_datasets-1. Person
// and tracklet ids are globally unique, camera ids are
// dataset * cameras_per_dataset + local camera. Tracklets of one identity
// occupy disjoint time slots (a person is in one place at a time) while
// different identities share slots, so the co-occurrence structure is
// physically consistent. Deterministic in the seed.
std::vector<Dataset> generate_synthetic(const SynthConfig& config);

}  // namespace xreid

#endif  // XREID_SYNTH_HPP_
