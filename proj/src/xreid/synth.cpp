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

#include "xreid/synth.hpp"

#include <cmath>
#include <string>
#include <unordered_set>
#include <utility>

#include "xreid/error.hpp"

namespace xreid {

namespace {

constexpr double kSlotLength = 1.0;
constexpr double kSlotActive = 0.8;  // rest of the slot is a gap

void validate(const SynthConfig& c) {
  auto positive = [](std::int64_t v, const char* name) {
    Require(v >= 1, ErrorCode::kArgument,
            std::string(name) + " must be >= 1, got " + std::to_string(v));
  };
  positive(c.num_datasets, "num_datasets");
  positive(c.cameras_per_dataset, "cameras_per_dataset");
  positive(c.ids_per_dataset, "ids_per_dataset");
  positive(c.tracklets_per_id_per_camera, "tracklets_per_id_per_camera");
  positive(c.images_per_tracklet, "images_per_tracklet");
  positive(c.latent_dim, "latent_dim");
  positive(c.feature_dim, "feature_dim");
  Require(c.cross_camera_id_fraction >= 0.0 && c.cross_camera_id_fraction <= 1.0,
          ErrorCode::kArgument, "cross_camera_id_fraction must be in [0, 1]");
  Require(c.noise_sigma >= 0.0, ErrorCode::kArgument,
          "noise_sigma must be >= 0");
  Require(c.camera_transform_scale >= 0.0, ErrorCode::kArgument,
          "camera_transform_scale must be >= 0");
  Require(c.dataset_shift_scale >= 0.0, ErrorCode::kArgument,
          "dataset_shift_scale must be >= 0");
}

// Element order is pinned (rows outer, columns inner) so the draw sequence
// is part of the format.
Matrix draw_matrix(Rng& rng, Index rows, Index cols, double scale) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * draw_normal(rng);
  }
  return m;
}

Vector draw_vector(Rng& rng, Index n, double scale) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * draw_normal(rng);
  return v;
}

// In-place Fisher-Yates; std::shuffle is implementation-defined, this is not.
template <typename T>
void shuffle_values(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[draw_index(rng, i)]);
  }
}

}  // namespace

std::vector<Dataset> generate_synthetic(const SynthConfig& config) {
  validate(config);
  Rng rng(config.seed);

  const Index F = static_cast<Index>(config.feature_dim);
  const Index d = static_cast<Index>(config.latent_dim);
  const double base_scale = 1.0 / std::sqrt(static_cast<double>(d));
  const Matrix a_base = draw_matrix(rng, F, d, base_scale);

  std::vector<Dataset> out;
  out.reserve(static_cast<std::size_t>(config.num_datasets));
  std::int64_t next_tracklet = 0;

  for (std::int64_t s = 0; s < config.num_datasets; ++s) {
    const Vector u_s = draw_vector(rng, F, config.dataset_shift_scale);

    const std::size_t num_cams =
        static_cast<std::size_t>(config.cameras_per_dataset);
    std::vector<Matrix> a_cam(num_cams);
    std::vector<Vector> b_cam(num_cams);
    for (std::size_t c = 0; c < num_cams; ++c) {
      a_cam[c] = a_base + config.camera_transform_scale *
                              draw_matrix(rng, F, d, base_scale);
      b_cam[c] = draw_vector(rng, F, config.camera_transform_scale);
    }

    const std::size_t num_ids = static_cast<std::size_t>(config.ids_per_dataset);
    std::vector<Vector> latent(num_ids);
    for (std::size_t i = 0; i < num_ids; ++i) {
      latent[i] = draw_vector(rng, d, 1.0);
    }

    const std::size_t num_multi = static_cast<std::size_t>(
        std::llround(config.cross_camera_id_fraction *
                     static_cast<double>(num_ids)));
    std::vector<std::size_t> id_order(num_ids);
    for (std::size_t i = 0; i < num_ids; ++i) id_order[i] = i;
    shuffle_values(id_order, rng);
    std::unordered_set<std::size_t> multi(id_order.begin(),
                                          id_order.begin() + num_multi);

    std::vector<std::vector<std::size_t>> cams_of_id(num_ids);
    for (std::size_t i = 0; i < num_ids; ++i) {
      if (multi.count(i)) {
        for (std::size_t c = 0; c < num_cams; ++c) cams_of_id[i].push_back(c);
      } else {
        cams_of_id[i].push_back(draw_index(rng, num_cams));
      }
    }

    // One time slot per tracklet of an identity, assigned in a per-identity
    // shuffled order: the identity never overlaps itself, while different
    // identities (shuffled differently) share slots across cameras.
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < num_ids; ++i) {
      std::vector<std::size_t> requests;  // camera index, one per tracklet
      for (std::size_t c : cams_of_id[i]) {
        for (std::int64_t k = 0; k < config.tracklets_per_id_per_camera; ++k) {
          requests.push_back(c);
        }
      }
      shuffle_values(requests, rng);

      for (std::size_t slot = 0; slot < requests.size(); ++slot) {
        const std::size_t c = requests[slot];
        const std::int64_t tracklet = next_tracklet++;
        const double slot_start = static_cast<double>(slot) * kSlotLength;
        const double step =
            kSlotActive / static_cast<double>(config.images_per_tracklet);
        for (std::int64_t img = 0; img < config.images_per_tracklet; ++img) {
          Sample sample;
          sample.dataset_id = static_cast<std::int32_t>(s);
          sample.camera_id = static_cast<std::int32_t>(
              s * config.cameras_per_dataset + static_cast<std::int64_t>(c));
          sample.person_id =
              s * config.ids_per_dataset + static_cast<std::int64_t>(i);
          sample.tracklet_id = tracklet;
          sample.time_start = slot_start + step * static_cast<double>(img);
          sample.time_end = slot_start + step * static_cast<double>(img + 1);
          sample.features = a_cam[c] * latent[i] + b_cam[c] + u_s +
                            draw_vector(rng, F, config.noise_sigma);
          samples.push_back(std::move(sample));
        }
      }
    }
    out.emplace_back(std::move(samples));
  }
  return out;
}

}  // namespace xreid
