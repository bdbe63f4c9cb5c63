// xreid/dataset.hpp

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

#ifndef XREID_DATASET_HPP_
#define XREID_DATASET_HPP_

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xreid/matrix.hpp"

namespace xreid {

// One observation: a feature vector plus (dataset, camera, person, tracklet,
// time) metadata. Images without tracking are modelled as singleton tracklets
// with zero-length time intervals.
struct Sample {
  Vector features;
  std::int32_t dataset_id = 0;
  std::int32_t camera_id = 0;
  std::optional<std::int64_t> person_id;  // empty = unlabeled
  std::int64_t tracklet_id = 0;
  double time_start = 0.0;
  double time_end = 0.0;
};

// Indexed, immutable sample collection. Construction validates the
// per-tracklet invariants (one camera, one person if labeled) and builds the
// person/camera/tracklet indices; afterwards the dataset is frozen and may be
// read from many threads.
//
// Person labels are only reachable through the person_* accessors, each of
// which bumps an audit counter. The unsupervised fine-tuning path is verified
// against this counter: its mining + training window must not move it.
class Dataset {
 public:
  // Empty dataset with a known feature dimension (a feature file may carry a
  // header but no rows).
  explicit Dataset(Index feature_dim);
  explicit Dataset(std::vector<Sample> samples);

  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;
  // The audit counter is atomic, so the move operations are spelled out; a
  // move carries the counter value over.
  Dataset(Dataset&& other) noexcept;
  Dataset& operator=(Dataset&& other) noexcept;

  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  Index feature_dim() const { return feature_dim_; }

  // One row per sample, file order.
  const Matrix& features() const { return features_; }

  std::int32_t dataset_id_of(std::size_t i) const { return dataset_id_[i]; }
  std::int32_t camera_id_of(std::size_t i) const { return camera_id_[i]; }
  std::int64_t tracklet_id_of(std::size_t i) const { return tracklet_id_[i]; }
  double time_start_of(std::size_t i) const { return time_start_[i]; }
  double time_end_of(std::size_t i) const { return time_end_[i]; }

  // Label access (audited).
  std::optional<std::int64_t> person_of(std::size_t i) const;
  const std::vector<std::int64_t>& person_ids() const;  // first-appearance order
  const std::vector<std::size_t>& samples_of_person(std::int64_t person) const;
  std::optional<std::int64_t> tracklet_person(std::int64_t tracklet) const;

  // Label presence (not audited: presence is established at construction and
  // carries no identity information).
  bool fully_labeled() const { return labeled_count_ == size(); }
  std::size_t labeled_count() const { return labeled_count_; }

  // Total number of person_* accessor calls since construction.
  std::uint64_t label_reads() const { return label_reads_.load(); }

  const std::vector<std::int32_t>& camera_ids() const { return camera_order_; }
  const std::vector<std::size_t>& samples_of_camera(std::int32_t camera) const;

  const std::vector<std::int64_t>& tracklet_ids() const { return tracklet_order_; }
  const std::vector<std::size_t>& tracklet_samples(std::int64_t tracklet) const;
  std::int32_t tracklet_camera(std::int64_t tracklet) const;
  // Closed interval covering all of the tracklet's samples.
  std::pair<double, double> tracklet_interval(std::int64_t tracklet) const;
  // Tracklets observed by one camera, first-appearance order.
  std::vector<std::int64_t> tracklets_of_camera(std::int32_t camera) const;

  // Reconstructs the sample list (bumps the audit counter once per sample).
  std::vector<Sample> to_samples() const;

 private:
  struct Tracklet {
    std::int32_t camera = 0;
    bool labeled = false;
    std::int64_t person = 0;
    double time_start = 0.0;
    double time_end = 0.0;
    std::vector<std::size_t> rows;
  };

  void build_indices(const std::vector<Sample>& samples);
  const Tracklet& tracklet_info(std::int64_t tracklet) const;

  Index feature_dim_ = 0;
  Matrix features_;
  std::vector<std::int32_t> dataset_id_;
  std::vector<std::int32_t> camera_id_;
  std::vector<std::int64_t> person_;  // valid only where labeled_mask_
  std::vector<char> labeled_mask_;
  std::vector<std::int64_t> tracklet_id_;
  std::vector<double> time_start_;
  std::vector<double> time_end_;
  std::size_t labeled_count_ = 0;

  std::vector<std::int64_t> person_order_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> person_index_;
  std::vector<std::int32_t> camera_order_;
  std::unordered_map<std::int32_t, std::vector<std::size_t>> camera_index_;
  std::vector<std::int64_t> tracklet_order_;
  std::unordered_map<std::int64_t, Tracklet> tracklet_index_;

  mutable std::atomic<std::uint64_t> label_reads_{0};
};

// Keeps only samples whose person appears under at least two distinct
// cameras; relative order preserved. All samples must be labeled.
Dataset remove_single_camera_ids(const Dataset& ds);

// Copy with every person_id removed (for exercising unlabeled paths).
Dataset strip_person_labels(const Dataset& ds);

// Per distinct group id, the arithmetic mean of that group's rows. Output
// order is the order of first appearance.
std::pair<Matrix, std::vector<std::int64_t>> group_average(
    const Matrix& rows, std::span<const std::int64_t> group_ids);

enum class CooccScope { kSameCamera, kCrossCamera, kBoth };

// Symmetric, irreflexive index of tracklets whose closed time intervals
// overlap (ties count as overlap).
class CooccurrenceIndex {
 public:
  CooccurrenceIndex() = default;

  const std::vector<std::int64_t>& neighbors(std::int64_t tracklet) const;
  bool linked(std::int64_t a, std::int64_t b) const;
  std::size_t num_links() const { return num_links_; }  // unordered pairs

  void add_link(std::int64_t a, std::int64_t b);
  void sort_neighbor_lists();

 private:
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> links_;
  std::size_t num_links_ = 0;
};

CooccurrenceIndex build_cooccurrence(const Dataset& ds, CooccScope scope);

// Deterministic query/gallery split for cross-camera evaluation: for every
// person seen on >= 2 cameras the first tracklet goes to the query set and
// the rest to the gallery; single-camera people contribute gallery
// distractors only. Every query is guaranteed a valid cross-camera match.
std::pair<Dataset, Dataset> split_query_gallery(const Dataset& ds);

}  // namespace xreid

#endif  // XREID_DATASET_HPP_
