// xreid/dataset.cpp

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

#include "xreid/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "xreid/error.hpp"

namespace xreid {

Dataset::Dataset(Index feature_dim) : feature_dim_(feature_dim) {
  Require(feature_dim >= 1, ErrorCode::kArgument, "feature_dim must be >= 1");
  features_.resize(0, feature_dim);
}

Dataset::Dataset(std::vector<Sample> samples) {
  Require(!samples.empty(), ErrorCode::kArgument,
          "cannot infer feature_dim from an empty sample list");
  feature_dim_ = samples.front().features.size();
  Require(feature_dim_ >= 1, ErrorCode::kArgument, "feature_dim must be >= 1");
  build_indices(samples);
}

Dataset::Dataset(Dataset&& other) noexcept
    : feature_dim_(other.feature_dim_),
      features_(std::move(other.features_)),
      dataset_id_(std::move(other.dataset_id_)),
      camera_id_(std::move(other.camera_id_)),
      person_(std::move(other.person_)),
      labeled_mask_(std::move(other.labeled_mask_)),
      tracklet_id_(std::move(other.tracklet_id_)),
      time_start_(std::move(other.time_start_)),
      time_end_(std::move(other.time_end_)),
      labeled_count_(other.labeled_count_),
      person_order_(std::move(other.person_order_)),
      person_index_(std::move(other.person_index_)),
      camera_order_(std::move(other.camera_order_)),
      camera_index_(std::move(other.camera_index_)),
      tracklet_order_(std::move(other.tracklet_order_)),
      tracklet_index_(std::move(other.tracklet_index_)),
      label_reads_(other.label_reads_.load()) {}

Dataset& Dataset::operator=(Dataset&& other) noexcept {
  if (this == &other) return *this;
  feature_dim_ = other.feature_dim_;
  features_ = std::move(other.features_);
  dataset_id_ = std::move(other.dataset_id_);
  camera_id_ = std::move(other.camera_id_);
  person_ = std::move(other.person_);
  labeled_mask_ = std::move(other.labeled_mask_);
  tracklet_id_ = std::move(other.tracklet_id_);
  time_start_ = std::move(other.time_start_);
  time_end_ = std::move(other.time_end_);
  labeled_count_ = other.labeled_count_;
  person_order_ = std::move(other.person_order_);
  person_index_ = std::move(other.person_index_);
  camera_order_ = std::move(other.camera_order_);
  camera_index_ = std::move(other.camera_index_);
  tracklet_order_ = std::move(other.tracklet_order_);
  tracklet_index_ = std::move(other.tracklet_index_);
  label_reads_.store(other.label_reads_.load());
  return *this;
}

void Dataset::build_indices(const std::vector<Sample>& samples) {
  const std::size_t n = samples.size();
  features_.resize(static_cast<Index>(n), feature_dim_);
  dataset_id_.resize(n);
  camera_id_.resize(n);
  person_.resize(n);
  labeled_mask_.resize(n);
  tracklet_id_.resize(n);
  time_start_.resize(n);
  time_end_.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = samples[i];
    Require(s.features.size() == feature_dim_, ErrorCode::kArgument,
            "sample " + std::to_string(i) + ": feature length " +
                std::to_string(s.features.size()) + " != " +
                std::to_string(feature_dim_));
    Require(s.features.allFinite(), ErrorCode::kNumeric,
            "sample " + std::to_string(i) + " has non-finite features");
    Require(s.time_start <= s.time_end, ErrorCode::kArgument,
            "sample " + std::to_string(i) + ": time_start > time_end");

    features_.row(static_cast<Index>(i)) = s.features;
    dataset_id_[i] = s.dataset_id;
    camera_id_[i] = s.camera_id;
    labeled_mask_[i] = s.person_id.has_value() ? 1 : 0;
    person_[i] = s.person_id.value_or(0);
    if (s.person_id) ++labeled_count_;
    tracklet_id_[i] = s.tracklet_id;
    time_start_[i] = s.time_start;
    time_end_[i] = s.time_end;

    if (s.person_id) {
      auto [it, inserted] = person_index_.try_emplace(*s.person_id);
      if (inserted) person_order_.push_back(*s.person_id);
      it->second.push_back(i);
    }
    {
      auto [it, inserted] = camera_index_.try_emplace(s.camera_id);
      if (inserted) camera_order_.push_back(s.camera_id);
      it->second.push_back(i);
    }
    auto [it, inserted] = tracklet_index_.try_emplace(s.tracklet_id);
    Tracklet& t = it->second;
    if (inserted) {
      tracklet_order_.push_back(s.tracklet_id);
      t.camera = s.camera_id;
      t.time_start = s.time_start;
      t.time_end = s.time_end;
    } else {
      Require(t.camera == s.camera_id, ErrorCode::kArgument,
              "tracklet " + std::to_string(s.tracklet_id) +
                  " spans more than one camera");
      t.time_start = std::min(t.time_start, s.time_start);
      t.time_end = std::max(t.time_end, s.time_end);
    }
    if (s.person_id) {
      if (t.labeled) {
        Require(t.person == *s.person_id, ErrorCode::kArgument,
                "tracklet " + std::to_string(s.tracklet_id) +
                    " carries two different person ids");
      } else {
        t.labeled = true;
        t.person = *s.person_id;
      }
    }
    t.rows.push_back(i);
  }
}

std::optional<std::int64_t> Dataset::person_of(std::size_t i) const {
  label_reads_.fetch_add(1, std::memory_order_relaxed);
  if (!labeled_mask_[i]) return std::nullopt;
  return person_[i];
}

const std::vector<std::int64_t>& Dataset::person_ids() const {
  label_reads_.fetch_add(1, std::memory_order_relaxed);
  return person_order_;
}

const std::vector<std::size_t>& Dataset::samples_of_person(
    std::int64_t person) const {
  label_reads_.fetch_add(1, std::memory_order_relaxed);
  auto it = person_index_.find(person);
  Require(it != person_index_.end(), ErrorCode::kArgument,
          "unknown person id " + std::to_string(person));
  return it->second;
}

std::optional<std::int64_t> Dataset::tracklet_person(
    std::int64_t tracklet) const {
  label_reads_.fetch_add(1, std::memory_order_relaxed);
  const Tracklet& t = tracklet_info(tracklet);
  if (!t.labeled) return std::nullopt;
  return t.person;
}

const std::vector<std::size_t>& Dataset::samples_of_camera(
    std::int32_t camera) const {
  auto it = camera_index_.find(camera);
  Require(it != camera_index_.end(), ErrorCode::kArgument,
          "unknown camera id " + std::to_string(camera));
  return it->second;
}

const Dataset::Tracklet& Dataset::tracklet_info(std::int64_t tracklet) const {
  auto it = tracklet_index_.find(tracklet);
  Require(it != tracklet_index_.end(), ErrorCode::kArgument,
          "unknown tracklet id " + std::to_string(tracklet));
  return it->second;
}

const std::vector<std::size_t>& Dataset::tracklet_samples(
    std::int64_t tracklet) const {
  return tracklet_info(tracklet).rows;
}

std::int32_t Dataset::tracklet_camera(std::int64_t tracklet) const {
  return tracklet_info(tracklet).camera;
}

std::pair<double, double> Dataset::tracklet_interval(
    std::int64_t tracklet) const {
  const Tracklet& t = tracklet_info(tracklet);
  return {t.time_start, t.time_end};
}

std::vector<std::int64_t> Dataset::tracklets_of_camera(
    std::int32_t camera) const {
  std::vector<std::int64_t> out;
  for (std::int64_t t : tracklet_order_) {
    if (tracklet_info(t).camera == camera) out.push_back(t);
  }
  return out;
}

std::vector<Sample> Dataset::to_samples() const {
  std::vector<Sample> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    Sample& s = out[i];
    s.features = features_.row(static_cast<Index>(i));
    s.dataset_id = dataset_id_[i];
    s.camera_id = camera_id_[i];
    s.person_id = person_of(i);
    s.tracklet_id = tracklet_id_[i];
    s.time_start = time_start_[i];
    s.time_end = time_end_[i];
  }
  return out;
}

Dataset remove_single_camera_ids(const Dataset& ds) {
  Require(ds.fully_labeled(), ErrorCode::kArgument,
          "remove_single_camera_ids requires a fully labeled dataset");
  std::unordered_map<std::int64_t, std::unordered_set<std::int32_t>> cams;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    cams[*ds.person_of(i)].insert(ds.camera_id_of(i));
  }
  std::vector<Sample> kept;
  auto all = ds.to_samples();
  for (auto& s : all) {
    if (cams[*s.person_id].size() >= 2) kept.push_back(std::move(s));
  }
  if (kept.empty()) return Dataset(ds.feature_dim());
  return Dataset(std::move(kept));
}

Dataset strip_person_labels(const Dataset& ds) {
  Require(ds.size() > 0, ErrorCode::kArgument, "empty dataset");
  auto samples = ds.to_samples();
  for (Sample& s : samples) s.person_id.reset();
  return Dataset(std::move(samples));
}

std::pair<Matrix, std::vector<std::int64_t>> group_average(
    const Matrix& rows, std::span<const std::int64_t> group_ids) {
  Require(rows.rows() >= 1, ErrorCode::kArgument, "group_average: no rows");
  Require(static_cast<std::size_t>(rows.rows()) == group_ids.size(),
          ErrorCode::kArgument, "group_average: one group id per row required");

  std::vector<std::int64_t> order;
  std::unordered_map<std::int64_t, std::size_t> slot;
  for (std::int64_t g : group_ids) {
    if (slot.try_emplace(g, order.size()).second) order.push_back(g);
  }

  Matrix sums = Matrix::Zero(static_cast<Index>(order.size()), rows.cols());
  std::vector<std::size_t> counts(order.size(), 0);
  for (Index i = 0; i < rows.rows(); ++i) {
    const std::size_t s = slot[group_ids[static_cast<std::size_t>(i)]];
    sums.row(static_cast<Index>(s)) += rows.row(i);
    ++counts[s];
  }
  for (std::size_t s = 0; s < order.size(); ++s) {
    sums.row(static_cast<Index>(s)) /= static_cast<double>(counts[s]);
  }
  return {std::move(sums), std::move(order)};
}

const std::vector<std::int64_t>& CooccurrenceIndex::neighbors(
    std::int64_t tracklet) const {
  static const std::vector<std::int64_t> kEmpty;
  auto it = links_.find(tracklet);
  return it == links_.end() ? kEmpty : it->second;
}

bool CooccurrenceIndex::linked(std::int64_t a, std::int64_t b) const {
  const auto& n = neighbors(a);
  return std::binary_search(n.begin(), n.end(), b);
}

void CooccurrenceIndex::add_link(std::int64_t a, std::int64_t b) {
  links_[a].push_back(b);
  links_[b].push_back(a);
  ++num_links_;
}

void CooccurrenceIndex::sort_neighbor_lists() {
  for (auto& [id, list] : links_) std::sort(list.begin(), list.end());
}

CooccurrenceIndex build_cooccurrence(const Dataset& ds, CooccScope scope) {
  struct Entry {
    double start, end;
    std::int64_t id;
    std::int32_t camera;
  };
  std::vector<Entry> entries;
  entries.reserve(ds.tracklet_ids().size());
  for (std::int64_t t : ds.tracklet_ids()) {
    auto [s, e] = ds.tracklet_interval(t);
    entries.push_back({s, e, t, ds.tracklet_camera(t)});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.start != b.start ? a.start < b.start : a.id < b.id;
  });

  // Sweep over start times; 'active' holds tracklets whose interval may still
  // reach the sweep point. Closed intervals: end == start counts as overlap.
  CooccurrenceIndex index;
  std::vector<const Entry*> active;
  for (const Entry& cur : entries) {
    std::erase_if(active, [&](const Entry* e) { return e->end < cur.start; });
    for (const Entry* other : active) {
      const bool same = other->camera == cur.camera;
      if (scope == CooccScope::kSameCamera && !same) continue;
      if (scope == CooccScope::kCrossCamera && same) continue;
      index.add_link(other->id, cur.id);
    }
    active.push_back(&cur);
  }
  index.sort_neighbor_lists();
  return index;
}

std::pair<Dataset, Dataset> split_query_gallery(const Dataset& ds) {
  Require(ds.fully_labeled(), ErrorCode::kArgument,
          "split_query_gallery requires a fully labeled dataset");
  Require(ds.size() > 0, ErrorCode::kArgument, "empty dataset");

  // Person -> tracklets in first-appearance order, plus camera spread.
  std::vector<std::int64_t> persons;
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> tracklets;
  std::unordered_map<std::int64_t, std::unordered_set<std::int32_t>> cams;
  for (std::int64_t t : ds.tracklet_ids()) {
    const std::int64_t p = *ds.tracklet_person(t);
    if (tracklets.try_emplace(p).first->second.empty()) persons.push_back(p);
    tracklets[p].push_back(t);
    cams[p].insert(ds.tracklet_camera(t));
  }

  std::unordered_set<std::int64_t> query_tracklets;
  for (std::int64_t p : persons) {
    if (cams[p].size() >= 2) query_tracklets.insert(tracklets[p].front());
  }
  Require(!query_tracklets.empty(), ErrorCode::kState,
          "no person appears on two cameras; cannot form a query set");

  std::vector<Sample> query, gallery;
  auto all = ds.to_samples();
  for (auto& s : all) {
    if (query_tracklets.count(s.tracklet_id)) {
      query.push_back(std::move(s));
    } else {
      gallery.push_back(std::move(s));
    }
  }
  Require(!gallery.empty(), ErrorCode::kState, "gallery split is empty");
  return {Dataset(std::move(query)), Dataset(std::move(gallery))};
}

}  // namespace xreid
