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

#include "xreid/mining.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "xreid/error.hpp"
#include "xreid/losses.hpp"

namespace xreid {

Index TrackletEmbeddings::row_of(std::int64_t tracklet) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == tracklet) return static_cast<Index>(i);
  }
  Raise(ErrorCode::kArgument,
        "tracklet " + std::to_string(tracklet) + " has no embedding row");
}

TrackletEmbeddings compute_tracklet_embeddings(const Model& model,
                                               const Dataset& ds) {
  Require(model.mode == Mode::kEval, ErrorCode::kState,
          "tracklet embeddings need an EVAL-mode model");
  Require(ds.size() > 0, ErrorCode::kArgument, "empty dataset");

  const Matrix per_image = forward_eval(model, ds.features());
  std::vector<std::int64_t> groups(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) groups[i] = ds.tracklet_id_of(i);

  TrackletEmbeddings out;
  auto [rows, ids] = group_average(per_image, groups);
  out.rows = std::move(rows);
  out.ids = std::move(ids);
  return out;
}

std::int64_t compute_np(std::int64_t n1, std::int64_t n2, double alpha) {
  Require(n1 >= 0 && n2 >= 0, ErrorCode::kArgument, "negative tracklet count");
  Require(alpha > 0.0 && alpha <= 1.0, ErrorCode::kArgument,
          "alpha must be in (0, 1]");
  const std::int64_t lower = std::min(n1, n2);
  if (lower == 0) return 0;
  // The epsilon absorbs cases like 0.1 * 30 = 2.9999... before the floor.
  const auto np = static_cast<std::int64_t>(
      std::floor(alpha * static_cast<double>(lower) + 1e-9));
  return std::max<std::int64_t>(np, 1);
}

std::vector<ScoredPair> mine_positive_pairs(const Matrix& e1, const Matrix& e2,
                                            std::int64_t num_pairs,
                                            bool one_to_one) {
  Require(e1.cols() == e2.cols(), ErrorCode::kArgument,
          "embedding dimension mismatch");
  Require(num_pairs >= 0, ErrorCode::kArgument, "negative pair count");
  // One-to-one matching caps at the smaller side; raw selection at the
  // full matrix.
  const Index cap =
      one_to_one ? std::min(e1.rows(), e2.rows()) : e1.rows() * e2.rows();
  Require(num_pairs <= cap, ErrorCode::kArgument,
          "cannot mine " + std::to_string(num_pairs) + " pairs from " +
              std::to_string(e1.rows()) + " x " + std::to_string(e2.rows()) +
              " tracklets");
  if (num_pairs == 0) return {};

  const Matrix dist = pairwise_distances(e1, e2);
  std::vector<ScoredPair> all;
  all.reserve(static_cast<std::size_t>(dist.size()));
  for (Index i = 0; i < dist.rows(); ++i) {
    for (Index j = 0; j < dist.cols(); ++j) all.push_back({i, j, dist(i, j)});
  }
  std::sort(all.begin(), all.end(), [](const ScoredPair& x, const ScoredPair& y) {
    if (x.distance != y.distance) return x.distance < y.distance;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  std::vector<ScoredPair> selected;
  selected.reserve(static_cast<std::size_t>(num_pairs));
  if (!one_to_one) {
    selected.assign(all.begin(), all.begin() + num_pairs);
    return selected;
  }

  // Sweeping the sorted list and skipping used endpoints selects exactly the
  // same sequence as re-scanning the matrix for the global minimum after
  // every removal.
  std::vector<char> used_a(static_cast<std::size_t>(e1.rows()), 0);
  std::vector<char> used_b(static_cast<std::size_t>(e2.rows()), 0);
  for (const ScoredPair& p : all) {
    if (static_cast<std::int64_t>(selected.size()) == num_pairs) break;
    if (used_a[static_cast<std::size_t>(p.a)] ||
        used_b[static_cast<std::size_t>(p.b)]) {
      continue;
    }
    used_a[static_cast<std::size_t>(p.a)] = 1;
    used_b[static_cast<std::size_t>(p.b)] = 1;
    selected.push_back(p);
  }
  return selected;
}

namespace {

// Uniform draw of min(count, pool size) values without replacement; the
// prefix of a partial Fisher-Yates shuffle.
std::vector<std::int64_t> draw_without_replacement(
    std::vector<std::int64_t> pool, std::size_t count, Rng& rng) {
  const std::size_t take = std::min(count, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + draw_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  return pool;
}

}  // namespace

std::vector<std::int64_t> mine_negatives(
    std::int64_t tracklet_a, std::int64_t tracklet_b,
    const std::vector<std::int64_t>& pair_tracklets,
    const CooccurrenceIndex& coocc, std::int64_t count, Rng& rng) {
  Require(count >= 1, ErrorCode::kArgument, "need count >= 1");
  Require(pair_tracklets.size() >= 3, ErrorCode::kState,
          "camera pair holds fewer than 3 tracklets; no negatives exist");

  std::unordered_set<std::int64_t> in_pair_cameras(pair_tracklets.begin(),
                                                   pair_tracklets.end());
  auto excluded = [&](std::int64_t t) {
    return t == tracklet_a || t == tracklet_b;
  };

  // Candidates: co-occurring with either endpoint, on the pair's cameras.
  // Merged in sorted id order so the draw is deterministic.
  std::vector<std::int64_t> candidates;
  for (std::int64_t t : coocc.neighbors(tracklet_a)) {
    if (!excluded(t) && in_pair_cameras.count(t)) candidates.push_back(t);
  }
  for (std::int64_t t : coocc.neighbors(tracklet_b)) {
    if (!excluded(t) && in_pair_cameras.count(t)) candidates.push_back(t);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  std::vector<std::int64_t> result = draw_without_replacement(
      std::move(candidates), static_cast<std::size_t>(count), rng);

  if (static_cast<std::int64_t>(result.size()) < count) {
    // Fallback: uniform over the camera pair's remaining tracklets.
    std::unordered_set<std::int64_t> taken(result.begin(), result.end());
    std::vector<std::int64_t> rest;
    for (std::int64_t t : pair_tracklets) {
      if (!excluded(t) && !taken.count(t)) rest.push_back(t);
    }
    const std::size_t need = static_cast<std::size_t>(count) - result.size();
    for (std::int64_t t : draw_without_replacement(std::move(rest), need, rng)) {
      result.push_back(t);
    }
  }
  return result;
}

std::vector<MinedPairSet> mine_all_pairs(const Model& model,
                                         const Dataset& target,
                                         const CooccurrenceIndex& coocc,
                                         const MiningConfig& config) {
  Require(config.alpha > 0.0 && config.alpha <= 1.0, ErrorCode::kArgument,
          "alpha must be in (0, 1]");
  Require(config.negatives_per_pair >= 1, ErrorCode::kArgument,
          "negatives_per_pair must be >= 1");
  const std::vector<std::int32_t>& cameras = target.camera_ids();
  Require(cameras.size() >= 2, ErrorCode::kState,
          "mining needs at least 2 cameras");

  const TrackletEmbeddings emb = compute_tracklet_embeddings(model, target);
  std::unordered_map<std::int64_t, Index> row_of;
  for (std::size_t i = 0; i < emb.ids.size(); ++i) {
    row_of[emb.ids[i]] = static_cast<Index>(i);
  }

  struct PairTask {
    std::int32_t camera_a, camera_b;
    std::vector<std::int64_t> tracklets_a, tracklets_b;
    std::uint64_t seed;
  };
  std::vector<PairTask> tasks;
  Rng seed_rng(config.seed);
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    for (std::size_t j = i + 1; j < cameras.size(); ++j) {
      PairTask t;
      t.camera_a = cameras[i];
      t.camera_b = cameras[j];
      t.tracklets_a = target.tracklets_of_camera(cameras[i]);
      t.tracklets_b = target.tracklets_of_camera(cameras[j]);
      t.seed = seed_rng();
      tasks.push_back(std::move(t));
    }
  }

  std::vector<MinedPairSet> sets(tasks.size());
  auto run_task = [&](std::size_t k) {
    const PairTask& task = tasks[k];
    MinedPairSet& set = sets[k];
    set.camera_a = task.camera_a;
    set.camera_b = task.camera_b;
    set.n1 = task.tracklets_a.size();
    set.n2 = task.tracklets_b.size();

    auto stack = [&](const std::vector<std::int64_t>& ids) {
      Matrix m(static_cast<Index>(ids.size()), emb.rows.cols());
      for (std::size_t r = 0; r < ids.size(); ++r) {
        m.row(static_cast<Index>(r)) = emb.rows.row(row_of.at(ids[r]));
      }
      return m;
    };
    const Matrix e1 = stack(task.tracklets_a);
    const Matrix e2 = stack(task.tracklets_b);

    const std::int64_t np =
        compute_np(static_cast<std::int64_t>(set.n1),
                   static_cast<std::int64_t>(set.n2), config.alpha);
    std::vector<std::int64_t> pair_tracklets(task.tracklets_a);
    pair_tracklets.insert(pair_tracklets.end(), task.tracklets_b.begin(),
                          task.tracklets_b.end());

    Rng pair_rng(task.seed);
    for (const ScoredPair& sp :
         mine_positive_pairs(e1, e2, np, config.one_to_one)) {
      MinedPair pair;
      pair.tracklet_a = task.tracklets_a[static_cast<std::size_t>(sp.a)];
      pair.tracklet_b = task.tracklets_b[static_cast<std::size_t>(sp.b)];
      pair.distance = sp.distance;
      pair.negatives =
          mine_negatives(pair.tracklet_a, pair.tracklet_b, pair_tracklets,
                         coocc, config.negatives_per_pair, pair_rng);
      set.pairs.push_back(std::move(pair));
    }
  };

  const int threads = std::max(config.threads, 1);
  if (threads == 1 || tasks.size() <= 1) {
    for (std::size_t k = 0; k < tasks.size(); ++k) run_task(k);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next.fetch_add(1); k < tasks.size();
           k = next.fetch_add(1)) {
        run_task(k);
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), tasks.size());
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return sets;
}

double measure_purity(const MinedPairSet& set, const Dataset& ground_truth) {
  Require(!set.pairs.empty(), ErrorCode::kArgument,
          "cannot measure purity of an empty pair set");
  std::size_t correct = 0;
  for (const MinedPair& p : set.pairs) {
    const auto ya = ground_truth.tracklet_person(p.tracklet_a);
    const auto yb = ground_truth.tracklet_person(p.tracklet_b);
    Require(ya.has_value() && yb.has_value(), ErrorCode::kArgument,
            "purity needs labeled ground truth");
    if (*ya == *yb) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.pairs.size());
}

double annotate_truth(std::vector<MinedPairSet>& sets,
                      const Dataset& ground_truth) {
  Require(!sets.empty(), ErrorCode::kArgument, "no mined pair sets");
  double sum = 0.0;
  for (MinedPairSet& set : sets) {
    for (MinedPair& p : set.pairs) {
      const auto ya = ground_truth.tracklet_person(p.tracklet_a);
      const auto yb = ground_truth.tracklet_person(p.tracklet_b);
      Require(ya.has_value() && yb.has_value(), ErrorCode::kArgument,
              "truth annotation needs labeled ground truth");
      p.true_positive = (*ya == *yb);
    }
    set.purity = measure_purity(set, ground_truth);
    sum += *set.purity;
  }
  return sum / static_cast<double>(sets.size());
}

void write_pair_report(const std::vector<MinedPairSet>& sets,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) Raise(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  char buf[40];
  for (const MinedPairSet& set : sets) {
    for (const MinedPair& p : set.pairs) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.distance);
      out << set.camera_a << ' ' << set.camera_b << ' ' << p.tracklet_a << ' '
          << p.tracklet_b << ' ' << buf;
      if (p.true_positive.has_value()) {
        out << ' ' << (*p.true_positive ? 1 : 0);
      }
      out << '\n';
    }
  }
  out.flush();
  if (!out) Raise(ErrorCode::kIo, "write error on '" + path + "'");
}

std::vector<std::size_t> build_finetune_batch(const MinedPair& pair,
                                              const Dataset& ds, Index p,
                                              Index k, Rng& rng) {
  Require(p >= 2 && k >= 2, ErrorCode::kArgument, "need P >= 2 and K >= 2");
  Require(!pair.negatives.empty(), ErrorCode::kState,
          "pair has no negative tracklets");

  const std::vector<std::size_t>& imgs_a = ds.tracklet_samples(pair.tracklet_a);
  const std::vector<std::size_t>& imgs_b = ds.tracklet_samples(pair.tracklet_b);

  std::vector<std::size_t> rows;
  rows.reserve(static_cast<std::size_t>(p * k));

  // Both tracklets are guaranteed a slot; the rest of the positive group is
  // drawn from the union, then the group order is shuffled.
  rows.push_back(imgs_a[draw_index(rng, imgs_a.size())]);
  rows.push_back(imgs_b[draw_index(rng, imgs_b.size())]);
  const std::size_t union_size = imgs_a.size() + imgs_b.size();
  for (Index s = 2; s < k; ++s) {
    const std::size_t u = draw_index(rng, union_size);
    rows.push_back(u < imgs_a.size() ? imgs_a[u] : imgs_b[u - imgs_a.size()]);
  }
  for (std::size_t i = rows.size(); i > 1; --i) {
    std::swap(rows[i - 1], rows[draw_index(rng, i)]);
  }

  std::vector<std::size_t> negative_pool;
  for (std::int64_t t : pair.negatives) {
    const std::vector<std::size_t>& imgs = ds.tracklet_samples(t);
    negative_pool.insert(negative_pool.end(), imgs.begin(), imgs.end());
  }
  Require(!negative_pool.empty(), ErrorCode::kState,
          "negative tracklets contain no images");
  const Index need = (p - 1) * k;
  for (Index s = 0; s < need; ++s) {
    rows.push_back(negative_pool[draw_index(rng, negative_pool.size())]);
  }
  return rows;
}

}  // namespace xreid
