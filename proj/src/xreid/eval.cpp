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

#include "xreid/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "xreid/error.hpp"
#include "xreid/losses.hpp"

namespace xreid {

double average_precision(const std::vector<int>& relevance) {
  Require(!relevance.empty(), ErrorCode::kArgument, "empty relevance list");
  std::int64_t total_relevant = 0;
  for (int r : relevance) total_relevant += r != 0 ? 1 : 0;
  Require(total_relevant > 0, ErrorCode::kArgument,
          "relevance list has no relevant entry");

  double sum = 0.0;
  std::int64_t seen_relevant = 0;
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    if (relevance[i] != 0) {
      ++seen_relevant;
      sum += static_cast<double>(seen_relevant) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(total_relevant);
}

EvalReport cmc_map(const Matrix& query_emb, const RankingMeta& query_meta,
                   const Matrix& gallery_emb, const RankingMeta& gallery_meta,
                   const ProtocolConfig& protocol) {
  const Index nq = query_emb.rows();
  const Index ng = gallery_emb.rows();
  Require(protocol.k_max >= 1, ErrorCode::kArgument, "k_max must be >= 1");
  Require(nq >= 1 && ng >= 1, ErrorCode::kArgument,
          "query and gallery must be nonempty");
  Require(query_meta.person.size() == static_cast<std::size_t>(nq) &&
              query_meta.camera.size() == static_cast<std::size_t>(nq) &&
              gallery_meta.person.size() == static_cast<std::size_t>(ng) &&
              gallery_meta.camera.size() == static_cast<std::size_t>(ng),
          ErrorCode::kArgument, "metadata size mismatch");

  const Matrix dist = pairwise_distances(query_emb, gallery_emb);

  EvalReport report;
  report.cmc.assign(static_cast<std::size_t>(protocol.k_max), 0.0);

  std::vector<Index> order(static_cast<std::size_t>(ng));
  std::vector<int> relevance;
  for (Index q = 0; q < nq; ++q) {
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index x, Index y) {
      if (dist(q, x) != dist(q, y)) return dist(q, x) < dist(q, y);
      return x < y;
    });

    relevance.clear();
    std::int64_t first_match_rank = 0;  // 1-based; 0 = none
    for (Index g : order) {
      const std::size_t gi = static_cast<std::size_t>(g);
      const std::size_t qi = static_cast<std::size_t>(q);
      const bool same_person =
          gallery_meta.person[gi] == query_meta.person[qi];
      if (protocol.exclusion == ProtocolConfig::Exclusion::kSameCameraSameId &&
          same_person && gallery_meta.camera[gi] == query_meta.camera[qi]) {
        continue;
      }
      relevance.push_back(same_person ? 1 : 0);
      if (same_person && first_match_rank == 0) {
        first_match_rank = static_cast<std::int64_t>(relevance.size());
      }
    }
    if (first_match_rank == 0) continue;  // no valid match: query skipped

    ++report.num_queries;
    for (Index k = first_match_rank; k <= protocol.k_max; ++k) {
      report.cmc[static_cast<std::size_t>(k - 1)] += 1.0;
    }
    report.per_query_ap.push_back(average_precision(relevance));
  }

  Require(report.num_queries > 0, ErrorCode::kState,
          "every query was skipped; no query has a valid gallery match");
  for (double& c : report.cmc) c /= static_cast<double>(report.num_queries);
  report.map = std::accumulate(report.per_query_ap.begin(),
                               report.per_query_ap.end(), 0.0) /
               static_cast<double>(report.num_queries);
  return report;
}

namespace {

// Embeddings plus aligned metadata at the protocol's granularity.
std::pair<Matrix, RankingMeta> embed_for_ranking(const Model& model,
                                                 const Dataset& ds,
                                                 bool tracklet_level) {
  Require(ds.size() > 0, ErrorCode::kArgument, "empty dataset");
  Require(ds.fully_labeled(), ErrorCode::kArgument,
          "evaluation needs person labels");

  const Matrix per_image = forward_eval(model, ds.features());
  RankingMeta meta;
  if (!tracklet_level) {
    meta.person.reserve(ds.size());
    meta.camera.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      meta.person.push_back(*ds.person_of(i));
      meta.camera.push_back(ds.camera_id_of(i));
    }
    return {per_image, std::move(meta)};
  }

  std::vector<std::int64_t> groups(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) groups[i] = ds.tracklet_id_of(i);
  auto [rows, tracklets] = group_average(per_image, groups);
  meta.person.reserve(tracklets.size());
  meta.camera.reserve(tracklets.size());
  for (std::int64_t t : tracklets) {
    meta.person.push_back(*ds.tracklet_person(t));
    meta.camera.push_back(ds.tracklet_camera(t));
  }
  return {std::move(rows), std::move(meta)};
}

}  // namespace

EvalReport evaluate_model(const Model& model, const Dataset& query,
                          const Dataset& gallery,
                          const ProtocolConfig& protocol) {
  Require(model.mode == Mode::kEval, ErrorCode::kState,
          "evaluation needs an EVAL-mode model");
  auto [query_emb, query_meta] =
      embed_for_ranking(model, query, protocol.tracklet_level);
  auto [gallery_emb, gallery_meta] =
      embed_for_ranking(model, gallery, protocol.tracklet_level);
  return cmc_map(query_emb, query_meta, gallery_emb, gallery_meta, protocol);
}

void write_eval_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) Raise(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  char buf[40];
  const Index k_max = static_cast<Index>(report.cmc.size());
  for (Index k : {Index{1}, Index{5}, Index{10}, Index{20}}) {
    if (k > k_max) break;
    std::snprintf(buf, sizeof(buf), "%.17g",
                  report.cmc[static_cast<std::size_t>(k - 1)]);
    out << "rank" << k << ' ' << buf << '\n';
  }
  std::snprintf(buf, sizeof(buf), "%.17g", report.map);
  out << "map " << buf << '\n';
  out.flush();
  if (!out) Raise(ErrorCode::kIo, "write error on '" + path + "'");
}

}  // namespace xreid
