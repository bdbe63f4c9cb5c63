// xreid/eval.hpp

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

#ifndef XREID_EVAL_HPP_
#define XREID_EVAL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "xreid/dataset.hpp"
#include "xreid/model.hpp"

namespace xreid {

struct ProtocolConfig {
  enum class Exclusion { kSameCameraSameId, kNone };

  Index k_max = 20;
  Exclusion exclusion = Exclusion::kSameCameraSameId;
  // Rank tracklet means instead of single images.
  bool tracklet_level = false;
};

struct EvalReport {
  std::vector<double> cmc;  // k_max entries, cmc[k-1] = Rank-k accuracy
  double map = 0.0;
  std::int64_t num_queries = 0;  // queries kept (skipped ones excluded)
  std::vector<double> per_query_ap;
};

// AP over a relevance list already ordered by ascending distance:
// (1/R) * sum over relevant positions i of (relevant among first i)/i.
double average_precision(const std::vector<int>& relevance);

// Identity/camera metadata aligned with the rows of an embedding matrix.
struct RankingMeta {
  std::vector<std::int64_t> person;
  std::vector<std::int32_t> camera;
};

// The standard cross-camera protocol: per query, rank the gallery by
// ascending distance (ties by gallery index), drop same-person same-camera
// entries, skip queries left without a relevant entry. CMC counts first
// correct matches by rank; mAP averages per-query AP.
EvalReport cmc_map(const Matrix& query_emb, const RankingMeta& query_meta,
                   const Matrix& gallery_emb, const RankingMeta& gallery_meta,
                   const ProtocolConfig& protocol);

// Embeds both datasets (EVAL mode; tracklet means when protocol asks) and
// runs cmc_map. Reads person labels, so keep it outside any audit window.
EvalReport evaluate_model(const Model& model, const Dataset& query,
                          const Dataset& gallery,
                          const ProtocolConfig& protocol);

// Plain-text report: `rank1 <v>` ... `map <v>` lines. Ranks written are
// {1, 5, 10, 20} clipped to k_max.
void write_eval_report(const EvalReport& report, const std::string& path);

}  // namespace xreid

#endif  // XREID_EVAL_HPP_
