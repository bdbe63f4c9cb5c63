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

// Exercises the shared library through its C surface only: opaque handles,
// status codes, thread-local error text and plain-old-data configs.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xreid.h"

namespace {

struct CTempDir {
  CTempDir() {
    const auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      auto candidate =
          base / ("xreid_capi_" + std::to_string(::getpid()) + "_" +
                  std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        break;
      }
    }
  }
  ~CTempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

// A small two-camera source where every identity visits both cameras.
xreid_synth_params small_params(std::uint64_t seed) {
  xreid_synth_params p;
  xreid_synth_params_init(&p);
  p.num_datasets = 1;
  p.cameras_per_dataset = 2;
  p.ids_per_dataset = 6;
  p.tracklets_per_id_per_camera = 1;
  p.images_per_tracklet = 3;
  p.latent_dim = 3;
  p.feature_dim = 6;
  p.cross_camera_id_fraction = 1.0;
  p.seed = seed;
  return p;
}

// Zero spread: each identity collapses to one feature point, so mined
// cross-camera pairs are correct under any embedding.
xreid_synth_params separable_params(std::uint64_t seed) {
  xreid_synth_params p = small_params(seed);
  p.ids_per_dataset = 4;
  p.tracklets_per_id_per_camera = 2;
  p.images_per_tracklet = 2;
  p.camera_transform_scale = 0.0;
  p.dataset_shift_scale = 0.0;
  p.noise_sigma = 0.0;
  return p;
}

xreid_dataset* make_dataset(const xreid_synth_params& p) {
  xreid_dataset* out = nullptr;
  REQUIRE(xreid_generate_synthetic(&p, &out) == XREID_OK);
  REQUIRE(out != nullptr);
  return out;
}

xreid_model* train_tiny(const xreid_dataset* ds, std::uint64_t seed,
                        const char* log_path = nullptr) {
  xreid_train_params p;
  xreid_train_params_init(&p);
  p.ids_per_batch = 3;
  p.images_per_id = 2;
  p.epochs = 2;
  p.hidden_dim = 8;
  p.embed_dim = 4;
  p.dropout_rate = 0.3;
  p.seed = seed;
  xreid_model* model = nullptr;
  const xreid_dataset* list[1] = {ds};
  REQUIRE(xreid_train(list, 1, &p, log_path, &model) == XREID_OK);
  REQUIRE(model != nullptr);
  return model;
}

std::vector<double> embed_all(const xreid_model* m, const xreid_dataset* ds) {
  std::vector<double> out(
      static_cast<std::size_t>(xreid_dataset_size(ds)) *
      static_cast<std::size_t>(xreid_model_embed_dim(m)));
  REQUIRE(xreid_model_embed(m, ds, out.data()) == XREID_OK);
  return out;
}

}  // namespace

TEST_CASE("failures map to status codes with thread-local messages") {
  CHECK(xreid_last_error() != nullptr);

  xreid_dataset* ds = reinterpret_cast<xreid_dataset*>(0x1);
  xreid_dataset* sentinel = ds;
  CHECK(xreid_dataset_load("/nonexistent/features.txt", &ds) ==
        XREID_ERROR_IO);
  CHECK(ds == sentinel);  // out-parameters stay untouched on failure
  const std::string io_message = xreid_last_error();
  CHECK(!io_message.empty());
  CHECK(io_message.find("/nonexistent/features.txt") != std::string::npos);

  CTempDir dir;
  const std::string junk = dir.file("junk.txt");
  std::ofstream(junk) << "this is not a feature file\n";
  ds = sentinel;
  CHECK(xreid_dataset_load(junk.c_str(), &ds) == XREID_ERROR_PARSE);
  CHECK(ds == sentinel);
  CHECK(std::string(xreid_last_error()).find(":1") != std::string::npos);

  CHECK(xreid_dataset_load(nullptr, &ds) == XREID_ERROR_ARGUMENT);
  CHECK(xreid_dataset_load(junk.c_str(), nullptr) == XREID_ERROR_ARGUMENT);
  CHECK(std::string(xreid_last_error()).find("NULL") != std::string::npos);

  xreid_synth_params bad;
  xreid_synth_params_init(&bad);
  bad.ids_per_dataset = 0;
  xreid_dataset* out[3] = {nullptr, nullptr, nullptr};
  CHECK(xreid_generate_synthetic(&bad, out) == XREID_ERROR_ARGUMENT);

  // NULL handles degrade to zero instead of crashing.
  CHECK(xreid_dataset_size(nullptr) == 0);
  CHECK(xreid_dataset_feature_dim(nullptr) == 0);
  xreid_dataset_free(nullptr);
  xreid_model_free(nullptr);
}

TEST_CASE("synthetic defaults mirror the documented configuration") {
  xreid_synth_params p;
  xreid_synth_params_init(&p);
  CHECK(p.num_datasets == 3);
  CHECK(p.cameras_per_dataset == 3);
  CHECK(p.ids_per_dataset == 40);
  CHECK(p.tracklets_per_id_per_camera == 2);
  CHECK(p.images_per_tracklet == 4);
  CHECK(p.latent_dim == 8);
  CHECK(p.feature_dim == 32);
  CHECK(p.camera_transform_scale == 0.35);
  CHECK(p.dataset_shift_scale == 1.5);
  CHECK(p.noise_sigma == 0.08);
  CHECK(p.cross_camera_id_fraction == 0.75);
  CHECK(p.seed == 1);

  xreid_synth_params two = small_params(5);
  two.num_datasets = 2;
  xreid_dataset* sets[2] = {nullptr, nullptr};
  REQUIRE(xreid_generate_synthetic(&two, sets) == XREID_OK);
  for (xreid_dataset* ds : sets) {
    REQUIRE(ds != nullptr);
    CHECK(xreid_dataset_size(ds) == 6 * 2 * 1 * 3);
    CHECK(xreid_dataset_feature_dim(ds) == 6);
    CHECK(xreid_dataset_num_cameras(ds) == 2);
    CHECK(xreid_dataset_num_tracklets(ds) == 12);
    CHECK(xreid_dataset_labeled_count(ds) == xreid_dataset_size(ds));
    xreid_dataset_free(ds);
  }
}

TEST_CASE("dataset files round trip through the C surface") {
  CTempDir dir;
  xreid_dataset* ds = make_dataset(small_params(7));
  const std::string first = dir.file("a.txt");
  const std::string second = dir.file("b.txt");
  REQUIRE(xreid_dataset_save(ds, first.c_str()) == XREID_OK);

  xreid_dataset* loaded = nullptr;
  REQUIRE(xreid_dataset_load(first.c_str(), &loaded) == XREID_OK);
  CHECK(xreid_dataset_size(loaded) == xreid_dataset_size(ds));
  CHECK(xreid_dataset_feature_dim(loaded) == xreid_dataset_feature_dim(ds));
  CHECK(xreid_dataset_num_cameras(loaded) == xreid_dataset_num_cameras(ds));
  CHECK(xreid_dataset_num_tracklets(loaded) ==
        xreid_dataset_num_tracklets(ds));
  CHECK(xreid_dataset_labeled_count(loaded) ==
        xreid_dataset_labeled_count(ds));

  REQUIRE(xreid_dataset_save(loaded, second.c_str()) == XREID_OK);
  CHECK(read_file(first) == read_file(second));
  xreid_dataset_free(loaded);
  xreid_dataset_free(ds);
}

TEST_CASE("dataset transforms compose through the C surface") {
  xreid_synth_params half = small_params(9);
  half.cross_camera_id_fraction = 0.5;
  xreid_dataset* ds = make_dataset(half);

  xreid_dataset* filtered = nullptr;
  REQUIRE(xreid_dataset_filter_single_camera(ds, &filtered) == XREID_OK);
  CHECK(xreid_dataset_size(filtered) < xreid_dataset_size(ds));
  CHECK(xreid_dataset_size(filtered) == 3 * 2 * 1 * 3);  // half the ids stay

  xreid_dataset* stripped = nullptr;
  REQUIRE(xreid_dataset_strip_labels(ds, &stripped) == XREID_OK);
  CHECK(xreid_dataset_size(stripped) == xreid_dataset_size(ds));
  CHECK(xreid_dataset_labeled_count(stripped) == 0);

  xreid_dataset* full = make_dataset(small_params(9));
  xreid_dataset* query = nullptr;
  xreid_dataset* gallery = nullptr;
  REQUIRE(xreid_split_query_gallery(full, &query, &gallery) == XREID_OK);
  CHECK(xreid_dataset_size(query) > 0);
  CHECK(xreid_dataset_size(gallery) > 0);
  CHECK(xreid_dataset_size(query) + xreid_dataset_size(gallery) ==
        xreid_dataset_size(full));

  xreid_dataset_free(gallery);
  xreid_dataset_free(query);
  xreid_dataset_free(full);
  xreid_dataset_free(stripped);
  xreid_dataset_free(filtered);
  xreid_dataset_free(ds);
}

TEST_CASE("training defaults mirror the documented configuration") {
  xreid_train_params p;
  xreid_train_params_init(&p);
  CHECK(p.mode == XREID_TRAIN_SWITCH);
  CHECK(p.switch_order == XREID_SWITCH_ROUND_ROBIN);
  CHECK(p.ids_per_batch == 18);
  CHECK(p.images_per_id == 4);
  CHECK(p.margin_kind == XREID_MARGIN_SOFTPLUS);
  CHECK(p.average_anchors == 1);
  CHECK(p.epochs == 400);
  CHECK(p.lr_start == 1e-4);
  CHECK(p.lr_end == 1e-7);
  CHECK(p.lr_hold_epochs == 100);
  CHECK(p.lr_decay_until == 400);
  CHECK(p.hidden_dim == 1024);
  CHECK(p.embed_dim == 128);
  CHECK(p.dropout_rate == 0.3);
  CHECK(p.bn_momentum == 0.1);
  CHECK(p.seed == 1);
}

TEST_CASE("models train, persist and embed deterministically") {
  CTempDir dir;
  xreid_dataset* ds = make_dataset(small_params(11));
  const std::string log_path = dir.file("train.csv");
  xreid_model* model = train_tiny(ds, 21, log_path.c_str());

  const std::string log = read_file(log_path);
  CHECK(log.rfind("epoch,step,lr,loss,mode,source_dataset\n", 0) == 0);
  CHECK(count_lines(log) > 1);

  CHECK(xreid_model_input_dim(model) == 6);
  CHECK(xreid_model_hidden_dim(model) == 8);
  CHECK(xreid_model_embed_dim(model) == 4);

  const std::string ckpt = dir.file("model.ckpt");
  REQUIRE(xreid_model_save(model, ckpt.c_str()) == XREID_OK);
  xreid_model* loaded = nullptr;
  REQUIRE(xreid_model_load(ckpt.c_str(), &loaded) == XREID_OK);
  CHECK(xreid_model_input_dim(loaded) == 6);
  CHECK(xreid_model_embed_dim(loaded) == 4);

  const std::vector<double> a = embed_all(model, ds);
  const std::vector<double> b = embed_all(loaded, ds);
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);

  // Re-training with the same seed reproduces the embedding bitwise.
  xreid_model* again = train_tiny(ds, 21);
  const std::vector<double> c = embed_all(again, ds);
  CHECK(std::memcmp(a.data(), c.data(), a.size() * sizeof(double)) == 0);

  xreid_train_params p;
  xreid_train_params_init(&p);
  xreid_model* out = nullptr;
  CHECK(xreid_train(nullptr, 1, &p, nullptr, &out) == XREID_ERROR_ARGUMENT);
  const xreid_dataset* list[1] = {ds};
  CHECK(xreid_train(list, 0, &p, nullptr, &out) == XREID_ERROR_ARGUMENT);

  xreid_model_free(again);
  xreid_model_free(loaded);
  xreid_model_free(model);
  xreid_dataset_free(ds);
}

TEST_CASE("fine-tuning audits labels and reports purity through C") {
  CTempDir dir;
  xreid_dataset* target = make_dataset(separable_params(13));
  xreid_model* base = train_tiny(target, 31);

  xreid_finetune_params p;
  xreid_finetune_params_init(&p);
  CHECK(p.alpha == 0.1);
  CHECK(p.negatives_per_pair == 10);
  CHECK(p.one_to_one == 1);
  CHECK(p.coocc_scope == XREID_COOCC_BOTH);
  CHECK(p.epochs == 20);
  CHECK(p.lr_start == 1e-5);
  CHECK(p.lr_end == 1e-6);
  CHECK(p.update_bn_stats == 1);
  CHECK(p.threads == 1);

  p.alpha = 0.5;
  p.negatives_per_pair = 3;
  p.ids_per_batch = 4;
  p.images_per_id = 2;
  p.epochs = 2;
  p.seed = 9;

  const std::string log_path = dir.file("finetune.csv");
  const std::string report_path = dir.file("pairs.txt");
  xreid_model* adapted = nullptr;
  xreid_finetune_stats stats;
  REQUIRE(xreid_finetune(base, target, &p, log_path.c_str(),
                         report_path.c_str(), &adapted, &stats) == XREID_OK);
  CHECK(stats.label_reads == 0);
  CHECK(stats.num_pairs >= 1);
  CHECK(stats.mean_purity == 1.0);  // collapsed identities mine perfectly
  CHECK(xreid_model_embed_dim(adapted) == xreid_model_embed_dim(base));

  const std::string report = read_file(report_path);
  CHECK(count_lines(report) == static_cast<std::size_t>(stats.num_pairs));
  CHECK(read_file(log_path).rfind("epoch,step,lr,loss,mode,source_dataset\n",
                                  0) == 0);

  // Without labels the same adaptation runs and reports no purity.
  xreid_dataset* blind = nullptr;
  REQUIRE(xreid_dataset_strip_labels(target, &blind) == XREID_OK);
  xreid_model* adapted_blind = nullptr;
  xreid_finetune_stats blind_stats;
  REQUIRE(xreid_finetune(base, blind, &p, nullptr, nullptr, &adapted_blind,
                         &blind_stats) == XREID_OK);
  CHECK(blind_stats.mean_purity == -1.0);
  CHECK(blind_stats.label_reads == 0);
  CHECK(blind_stats.num_pairs == stats.num_pairs);
  const std::vector<double> e1 = embed_all(adapted, target);
  const std::vector<double> e2 = embed_all(adapted_blind, target);
  CHECK(std::memcmp(e1.data(), e2.data(), e1.size() * sizeof(double)) == 0);

  // Zero epochs mine pairs and pass the base model through unchanged.
  xreid_finetune_params mine_only = p;
  mine_only.epochs = 0;
  xreid_model* unchanged = nullptr;
  REQUIRE(xreid_finetune(base, target, &mine_only, nullptr, nullptr,
                         &unchanged, &stats) == XREID_OK);
  const std::vector<double> eb = embed_all(base, target);
  const std::vector<double> eu = embed_all(unchanged, target);
  CHECK(std::memcmp(eb.data(), eu.data(), eb.size() * sizeof(double)) == 0);
  CHECK(stats.num_pairs >= 1);

  CHECK(xreid_finetune(base, target, &p, nullptr, nullptr, nullptr, &stats) ==
        XREID_ERROR_ARGUMENT);

  xreid_model_free(unchanged);
  xreid_model_free(adapted_blind);
  xreid_dataset_free(blind);
  xreid_model_free(adapted);
  xreid_model_free(base);
  xreid_dataset_free(target);
}

TEST_CASE("mining without training fills the report and the stats") {
  CTempDir dir;
  xreid_dataset* target = make_dataset(separable_params(17));
  xreid_model* model = train_tiny(target, 41);

  xreid_finetune_params p;
  xreid_finetune_params_init(&p);
  p.alpha = 0.5;
  p.negatives_per_pair = 3;
  p.seed = 5;

  const std::string report_path = dir.file("mine.txt");
  xreid_finetune_stats stats;
  REQUIRE(xreid_mine(model, target, &p, report_path.c_str(), &stats) ==
          XREID_OK);
  CHECK(stats.num_pairs >= 1);
  CHECK(stats.label_reads == 0);
  CHECK(stats.mean_purity == 1.0);

  const std::string report = read_file(report_path);
  CHECK(count_lines(report) == static_cast<std::size_t>(stats.num_pairs));
  // Labeled target: every line carries the trailing truth column.
  std::istringstream lines(report);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string field;
    int n = 0;
    while (fields >> field) ++n;
    CHECK(n == 6);
    CHECK((field == "0" || field == "1"));
  }

  xreid_model_free(model);
  xreid_dataset_free(target);
}

TEST_CASE("evaluation reports protocol metrics through C") {
  CTempDir dir;
  xreid_dataset* target = make_dataset(separable_params(19));
  xreid_model* model = train_tiny(target, 51);

  xreid_dataset* query = nullptr;
  xreid_dataset* gallery = nullptr;
  REQUIRE(xreid_split_query_gallery(target, &query, &gallery) == XREID_OK);

  xreid_eval_params p;
  xreid_eval_params_init(&p);
  CHECK(p.exclusion == XREID_EXCLUDE_SAME_CAMERA_SAME_ID);
  CHECK(p.k_max == 20);
  CHECK(p.tracklet_level == 0);
  p.k_max = 5;

  const std::string report_path = dir.file("eval.txt");
  xreid_eval_result r;
  REQUIRE(xreid_evaluate(model, query, gallery, &p, report_path.c_str(),
                         &r) == XREID_OK);
  CHECK(r.num_queries > 0);
  CHECK(r.rank1 >= 0.0);
  CHECK(r.rank1 <= r.rank5);
  CHECK(r.rank5 <= 1.0);
  // Ranks past k_max report the deepest value computed.
  CHECK(r.rank10 == r.rank5);
  CHECK(r.rank20 == r.rank5);
  CHECK(r.map >= 0.0);
  CHECK(r.map <= 1.0);
  CHECK(read_file(report_path).rfind("rank1 ", 0) == 0);

  // Identities collapse to points, so the separable target ranks perfectly.
  CHECK(r.rank1 == 1.0);
  CHECK(r.map == 1.0);

  xreid_dataset* blind = nullptr;
  REQUIRE(xreid_dataset_strip_labels(query, &blind) == XREID_OK);
  CHECK(xreid_evaluate(model, blind, gallery, &p, nullptr, &r) != XREID_OK);
  CHECK(std::string(xreid_last_error()).size() > 0);

  xreid_dataset_free(blind);
  xreid_dataset_free(gallery);
  xreid_dataset_free(query);
  xreid_model_free(model);
  xreid_dataset_free(target);
}

TEST_CASE("gradient checks run behind the C surface") {
  int64_t count = -1;
  REQUIRE(xreid_gradcheck(3, 2, nullptr, 0, &count) == XREID_OK);
  CHECK(count == 8);

  std::vector<xreid_gradcheck_result> results(
      static_cast<std::size_t>(count));
  REQUIRE(xreid_gradcheck(3, 3, results.data(), count, &count) == XREID_OK);
  CHECK(count == 8);
  for (const xreid_gradcheck_result& r : results) {
    CHECK(r.name[0] != '\0');
    CHECK(r.instances == 3);
    CHECK(r.passed == 1);
    CHECK(r.max_relative_error <= r.tolerance);
    CHECK(r.max_relative_error >= 0.0);
  }

  CHECK(xreid_gradcheck(3, 2, nullptr, 0, nullptr) == XREID_ERROR_ARGUMENT);
}
