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

// Command-line front end. Talks to the library exclusively through the C
// interface in xreid.h. Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "xreid.h"

namespace {

namespace fs = std::filesystem;

// Raised for any failure after flag parsing succeeded (bad files, invalid
// configuration values, failed self-checks). Mapped to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(xreid_status status) {
  if (status != XREID_OK) throw DataError(xreid_last_error());
}

struct DatasetHandle {
  xreid_dataset* ptr = nullptr;

  DatasetHandle() = default;
  explicit DatasetHandle(xreid_dataset* p) : ptr(p) {}
  ~DatasetHandle() { xreid_dataset_free(ptr); }
  DatasetHandle(const DatasetHandle&) = delete;
  DatasetHandle& operator=(const DatasetHandle&) = delete;
  DatasetHandle(DatasetHandle&& other) noexcept
      : ptr(std::exchange(other.ptr, nullptr)) {}
  DatasetHandle& operator=(DatasetHandle&& other) noexcept {
    std::swap(ptr, other.ptr);
    return *this;
  }
};

struct ModelHandle {
  xreid_model* ptr = nullptr;

  ModelHandle() = default;
  explicit ModelHandle(xreid_model* p) : ptr(p) {}
  ~ModelHandle() { xreid_model_free(ptr); }
  ModelHandle(const ModelHandle&) = delete;
  ModelHandle& operator=(const ModelHandle&) = delete;
  ModelHandle(ModelHandle&& other) noexcept
      : ptr(std::exchange(other.ptr, nullptr)) {}
  ModelHandle& operator=(ModelHandle&& other) noexcept {
    std::swap(ptr, other.ptr);
    return *this;
  }
};

DatasetHandle load_dataset(const std::string& path) {
  xreid_dataset* raw = nullptr;
  check(xreid_dataset_load(path.c_str(), &raw));
  return DatasetHandle(raw);
}

ModelHandle load_model(const std::string& path) {
  xreid_model* raw = nullptr;
  check(xreid_model_load(path.c_str(), &raw));
  return ModelHandle(raw);
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

fs::path prepare_out_dir(const std::string& out) {
  const fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

/* ---- config file expansion ----------------------------------------------- */

// CLI11 reads config files only while finishing the root command, so a
// --config attached to a subcommand is silently inert. Expand the file into
// ordinary flags before parsing instead. The dialect is the one resolved.cfg
// is written in: key=value, strings quoted, vectors bracketed, booleans
// true/false. Explicit command-line flags win over file values.

std::string trim_entry(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r");
  if (from == std::string::npos) return "";
  const auto to = s.find_last_not_of(" \t\r");
  return s.substr(from, to - from + 1);
}

std::string strip_quotes(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

std::vector<std::string> split_list(const std::string& body) {
  std::vector<std::string> out;
  std::string current;
  bool quoted = false;
  for (char ch : body) {
    if (ch == '"') quoted = !quoted;
    if (ch == ',' && !quoted) {
      out.push_back(strip_quotes(trim_entry(current)));
      current.clear();
    } else {
      current += ch;
    }
  }
  if (!trim_entry(current).empty()) {
    out.push_back(strip_quotes(trim_entry(current)));
  }
  return out;
}

void expand_config_file(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return;
  std::ifstream file(path);
  if (!file) throw DataError("cannot open config file: " + path);

  const auto given = [&args](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&flag](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };

  std::vector<std::string> extra;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    const std::string entry = trim_entry(line);
    if (entry.empty() || entry[0] == '#' || entry[0] == ';') continue;
    const auto eq = entry.find('=');
    const std::string key = eq == std::string::npos ? "" : trim_entry(entry.substr(0, eq));
    if (key.empty()) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected key=value");
    }
    if (key == "config" || given(key)) continue;
    const std::string value = trim_entry(entry.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
      for (const std::string& item :
           split_list(value.substr(1, value.size() - 2))) {
        extra.push_back("--" + key);
        extra.push_back(item);
      }
    } else if (value == "true" || value == "false") {
      extra.push_back("--" + key + "=" + value);
    } else {
      extra.push_back("--" + key);
      extra.push_back(strip_quotes(value));
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

// Every run records its fully-resolved configuration (defaults included,
// command-line overrides applied) next to its outputs.
void write_resolved_config(const CLI::App* cmd, const fs::path& out_dir) {
  std::ofstream file(out_dir / "resolved.cfg", std::ios::trunc);
  if (!file) throw DataError("cannot write resolved.cfg");
  file << cmd->config_to_str(true, false);
}

void write_mining_stats(const fs::path& path,
                        const xreid_finetune_stats& stats) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw DataError("cannot write " + path.string());
  file << "pairs " << stats.num_pairs << "\n";
  file << "label_reads " << stats.label_reads << "\n";
  if (stats.mean_purity < 0.0) {
    file << "purity n/a\n";
  } else {
    file << "purity " << format_double(stats.mean_purity) << "\n";
  }
}

int32_t margin_kind_of(const std::string& name) {
  return name == "hinge" ? XREID_MARGIN_HINGE : XREID_MARGIN_SOFTPLUS;
}

int32_t coocc_scope_of(const std::string& name) {
  if (name == "same-camera") return XREID_COOCC_SAME_CAMERA;
  if (name == "cross-camera") return XREID_COOCC_CROSS_CAMERA;
  return XREID_COOCC_BOTH;
}

/* ---- synth -------------------------------------------------------------- */

struct SynthCli {
  xreid_synth_params params{};
  std::string out;
};

void setup_synth(CLI::App* cmd, SynthCli& cli) {
  xreid_synth_params_init(&cli.params);
  cmd->add_option("--out", cli.out, "output directory")->required();
  cmd->add_option("--datasets", cli.params.num_datasets,
                  "number of independent datasets");
  cmd->add_option("--cameras", cli.params.cameras_per_dataset,
                  "cameras per dataset");
  cmd->add_option("--ids", cli.params.ids_per_dataset,
                  "identities per dataset");
  cmd->add_option("--tracklets-per-id", cli.params.tracklets_per_id_per_camera,
                  "tracklets per identity per camera");
  cmd->add_option("--images-per-tracklet", cli.params.images_per_tracklet,
                  "images per tracklet");
  cmd->add_option("--latent-dim", cli.params.latent_dim,
                  "identity latent dimension");
  cmd->add_option("--feature-dim", cli.params.feature_dim,
                  "observed feature dimension");
  cmd->add_option("--camera-scale", cli.params.camera_transform_scale,
                  "per-camera transform strength");
  cmd->add_option("--dataset-shift", cli.params.dataset_shift_scale,
                  "per-dataset shift strength");
  cmd->add_option("--noise", cli.params.noise_sigma, "observation noise");
  cmd->add_option("--multi-camera-fraction",
                  cli.params.cross_camera_id_fraction,
                  "fraction of identities appearing on every camera");
  cmd->add_option("--seed", cli.params.seed, "generator seed");
}

void run_synth(const CLI::App* cmd, SynthCli& cli) {
  const fs::path out_dir = prepare_out_dir(cli.out);
  write_resolved_config(cmd, out_dir);

  if (cli.params.num_datasets < 1) throw DataError("datasets must be >= 1");
  std::vector<xreid_dataset*> raw(
      static_cast<std::size_t>(cli.params.num_datasets), nullptr);
  check(xreid_generate_synthetic(&cli.params, raw.data()));
  std::vector<DatasetHandle> datasets;
  datasets.reserve(raw.size());
  for (xreid_dataset* p : raw) datasets.emplace_back(p);

  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const std::string base = "data" + std::to_string(i);
    const xreid_dataset* ds = datasets[i].ptr;
    check(xreid_dataset_save(ds, (out_dir / (base + ".feat")).string().c_str()));

    xreid_dataset* query = nullptr;
    xreid_dataset* gallery = nullptr;
    check(xreid_split_query_gallery(ds, &query, &gallery));
    const DatasetHandle query_h(query), gallery_h(gallery);
    check(xreid_dataset_save(
        query_h.ptr, (out_dir / (base + ".query.feat")).string().c_str()));
    check(xreid_dataset_save(
        gallery_h.ptr, (out_dir / (base + ".gallery.feat")).string().c_str()));

    std::printf("%s: %lld samples, %lld cameras, query %lld / gallery %lld\n",
                base.c_str(), (long long)xreid_dataset_size(ds),
                (long long)xreid_dataset_num_cameras(ds),
                (long long)xreid_dataset_size(query_h.ptr),
                (long long)xreid_dataset_size(gallery_h.ptr));
  }
}

/* ---- train -------------------------------------------------------------- */

struct TrainCli {
  xreid_train_params params{};
  std::vector<std::string> data;
  std::string out;
  std::string mode = "bh-switch";
  std::string switch_order = "round-robin";
  std::string margin_mode = "softplus";
  bool filter_single_camera = false;
};

void setup_train(CLI::App* cmd, TrainCli& cli) {
  xreid_train_params_init(&cli.params);
  cmd->add_option("--data", cli.data, "feature files, one per dataset")
      ->required();
  cmd->add_option("--out", cli.out, "output directory")->required();
  cmd->add_option("--mode", cli.mode, "batch scheduling across datasets")
      ->check(CLI::IsMember({"bh-merge", "bh-switch"}));
  cmd->add_option("--switch-order", cli.switch_order,
                  "dataset order under bh-switch")
      ->check(CLI::IsMember({"round-robin", "proportional"}));
  cmd->add_option("--p", cli.params.ids_per_batch, "identities per batch");
  cmd->add_option("--k", cli.params.images_per_id, "images per identity");
  cmd->add_option("--margin-mode", cli.margin_mode, "triplet margin shape")
      ->check(CLI::IsMember({"softplus", "hinge"}));
  cmd->add_option("--margin", cli.params.margin, "hinge margin value");
  cmd->add_option("--average-anchors", cli.params.average_anchors,
                  "1: mean over anchors, 0: sum");
  cmd->add_option("--epochs", cli.params.epochs, "training epochs");
  cmd->add_option("--lr-start", cli.params.lr_start, "initial learning rate");
  cmd->add_option("--lr-end", cli.params.lr_end, "final learning rate");
  cmd->add_option("--lr-hold", cli.params.lr_hold_epochs,
                  "epochs at lr-start before decay");
  cmd->add_option("--lr-decay-until", cli.params.lr_decay_until,
                  "epoch at which lr-end is reached");
  cmd->add_option("--hidden-dim", cli.params.hidden_dim, "hidden layer width");
  cmd->add_option("--embed-dim", cli.params.embed_dim, "embedding dimension");
  cmd->add_option("--dropout", cli.params.dropout_rate, "dropout rate");
  cmd->add_option("--bn-momentum", cli.params.bn_momentum,
                  "batch-norm running-stat momentum");
  cmd->add_option("--seed", cli.params.seed, "training seed");
  cmd->add_flag("--filter-single-camera", cli.filter_single_camera,
                "drop identities seen by fewer than two cameras");
}

void run_train(const CLI::App* cmd, TrainCli& cli) {
  const fs::path out_dir = prepare_out_dir(cli.out);
  write_resolved_config(cmd, out_dir);

  cli.params.mode =
      cli.mode == "bh-merge" ? XREID_TRAIN_MERGE : XREID_TRAIN_SWITCH;
  cli.params.switch_order = cli.switch_order == "proportional"
                                ? XREID_SWITCH_PROPORTIONAL
                                : XREID_SWITCH_ROUND_ROBIN;
  cli.params.margin_kind = margin_kind_of(cli.margin_mode);

  std::vector<DatasetHandle> datasets;
  for (const std::string& path : cli.data) {
    DatasetHandle ds = load_dataset(path);
    if (cli.filter_single_camera) {
      DatasetHandle filtered;
      check(xreid_dataset_filter_single_camera(ds.ptr, &filtered.ptr));
      ds = std::move(filtered);
    }
    datasets.push_back(std::move(ds));
  }
  std::vector<const xreid_dataset*> list;
  list.reserve(datasets.size());
  for (const DatasetHandle& ds : datasets) list.push_back(ds.ptr);

  xreid_model* raw = nullptr;
  check(xreid_train(list.data(), static_cast<int64_t>(list.size()),
                    &cli.params, (out_dir / "train_log.csv").string().c_str(),
                    &raw));
  const ModelHandle model(raw);
  check(xreid_model_save(model.ptr, (out_dir / "model.ckpt").string().c_str()));

  std::printf("trained %s model on %zu dataset(s): %lld -> %lld -> %lld\n",
              cli.mode.c_str(), datasets.size(),
              (long long)xreid_model_input_dim(model.ptr),
              (long long)xreid_model_hidden_dim(model.ptr),
              (long long)xreid_model_embed_dim(model.ptr));
}

/* ---- finetune ------------------------------------------------------------ */

struct FinetuneCli {
  xreid_finetune_params params{};
  std::string model;
  std::string target;
  std::string stage2_target;
  std::string out;
  std::string margin_mode = "softplus";
  std::string coocc_scope = "both";
  bool strip_labels = false;
};

void setup_finetune_options(CLI::App* cmd, FinetuneCli& cli, bool training) {
  xreid_finetune_params_init(&cli.params);
  cmd->add_option("--model", cli.model, "base model checkpoint")->required();
  cmd->add_option("--target", cli.target, "target-domain feature file")
      ->required();
  cmd->add_option("--out", cli.out, "output directory")->required();
  cmd->add_option("--alpha", cli.params.alpha,
                  "mined pairs per camera pair as a fraction of min side");
  cmd->add_option("--negatives", cli.params.negatives_per_pair,
                  "negative tracklets per mined pair");
  cmd->add_option("--one-to-one", cli.params.one_to_one,
                  "1: one-to-one matching, 0: raw smallest distances");
  cmd->add_option("--coocc-scope", cli.coocc_scope,
                  "which time overlaps count as co-occurrence")
      ->check(CLI::IsMember({"both", "same-camera", "cross-camera"}));
  cmd->add_option("--seed", cli.params.seed, "seed");
  cmd->add_option("--threads", cli.params.threads, "mining parallelism");
  cmd->add_flag("--strip-labels", cli.strip_labels,
                "remove person labels from the target before running");
  if (!training) return;
  cmd->add_option("--stage2-target", cli.stage2_target,
                  "second-stage feature file (two-stage adaptation)");
  cmd->add_option("--p", cli.params.ids_per_batch, "groups per batch");
  cmd->add_option("--k", cli.params.images_per_id, "images per group");
  cmd->add_option("--margin-mode", cli.margin_mode, "triplet margin shape")
      ->check(CLI::IsMember({"softplus", "hinge"}));
  cmd->add_option("--margin", cli.params.margin, "hinge margin value");
  cmd->add_option("--average-anchors", cli.params.average_anchors,
                  "1: mean over anchors, 0: sum");
  cmd->add_option("--epochs", cli.params.epochs,
                  "fine-tuning epochs (0 mines without training)");
  cmd->add_option("--lr-start", cli.params.lr_start, "initial learning rate");
  cmd->add_option("--lr-end", cli.params.lr_end, "final learning rate");
  cmd->add_option("--update-bn", cli.params.update_bn_stats,
                  "1: keep updating batch-norm running stats, 0: freeze");
}

DatasetHandle load_target(const std::string& path, bool strip_labels) {
  DatasetHandle ds = load_dataset(path);
  if (strip_labels) {
    DatasetHandle stripped;
    check(xreid_dataset_strip_labels(ds.ptr, &stripped.ptr));
    ds = std::move(stripped);
  }
  return ds;
}

void print_mining_stats(const char* tag, const xreid_finetune_stats& stats) {
  std::printf("%s: pairs %lld, label reads %llu, purity %s\n", tag,
              (long long)stats.num_pairs,
              (unsigned long long)stats.label_reads,
              stats.mean_purity < 0.0 ? "n/a"
                                      : format_double(stats.mean_purity).c_str());
}

void run_finetune(const CLI::App* cmd, FinetuneCli& cli) {
  const fs::path out_dir = prepare_out_dir(cli.out);
  write_resolved_config(cmd, out_dir);
  cli.params.margin_kind = margin_kind_of(cli.margin_mode);
  cli.params.coocc_scope = coocc_scope_of(cli.coocc_scope);

  const ModelHandle base = load_model(cli.model);
  const DatasetHandle target = load_target(cli.target, cli.strip_labels);
  const bool two_stage = !cli.stage2_target.empty();

  const std::string log1 = two_stage ? "stage1_log.csv" : "finetune_log.csv";
  const std::string pairs1 = two_stage ? "stage1_pairs.txt" : "pairs.txt";
  const std::string stats1 =
      two_stage ? "stage1_stats.txt" : "mining_stats.txt";

  xreid_model* raw1 = nullptr;
  xreid_finetune_stats stage1_stats{};
  check(xreid_finetune(base.ptr, target.ptr, &cli.params,
                       (out_dir / log1).string().c_str(),
                       (out_dir / pairs1).string().c_str(), &raw1,
                       &stage1_stats));
  const ModelHandle stage1(raw1);
  write_mining_stats(out_dir / stats1, stage1_stats);
  print_mining_stats(two_stage ? "stage1" : "finetune", stage1_stats);

  if (!two_stage) {
    check(xreid_model_save(stage1.ptr,
                           (out_dir / "model.ckpt").string().c_str()));
    return;
  }

  check(xreid_model_save(stage1.ptr,
                         (out_dir / "stage1_model.ckpt").string().c_str()));
  const DatasetHandle stage2_target =
      load_target(cli.stage2_target, cli.strip_labels);
  xreid_model* raw2 = nullptr;
  xreid_finetune_stats stage2_stats{};
  check(xreid_finetune(stage1.ptr, stage2_target.ptr, &cli.params,
                       (out_dir / "stage2_log.csv").string().c_str(),
                       (out_dir / "stage2_pairs.txt").string().c_str(), &raw2,
                       &stage2_stats));
  const ModelHandle stage2(raw2);
  write_mining_stats(out_dir / "stage2_stats.txt", stage2_stats);
  print_mining_stats("stage2", stage2_stats);
  check(xreid_model_save(stage2.ptr,
                         (out_dir / "model.ckpt").string().c_str()));
}

/* ---- mine ---------------------------------------------------------------- */

void run_mine(const CLI::App* cmd, FinetuneCli& cli) {
  const fs::path out_dir = prepare_out_dir(cli.out);
  write_resolved_config(cmd, out_dir);
  cli.params.coocc_scope = coocc_scope_of(cli.coocc_scope);

  const ModelHandle model = load_model(cli.model);
  const DatasetHandle target = load_target(cli.target, cli.strip_labels);

  xreid_finetune_stats stats{};
  check(xreid_mine(model.ptr, target.ptr, &cli.params,
                   (out_dir / "pairs.txt").string().c_str(), &stats));
  write_mining_stats(out_dir / "mining_stats.txt", stats);
  print_mining_stats("mine", stats);
}

/* ---- eval ---------------------------------------------------------------- */

struct EvalCli {
  xreid_eval_params params{};
  std::string model;
  std::string query;
  std::string gallery;
  std::string out;
  std::string exclusion = "same-camera-same-id";
};

void setup_eval(CLI::App* cmd, EvalCli& cli) {
  xreid_eval_params_init(&cli.params);
  cmd->add_option("--model", cli.model, "model checkpoint")->required();
  cmd->add_option("--query", cli.query, "query feature file")->required();
  cmd->add_option("--gallery", cli.gallery, "gallery feature file")
      ->required();
  cmd->add_option("--out", cli.out, "output directory")->required();
  cmd->add_option("--k-max", cli.params.k_max, "largest rank reported");
  cmd->add_option("--exclusion", cli.exclusion, "gallery exclusion rule")
      ->check(CLI::IsMember({"same-camera-same-id", "none"}));
  cmd->add_option("--tracklet-level", cli.params.tracklet_level,
                  "1: rank tracklet-averaged embeddings, 0: single images");
}

void run_eval(const CLI::App* cmd, EvalCli& cli) {
  const fs::path out_dir = prepare_out_dir(cli.out);
  write_resolved_config(cmd, out_dir);
  cli.params.exclusion = cli.exclusion == "none"
                             ? XREID_EXCLUDE_NONE
                             : XREID_EXCLUDE_SAME_CAMERA_SAME_ID;

  const ModelHandle model = load_model(cli.model);
  const DatasetHandle query = load_dataset(cli.query);
  const DatasetHandle gallery = load_dataset(cli.gallery);

  xreid_eval_result result{};
  check(xreid_evaluate(model.ptr, query.ptr, gallery.ptr, &cli.params,
                       (out_dir / "eval.txt").string().c_str(), &result));
  std::printf("rank1 %s\n", format_double(result.rank1).c_str());
  std::printf("map %s\n", format_double(result.map).c_str());
  std::printf("queries %lld\n", (long long)result.num_queries);
}

/* ---- gradcheck ------------------------------------------------------------ */

struct GradcheckCli {
  uint64_t seed = 1;
  int64_t instances = 20;
  std::string out;
};

void setup_gradcheck(CLI::App* cmd, GradcheckCli& cli) {
  cmd->add_option("--out", cli.out, "output directory")->required();
  cmd->add_option("--seed", cli.seed, "instance generator seed");
  cmd->add_option("--instances", cli.instances, "random instances per suite");
}

void run_gradcheck(const CLI::App* cmd, GradcheckCli& cli) {
  const fs::path out_dir = prepare_out_dir(cli.out);
  write_resolved_config(cmd, out_dir);

  int64_t count = 0;
  check(xreid_gradcheck(cli.seed, cli.instances, nullptr, 0, &count));
  std::vector<xreid_gradcheck_result> results(static_cast<std::size_t>(count));
  check(xreid_gradcheck(cli.seed, cli.instances, results.data(), count,
                        &count));

  std::ofstream file(out_dir / "gradcheck.txt", std::ios::trunc);
  if (!file) throw DataError("cannot write gradcheck.txt");
  bool all_passed = true;
  for (const xreid_gradcheck_result& r : results) {
    const std::string line = std::string(r.name) + " instances " +
                             std::to_string(r.instances) + " max_rel_err " +
                             format_double(r.max_relative_error) +
                             " tolerance " + format_double(r.tolerance) +
                             (r.passed != 0 ? " pass" : " fail");
    file << line << "\n";
    std::printf("%s\n", line.c_str());
    all_passed = all_passed && r.passed != 0;
  }
  file << (all_passed ? "overall pass" : "overall fail") << "\n";
  std::printf("overall %s\n", all_passed ? "pass" : "fail");
  if (!all_passed) {
    throw DataError("gradient check failed; see gradcheck.txt");
  }
}

void configure_subcommand(CLI::App* cmd) {
  cmd->set_config("--config", "",
                  "flat key=value file; command-line flags win");
  cmd->allow_config_extras(CLI::config_extras_mode::error);
  // Defaults must be visible to the resolved-config echo.
  cmd->option_defaults()->always_capture_default(true);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metric-embedding learning for re-identification over "
               "pre-extracted features",
               "xreid"};
  app.require_subcommand(1);

  SynthCli synth_cli;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate synthetic multi-camera datasets");
  configure_subcommand(synth_cmd);
  setup_synth(synth_cmd, synth_cli);
  synth_cmd->callback([&] { run_synth(synth_cmd, synth_cli); });

  TrainCli train_cli;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train an embedding on labeled datasets");
  configure_subcommand(train_cmd);
  setup_train(train_cmd, train_cli);
  train_cmd->callback([&] { run_train(train_cmd, train_cli); });

  FinetuneCli finetune_cli;
  CLI::App* finetune_cmd = app.add_subcommand(
      "finetune", "adapt a model to an unlabeled target domain");
  configure_subcommand(finetune_cmd);
  setup_finetune_options(finetune_cmd, finetune_cli, true);
  finetune_cmd->callback([&] { run_finetune(finetune_cmd, finetune_cli); });

  FinetuneCli mine_cli;
  CLI::App* mine_cmd = app.add_subcommand(
      "mine", "mine presumed-positive pairs without training");
  configure_subcommand(mine_cmd);
  setup_finetune_options(mine_cmd, mine_cli, false);
  mine_cmd->callback([&] { run_mine(mine_cmd, mine_cli); });

  EvalCli eval_cli;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "rank a gallery and report CMC/mAP");
  configure_subcommand(eval_cmd);
  setup_eval(eval_cmd, eval_cli);
  eval_cmd->callback([&] { run_eval(eval_cmd, eval_cli); });

  GradcheckCli gradcheck_cli;
  CLI::App* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "verify gradients against finite differences");
  configure_subcommand(gradcheck_cmd);
  setup_gradcheck(gradcheck_cmd, gradcheck_cli);
  gradcheck_cmd->callback([&] { run_gradcheck(gradcheck_cmd, gradcheck_cli); });

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    expand_config_file(args);
    std::reverse(args.begin(), args.end());  // App::parse wants reversed args
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
