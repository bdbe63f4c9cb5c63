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

#include "xreid/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "xreid/error.hpp"

namespace xreid {

bool ModelTensors::all_finite() const {
  return w1.allFinite() && b1.allFinite() && gamma.allFinite() &&
         beta.allFinite() && w2.allFinite() && b2.allFinite();
}

void ModelTensors::set_zero() {
  w1.setZero();
  b1.setZero();
  gamma.setZero();
  beta.setZero();
  w2.setZero();
  b2.setZero();
}

Model init_model(Index input_dim, Index hidden_dim, Index embed_dim,
                 double dropout_rate, double bn_momentum, std::uint64_t seed) {
  Require(input_dim >= 1 && hidden_dim >= 1 && embed_dim >= 1,
          ErrorCode::kArgument, "model dimensions must be >= 1");
  Require(dropout_rate >= 0.0 && dropout_rate < 1.0, ErrorCode::kArgument,
          "dropout_rate must be in [0, 1)");
  Require(bn_momentum > 0.0 && bn_momentum < 1.0, ErrorCode::kArgument,
          "bn_momentum must be in (0, 1)");

  Model m;
  m.bn_momentum = bn_momentum;
  m.dropout_rate = dropout_rate;

  Rng rng(seed);
  // Row-major draw order is pinned: it is part of the seed contract.
  auto draw_layer = [&rng](Index rows, Index cols) {
    Matrix w(rows, cols);
    const double std_dev = std::sqrt(2.0 / static_cast<double>(rows));
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) w(i, j) = std_dev * draw_normal(rng);
    }
    return w;
  };
  m.params.w1 = draw_layer(input_dim, hidden_dim);
  m.params.b1 = Vector::Zero(hidden_dim);
  m.params.gamma = Vector::Ones(hidden_dim);
  m.params.beta = Vector::Zero(hidden_dim);
  m.params.w2 = draw_layer(hidden_dim, embed_dim);
  m.params.b2 = Vector::Zero(embed_dim);
  m.running_mean = Vector::Zero(hidden_dim);
  m.running_var = Vector::Ones(hidden_dim);
  return m;
}

namespace {

void check_input(const Model& model, const Matrix& x) {
  Require(x.cols() == model.input_dim(), ErrorCode::kArgument,
          "input has " + std::to_string(x.cols()) + " columns, model expects " +
              std::to_string(model.input_dim()));
  Require(x.allFinite(), ErrorCode::kNumeric, "non-finite values in input");
  Require(model.params.all_finite() && model.running_mean.allFinite() &&
              model.running_var.allFinite(),
          ErrorCode::kNumeric, "non-finite values in model parameters");
}

}  // namespace

Matrix forward_train(Model& model, const Matrix& x, Rng& rng,
                     ForwardCache* cache) {
  check_input(model, x);
  const Index n = x.rows();
  Require(n >= 2, ErrorCode::kArgument,
          "TRAIN-mode forward needs >= 2 rows for batch statistics");

  const Matrix pre_act = (x * model.params.w1).rowwise() +
                         model.params.b1.transpose();
  const Matrix hidden = pre_act.cwiseMax(0.0);

  const Vector mean = hidden.colwise().mean().transpose();
  const Matrix centered = hidden.rowwise() - mean.transpose();
  const Vector var =
      centered.array().square().matrix().colwise().sum().transpose() /
      static_cast<double>(n);
  const Vector inv_std =
      (var.array() + model.bn_epsilon).sqrt().inverse().matrix();
  const Matrix normalized = centered * inv_std.asDiagonal();

  model.running_mean =
      (1.0 - model.bn_momentum) * model.running_mean + model.bn_momentum * mean;
  model.running_var =
      (1.0 - model.bn_momentum) * model.running_var + model.bn_momentum * var;

  const Matrix scaled = (normalized * model.params.gamma.asDiagonal())
                            .rowwise() +
                        model.params.beta.transpose();

  Matrix mask;
  if (model.dropout_rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - model.dropout_rate);
    mask.resize(n, model.hidden_dim());
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < mask.cols(); ++j) {
        mask(i, j) = draw_uniform(rng) >= model.dropout_rate ? keep_scale : 0.0;
      }
    }
  } else {
    mask = Matrix::Ones(n, model.hidden_dim());
  }
  const Matrix dropped = scaled.cwiseProduct(mask);

  Matrix embed =
      (dropped * model.params.w2).rowwise() + model.params.b2.transpose();
  Require(embed.allFinite(), ErrorCode::kNumeric,
          "non-finite values in forward output");

  if (cache != nullptr) {
    cache->input = x;
    cache->pre_act = pre_act;
    cache->hidden = hidden;
    cache->batch_mean = mean;
    cache->batch_var = var;
    cache->normalized = normalized;
    cache->dropout_mask = std::move(mask);
    cache->dropped = dropped;
  }
  return embed;
}

Matrix forward_eval(const Model& model, const Matrix& x) {
  check_input(model, x);
  Require(x.rows() >= 1, ErrorCode::kArgument, "empty input batch");

  const Matrix hidden =
      ((x * model.params.w1).rowwise() + model.params.b1.transpose())
          .cwiseMax(0.0);
  const Vector inv_std =
      (model.running_var.array() + model.bn_epsilon).sqrt().inverse().matrix();
  const Matrix normalized =
      (hidden.rowwise() - model.running_mean.transpose()) *
      inv_std.asDiagonal();
  const Matrix scaled = (normalized * model.params.gamma.asDiagonal())
                            .rowwise() +
                        model.params.beta.transpose();
  Matrix embed =
      (scaled * model.params.w2).rowwise() + model.params.b2.transpose();
  Require(embed.allFinite(), ErrorCode::kNumeric,
          "non-finite values in forward output");
  return embed;
}

Matrix forward(Model& model, const Matrix& x, Rng& rng, ForwardCache* cache) {
  if (model.mode == Mode::kTrain) return forward_train(model, x, rng, cache);
  return forward_eval(model, x);
}

Gradients backward(const Model& model, const ForwardCache& cache,
                   const Matrix& d_embed, Matrix* d_input) {
  const Index n = cache.input.rows();
  Require(n >= 2, ErrorCode::kArgument, "cache does not hold a TRAIN batch");
  Require(d_embed.rows() == n && d_embed.cols() == model.embed_dim(),
          ErrorCode::kArgument, "upstream gradient shape mismatch");

  Gradients g;
  g.b2 = d_embed.colwise().sum().transpose();
  g.w2 = cache.dropped.transpose() * d_embed;

  const Matrix d_dropped = d_embed * model.params.w2.transpose();
  const Matrix d_scaled = d_dropped.cwiseProduct(cache.dropout_mask);

  g.gamma = d_scaled.cwiseProduct(cache.normalized)
                .colwise()
                .sum()
                .transpose();
  g.beta = d_scaled.colwise().sum().transpose();

  // Batch-norm backward with batch statistics (biased variance):
  // dh = inv_std/n * (n*dxhat - sum(dxhat) - xhat * sum(dxhat*xhat)).
  const Matrix d_norm = d_scaled * model.params.gamma.asDiagonal();
  const Vector sum_d = d_norm.colwise().sum().transpose();
  const Vector sum_dx =
      d_norm.cwiseProduct(cache.normalized).colwise().sum().transpose();
  const Vector inv_std =
      (cache.batch_var.array() + model.bn_epsilon).sqrt().inverse().matrix();

  Matrix d_hidden = static_cast<double>(n) * d_norm;
  d_hidden.rowwise() -= sum_d.transpose();
  d_hidden.noalias() -= cache.normalized * sum_dx.asDiagonal();
  d_hidden = d_hidden * (inv_std / static_cast<double>(n)).asDiagonal();

  const Matrix d_pre =
      d_hidden.cwiseProduct((cache.pre_act.array() > 0.0).cast<double>().matrix());

  g.w1 = cache.input.transpose() * d_pre;
  g.b1 = d_pre.colwise().sum().transpose();
  if (d_input != nullptr) *d_input = d_pre * model.params.w1.transpose();

  Require(g.all_finite(), ErrorCode::kNumeric, "non-finite gradients");
  return g;
}

namespace {

constexpr char kCheckpointMagic[] = "XREIDMODEL";
constexpr int kCheckpointVersion = 1;

void write_values(std::ofstream& out, const char* name, const double* data,
                  Index count) {
  out << name;
  char buf[40];
  for (Index i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof(buf), " %.17g", data[i]);
    out << buf;
  }
  out << '\n';
}

class CheckpointReader {
 public:
  CheckpointReader(std::ifstream& in, const std::string& path)
      : in_(in), path_(path) {}

  std::string next_line() {
    std::string line;
    ++line_no_;
    if (!std::getline(in_, line)) fail("unexpected end of file");
    return line;
  }

  void read_values(const std::string& name, double* data, Index count) {
    std::istringstream ss(next_line());
    std::string label;
    ss >> label;
    if (label != name) fail("expected '" + name + "' line, got '" + label + "'");
    for (Index i = 0; i < count; ++i) {
      if (!(ss >> data[i])) fail("too few values on '" + name + "' line");
    }
    double extra;
    if (ss >> extra) fail("too many values on '" + name + "' line");
  }

  [[noreturn]] void fail(const std::string& what) {
    Raise(ErrorCode::kParse,
          path_ + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::ifstream& in_;
  std::string path_;
  long line_no_ = 0;
};

}  // namespace

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) Raise(ErrorCode::kIo, "cannot open '" + path + "' for writing");

  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "dims " << model.input_dim() << ' ' << model.hidden_dim() << ' '
      << model.embed_dim() << '\n';
  const double hyper[3] = {model.bn_momentum, model.bn_epsilon,
                           model.dropout_rate};
  write_values(out, "hyper", hyper, 3);
  out << "mode " << (model.mode == Mode::kTrain ? "train" : "eval") << '\n';

  const ModelTensors& p = model.params;
  // Eigen stores column-major; tensors are written row-major, transposed
  // views make .data() walk rows.
  const Matrix w1t = p.w1.transpose();
  const Matrix w2t = p.w2.transpose();
  write_values(out, "w1", w1t.data(), w1t.size());
  write_values(out, "b1", p.b1.data(), p.b1.size());
  write_values(out, "gamma", p.gamma.data(), p.gamma.size());
  write_values(out, "beta", p.beta.data(), p.beta.size());
  write_values(out, "running_mean", model.running_mean.data(),
               model.running_mean.size());
  write_values(out, "running_var", model.running_var.data(),
               model.running_var.size());
  write_values(out, "w2", w2t.data(), w2t.size());
  write_values(out, "b2", p.b2.data(), p.b2.size());

  out.flush();
  if (!out) Raise(ErrorCode::kIo, "write error on '" + path + "'");
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) Raise(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  CheckpointReader reader(in, path);

  {
    std::istringstream ss(reader.next_line());
    std::string magic;
    int version = 0;
    ss >> magic >> version;
    if (magic != kCheckpointMagic) reader.fail("not a model checkpoint");
    if (version != kCheckpointVersion) {
      reader.fail("unsupported checkpoint version " + std::to_string(version));
    }
  }

  Index f = 0, h = 0, m = 0;
  {
    std::istringstream ss(reader.next_line());
    std::string label;
    ss >> label >> f >> h >> m;
    if (label != "dims" || !ss || f < 1 || h < 1 || m < 1) {
      reader.fail("bad dims line");
    }
  }

  Model model;
  double hyper[3];
  reader.read_values("hyper", hyper, 3);
  model.bn_momentum = hyper[0];
  model.bn_epsilon = hyper[1];
  model.dropout_rate = hyper[2];

  {
    std::istringstream ss(reader.next_line());
    std::string label, value;
    ss >> label >> value;
    if (label != "mode" || (value != "train" && value != "eval")) {
      reader.fail("bad mode line");
    }
    model.mode = value == "train" ? Mode::kTrain : Mode::kEval;
  }

  Matrix w1t(h, f), w2t(m, h);
  model.params.b1.resize(h);
  model.params.gamma.resize(h);
  model.params.beta.resize(h);
  model.running_mean.resize(h);
  model.running_var.resize(h);
  model.params.b2.resize(m);

  reader.read_values("w1", w1t.data(), w1t.size());
  reader.read_values("b1", model.params.b1.data(), h);
  reader.read_values("gamma", model.params.gamma.data(), h);
  reader.read_values("beta", model.params.beta.data(), h);
  reader.read_values("running_mean", model.running_mean.data(), h);
  reader.read_values("running_var", model.running_var.data(), h);
  reader.read_values("w2", w2t.data(), w2t.size());
  reader.read_values("b2", model.params.b2.data(), m);
  model.params.w1 = w1t.transpose();
  model.params.w2 = w2t.transpose();

  Require(model.params.all_finite(), ErrorCode::kNumeric,
          path + ": non-finite parameters in checkpoint");
  Require((model.running_var.array() >= 0.0).all(), ErrorCode::kNumeric,
          path + ": negative running variance in checkpoint");
  return model;
}

}  // namespace xreid
