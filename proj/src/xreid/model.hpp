// xreid/model.hpp

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

#ifndef XREID_MODEL_HPP_
#define XREID_MODEL_HPP_

#include <cstdint>
#include <string>

#include "xreid/matrix.hpp"

namespace xreid {

// The trainable tensors of the embedding head. Shared between Model,
// Gradients and the optimizer moment buffers so they stay shape-locked.
struct ModelTensors {
  Matrix w1;     // F x H
  Vector b1;     // H
  Vector gamma;  // H, batch-norm scale
  Vector beta;   // H, batch-norm shift
  Matrix w2;     // H x M
  Vector b2;     // M

  bool all_finite() const;
  void set_zero();
};

using Gradients = ModelTensors;

enum class Mode { kTrain, kEval };

// Embedding head: dense(H, ReLU) -> batch norm -> inverted dropout ->
// dense(M). Batch norm sits after the ReLU. TRAIN-mode forwards normalize
// with batch statistics (biased variance) and update the running estimates;
// EVAL-mode forwards use the running estimates and skip dropout entirely.
struct Model {
  ModelTensors params;
  Vector running_mean;  // H
  Vector running_var;   // H, biased estimate, >= 0
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;
  double dropout_rate = 0.3;
  Mode mode = Mode::kTrain;

  Index input_dim() const { return params.w1.rows(); }
  Index hidden_dim() const { return params.w1.cols(); }
  Index embed_dim() const { return params.w2.cols(); }
};

// Everything backward needs to differentiate one TRAIN-mode forward exactly,
// including the batch statistics and the dropout mask that were used.
struct ForwardCache {
  Matrix input;         // n x F
  Matrix pre_act;       // n x H, before ReLU
  Matrix hidden;        // n x H, after ReLU
  Vector batch_mean;    // H
  Vector batch_var;     // H, biased
  Matrix normalized;    // n x H, (hidden - mean) / sqrt(var + eps)
  Matrix dropout_mask;  // n x H, 0 or 1/(1-rate)
  Matrix dropped;       // n x H, mask * (gamma * normalized + beta)
};

// He-style initialization: weights N(0, 2/fan_in), biases zero, gamma 1,
// beta 0, running mean 0, running variance 1. Deterministic in the seed.
Model init_model(Index input_dim, Index hidden_dim, Index embed_dim,
                 double dropout_rate, double bn_momentum, std::uint64_t seed);

// TRAIN-mode forward; updates the model's running statistics and consumes
// rng for the dropout mask (only when dropout_rate > 0). Needs >= 2 rows.
Matrix forward_train(Model& model, const Matrix& x, Rng& rng,
                     ForwardCache* cache);

// EVAL-mode forward; pure function of (model, x), any number of rows.
Matrix forward_eval(const Model& model, const Matrix& x);

// Dispatches on model.mode. TRAIN requires a cache-producing path for
// backward; EVAL ignores rng and produces no cache.
Matrix forward(Model& model, const Matrix& x, Rng& rng,
               ForwardCache* cache = nullptr);

// Exact gradient of sum_i <d_embed_i, E_i> for a TRAIN-mode forward,
// including the flow through the batch statistics. Returns parameter
// gradients; d_input receives the input gradient when non-null.
Gradients backward(const Model& model, const ForwardCache& cache,
                   const Matrix& d_embed, Matrix* d_input = nullptr);

// Text checkpoint, versioned, 17-significant-digit floats: save -> load is
// the identity on every field including mode and running statistics.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace xreid

#endif  // XREID_MODEL_HPP_
