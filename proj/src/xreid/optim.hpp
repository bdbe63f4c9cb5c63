// xreid/optim.hpp

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

#ifndef XREID_OPTIM_HPP_
#define XREID_OPTIM_HPP_

#include <cstdint>

#include "xreid/model.hpp"

namespace xreid {

// Bias-corrected Adam over the model's trainable tensors.
struct AdamState {
  explicit AdamState(const ModelTensors& shapes);

  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  ModelTensors first_moment;
  ModelTensors second_moment;
};

// m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
// p <- p - lr * mhat / (sqrt(vhat) + eps)  with bias-corrected mhat, vhat.
// Non-finite gradients raise instead of being skipped.
void adam_step(ModelTensors& params, const Gradients& grads, AdamState& state,
               double lr);

struct RmspropState {
  explicit RmspropState(const ModelTensors& shapes);

  double rho = 0.9;
  double epsilon = 1e-8;
  ModelTensors mean_square;
};

// s <- rho s + (1-rho) g^2;  p <- p - lr * g / (sqrt(s) + eps).
void rmsprop_step(ModelTensors& params, const Gradients& grads,
                  RmspropState& state, double lr);

// Piecewise learning rate: lr0 up to and including epoch_hold, geometric
// interpolation to lr1 at epoch_end, lr1 afterwards. Constant within an
// epoch.
struct LrSchedule {
  double lr0 = 1e-4;
  double lr1 = 1e-7;
  std::int64_t epoch_hold = 100;
  std::int64_t epoch_end = 400;

  double at(std::int64_t epoch) const;
};

// 1e-4 held for 100 epochs, decayed to 1e-7 by epoch 400.
LrSchedule train_schedule();
// 1e-5 at the first epoch, decayed to 1e-6 by `epochs`.
LrSchedule finetune_schedule(std::int64_t epochs);

}  // namespace xreid

#endif  // XREID_OPTIM_HPP_
