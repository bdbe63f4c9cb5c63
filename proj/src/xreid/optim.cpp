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

#include "xreid/optim.hpp"

#include <cmath>

#include "xreid/error.hpp"

namespace xreid {

namespace {

ModelTensors zeros_like(const ModelTensors& shapes) {
  ModelTensors t;
  t.w1 = Matrix::Zero(shapes.w1.rows(), shapes.w1.cols());
  t.b1 = Vector::Zero(shapes.b1.size());
  t.gamma = Vector::Zero(shapes.gamma.size());
  t.beta = Vector::Zero(shapes.beta.size());
  t.w2 = Matrix::Zero(shapes.w2.rows(), shapes.w2.cols());
  t.b2 = Vector::Zero(shapes.b2.size());
  return t;
}

// Applies `fn(param, grad, slot...)` to each of the six tensors.
template <typename Fn, typename... Extra>
void for_each_tensor(ModelTensors& params, const Gradients& grads, Fn&& fn,
                     Extra&... extra) {
  fn(params.w1, grads.w1, extra.w1...);
  fn(params.b1, grads.b1, extra.b1...);
  fn(params.gamma, grads.gamma, extra.gamma...);
  fn(params.beta, grads.beta, extra.beta...);
  fn(params.w2, grads.w2, extra.w2...);
  fn(params.b2, grads.b2, extra.b2...);
}

void check_shapes(const ModelTensors& params, const Gradients& grads) {
  Require(params.w1.rows() == grads.w1.rows() &&
              params.w1.cols() == grads.w1.cols() &&
              params.b1.size() == grads.b1.size() &&
              params.gamma.size() == grads.gamma.size() &&
              params.beta.size() == grads.beta.size() &&
              params.w2.rows() == grads.w2.rows() &&
              params.w2.cols() == grads.w2.cols() &&
              params.b2.size() == grads.b2.size(),
          ErrorCode::kArgument, "gradient shapes do not match parameters");
  Require(grads.all_finite(), ErrorCode::kNumeric,
          "non-finite gradient passed to optimizer");
}

}  // namespace

AdamState::AdamState(const ModelTensors& shapes)
    : first_moment(zeros_like(shapes)), second_moment(zeros_like(shapes)) {}

void adam_step(ModelTensors& params, const Gradients& grads, AdamState& state,
               double lr) {
  Require(lr > 0.0 && std::isfinite(lr), ErrorCode::kArgument,
          "learning rate must be positive and finite");
  check_shapes(params, grads);

  ++state.step;
  const double bc1 =
      1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 =
      1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = (state.beta2 * v.array() + (1.0 - state.beta2) * g.array().square())
            .matrix();
    p.array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.epsilon);
  };
  for_each_tensor(params, grads, update, state.first_moment,
                  state.second_moment);
}

RmspropState::RmspropState(const ModelTensors& shapes)
    : mean_square(zeros_like(shapes)) {}

void rmsprop_step(ModelTensors& params, const Gradients& grads,
                  RmspropState& state, double lr) {
  Require(lr > 0.0 && std::isfinite(lr), ErrorCode::kArgument,
          "learning rate must be positive and finite");
  check_shapes(params, grads);

  auto update = [&](auto& p, const auto& g, auto& s) {
    s = (state.rho * s.array() + (1.0 - state.rho) * g.array().square())
            .matrix();
    p.array() -= lr * g.array() / (s.array().sqrt() + state.epsilon);
  };
  for_each_tensor(params, grads, update, state.mean_square);
}

double LrSchedule::at(std::int64_t epoch) const {
  Require(lr0 > 0.0 && lr1 > 0.0, ErrorCode::kArgument,
          "learning rates must be positive");
  Require(epoch_hold >= 0 && epoch_hold < epoch_end, ErrorCode::kArgument,
          "need 0 <= epoch_hold < epoch_end");
  Require(epoch >= 0, ErrorCode::kArgument, "epoch must be >= 0");

  if (epoch <= epoch_hold) return lr0;
  if (epoch >= epoch_end) return lr1;
  const double t = static_cast<double>(epoch - epoch_hold) /
                   static_cast<double>(epoch_end - epoch_hold);
  return lr0 * std::pow(lr1 / lr0, t);
}

LrSchedule train_schedule() { return LrSchedule{1e-4, 1e-7, 100, 400}; }

LrSchedule finetune_schedule(std::int64_t epochs) {
  // Epoch 1 trains at lr0 and the final epoch at lr1; a single-epoch run
  // stays at lr0.
  if (epochs <= 1) return LrSchedule{1e-5, 1e-6, 1, 2};
  return LrSchedule{1e-5, 1e-6, 1, epochs};
}

}  // namespace xreid
