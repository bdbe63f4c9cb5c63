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

#include "xreid/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "xreid/error.hpp"
#include "xreid/losses.hpp"
#include "xreid/model.hpp"

namespace xreid {

namespace {

constexpr double kStep = 1e-5;
constexpr int kMaxDraws = 500;

double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / denom;
}

Matrix random_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = draw_normal(rng);
  }
  return m;
}

// A finite-difference comparison near a kink (hinge corner, argmax tie,
// near-zero distance) measures the kink, not the gradient. Instances where
// any relevant quantity sits within `margin` of a kink are rejected.
bool selection_is_smooth(const Matrix& e, std::span<const std::int64_t> labels,
                         const MarginMode& mode, bool group_mode, Index k) {
  const Matrix dist = pairwise_distances(e, e);
  const Index n = e.rows();
  const double margin = 1e-3;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (dist(i, j) < 1e-2) return false;
    }
  }
  const Index anchors = group_mode ? k : n;
  for (Index a = 0; a < anchors; ++a) {
    std::vector<double> pos, neg;
    for (Index i = 0; i < n; ++i) {
      if (i == a) continue;
      const bool same = group_mode ? i < k : labels[i] == labels[a];
      (same ? pos : neg).push_back(dist(a, i));
    }
    if (pos.empty() || neg.empty()) return false;
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    if (pos.size() >= 2 && pos.back() - pos[pos.size() - 2] < margin) {
      return false;
    }
    if (neg.size() >= 2 && neg[1] - neg[0] < margin) return false;
    if (mode.kind == MarginMode::Kind::kHinge &&
        std::abs(mode.margin + pos.back() - neg.front()) < margin) {
      return false;
    }
  }
  return true;
}

// Hinge corners of the exhaustive loss involve every triplet, not only the
// selected ones.
bool triplets_are_smooth(const Matrix& e, std::span<const std::int64_t> labels,
                         const MarginMode& mode) {
  const Matrix dist = pairwise_distances(e, e);
  const Index n = e.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (dist(i, j) < 1e-2) return false;
    }
  }
  if (mode.kind != MarginMode::Kind::kHinge) return true;
  for (Index a = 0; a < n; ++a) {
    for (Index p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      for (Index q = 0; q < n; ++q) {
        if (labels[q] == labels[a]) continue;
        if (std::abs(mode.margin + dist(a, p) - dist(a, q)) < 1e-3) {
          return false;
        }
      }
    }
  }
  return true;
}

using LossFn = std::function<LossResult(const Matrix&)>;

double fd_check_loss(const Matrix& e, const LossFn& loss) {
  const LossResult analytic = loss(e);
  double worst = 0.0;
  Matrix probe = e;
  for (Index i = 0; i < e.rows(); ++i) {
    for (Index j = 0; j < e.cols(); ++j) {
      probe(i, j) = e(i, j) + kStep;
      const double up = loss(probe).loss;
      probe(i, j) = e(i, j) - kStep;
      const double down = loss(probe).loss;
      probe(i, j) = e(i, j);
      const double fd = (up - down) / (2.0 * kStep);
      worst = std::max(worst, rel_err(fd, analytic.d_embed(i, j)));
    }
  }
  return worst;
}

enum class LossKind { kFullTriplet, kBatchHard, kPositiveGroup };

GradcheckSuite loss_suite(const std::string& name, LossKind kind,
                          const MarginMode& mode, std::uint64_t seed,
                          std::int64_t instances, double tolerance) {
  GradcheckSuite suite;
  suite.name = name;
  suite.instances = instances;
  suite.tolerance = tolerance;

  Rng rng(seed);
  for (std::int64_t it = 0; it < instances; ++it) {
    const Index p = 2 + static_cast<Index>(draw_index(rng, 3));
    const Index k = 2 + static_cast<Index>(draw_index(rng, 3));
    const Index n = p * k;
    const Index dim = 2 + static_cast<Index>(draw_index(rng, 3));

    std::vector<std::int64_t> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      labels[static_cast<std::size_t>(i)] = i / k;
    }

    Matrix e;
    bool smooth = false;
    for (int attempt = 0; attempt < kMaxDraws && !smooth; ++attempt) {
      e = random_matrix(rng, n, dim);
      smooth = kind == LossKind::kFullTriplet
                   ? triplets_are_smooth(e, labels, mode)
                   : selection_is_smooth(e, labels, mode,
                                         kind == LossKind::kPositiveGroup, k);
    }
    Require(smooth, ErrorCode::kState,
            "could not draw a smooth gradient-check instance");

    LossFn fn;
    switch (kind) {
      case LossKind::kFullTriplet:
        fn = [&](const Matrix& x) { return full_triplet_loss(x, labels, mode); };
        break;
      case LossKind::kBatchHard:
        fn = [&](const Matrix& x) { return batch_hard_loss(x, labels, mode); };
        break;
      case LossKind::kPositiveGroup:
        fn = [&](const Matrix& x) {
          return positive_group_batch_hard_loss(x, k, mode);
        };
        break;
    }
    suite.max_relative_error =
        std::max(suite.max_relative_error, fd_check_loss(e, fn));
  }
  suite.passed = suite.max_relative_error <= suite.tolerance;
  return suite;
}

GradcheckSuite model_suite(const std::string& name, double dropout_rate,
                           std::uint64_t seed, std::int64_t instances,
                           double tolerance) {
  GradcheckSuite suite;
  suite.name = name;
  suite.instances = instances;
  suite.tolerance = tolerance;

  Rng rng(seed);
  const Index f = 5, h = 7, m = 3, n = 6;
  for (std::int64_t it = 0; it < instances; ++it) {
    Model model;
    Matrix x;
    bool smooth = false;
    for (int attempt = 0; attempt < kMaxDraws && !smooth; ++attempt) {
      model = init_model(f, h, m, dropout_rate, 0.1, rng());
      // Nudge batch-norm off its initialized fixed point so gamma/beta
      // gradients exercise generic values.
      for (Index j = 0; j < h; ++j) {
        model.params.gamma[j] = 0.5 + draw_uniform(rng);
        model.params.beta[j] = draw_normal(rng) * 0.3;
      }
      x = random_matrix(rng, n, f);
      const Matrix pre = (x * model.params.w1).rowwise() +
                         model.params.b1.transpose();
      smooth = pre.array().abs().minCoeff() > 1e-3;
    }
    Require(smooth, ErrorCode::kState,
            "could not draw a smooth model instance");

    const Matrix upstream = random_matrix(rng, n, m);
    const std::uint64_t replay_seed = rng();

    // The dropout mask is replayed by re-seeding, so every evaluation
    // differentiates the same draw.
    auto eval = [&](Model& probe_model, const Matrix& input) {
      Rng replay(replay_seed);
      const Matrix embed = forward_train(probe_model, input, replay, nullptr);
      return embed.cwiseProduct(upstream).sum();
    };

    Model work = model;
    ForwardCache cache;
    {
      Rng replay(replay_seed);
      forward_train(work, x, replay, &cache);
    }
    Matrix d_input;
    const Gradients grads = backward(work, cache, upstream, &d_input);

    double worst = 0.0;
    auto check_tensor = [&](double* data, const double* grad, Index count) {
      for (Index idx = 0; idx < count; ++idx) {
        const double saved = data[idx];
        data[idx] = saved + kStep;
        const double up = eval(work, x);
        data[idx] = saved - kStep;
        const double down = eval(work, x);
        data[idx] = saved;
        worst = std::max(worst,
                         rel_err((up - down) / (2.0 * kStep), grad[idx]));
      }
    };
    ModelTensors& p = work.params;
    check_tensor(p.w1.data(), grads.w1.data(), p.w1.size());
    check_tensor(p.b1.data(), grads.b1.data(), p.b1.size());
    check_tensor(p.gamma.data(), grads.gamma.data(), p.gamma.size());
    check_tensor(p.beta.data(), grads.beta.data(), p.beta.size());
    check_tensor(p.w2.data(), grads.w2.data(), p.w2.size());
    check_tensor(p.b2.data(), grads.b2.data(), p.b2.size());

    Matrix probe_x = x;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < f; ++j) {
        probe_x(i, j) = x(i, j) + kStep;
        const double up = eval(work, probe_x);
        probe_x(i, j) = x(i, j) - kStep;
        const double down = eval(work, probe_x);
        probe_x(i, j) = x(i, j);
        worst = std::max(worst,
                         rel_err((up - down) / (2.0 * kStep), d_input(i, j)));
      }
    }
    suite.max_relative_error = std::max(suite.max_relative_error, worst);
  }
  suite.passed = suite.max_relative_error <= suite.tolerance;
  return suite;
}

constexpr std::int64_t kSuiteCount = 8;

}  // namespace

std::int64_t gradcheck_suite_count() { return kSuiteCount; }

std::vector<GradcheckSuite> run_gradcheck(std::uint64_t seed,
                                          std::int64_t instances) {
  Require(instances >= 1, ErrorCode::kArgument, "instances must be >= 1");
  const MarginMode soft = MarginMode::softplus();
  const MarginMode hinge = MarginMode::hinge(0.2);

  std::vector<GradcheckSuite> suites;
  suites.push_back(loss_suite("full-triplet-softplus", LossKind::kFullTriplet,
                              soft, seed + 1, instances, 1e-4));
  suites.push_back(loss_suite("full-triplet-hinge", LossKind::kFullTriplet,
                              hinge, seed + 2, instances, 1e-4));
  suites.push_back(loss_suite("batch-hard-softplus", LossKind::kBatchHard,
                              soft, seed + 3, instances, 1e-4));
  suites.push_back(loss_suite("batch-hard-hinge", LossKind::kBatchHard, hinge,
                              seed + 4, instances, 1e-4));
  suites.push_back(loss_suite("positive-group-softplus",
                              LossKind::kPositiveGroup, soft, seed + 5,
                              instances, 1e-4));
  suites.push_back(loss_suite("positive-group-hinge",
                              LossKind::kPositiveGroup, hinge, seed + 6,
                              instances, 1e-4));
  suites.push_back(
      model_suite("model-backward", 0.0, seed + 7, instances, 1e-3));
  suites.push_back(model_suite("model-backward-dropout", 0.5, seed + 8,
                               instances, 1e-3));
  Require(static_cast<std::int64_t>(suites.size()) == kSuiteCount,
          ErrorCode::kState, "suite count out of sync");
  return suites;
}

}  // namespace xreid
