// xreid/gradcheck.hpp

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

#ifndef XREID_GRADCHECK_HPP_
#define XREID_GRADCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace xreid {

// Analytic gradients validated against central finite differences
// (step 1e-5, 64-bit). Instances are drawn away from the non-smooth points
// (hinge corners, ReLU kinks, hardest-pair ties) where the comparison is
// meaningless.
struct GradcheckSuite {
  std::string name;
  std::int64_t instances = 0;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Number of suites run_gradcheck returns, known without running them.
std::int64_t gradcheck_suite_count();

// Runs all suites (exhaustive triplet loss, batch-hard, positive-group
// batch-hard, full model backward) with `instances` random instances each.
std::vector<GradcheckSuite> run_gradcheck(std::uint64_t seed,
                                          std::int64_t instances);

}  // namespace xreid

#endif  // XREID_GRADCHECK_HPP_
