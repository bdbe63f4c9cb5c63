// xreid/io.hpp

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

#ifndef XREID_IO_HPP_
#define XREID_IO_HPP_

#include <string>

#include "xreid/dataset.hpp"

namespace xreid {

// Plain-text feature file.
//   line 1:  REIDFEAT 1 F=<int>
//   rows:    <dataset_id> <camera_id> <person_id|-> <tracklet_id>
//            <t_start> <t_end> <f_1> ... <f_F>
// UTF-8, '\n' line endings, '-' marks an unlabeled person. Floats are written
// with 17 significant digits so that save -> load is the identity.
Dataset load_features(const std::string& path);
void save_features(const Dataset& ds, const std::string& path);

}  // namespace xreid

#endif  // XREID_IO_HPP_
