// Copyright 2026 The dflute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dflute/elaboration_set.hpp"

#include "dflute/errors.hpp"
#include "dflute/text.hpp"

namespace dflute {

void ElaborationSet::add(Side side, DreamDimension dim, std::string text) {
  if (text::trim(text).empty()) {
    throw DataError("example " + example_id_ + ": empty elaboration for " +
                    std::string(dimension_surface(dim)));
  }
  if (!entries_.emplace(std::pair{side, dim}, std::move(text)).second) {
    throw DataError("example " + example_id_ + ": duplicate elaboration for " +
                    std::string(dimension_surface(dim)));
  }
}

const std::string* ElaborationSet::find(Side side, DreamDimension dim) const {
  auto it = entries_.find({side, dim});
  return it == entries_.end() ? nullptr : &it->second;
}

bool ElaborationSet::covers(DreamDimension dim) const {
  return find(Side::Premise, dim) != nullptr &&
         find(Side::Hypothesis, dim) != nullptr;
}

}  // namespace dflute
