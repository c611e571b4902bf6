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

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "dflute/types.hpp"

namespace dflute {

enum class Side { Premise, Hypothesis };

/// Scene elaborations for one example, keyed by (side, dimension).
class ElaborationSet {
 public:
  ElaborationSet() = default;
  explicit ElaborationSet(std::string example_id)
      : example_id_(std::move(example_id)) {}

  const std::string& example_id() const { return example_id_; }

  /// Throws DataError on empty text or a duplicate key.
  void add(Side side, DreamDimension dim, std::string text);
  const std::string* find(Side side, DreamDimension dim) const;
  bool covers(DreamDimension dim) const;
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const ElaborationSet&,
                         const ElaborationSet&) = default;

 private:
  std::string example_id_;
  std::map<std::pair<Side, DreamDimension>, std::string> entries_;
};

}  // namespace dflute
