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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dflute/types.hpp"

namespace dflute {

/// One premise/hypothesis record. Text fields are stored verbatim.
struct Example {
  std::string id;
  std::string premise;
  std::string hypothesis;
  std::optional<Label> gold_label;
  std::vector<std::string> gold_explanations;
  std::optional<FigType> fig_type;

  bool labeled() const { return gold_label.has_value(); }

  friend bool operator==(const Example&, const Example&) = default;
};

struct DatasetSplit {
  std::vector<Example> train;
  std::vector<Example> validation;
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

/// Checks the per-record invariants; throws DataError naming the id.
void validate_example(const Example& example);

/// Reads a JSONL dataset. Blank lines are skipped. Records without an "id"
/// field get the 1-based line number as their id. Errors name the line.
std::vector<Example> load_dataset(const std::filesystem::path& path,
                                  bool require_labels);

/// Parses one JSONL record. `line_no` is used for the fallback id only.
Example parse_example_record(const std::string& line, std::size_t line_no);
std::string serialize_example(const Example& example);

void write_dataset(std::span<const Example> examples,
                   const std::filesystem::path& path);

/// Deterministic split. Indices 0..N-1 are shuffled by Fisher-Yates driven by
/// SplitMix64(seed), walking i from N-1 down to 1 and swapping with
/// j = next() % (i + 1). The first floor(ratio * N) shuffled indices form the
/// training part; both parts are then restored to input order.
DatasetSplit split_dataset(std::span<const Example> examples, double ratio,
                           std::uint64_t seed);

}  // namespace dflute
