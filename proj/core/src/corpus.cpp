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

#include "dflute/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "dflute/errors.hpp"
#include "dflute/hashing.hpp"
#include "dflute/text.hpp"
#include "jsonl.hpp"

namespace dflute {
namespace {

using json = nlohmann::ordered_json;

std::string label_name(Label label) {
  return label == Label::Entailment ? "Entailment" : "Contradiction";
}

std::string required_text(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing \"") + key + "\"");
  if (!it->is_string()) {
    throw DataError(std::string("\"") + key + "\" must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

void validate_example(const Example& ex) {
  if (ex.id.empty()) throw DataError("example with empty id");
  if (text::trim(ex.premise).empty()) {
    throw DataError("example " + ex.id + ": empty premise");
  }
  if (text::trim(ex.hypothesis).empty()) {
    throw DataError("example " + ex.id + ": empty hypothesis");
  }
  if (ex.gold_label && ex.gold_explanations.empty()) {
    throw DataError("example " + ex.id + ": labeled but no explanation");
  }
}

Example parse_example_record(const std::string& line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("record is not a JSON object");

  Example ex;
  if (auto it = obj.find("id"); it != obj.end() && !it->is_null()) {
    if (it->is_string()) {
      ex.id = it->get<std::string>();
    } else if (it->is_number_integer()) {
      ex.id = std::to_string(it->get<long long>());
    } else {
      throw DataError("\"id\" must be a string or integer");
    }
  } else {
    ex.id = std::to_string(line_no);
  }
  ex.premise = required_text(obj, "premise");
  ex.hypothesis = required_text(obj, "hypothesis");

  if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError("\"label\" must be a string");
    const auto raw = it->get<std::string>();
    ex.gold_label = parse_label(raw);
    if (!ex.gold_label) throw DataError("unknown label \"" + raw + "\"");
  }
  if (auto it = obj.find("explanation"); it != obj.end() && !it->is_null()) {
    if (it->is_string()) {
      ex.gold_explanations.push_back(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& e : *it) {
        if (!e.is_string()) {
          throw DataError("\"explanation\" entries must be strings");
        }
        ex.gold_explanations.push_back(e.get<std::string>());
      }
    } else {
      throw DataError("\"explanation\" must be a string or list of strings");
    }
  }
  if (auto it = obj.find("type"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError("\"type\" must be a string");
    const auto raw = it->get<std::string>();
    ex.fig_type = parse_fig_type(raw);
    if (!ex.fig_type) throw DataError("unknown figurative type \"" + raw + "\"");
  }
  validate_example(ex);
  return ex;
}

std::string serialize_example(const Example& ex) {
  json obj;
  obj["id"] = ex.id;
  obj["premise"] = ex.premise;
  obj["hypothesis"] = ex.hypothesis;
  if (ex.gold_label) obj["label"] = label_name(*ex.gold_label);
  if (ex.gold_explanations.size() == 1) {
    obj["explanation"] = ex.gold_explanations.front();
  } else if (!ex.gold_explanations.empty()) {
    obj["explanation"] = ex.gold_explanations;
  }
  if (ex.fig_type) obj["type"] = std::string(fig_type_name(*ex.fig_type));
  try {
    return obj.dump();
  } catch (const json::exception& e) {
    throw DataError("example " + ex.id + ": " + e.what());
  }
}

std::vector<Example> load_dataset(const std::filesystem::path& path,
                                  bool require_labels) {
  std::vector<Example> out;
  std::set<std::string> seen;
  for (const auto& [line_no, text] : detail::read_lines(path)) {
    const std::string where =
        path.string() + ":" + std::to_string(line_no) + ": ";
    Example ex;
    try {
      ex = parse_example_record(text, line_no);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    if (require_labels && !ex.labeled()) {
      throw DataError(where + "record " + ex.id + " has no label");
    }
    if (!seen.insert(ex.id).second) {
      throw DataError(where + "duplicate id " + ex.id);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

void write_dataset(std::span<const Example> examples,
                   const std::filesystem::path& path) {
  std::vector<std::string> lines;
  lines.reserve(examples.size());
  for (const auto& ex : examples) {
    validate_example(ex);
    lines.push_back(serialize_example(ex));
  }
  detail::write_lines_atomic(path, lines);
}

DatasetSplit split_dataset(std::span<const Example> examples, double ratio,
                           std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw UsageError("split ratio must be in (0, 1), got " +
                     std::to_string(ratio));
  }
  const std::size_t n = examples.size();
  if (n < 2) throw UsageError("need at least 2 examples to split");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.next() % (i + 1));
    std::swap(order[i], order[j]);
  }
  const auto n_train =
      static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));

  std::vector<bool> in_train(n, false);
  for (std::size_t k = 0; k < n_train; ++k) in_train[order[k]] = true;

  DatasetSplit split;
  split.seed = seed;
  split.ratio = ratio;
  split.train.reserve(n_train);
  split.validation.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? split.train : split.validation).push_back(examples[i]);
  }
  return split;
}

}  // namespace dflute
