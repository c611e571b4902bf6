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

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dflute/corpus.hpp"
#include "dflute/elaboration_set.hpp"
#include "dflute/http.hpp"
#include "dflute/types.hpp"

namespace dflute {

/// Source of DREAM scene elaborations: one sentence in, one text out.
class ElaborationProvider {
 public:
  virtual ~ElaborationProvider() = default;

  virtual std::string elaborate(std::string_view sentence,
                                DreamDimension dim) = 0;
  /// Upper bound on concurrent elaborate() calls.
  virtual std::size_t max_in_flight() const = 0;
  virtual std::string describe() const = 0;
};

/// Offline provider: "[{surface}] stub elaboration {hex}" where hex is
/// stub_hash(sentence, dim).
class StubElaborator final : public ElaborationProvider {
 public:
  std::string elaborate(std::string_view sentence,
                        DreamDimension dim) override;
  std::size_t max_in_flight() const override { return 1; }
  std::string describe() const override { return "stub"; }

  /// FNV-1a 64 over the sentence bytes, a 0x1f separator, then the
  /// dimension surface string.
  static std::uint64_t stub_hash(std::string_view sentence,
                                 DreamDimension dim);
};

/// POST {"sentence", "dimension"} -> {"elaboration"}.
class RemoteElaborator final : public ElaborationProvider {
 public:
  explicit RemoteElaborator(Endpoint endpoint);

  std::string elaborate(std::string_view sentence,
                        DreamDimension dim) override;
  std::size_t max_in_flight() const override {
    return endpoint_.max_in_flight;
  }
  std::string describe() const override { return "remote:" + endpoint_.url; }

 private:
  Endpoint endpoint_;
};

/// Cache key for a sentence: hex FNV-1a 64 of its bytes.
std::string sentence_key(std::string_view sentence);

struct ElaborationFailure {
  std::string sentence;
  DreamDimension dimension;
  std::vector<std::string> example_ids;
  std::string message;
};

struct ElaborationOutcome {
  // Only examples whose every requested entry resolved appear here.
  std::map<std::string, ElaborationSet> sets;
  std::vector<ElaborationFailure> failures;
  std::size_t fetched = 0;
  std::size_t cache_hits = 0;

  bool complete() const { return failures.empty(); }
};

/// Append-only JSONL cache of {"key", "dimension", "sentence",
/// "elaboration"} rows, keyed by (sentence hash, dimension).
class ElaborationCache {
 public:
  /// Loads `path` if it exists. Corrupt lines raise DataError with the line
  /// number.
  explicit ElaborationCache(std::filesystem::path path);

  const std::string* find(std::string_view sentence, DreamDimension dim) const;
  /// Appends to the file and the in-memory index. Safe to call concurrently.
  void put(std::string_view sentence, DreamDimension dim,
           std::string elaboration);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  struct Entry {
    std::string sentence;
    std::string elaboration;
  };
  using Key = std::pair<std::string, DreamDimension>;

  std::filesystem::path path_;
  std::map<Key, Entry> entries_;
  mutable std::unique_ptr<std::mutex> mu_;
};

/// Covers every (example, side, dimension) in the grid, reading from the
/// cache first and fetching the rest (deduplicated by sentence) with at most
/// provider.max_in_flight() concurrent calls. Fetch failures are collected,
/// not thrown.
ElaborationOutcome elaborate_dataset(ElaborationProvider& provider,
                                     std::span<const Example> examples,
                                     const std::set<DreamDimension>& dims,
                                     const std::filesystem::path& cache_path);

/// Builds ElaborationSets from a cache file alone, without any provider.
/// Missing entries are reported in the outcome's failures.
ElaborationOutcome elaborations_from_cache(
    std::span<const Example> examples, const std::set<DreamDimension>& dims,
    const std::filesystem::path& cache_path);

}  // namespace dflute
