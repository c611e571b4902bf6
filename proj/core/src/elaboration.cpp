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

#include "dflute/elaboration.hpp"

#include <algorithm>

#include <json.hpp>

#include "dflute/errors.hpp"
#include "dflute/hashing.hpp"
#include "jsonl.hpp"
#include "parallel.hpp"

namespace dflute {
namespace {

using json = nlohmann::ordered_json;

struct WorkItem {
  std::string sentence;
  DreamDimension dim;
  std::vector<std::string> example_ids;
};

// Unique (sentence, dimension) pairs in first-seen order over the grid.
std::vector<WorkItem> collect_work(std::span<const Example> examples,
                                   const std::set<DreamDimension>& dims) {
  std::vector<WorkItem> items;
  std::map<std::pair<std::string, DreamDimension>, std::size_t> index;
  for (const auto& ex : examples) {
    for (const std::string* sentence : {&ex.premise, &ex.hypothesis}) {
      for (DreamDimension dim : dims) {
        auto [it, fresh] = index.try_emplace({*sentence, dim}, items.size());
        if (fresh) items.push_back({*sentence, dim, {}});
        auto& ids = items[it->second].example_ids;
        if (ids.empty() || ids.back() != ex.id) ids.push_back(ex.id);
      }
    }
  }
  return items;
}

void assemble_sets(std::span<const Example> examples,
                   const std::set<DreamDimension>& dims,
                   const ElaborationCache& cache, ElaborationOutcome& outcome) {
  for (const auto& ex : examples) {
    ElaborationSet set(ex.id);
    bool complete = true;
    for (Side side : {Side::Premise, Side::Hypothesis}) {
      const std::string& sentence =
          side == Side::Premise ? ex.premise : ex.hypothesis;
      for (DreamDimension dim : dims) {
        const std::string* text = cache.find(sentence, dim);
        if (text == nullptr) {
          complete = false;
          continue;
        }
        set.add(side, dim, *text);
      }
    }
    if (complete) outcome.sets.emplace(ex.id, std::move(set));
  }
}

}  // namespace

std::uint64_t StubElaborator::stub_hash(std::string_view sentence,
                                        DreamDimension dim) {
  std::uint64_t h = fnv1a64(sentence);
  h = fnv1a64("\x1f", h);
  return fnv1a64(dimension_surface(dim), h);
}

std::string StubElaborator::elaborate(std::string_view sentence,
                                      DreamDimension dim) {
  if (sentence.empty()) throw UsageError("cannot elaborate an empty sentence");
  std::string out = "[";
  out += dimension_surface(dim);
  out += "] stub elaboration ";
  out += to_hex(stub_hash(sentence, dim));
  return out;
}

RemoteElaborator::RemoteElaborator(Endpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  validate_endpoint(endpoint_);
}

std::string RemoteElaborator::elaborate(std::string_view sentence,
                                        DreamDimension dim) {
  if (sentence.empty()) throw UsageError("cannot elaborate an empty sentence");
  json req;
  req["sentence"] = sentence;
  req["dimension"] = std::string(dimension_surface(dim));
  const std::string body = post_json(endpoint_, req.dump());
  try {
    const auto res = json::parse(body);
    const auto& text = res.at("elaboration");
    if (text.is_string() && !text.get<std::string>().empty()) {
      return text.get<std::string>();
    }
  } catch (const json::exception&) {
  }
  throw TransportError("malformed elaboration response from " + endpoint_.url,
                       1);
}

std::string sentence_key(std::string_view sentence) {
  return to_hex(fnv1a64(sentence));
}

ElaborationCache::ElaborationCache(std::filesystem::path path)
    : path_(std::move(path)), mu_(std::make_unique<std::mutex>()) {
  if (!std::filesystem::exists(path_)) return;
  for (const auto& [line_no, text] : detail::read_lines(path_)) {
    const std::string where =
        path_.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const auto row = json::parse(text);
      const auto sentence = row.at("sentence").get<std::string>();
      const auto key = row.at("key").get<std::string>();
      const auto dim_text = row.at("dimension").get<std::string>();
      auto elaboration = row.at("elaboration").get<std::string>();
      const auto dim = parse_dimension(dim_text);
      if (!dim) throw DataError("unknown dimension \"" + dim_text + "\"");
      if (key != sentence_key(sentence)) {
        throw DataError("key does not match sentence hash");
      }
      if (elaboration.empty()) throw DataError("empty elaboration");
      entries_.try_emplace({key, *dim}, Entry{sentence, std::move(elaboration)});
    } catch (const json::exception& e) {
      throw DataError(where + "corrupt cache row: " + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
}

const std::string* ElaborationCache::find(std::string_view sentence,
                                          DreamDimension dim) const {
  std::lock_guard lock(*mu_);
  auto it = entries_.find({sentence_key(sentence), dim});
  if (it == entries_.end() || it->second.sentence != sentence) return nullptr;
  return &it->second.elaboration;
}

void ElaborationCache::put(std::string_view sentence, DreamDimension dim,
                           std::string elaboration) {
  std::lock_guard lock(*mu_);
  Key key{sentence_key(sentence), dim};
  if (entries_.contains(key)) return;
  json row;
  row["key"] = key.first;
  row["dimension"] = std::string(dimension_surface(dim));
  row["sentence"] = sentence;
  row["elaboration"] = elaboration;
  detail::LineAppender(path_).append(row.dump());
  entries_.emplace(std::move(key),
                   Entry{std::string(sentence), std::move(elaboration)});
}

std::size_t ElaborationCache::size() const {
  std::lock_guard lock(*mu_);
  return entries_.size();
}

ElaborationOutcome elaborate_dataset(ElaborationProvider& provider,
                                     std::span<const Example> examples,
                                     const std::set<DreamDimension>& dims,
                                     const std::filesystem::path& cache_path) {
  ElaborationCache cache(cache_path);
  ElaborationOutcome outcome;

  std::vector<WorkItem> pending;
  for (auto& item : collect_work(examples, dims)) {
    if (cache.find(item.sentence, item.dim) != nullptr) {
      ++outcome.cache_hits;
    } else {
      pending.push_back(std::move(item));
    }
  }

  std::vector<std::optional<std::string>> errors(pending.size());
  detail::parallel_for(
      pending.size(), provider.max_in_flight(), [&](std::size_t i) {
        const WorkItem& item = pending[i];
        try {
          std::string text = provider.elaborate(item.sentence, item.dim);
          if (text.empty()) throw TransportError("empty elaboration", 1);
          cache.put(item.sentence, item.dim, std::move(text));
        } catch (const Error& e) {
          errors[i] = e.what();
        }
      });
  outcome.fetched = pending.size();
  for (std::size_t i = 0; i < pending.size(); ++i) {
    if (errors[i]) {
      outcome.failures.push_back({pending[i].sentence, pending[i].dim,
                                  pending[i].example_ids, *errors[i]});
    }
  }
  assemble_sets(examples, dims, cache, outcome);
  return outcome;
}

ElaborationOutcome elaborations_from_cache(
    std::span<const Example> examples, const std::set<DreamDimension>& dims,
    const std::filesystem::path& cache_path) {
  if (!std::filesystem::exists(cache_path)) {
    throw IoError("elaboration cache not found: " + cache_path.string());
  }
  const ElaborationCache cache(cache_path);
  ElaborationOutcome outcome;
  for (auto& item : collect_work(examples, dims)) {
    if (cache.find(item.sentence, item.dim) != nullptr) {
      ++outcome.cache_hits;
    } else {
      outcome.failures.push_back({std::move(item.sentence), item.dim,
                                  std::move(item.example_ids),
                                  "not in cache"});
    }
  }
  assemble_sets(examples, dims, cache, outcome);
  return outcome;
}

}  // namespace dflute
