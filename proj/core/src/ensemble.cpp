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

#include "dflute/ensemble.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jsonl.hpp"

namespace dflute {
namespace {

using json = nlohmann::ordered_json;

const Prediction* valid_vote(const std::map<SystemId, Prediction>& votes,
                             SystemId system) {
  auto it = votes.find(system);
  if (it == votes.end() || it->second.abstained()) return nullptr;
  return &it->second;
}

bool contains(const std::vector<SystemId>& list, SystemId system) {
  return std::find(list.begin(), list.end(), system) != list.end();
}

std::vector<SystemId> parse_system_list(const json& arr, const char* key) {
  if (!arr.is_array()) {
    throw DataError(std::string("\"") + key + "\" must be an array");
  }
  std::vector<SystemId> out;
  for (const auto& item : arr) {
    if (!item.is_string()) {
      throw DataError(std::string("\"") + key + "\" entries must be strings");
    }
    const auto name = item.get<std::string>();
    const auto system = parse_system(name);
    if (!system) throw DataError("unknown system \"" + name + "\"");
    out.push_back(*system);
  }
  return out;
}

void check_list(const std::vector<SystemId>& list, const char* what) {
  if (list.empty()) throw UsageError(std::string(what) + " is empty");
  for (std::size_t i = 0; i < list.size(); ++i) {
    for (std::size_t j = i + 1; j < list.size(); ++j) {
      if (list[i] == list[j]) {
        throw UsageError(std::string(what) + " lists " +
                         std::string(system_name(list[i])) + " twice");
      }
    }
  }
}

std::set<std::string> id_set(const PredictionBatch& batch) {
  std::set<std::string> ids;
  for (const auto& p : batch.predictions) ids.insert(p.example_id);
  return ids;
}

std::string describe_difference(const std::set<std::string>& a,
                                 const std::set<std::string>& b) {
  std::vector<std::string> diff;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(diff));
  std::ostringstream out;
  constexpr std::size_t kShown = 20;
  for (std::size_t i = 0; i < diff.size() && i < kShown; ++i) {
    out << (i ? ", " : "") << diff[i];
  }
  if (diff.size() > kShown) out << ", ... (" << diff.size() << " total)";
  return out.str();
}

}  // namespace

EnsembleConfig EnsembleConfig::defaults() {
  return {
      {SystemId::S1_Original, SystemId::S2_FigType, SystemId::S3_Motivation,
       SystemId::S3_AllDims, SystemId::S4_TwoStep},
      {SystemId::S3_Consequence, SystemId::S3_Emotion, SystemId::S2_FigType,
       SystemId::S3_AllDims, SystemId::S3_Motivation, SystemId::S4_TwoStep,
       SystemId::S1_Original},
  };
}

void EnsembleConfig::validate() const {
  check_list(voters, "voters");
  check_list(explanation_order, "explanation_order");
}

EnsembleConfig EnsembleConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  EnsembleConfig config = defaults();
  try {
    const auto doc = json::parse(in);
    if (!doc.is_object()) throw DataError("config must be a JSON object");
    if (doc.contains("voters")) {
      config.voters = parse_system_list(doc["voters"], "voters");
    }
    if (doc.contains("explanation_order")) {
      config.explanation_order =
          parse_system_list(doc["explanation_order"], "explanation_order");
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  config.validate();
  return config;
}

std::string EnsembleConfig::to_json() const {
  json doc;
  doc["voters"] = json::array();
  for (SystemId s : voters) doc["voters"].push_back(system_name(s));
  doc["explanation_order"] = json::array();
  for (SystemId s : explanation_order) {
    doc["explanation_order"].push_back(system_name(s));
  }
  return doc.dump(2);
}

std::vector<SystemId> EnsembleConfig::referenced_systems() const {
  std::vector<SystemId> out = voters;
  for (SystemId s : explanation_order) {
    if (!contains(out, s)) out.push_back(s);
  }
  return out;
}

std::string_view flag_name(EnsembleFlag flag) {
  switch (flag) {
    case EnsembleFlag::Tie: return "tie";
    case EnsembleFlag::NoAgreeingExplainer: return "no_agreeing_explainer";
    case EnsembleFlag::InsufficientVotes: return "insufficient_votes";
  }
  return "";
}

VoteOutcome majority_vote(const std::map<SystemId, Prediction>& votes,
                          const EnsembleConfig& config) {
  VoteOutcome out{Label::Entailment, {}, {}};
  for (SystemId voter : config.voters) {
    if (const Prediction* p = valid_vote(votes, voter)) {
      (*p->label == Label::Entailment ? out.tally.entailment
                                      : out.tally.contradiction)++;
    }
  }
  if (out.tally.total() == 0) {
    throw InsufficientVotesError("no voter cast a valid vote");
  }
  if (out.tally.entailment != out.tally.contradiction) {
    out.label = out.tally.entailment > out.tally.contradiction
                    ? Label::Entailment
                    : Label::Contradiction;
    return out;
  }

  out.flags.insert(EnsembleFlag::Tie);
  for (SystemId s : config.explanation_order) {
    if (!contains(config.voters, s)) continue;
    if (const Prediction* p = valid_vote(votes, s)) {
      out.label = *p->label;
      return out;
    }
  }
  for (SystemId s : config.voters) {
    if (const Prediction* p = valid_vote(votes, s)) {
      out.label = *p->label;
      return out;
    }
  }
  return out;  // unreachable: total() > 0
}

ExplanationChoice select_explanation(
    Label label, const std::map<SystemId, Prediction>& predictions,
    const EnsembleConfig& config) {
  for (SystemId s : config.explanation_order) {
    const Prediction* p = valid_vote(predictions, s);
    if (p != nullptr && *p->label == label) return {p->explanation, s};
  }
  return {};
}

EnsembleResult ensemble_example(
    const std::string& example_id,
    const std::map<SystemId, Prediction>& predictions,
    const EnsembleConfig& config) {
  EnsembleResult result;
  result.example_id = example_id;
  try {
    VoteOutcome vote = majority_vote(predictions, config);
    result.label = vote.label;
    result.tally = vote.tally;
    result.flags = std::move(vote.flags);
  } catch (const InsufficientVotesError&) {
    result.flags.insert(EnsembleFlag::InsufficientVotes);
    for (SystemId s : config.explanation_order) {
      if (const Prediction* p = valid_vote(predictions, s)) {
        result.label = *p->label;
        break;
      }
    }
    if (!result.label) {
      for (SystemId s : kAllSystems) {
        if (const Prediction* p = valid_vote(predictions, s)) {
          result.label = *p->label;
          break;
        }
      }
    }
  }

  if (result.label) {
    auto choice = select_explanation(*result.label, predictions, config);
    result.explanation = std::move(choice.text);
    result.explanation_source = choice.source;
  }
  if (!result.explanation_source) {
    result.flags.insert(EnsembleFlag::NoAgreeingExplainer);
  }
  return result;
}

std::vector<EnsembleResult> run_ensemble(
    const std::map<SystemId, PredictionBatch>& batches,
    const EnsembleConfig& config) {
  config.validate();
  for (SystemId voter : config.voters) {
    if (!batches.contains(voter)) {
      throw DataError("no predictions for voter " +
                      std::string(system_name(voter)));
    }
  }

  // Every supplied batch takes part: referenced systems vote or explain, the
  // rest only serve the all-abstain label fallback.
  std::vector<const PredictionBatch*> used;
  for (SystemId s : config.referenced_systems()) {
    if (auto it = batches.find(s); it != batches.end()) {
      used.push_back(&it->second);
    }
  }
  for (const auto& [system, batch] : batches) {
    if (std::find(used.begin(), used.end(), &batch) == used.end()) {
      used.push_back(&batch);
    }
  }
  const std::set<std::string> ids = id_set(*used.front());
  for (const PredictionBatch* batch : used) {
    const auto other = id_set(*batch);
    if (other != ids) {
      throw DataError("example ids of " +
                      std::string(system_name(batch->system)) +
                      " differ from " +
                      std::string(system_name(used.front()->system)) + ": " +
                      describe_difference(ids, other));
    }
  }

  std::vector<EnsembleResult> results;
  results.reserve(ids.size());
  for (const std::string& id : ids) {
    std::map<SystemId, Prediction> row;
    for (const PredictionBatch* batch : used) {
      row.emplace(batch->system, *batch->find(id));
    }
    results.push_back(ensemble_example(id, row, config));
  }
  return results;
}

std::string serialize_ensemble_result(const EnsembleResult& r) {
  json obj;
  obj["id"] = r.example_id;
  obj["label"] = r.label ? std::string(label_word(*r.label)) : "abstain";
  obj["explanation"] = r.explanation;
  obj["source"] = r.explanation_source
                      ? json(std::string(system_name(*r.explanation_source)))
                      : json(nullptr);
  obj["tally"] = {{"entailment", r.tally.entailment},
                  {"contradiction", r.tally.contradiction}};
  obj["flags"] = json::array();
  for (EnsembleFlag f : r.flags) obj["flags"].push_back(flag_name(f));
  return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

EnsembleResult parse_ensemble_record(const std::string& line) {
  try {
    const auto row = json::parse(line);
    EnsembleResult r;
    r.example_id = row.at("id").get<std::string>();
    const auto label = row.at("label").get<std::string>();
    if (label != "abstain") {
      r.label = parse_label(label);
      if (!r.label) throw DataError("unknown label \"" + label + "\"");
    }
    r.explanation = row.value("explanation", std::string());
    if (auto it = row.find("source"); it != row.end() && !it->is_null()) {
      r.explanation_source = parse_system(it->get<std::string>());
      if (!r.explanation_source) throw DataError("unknown source system");
    }
    if (auto it = row.find("tally"); it != row.end()) {
      r.tally.entailment = it->value("entailment", 0);
      r.tally.contradiction = it->value("contradiction", 0);
    }
    if (auto it = row.find("flags"); it != row.end()) {
      for (const auto& f : *it) {
        const auto name = f.get<std::string>();
        bool known = false;
        for (EnsembleFlag flag :
             {EnsembleFlag::Tie, EnsembleFlag::NoAgreeingExplainer,
              EnsembleFlag::InsufficientVotes}) {
          if (name == flag_name(flag)) {
            r.flags.insert(flag);
            known = true;
          }
        }
        if (!known) throw DataError("unknown flag \"" + name + "\"");
      }
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad ensemble row: ") + e.what());
  }
}

void write_ensemble_results(const std::vector<EnsembleResult>& results,
                            const std::filesystem::path& path) {
  std::vector<std::string> lines;
  lines.reserve(results.size());
  for (const auto& r : results) lines.push_back(serialize_ensemble_result(r));
  detail::write_lines_atomic(path, lines);
}

std::vector<EnsembleResult> load_ensemble_results(
    const std::filesystem::path& path) {
  std::vector<EnsembleResult> out;
  for (const auto& [line_no, text] : detail::read_lines(path)) {
    try {
      out.push_back(parse_ensemble_record(text));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return out;
}

}  // namespace dflute
