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

#include "dflute/inference.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <mutex>

#include <json.hpp>

#include "dflute/errors.hpp"
#include "dflute/text.hpp"
#include "jsonl.hpp"
#include "parallel.hpp"

namespace dflute {
namespace {

using json = nlohmann::ordered_json;

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void sort_by_id(std::vector<Prediction>& rows) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.example_id < b.example_id;
  });
}

}  // namespace

RemotePredictor::RemotePredictor(Endpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  validate_endpoint(endpoint_);
}

std::string RemotePredictor::do_generate(const PromptBundle& prompt,
                                         const Example&) {
  json req;
  req["input"] = prompt.text;
  const std::string body = post_json(endpoint_, req.dump());
  try {
    const auto res = json::parse(body);
    return res.at("output").get<std::string>();
  } catch (const json::exception&) {
    throw TransportError("malformed model response from " + endpoint_.url, 1);
  }
}

void MockTablePredictor::add_prompt(std::string prompt_text,
                                    std::string output) {
  by_prompt_.insert_or_assign(std::move(prompt_text), std::move(output));
}

void MockTablePredictor::add_id(std::string example_id, std::string output,
                                PromptStage stage) {
  auto& table = stage == PromptStage::ExplainStep ? by_id_explain_ : by_id_;
  table.insert_or_assign(std::move(example_id), std::move(output));
}

std::unique_ptr<MockTablePredictor> MockTablePredictor::load(
    const std::filesystem::path& path) {
  auto table = std::make_unique<MockTablePredictor>();
  for (const auto& [line_no, text] : detail::read_lines(path)) {
    const std::string where =
        path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const auto row = json::parse(text);
      auto output = row.at("output").get<std::string>();
      if (row.contains("input")) {
        table->add_prompt(row.at("input").get<std::string>(), std::move(output));
      } else if (row.contains("id")) {
        const auto stage = row.value("stage", std::string("joint"));
        if (stage != "joint" && stage != "classify" && stage != "explain") {
          throw DataError("unknown stage \"" + stage + "\"");
        }
        table->add_id(row.at("id").get<std::string>(), std::move(output),
                     stage == "explain" ? PromptStage::ExplainStep
                                        : PromptStage::Joint);
      } else {
        throw DataError("row needs \"input\" or \"id\"");
      }
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  return table;
}

std::string MockTablePredictor::do_generate(const PromptBundle& prompt,
                                            const Example&) {
  if (auto it = by_prompt_.find(prompt.text); it != by_prompt_.end()) {
    return it->second;
  }
  const auto& table =
      prompt.stage == PromptStage::ExplainStep ? by_id_explain_ : by_id_;
  if (auto it = table.find(prompt.example_id); it != table.end()) {
    return it->second;
  }
  throw DataError("mock table has no output for example " + prompt.example_id +
                  " (" + std::string(stage_name(prompt.stage)) + ")");
}

std::string GoldEchoPredictor::do_generate(const PromptBundle& prompt,
                                           const Example& example) {
  if (!example.labeled()) {
    throw UsageError("gold echo needs labeled data; example " + example.id +
                     " has no label");
  }
  if (prompt.stage == PromptStage::ExplainStep) {
    return example.gold_explanations.front();
  }
  return render_target(prompt.system, example);
}

const Prediction* PredictionBatch::find(const std::string& example_id) const {
  auto it = std::lower_bound(
      predictions.begin(), predictions.end(), example_id,
      [](const Prediction& p, const std::string& id) {
        return p.example_id < id;
      });
  if (it == predictions.end() || it->example_id != example_id) return nullptr;
  return &*it;
}

Prediction predict_one(PredictorBackend& backend, SystemId system,
                       const Example& example,
                       const ElaborationSet* elaborations) {
  const PromptBundle prompt = build_prompt(system, example, elaborations);
  const std::string raw = backend.generate(prompt, example);
  Prediction first = parse_output(system, raw, example.id);
  if (system != SystemId::S4_TwoStep || first.abstained()) return first;

  const PromptBundle explain = build_explain_prompt(example, *first.label);
  const std::string second = backend.generate(explain, example);
  first.explanation = std::string(text::trim(second));
  first.fig_type.reset();
  first.raw_text = raw + "\n" + second;
  return first;
}

PredictionBatch predict_batch(PredictorBackend& backend, SystemId system,
                              std::span<const Example> examples,
                              const ElaborationMap* elaborations,
                              const std::filesystem::path& out_path) {
  std::map<std::string, Prediction> done;
  if (std::filesystem::exists(out_path)) {
    for (const auto& [line_no, text] : detail::read_lines(out_path)) {
      Prediction p;
      try {
        p = parse_prediction_record(text);
      } catch (const DataError& e) {
        throw DataError(out_path.string() + ":" + std::to_string(line_no) +
                        ": " + e.what());
      }
      if (p.system != system) {
        throw DataError(out_path.string() + ":" + std::to_string(line_no) +
                        ": row for " + std::string(system_name(p.system)) +
                        " in a " + std::string(system_name(system)) + " file");
      }
      if (p.error) {
        done.erase(p.example_id);
      } else {
        done.insert_or_assign(p.example_id, std::move(p));
      }
    }
  }

  std::vector<const Example*> todo;
  std::vector<Prediction> rows;
  for (const auto& ex : examples) {
    if (auto it = done.find(ex.id); it != done.end()) {
      rows.push_back(it->second);
    } else {
      todo.push_back(&ex);
    }
  }

  std::mutex mu;
  {
    detail::LineAppender appender(out_path);
    detail::parallel_for(
        todo.size(), backend.max_in_flight(), [&](std::size_t i) {
          const Example& ex = *todo[i];
          const ElaborationSet* set = nullptr;
          if (elaborations != nullptr) {
            if (auto it = elaborations->find(ex.id); it != elaborations->end())
              set = &it->second;
          }
          Prediction p;
          try {
            p = predict_one(backend, system, ex, set);
          } catch (const Error& e) {
            p = Prediction{system, ex.id, std::nullopt, {}, std::nullopt, {},
                           std::string(e.what())};
          }
          std::lock_guard lock(mu);
          appender.append(serialize_prediction(p));
          rows.push_back(std::move(p));
        });
  }

  PredictionBatch batch{system, std::move(rows),
                        backend.describe() + " @ " + utc_timestamp()};
  sort_by_id(batch.predictions);
  write_predictions(batch, out_path);
  return batch;
}

std::string serialize_prediction(const Prediction& p) {
  json obj;
  obj["system"] = std::string(system_name(p.system));
  obj["id"] = p.example_id;
  obj["label"] = p.label ? std::string(label_word(*p.label)) : "abstain";
  obj["explanation"] = p.explanation;
  if (p.fig_type) obj["fig_type"] = std::string(fig_type_word(*p.fig_type));
  obj["raw"] = p.raw_text;
  if (p.error) obj["error"] = *p.error;
  return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

Prediction parse_prediction_record(const std::string& line) {
  try {
    const auto row = json::parse(line);
    Prediction p;
    const auto sys = row.at("system").get<std::string>();
    const auto system = parse_system(sys);
    if (!system) throw DataError("unknown system \"" + sys + "\"");
    p.system = *system;
    p.example_id = row.at("id").get<std::string>();
    const auto label = row.at("label").get<std::string>();
    if (label != "abstain") {
      p.label = parse_label(label);
      if (!p.label) throw DataError("unknown label \"" + label + "\"");
    }
    p.explanation = row.value("explanation", std::string());
    if (auto it = row.find("fig_type"); it != row.end() && !it->is_null()) {
      p.fig_type = parse_fig_type(it->get<std::string>());
      if (!p.fig_type) throw DataError("unknown fig_type");
    }
    p.raw_text = row.value("raw", std::string());
    if (auto it = row.find("error"); it != row.end() && !it->is_null()) {
      p.error = it->get<std::string>();
    }
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad prediction row: ") + e.what());
  }
}

PredictionBatch load_predictions(const std::filesystem::path& path) {
  std::map<std::string, Prediction> rows;
  std::optional<SystemId> system;
  for (const auto& [line_no, text] : detail::read_lines(path)) {
    const std::string where =
        path.string() + ":" + std::to_string(line_no) + ": ";
    Prediction p;
    try {
      p = parse_prediction_record(text);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    if (system && *system != p.system) {
      throw DataError(where + "mixed systems in one prediction file");
    }
    system = p.system;
    rows.insert_or_assign(p.example_id, std::move(p));
  }
  if (!system) throw DataError(path.string() + ": empty prediction file");
  PredictionBatch batch{*system, {}, "file:" + path.string()};
  for (auto& [id, p] : rows) batch.predictions.push_back(std::move(p));
  return batch;
}

void write_predictions(const PredictionBatch& batch,
                       const std::filesystem::path& path) {
  std::vector<std::string> lines;
  lines.reserve(batch.predictions.size());
  for (const auto& p : batch.predictions) {
    lines.push_back(serialize_prediction(p));
  }
  detail::write_lines_atomic(path, lines);
}

}  // namespace dflute
