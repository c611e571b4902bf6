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
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dflute/corpus.hpp"
#include "dflute/elaboration_set.hpp"
#include "dflute/http.hpp"
#include "dflute/prompting.hpp"
#include "dflute/types.hpp"

namespace dflute {

/// A seq2seq model behind some transport. generate() returns the decoded
/// text for one prompt; `example` is available to backends that need it.
class PredictorBackend {
 public:
  virtual ~PredictorBackend() = default;

  std::string generate(const PromptBundle& prompt, const Example& example) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_generate(prompt, example);
  }

  std::size_t calls() const { return calls_.load(std::memory_order_relaxed); }
  virtual std::size_t max_in_flight() const { return 1; }
  virtual std::string describe() const = 0;

 protected:
  virtual std::string do_generate(const PromptBundle& prompt,
                                  const Example& example) = 0;

 private:
  std::atomic<std::size_t> calls_{0};
};

/// POST {"input"} -> {"output"}.
class RemotePredictor final : public PredictorBackend {
 public:
  explicit RemotePredictor(Endpoint endpoint);

  std::size_t max_in_flight() const override {
    return endpoint_.max_in_flight;
  }
  std::string describe() const override { return "remote:" + endpoint_.url; }

 protected:
  std::string do_generate(const PromptBundle& prompt,
                          const Example& example) override;

 private:
  Endpoint endpoint_;
};

/// Table lookup: the exact prompt text first, then the example id. The id
/// table is split by stage so S4 can map both of its calls by id.
class MockTablePredictor final : public PredictorBackend {
 public:
  MockTablePredictor() = default;

  void add_prompt(std::string prompt_text, std::string output);
  void add_id(std::string example_id, std::string output,
              PromptStage stage = PromptStage::Joint);

  /// JSONL rows: {"input": prompt, "output": text} or
  /// {"id": id, "output": text, "stage"?: "explain"}.
  static std::unique_ptr<MockTablePredictor> load(
      const std::filesystem::path& path);

  void set_max_in_flight(std::size_t n) { max_in_flight_ = n; }
  std::size_t max_in_flight() const override { return max_in_flight_; }
  std::string describe() const override { return "mock-table"; }

 protected:
  /// Throws DataError when neither key is present.
  std::string do_generate(const PromptBundle& prompt,
                          const Example& example) override;

 private:
  std::unordered_map<std::string, std::string> by_prompt_;
  std::unordered_map<std::string, std::string> by_id_;
  std::unordered_map<std::string, std::string> by_id_explain_;
  std::size_t max_in_flight_ = 1;
};

/// Echoes the gold target: render_target for joint and classify prompts,
/// the first gold explanation for the explain step.
class GoldEchoPredictor final : public PredictorBackend {
 public:
  std::string describe() const override { return "gold-echo"; }

 protected:
  std::string do_generate(const PromptBundle& prompt,
                          const Example& example) override;
};

struct PredictionBatch {
  SystemId system = SystemId::S1_Original;
  std::vector<Prediction> predictions;  // sorted by example id
  std::string provenance;

  const Prediction* find(const std::string& example_id) const;
};

/// Joint systems: one call, then parse_output. S4: the classify call decides
/// the label (its explanation is dropped); the explain call's full text is
/// the explanation. A classify-step abstention skips the explain call.
Prediction predict_one(PredictorBackend& backend, SystemId system,
                       const Example& example,
                       const ElaborationSet* elaborations = nullptr);

using ElaborationMap = std::map<std::string, ElaborationSet>;

/// Runs `system` over `examples`, appending each finished row to `out_path`
/// and rewriting it sorted by id at the end. Rows already in the file for
/// this system are reused unless they carry an error note. Backend failures
/// become abstentions with an error note.
PredictionBatch predict_batch(PredictorBackend& backend, SystemId system,
                              std::span<const Example> examples,
                              const ElaborationMap* elaborations,
                              const std::filesystem::path& out_path);

std::string serialize_prediction(const Prediction& prediction);
Prediction parse_prediction_record(const std::string& line);
/// Reads a prediction file. All rows must share one system; later rows for
/// the same id replace earlier ones.
PredictionBatch load_predictions(const std::filesystem::path& path);
void write_predictions(const PredictionBatch& batch,
                       const std::filesystem::path& path);

}  // namespace dflute
