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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dflute/corpus.hpp"
#include "dflute/elaboration_set.hpp"
#include "dflute/types.hpp"

namespace dflute {

inline constexpr std::string_view kNliQuestion =
    "Is there a contradiction or entailment between the premise and "
    "hypothesis?";
inline constexpr std::string_view kTypeQuestion =
    "What is the type of figurative language involved?";

enum class PromptStage { Joint, ClassifyStep, ExplainStep };

std::string_view stage_name(PromptStage stage);

struct PromptBundle {
  SystemId system = SystemId::S1_Original;
  std::string example_id;
  std::string text;
  PromptStage stage = PromptStage::Joint;

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

/// One system's decoded output for one example. An empty `label` is an
/// abstention; `raw_text` is always kept.
struct Prediction {
  SystemId system = SystemId::S1_Original;
  std::string example_id;
  std::optional<Label> label;
  std::string explanation;
  std::optional<FigType> fig_type;
  std::string raw_text;
  // Set when the prediction stands in for a failed backend call.
  std::optional<std::string> error;

  bool abstained() const { return !label.has_value(); }

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Model input for `system`. S3 systems need the matching elaborations for
/// both sides; S4 yields only its classify step (see build_explain_prompt).
///
/// Templates:
///   S1  "Premise: {p} Hypothesis: {h} {NLI}"
///   S2  "Premise: {p} Hypothesis: {h} {TYPE} {NLI}"
///   S3  "Premise: {p} [Premise - {dim}] {ep} Hypothesis: {h}
///        [Hypothesis - {dim}] {eh} {NLI}", one block per dimension for
///        S3_AllDims in the order consequence, emotion, motivation,
///        social norm.
///   S4  classify step uses the S1 text.
PromptBundle build_prompt(SystemId system, const Example& example,
                          const ElaborationSet* elaborations = nullptr);

/// "Premise: {p} Hypothesis: {h} Answer: {label}. Explain why."
PromptBundle build_explain_prompt(const Example& example, Label label);

/// Training target: "{label}. Explanation: {explanation}", with
/// "{fig type}. " prepended for S2. Uses the first gold explanation.
std::string render_target(SystemId system, const Example& example);

/// Tolerant inverse of render_target. Never throws; returns an abstaining
/// Prediction (with raw text) when no label word is found. For S2 a missing
/// figurative type also abstains.
Prediction parse_output(SystemId system, std::string_view raw,
                        std::string example_id = {});

struct FineTuneRow {
  std::string id;
  SystemId system = SystemId::S1_Original;
  PromptStage stage = PromptStage::Joint;
  std::string input;
  std::string target;
};

/// Rows for external fine-tuning runs. S4 contributes a classify row
/// (target = render_target) and an explain row (target = gold explanation).
std::vector<FineTuneRow> finetune_rows(SystemId system, const Example& example,
                                       const ElaborationSet* elaborations);
std::string serialize_finetune_row(const FineTuneRow& row);

}  // namespace dflute
