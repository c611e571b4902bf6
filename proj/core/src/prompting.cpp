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

#include "dflute/prompting.hpp"

#include <algorithm>
#include <span>

#include <json.hpp>

#include "dflute/errors.hpp"
#include "dflute/text.hpp"

namespace dflute {
namespace {

constexpr std::string_view kExplanationMarker = "explanation:";
// Label words are looked for within this many leading sentence segments.
constexpr int kLeadSegments = 3;

const std::string& need_elaboration(const ElaborationSet* set,
                                    const Example& ex, Side side,
                                    DreamDimension dim) {
  const std::string* text = set ? set->find(side, dim) : nullptr;
  if (text == nullptr) {
    throw UsageError("example " + ex.id + ": missing " +
                     (side == Side::Premise ? "premise" : "hypothesis") +
                     " elaboration for dimension " +
                     std::string(dimension_surface(dim)));
  }
  return *text;
}

void append_blocks(std::string& out, const ElaborationSet* set,
                   const Example& ex, Side side,
                   std::span<const DreamDimension> dims) {
  const std::string_view header =
      side == Side::Premise ? "Premise" : "Hypothesis";
  for (DreamDimension dim : dims) {
    out += " [";
    out += header;
    out += " - ";
    out += dimension_surface(dim);
    out += "] ";
    out += need_elaboration(set, ex, side, dim);
  }
}

bool word_boundary(std::string_view s, std::size_t pos, std::size_t len) {
  const bool left_ok =
      pos == 0 || !text::is_word_byte(static_cast<unsigned char>(s[pos - 1]));
  const std::size_t end = pos + len;
  const bool right_ok =
      end >= s.size() || !text::is_word_byte(static_cast<unsigned char>(s[end]));
  return left_ok && right_ok;
}

// First whole-word occurrence of `word` in `haystack` (both lowercase).
std::size_t find_word(std::string_view haystack, std::string_view word) {
  std::size_t pos = haystack.find(word);
  while (pos != std::string_view::npos) {
    if (word_boundary(haystack, pos, word.size())) return pos;
    pos = haystack.find(word, pos + 1);
  }
  return std::string_view::npos;
}

std::size_t lead_end(std::string_view s) {
  int segments = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.' || c == '!' || c == '?' || c == '\n') {
      if (++segments == kLeadSegments) return i + 1;
    }
  }
  return s.size();
}

std::string_view skip_separators(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size() && !text::is_word_byte(static_cast<unsigned char>(s[b])))
    ++b;
  return s.substr(b);
}

}  // namespace

std::string_view stage_name(PromptStage stage) {
  switch (stage) {
    case PromptStage::Joint: return "joint";
    case PromptStage::ClassifyStep: return "classify";
    case PromptStage::ExplainStep: return "explain";
  }
  return "";
}

PromptBundle build_prompt(SystemId system, const Example& ex,
                          const ElaborationSet* elaborations) {
  std::span<const DreamDimension> dims;
  DreamDimension single{};
  if (system == SystemId::S3_AllDims) {
    dims = kAllDimensions;
  } else if (auto d = system_dimension(system)) {
    single = *d;
    dims = std::span<const DreamDimension>(&single, 1);
  }

  std::string out = "Premise: ";
  out += ex.premise;
  append_blocks(out, elaborations, ex, Side::Premise, dims);
  out += " Hypothesis: ";
  out += ex.hypothesis;
  append_blocks(out, elaborations, ex, Side::Hypothesis, dims);
  out += ' ';
  if (system == SystemId::S2_FigType) {
    out += kTypeQuestion;
    out += ' ';
  }
  out += kNliQuestion;

  const PromptStage stage = system == SystemId::S4_TwoStep
                                ? PromptStage::ClassifyStep
                                : PromptStage::Joint;
  return {system, ex.id, std::move(out), stage};
}

PromptBundle build_explain_prompt(const Example& ex, Label label) {
  std::string out = "Premise: ";
  out += ex.premise;
  out += " Hypothesis: ";
  out += ex.hypothesis;
  out += " Answer: ";
  out += label_word(label);
  out += ". Explain why.";
  return {SystemId::S4_TwoStep, ex.id, std::move(out),
          PromptStage::ExplainStep};
}

std::string render_target(SystemId system, const Example& ex) {
  if (!ex.gold_label || ex.gold_explanations.empty()) {
    throw UsageError("example " + ex.id + ": no gold label/explanation");
  }
  std::string out;
  if (system == SystemId::S2_FigType) {
    if (!ex.fig_type) {
      throw UsageError("example " + ex.id + ": no figurative type");
    }
    out += fig_type_word(*ex.fig_type);
    out += ". ";
  }
  out += label_word(*ex.gold_label);
  out += ". Explanation: ";
  out += ex.gold_explanations.front();
  return out;
}

Prediction parse_output(SystemId system, std::string_view raw,
                        std::string example_id) {
  Prediction p{system, std::move(example_id), std::nullopt, {}, std::nullopt,
               std::string(raw), std::nullopt};
  const std::string lower = text::to_lower_ascii(raw);
  const std::string_view view = lower;

  const std::size_t marker = view.find(kExplanationMarker);
  const std::size_t region_end = std::min(lead_end(view), marker);
  const std::string_view region = view.substr(0, region_end);

  std::size_t label_pos = std::string_view::npos;
  std::size_t label_len = 0;
  for (Label l : kAllLabels) {
    const std::size_t pos = find_word(region, label_word(l));
    if (pos < label_pos) {
      label_pos = pos;
      label_len = label_word(l).size();
      p.label = l;
    }
  }
  if (!p.label) return p;

  if (system == SystemId::S2_FigType) {
    const std::string_view before = region.substr(0, label_pos);
    std::size_t best = std::string_view::npos;
    for (FigType t : kAllFigTypes) {
      const std::size_t pos = find_word(before, fig_type_word(t));
      if (pos < best) {
        best = pos;
        p.fig_type = t;
      }
    }
    if (!p.fig_type) {
      p.label.reset();
      return p;
    }
  }

  if (marker != std::string_view::npos) {
    p.explanation =
        std::string(text::trim(raw.substr(marker + kExplanationMarker.size())));
  } else {
    p.explanation = std::string(
        text::trim(skip_separators(raw.substr(label_pos + label_len))));
  }
  return p;
}

std::vector<FineTuneRow> finetune_rows(SystemId system, const Example& ex,
                                       const ElaborationSet* elaborations) {
  std::vector<FineTuneRow> rows;
  PromptBundle prompt = build_prompt(system, ex, elaborations);
  rows.push_back({ex.id, system, prompt.stage, std::move(prompt.text),
                  render_target(system, ex)});
  if (system == SystemId::S4_TwoStep) {
    PromptBundle explain = build_explain_prompt(ex, *ex.gold_label);
    rows.push_back({ex.id, system, explain.stage, std::move(explain.text),
                    ex.gold_explanations.front()});
  }
  return rows;
}

std::string serialize_finetune_row(const FineTuneRow& row) {
  nlohmann::ordered_json obj;
  obj["id"] = row.id;
  obj["system"] = std::string(system_name(row.system));
  obj["stage"] = std::string(stage_name(row.stage));
  obj["input"] = row.input;
  obj["target"] = row.target;
  return obj.dump();
}

}  // namespace dflute
