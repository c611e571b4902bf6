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

#include "dflute/types.hpp"

#include <cctype>
#include <string>

#include "dflute/text.hpp"

namespace dflute {
namespace {

// Lowercase and drop everything that is not a letter or digit.
std::string fold(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

// Lowercase, then strip leading and trailing non-alphanumerics.
std::string strip_punct(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && !std::isalnum(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && !std::isalnum(static_cast<unsigned char>(text[e - 1]))) --e;
  return text::to_lower_ascii(text.substr(b, e - b));
}

}  // namespace

std::string_view label_word(Label label) {
  return label == Label::Entailment ? "entailment" : "contradiction";
}

std::string_view fig_type_word(FigType type) {
  switch (type) {
    case FigType::Simile: return "simile";
    case FigType::Metaphor: return "metaphor";
    case FigType::Sarcasm: return "sarcasm";
    case FigType::Idiom: return "idiom";
    case FigType::CreativeParaphrase: return "creative paraphrase";
  }
  return "";
}

std::string_view fig_type_name(FigType type) {
  switch (type) {
    case FigType::Simile: return "Simile";
    case FigType::Metaphor: return "Metaphor";
    case FigType::Sarcasm: return "Sarcasm";
    case FigType::Idiom: return "Idiom";
    case FigType::CreativeParaphrase: return "CreativeParaphrase";
  }
  return "";
}

std::string_view system_name(SystemId system) {
  switch (system) {
    case SystemId::S1_Original: return "S1_Original";
    case SystemId::S2_FigType: return "S2_FigType";
    case SystemId::S3_Consequence: return "S3_Consequence";
    case SystemId::S3_Emotion: return "S3_Emotion";
    case SystemId::S3_Motivation: return "S3_Motivation";
    case SystemId::S3_SocialNorm: return "S3_SocialNorm";
    case SystemId::S3_AllDims: return "S3_AllDims";
    case SystemId::S4_TwoStep: return "S4_TwoStep";
  }
  return "";
}

std::string_view dimension_surface(DreamDimension dim) {
  switch (dim) {
    case DreamDimension::Consequence: return "consequence";
    case DreamDimension::Emotion: return "emotion";
    case DreamDimension::Motivation: return "motivation";
    case DreamDimension::SocialNorm: return "social norm";
  }
  return "";
}

std::optional<Label> parse_label(std::string_view text) {
  const std::string word = strip_punct(text);
  for (Label l : kAllLabels) {
    if (word == label_word(l)) return l;
  }
  return std::nullopt;
}

std::optional<FigType> parse_fig_type(std::string_view text) {
  const std::string key = fold(text);
  for (FigType t : kAllFigTypes) {
    if (key == fold(fig_type_name(t))) return t;
  }
  return std::nullopt;
}

std::optional<SystemId> parse_system(std::string_view text) {
  const std::string key = text::to_lower_ascii(text::trim(text));
  for (SystemId s : kAllSystems) {
    if (key == text::to_lower_ascii(system_name(s))) return s;
  }
  return std::nullopt;
}

std::optional<DreamDimension> parse_dimension(std::string_view text) {
  const std::string key = fold(text);
  for (DreamDimension d : kAllDimensions) {
    if (key == fold(dimension_surface(d))) return d;
  }
  return std::nullopt;
}

std::optional<DreamDimension> system_dimension(SystemId system) {
  switch (system) {
    case SystemId::S3_Consequence: return DreamDimension::Consequence;
    case SystemId::S3_Emotion: return DreamDimension::Emotion;
    case SystemId::S3_Motivation: return DreamDimension::Motivation;
    case SystemId::S3_SocialNorm: return DreamDimension::SocialNorm;
    default: return std::nullopt;
  }
}

}  // namespace dflute
