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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace dflute {

/// Binary NLI label. Abstentions are modelled as an empty optional<Label>.
enum class Label { Entailment, Contradiction };

enum class FigType { Simile, Metaphor, Sarcasm, Idiom, CreativeParaphrase };

/// The eight single-model system variants.
enum class SystemId {
  S1_Original,
  S2_FigType,
  S3_Consequence,
  S3_Emotion,
  S3_Motivation,
  S3_SocialNorm,
  S3_AllDims,
  S4_TwoStep,
};

enum class DreamDimension { Consequence, Emotion, Motivation, SocialNorm };

inline constexpr std::array<Label, 2> kAllLabels = {Label::Entailment,
                                                    Label::Contradiction};

inline constexpr std::array<FigType, 5> kAllFigTypes = {
    FigType::Simile, FigType::Metaphor, FigType::Sarcasm, FigType::Idiom,
    FigType::CreativeParaphrase};

inline constexpr std::array<SystemId, 8> kAllSystems = {
    SystemId::S1_Original,   SystemId::S2_FigType,    SystemId::S3_Consequence,
    SystemId::S3_Emotion,    SystemId::S3_Motivation, SystemId::S3_SocialNorm,
    SystemId::S3_AllDims,    SystemId::S4_TwoStep};

// Fixed order used for the all-dimensions prompt and for default requests.
inline constexpr std::array<DreamDimension, 4> kAllDimensions = {
    DreamDimension::Consequence, DreamDimension::Emotion,
    DreamDimension::Motivation, DreamDimension::SocialNorm};

// Lowercase words used in serialized targets and prompts.
std::string_view label_word(Label label);
std::string_view fig_type_word(FigType type);
// "Simile", ..., "CreativeParaphrase" as written in dataset files.
std::string_view fig_type_name(FigType type);
std::string_view system_name(SystemId system);
std::string_view dimension_surface(DreamDimension dim);

/// Case-insensitive; surrounding whitespace and punctuation are ignored, so
/// "Entailment." and " entailment" both parse.
std::optional<Label> parse_label(std::string_view text);
/// Accepts "CreativeParaphrase", "creative paraphrase", "creative_paraphrase".
std::optional<FigType> parse_fig_type(std::string_view text);
/// Accepts the canonical names ("S3_Consequence"), case-insensitively.
std::optional<SystemId> parse_system(std::string_view text);
/// Accepts the surface form ("social norm") or "social_norm"/"socialnorm".
std::optional<DreamDimension> parse_dimension(std::string_view text);

/// The DREAM dimension a single-dimension S3 system consumes.
std::optional<DreamDimension> system_dimension(SystemId system);

}  // namespace dflute
