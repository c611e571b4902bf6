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

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dflute/errors.hpp"
#include "dflute/inference.hpp"
#include "dflute/prompting.hpp"
#include "dflute/types.hpp"

namespace dflute {

/// Voter set for the label and the ordered continuum scanned for the
/// explanation.
struct EnsembleConfig {
  std::vector<SystemId> voters;
  std::vector<SystemId> explanation_order;

  /// Voters: S1, S2, S3 motivation, S3 all dimensions, S4. Order:
  /// consequence, emotion, figurative type, all dimensions, motivation,
  /// two-step, original. S3_SocialNorm is in neither list.
  static EnsembleConfig defaults();

  /// Throws UsageError on an empty list or a duplicate entry.
  void validate() const;

  /// {"voters": [...], "explanation_order": [...]}; either key may be
  /// omitted to keep the default.
  static EnsembleConfig load(const std::filesystem::path& path);
  std::string to_json() const;

  /// Voters first, then any order-only systems.
  std::vector<SystemId> referenced_systems() const;
};

enum class EnsembleFlag { Tie, NoAgreeingExplainer, InsufficientVotes };

std::string_view flag_name(EnsembleFlag flag);

struct VoteTally {
  int entailment = 0;
  int contradiction = 0;

  int total() const { return entailment + contradiction; }
  int count(Label label) const {
    return label == Label::Entailment ? entailment : contradiction;
  }
  friend bool operator==(const VoteTally&, const VoteTally&) = default;
};

struct VoteOutcome {
  Label label;
  VoteTally tally;
  std::set<EnsembleFlag> flags;
};

class InsufficientVotesError : public Error {
 public:
  using Error::Error;
};

/// Only config.voters are counted and abstentions (or missing entries) are
/// skipped. A strict majority wins. On a tie the label of the earliest
/// explanation_order system that is a voter with a valid vote is used, or,
/// if no such system exists, the earliest valid voter; the Tie flag is set.
/// Throws InsufficientVotesError when no voter cast a valid vote.
VoteOutcome majority_vote(const std::map<SystemId, Prediction>& votes,
                          const EnsembleConfig& config);

struct ExplanationChoice {
  std::string text;
  std::optional<SystemId> source;
};

/// First system in explanation_order whose non-abstaining label equals
/// `label`; empty text and no source when none agrees.
ExplanationChoice select_explanation(
    Label label, const std::map<SystemId, Prediction>& predictions,
    const EnsembleConfig& config);

struct EnsembleResult {
  std::string example_id;
  // Empty only when no system produced any label for the example.
  std::optional<Label> label;
  std::string explanation;
  std::optional<SystemId> explanation_source;
  VoteTally tally;
  std::set<EnsembleFlag> flags;

  friend bool operator==(const EnsembleResult&,
                         const EnsembleResult&) = default;
};

/// Combines one example's predictions. When every voter abstains the label
/// falls back to the first valid label along explanation_order, then along
/// the remaining systems, and InsufficientVotes is flagged.
EnsembleResult ensemble_example(
    const std::string& example_id,
    const std::map<SystemId, Prediction>& predictions,
    const EnsembleConfig& config);

/// One result per example, sorted by id. Every voter needs a batch; batches
/// that are present must all cover the same ids (DataError lists the
/// symmetric difference otherwise).
/// Every voter needs a batch. All supplied batches must share one id set;
/// systems outside the config only matter when every voter abstains.
std::vector<EnsembleResult> run_ensemble(
    const std::map<SystemId, PredictionBatch>& batches,
    const EnsembleConfig& config);

std::string serialize_ensemble_result(const EnsembleResult& result);
EnsembleResult parse_ensemble_record(const std::string& line);
void write_ensemble_results(const std::vector<EnsembleResult>& results,
                            const std::filesystem::path& path);
std::vector<EnsembleResult> load_ensemble_results(
    const std::filesystem::path& path);

}  // namespace dflute
