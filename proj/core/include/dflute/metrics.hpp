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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dflute/corpus.hpp"
#include "dflute/ensemble.hpp"
#include "dflute/http.hpp"
#include "dflute/inference.hpp"

namespace dflute {

/// Explanation quality on a 0..100 scale against one or more references.
class ExplanationScorer {
 public:
  virtual ~ExplanationScorer() = default;

  virtual double score(std::string_view candidate,
                       std::span<const std::string> references) = 0;
  virtual std::size_t max_in_flight() const { return 1; }
  virtual std::string describe() const = 0;
};

/// Lowercased ASCII, split on runs of non-alphanumeric bytes. Bytes >= 0x80
/// count as word characters so UTF-8 text survives.
std::vector<std::string> normalize_tokens(std::string_view text);

/// Multiset token F1 x 100. Both empty -> 100, one empty -> 0.
double token_f1(std::string_view candidate, std::string_view reference);

/// Dice coefficient x 100 over byte bigrams of the normalized tokens joined
/// by single spaces. Without bigrams on both sides the score is 100 if the
/// normalized strings match and 0 otherwise.
double bigram_dice(std::string_view candidate, std::string_view reference);

/// max over references of (token_f1 + bigram_dice) / 2, clamped to
/// [0, 100]. Throws UsageError on an empty reference list.
double lexical_pair_score(std::string_view candidate,
                          std::span<const std::string> references);

class LexicalPairScorer final : public ExplanationScorer {
 public:
  double score(std::string_view candidate,
               std::span<const std::string> references) override {
    return lexical_pair_score(candidate, references);
  }
  std::string describe() const override { return "builtin-lexical-pair"; }
};

/// POST {"candidate", "references"} to a metric service and read back
/// "combined" (already max-aggregated over references by the service),
/// scaled by 100 and clamped. Transport failures throw; there is no
/// fallback to the builtin scorer.
double remote_score(const Endpoint& endpoint, std::string_view candidate,
                    std::span<const std::string> references);

class RemoteMetricScorer final : public ExplanationScorer {
 public:
  explicit RemoteMetricScorer(Endpoint endpoint);

  double score(std::string_view candidate,
               std::span<const std::string> references) override {
    return remote_score(endpoint_, candidate, references);
  }
  std::size_t max_in_flight() const override {
    return endpoint_.max_in_flight;
  }
  std::string describe() const override { return "remote:" + endpoint_.url; }

 private:
  Endpoint endpoint_;
};

struct ScoredPrediction {
  std::string id;
  std::string system;  // system name or "ensemble"
  bool label_correct = false;
  double explanation_score = 0.0;
};

/// Percentage of items with a correct label and a score >= threshold.
/// Throws UsageError on empty input.
double acc_at(std::span<const ScoredPrediction> scored, double threshold);

inline constexpr std::string_view kEnsembleRow = "ensemble";

struct ReportRow {
  std::string name;
  std::vector<double> accuracy;  // parallel to EvalReport::thresholds
};

struct EvalReport {
  std::vector<double> thresholds;
  std::vector<ReportRow> rows;  // table order, ensemble last
  std::size_t n_examples = 0;
  std::string scorer;
};

struct Evaluation {
  EvalReport report;
  std::vector<ScoredPrediction> scored;  // row order, then gold order
};

/// Gold examples must be labeled. Examples without a prediction count as
/// incorrect; a prediction for an unknown id is a DataError.
Evaluation evaluate(const std::map<SystemId, PredictionBatch>& batches,
                    const std::vector<EnsembleResult>* ensemble,
                    std::span<const Example> gold, ExplanationScorer& scorer,
                    std::vector<double> thresholds = {0.0, 50.0, 60.0});

enum class ReportFormat { Plain, Markdown };

/// Acc@s columns to one decimal; systems in results-table order with the
/// ensemble last. Throws UsageError on a report without rows.
std::string render_report(const EvalReport& report, ReportFormat format);

/// Position of a row in the results table (S1, S2, S3 emotion, motivation,
/// consequence, social norm, all dimensions, S4, ensemble).
int table_rank(SystemId system);

std::string serialize_scored(const ScoredPrediction& scored);

}  // namespace dflute
