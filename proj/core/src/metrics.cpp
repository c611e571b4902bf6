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

#include "dflute/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include <json.hpp>

#include "dflute/errors.hpp"
#include "dflute/text.hpp"
#include "parallel.hpp"

namespace dflute {
namespace {

using json = nlohmann::ordered_json;

double clamp_score(double v) { return std::clamp(v, 0.0, 100.0); }

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

template <typename T>
std::size_t multiset_overlap(std::vector<T> a, std::vector<T> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

std::vector<std::uint16_t> bigrams(const std::string& s) {
  std::vector<std::uint16_t> out;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    out.push_back(static_cast<std::uint16_t>(
        (static_cast<unsigned char>(s[i]) << 8) |
        static_cast<unsigned char>(s[i + 1])));
  }
  return out;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string threshold_header(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "Acc@%g", s);
  return buf;
}

int row_rank(const std::string& name) {
  if (auto s = parse_system(name)) return table_rank(*s);
  return 100;
}

void pad_right(std::string& out, std::string_view s, std::size_t width) {
  out += s;
  if (s.size() < width) out.append(width - s.size(), ' ');
}

void pad_left(std::string& out, std::string_view s, std::size_t width) {
  if (s.size() < width) out.append(width - s.size(), ' ');
  out += s;
}

std::vector<ScoredPrediction> score_rows(
    const std::string& row_name, std::span<const Example> gold,
    const std::vector<std::optional<std::pair<std::optional<Label>,
                                              std::string>>>& preds,
    ExplanationScorer& scorer) {
  std::vector<ScoredPrediction> out(gold.size());
  detail::parallel_for(gold.size(), scorer.max_in_flight(), [&](std::size_t i) {
    auto& row = out[i];
    row.id = gold[i].id;
    row.system = row_name;
    if (!preds[i] || !preds[i]->first) return;
    row.label_correct = preds[i]->first == gold[i].gold_label;
    row.explanation_score =
        clamp_score(scorer.score(preds[i]->second, gold[i].gold_explanations));
  });
  return out;
}

}  // namespace

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (text::is_word_byte(c)) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                        : static_cast<char>(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double token_f1(std::string_view candidate, std::string_view reference) {
  const auto c = normalize_tokens(candidate);
  const auto r = normalize_tokens(reference);
  if (c.empty() && r.empty()) return 100.0;
  if (c.empty() || r.empty()) return 0.0;
  const auto overlap = static_cast<double>(multiset_overlap(c, r));
  if (overlap == 0.0) return 0.0;
  const double precision = overlap / static_cast<double>(c.size());
  const double recall = overlap / static_cast<double>(r.size());
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

double bigram_dice(std::string_view candidate, std::string_view reference) {
  const std::string c = join_tokens(normalize_tokens(candidate));
  const std::string r = join_tokens(normalize_tokens(reference));
  const auto bc = bigrams(c);
  const auto br = bigrams(r);
  if (bc.empty() && br.empty()) return c == r ? 100.0 : 0.0;
  if (bc.empty() || br.empty()) return 0.0;
  const auto overlap = static_cast<double>(multiset_overlap(bc, br));
  return 100.0 * 2.0 * overlap / static_cast<double>(bc.size() + br.size());
}

double lexical_pair_score(std::string_view candidate,
                          std::span<const std::string> references) {
  if (references.empty()) throw UsageError("no reference explanations");
  double best = 0.0;
  for (const auto& ref : references) {
    const double s =
        (token_f1(candidate, ref) + bigram_dice(candidate, ref)) / 2.0;
    best = std::max(best, s);
  }
  return clamp_score(best);
}

double remote_score(const Endpoint& endpoint, std::string_view candidate,
                    std::span<const std::string> references) {
  if (references.empty()) throw UsageError("no reference explanations");
  json req;
  req["candidate"] = candidate;
  req["references"] = json::array();
  for (const auto& r : references) req["references"].push_back(r);
  const std::string body =
      post_json(endpoint, req.dump(-1, ' ', false, json::error_handler_t::replace));
  double combined = 0.0;
  try {
    combined = json::parse(body).at("combined").get<double>();
  } catch (const json::exception&) {
    throw TransportError("malformed score response from " + endpoint.url, 1);
  }
  if (std::isnan(combined)) {
    throw TransportError("score service returned NaN", 1);
  }
  return clamp_score(combined * 100.0);
}

RemoteMetricScorer::RemoteMetricScorer(Endpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  validate_endpoint(endpoint_);
}

double acc_at(std::span<const ScoredPrediction> scored, double threshold) {
  if (scored.empty()) throw UsageError("acc_at over an empty set");
  std::size_t hits = 0;
  for (const auto& s : scored) {
    if (s.label_correct && s.explanation_score >= threshold) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(scored.size());
}

int table_rank(SystemId system) {
  switch (system) {
    case SystemId::S1_Original: return 0;
    case SystemId::S2_FigType: return 1;
    case SystemId::S3_Emotion: return 2;
    case SystemId::S3_Motivation: return 3;
    case SystemId::S3_Consequence: return 4;
    case SystemId::S3_SocialNorm: return 5;
    case SystemId::S3_AllDims: return 6;
    case SystemId::S4_TwoStep: return 7;
  }
  return 99;
}

Evaluation evaluate(const std::map<SystemId, PredictionBatch>& batches,
                    const std::vector<EnsembleResult>* ensemble,
                    std::span<const Example> gold, ExplanationScorer& scorer,
                    std::vector<double> thresholds) {
  if (thresholds.empty()) throw UsageError("no thresholds given");
  for (double s : thresholds) {
    if (!(s >= 0.0 && s <= 100.0)) {
      throw UsageError("threshold out of [0, 100]: " + std::to_string(s));
    }
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i].labeled()) {
      throw UsageError("gold example " + gold[i].id + " has no label");
    }
    index.emplace(gold[i].id, i);
  }

  using Slot = std::optional<std::pair<std::optional<Label>, std::string>>;
  Evaluation ev;
  ev.report.thresholds = thresholds;
  ev.report.n_examples = gold.size();
  ev.report.scorer = scorer.describe();

  auto add_row = [&](const std::string& name, const std::vector<Slot>& slots) {
    auto scored = score_rows(name, gold, slots, scorer);
    ReportRow row{name, {}};
    for (double s : thresholds) row.accuracy.push_back(acc_at(scored, s));
    ev.report.rows.push_back(std::move(row));
    ev.scored.insert(ev.scored.end(), scored.begin(), scored.end());
  };

  std::vector<const PredictionBatch*> ordered;
  for (const auto& [system, batch] : batches) ordered.push_back(&batch);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) {
    return table_rank(a->system) < table_rank(b->system);
  });
  for (const PredictionBatch* batch : ordered) {
    const std::string name(system_name(batch->system));
    std::vector<Slot> slots(gold.size());
    for (const auto& p : batch->predictions) {
      auto it = index.find(p.example_id);
      if (it == index.end()) {
        throw DataError("unknown example id " + p.example_id + " in " + name +
                        " predictions");
      }
      slots[it->second] = std::pair{p.label, p.explanation};
    }
    add_row(name, slots);
  }
  if (ensemble != nullptr) {
    std::vector<Slot> slots(gold.size());
    for (const auto& r : *ensemble) {
      auto it = index.find(r.example_id);
      if (it == index.end()) {
        throw DataError("unknown example id " + r.example_id +
                        " in ensemble results");
      }
      slots[it->second] = std::pair{r.label, r.explanation};
    }
    add_row(std::string(kEnsembleRow), slots);
  }
  return ev;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  if (report.rows.empty()) throw UsageError("report has no rows");
  std::vector<const ReportRow*> rows;
  for (const auto& r : report.rows) {
    if (r.accuracy.size() != report.thresholds.size()) {
      throw UsageError("row " + r.name + " does not match the thresholds");
    }
    rows.push_back(&r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) {
    return row_rank(a->name) < row_rank(b->name);
  });

  std::vector<std::string> headers;
  for (double s : report.thresholds) headers.push_back(threshold_header(s));

  std::string out;
  if (format == ReportFormat::Markdown) {
    out += "| System |";
    for (const auto& h : headers) out += " " + h + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < headers.size(); ++i) out += "---:|";
    out += '\n';
    for (const ReportRow* r : rows) {
      out += "| " + r->name + " |";
      for (double v : r->accuracy) out += " " + format_value(v) + " |";
      out += '\n';
    }
    return out;
  }

  std::size_t name_width = 6;
  for (const ReportRow* r : rows) name_width = std::max(name_width, r->name.size());
  pad_right(out, "System", name_width);
  for (const auto& h : headers) {
    out += "  ";
    pad_left(out, h, std::max<std::size_t>(h.size(), 5));
  }
  out += '\n';
  for (const ReportRow* r : rows) {
    pad_right(out, r->name, name_width);
    for (std::size_t i = 0; i < r->accuracy.size(); ++i) {
      out += "  ";
      pad_left(out, format_value(r->accuracy[i]),
               std::max<std::size_t>(headers[i].size(), 5));
    }
    out += '\n';
  }
  return out;
}

std::string serialize_scored(const ScoredPrediction& s) {
  json obj;
  obj["id"] = s.id;
  obj["system"] = s.system;
  obj["label_correct"] = s.label_correct;
  obj["explanation_score"] = s.explanation_score;
  return obj.dump();
}

}  // namespace dflute
