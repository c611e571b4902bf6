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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "dflute/errors.hpp"
#include "dflute/metrics.hpp"
#include "fake_service.hpp"
#include "generators.hpp"

namespace dflute {
namespace {

std::vector<std::string> refs(std::initializer_list<const char*> xs) {
  return {xs.begin(), xs.end()};
}

TEST(Lexical, CatSatRan) {
  // Values from the independent Python oracle over the stated formulas.
  EXPECT_DOUBLE_EQ(token_f1("the cat sat", "the cat ran"), 66.666666666666657);
  EXPECT_DOUBLE_EQ(bigram_dice("the cat sat", "the cat ran"), 70.0);
  EXPECT_DOUBLE_EQ(lexical_pair_score("the cat sat", refs({"the cat ran"})), 68.333333333333329);
}

TEST(Lexical, EdgeCases) {
  EXPECT_DOUBLE_EQ(lexical_pair_score("", refs({"x"})), 0.0);
  EXPECT_DOUBLE_EQ(lexical_pair_score("", refs({""})), 100.0);
  EXPECT_DOUBLE_EQ(lexical_pair_score("...", refs({"!!"})), 100.0);  // both normalize to nothing
  EXPECT_DOUBLE_EQ(lexical_pair_score("a", refs({"a"})), 100.0);    // no bigrams, equal
  EXPECT_DOUBLE_EQ(bigram_dice("a", "b"), 0.0);
  EXPECT_DOUBLE_EQ(lexical_pair_score("Hello, World!", refs({"hello world"})), 100.0);
  EXPECT_DOUBLE_EQ(lexical_pair_score("xyz", refs({"abc"})), 0.0);
  EXPECT_THROW(lexical_pair_score("x", {}), UsageError);
  EXPECT_EQ(normalize_tokens("It's  Café-au-lait, 42!"),
            (std::vector<std::string>{"it", "s", "café", "au", "lait", "42"}));
}

TEST(Lexical, MaxOverReferences) {
  EXPECT_DOUBLE_EQ(lexical_pair_score("the cat sat", refs({"zzz", "the cat ran", "qq"})),
                   68.333333333333329);
}

TEST(Lexical, Properties) {
  testing::Gen gen(77);
  for (int i = 0; i < 2000; ++i) {
    const std::string c = gen.sentence(1, 15);
    std::vector<std::string> rs;
    const std::size_t n = gen.uniform(1, 4);
    for (std::size_t k = 0; k < n; ++k) rs.push_back(gen.sentence(0, 15));
    const double base = lexical_pair_score(c, rs);
    ASSERT_GE(base, 0.0);
    ASSERT_LE(base, 100.0);
    ASSERT_DOUBLE_EQ(lexical_pair_score(c, std::vector<std::string>{c}), 100.0) << c;
    auto more = rs;
    more.push_back(gen.sentence(0, 15));
    ASSERT_GE(lexical_pair_score(c, more), base);
    more.push_back(c);
    ASSERT_DOUBLE_EQ(lexical_pair_score(c, more), 100.0);
    const double f = token_f1(c, rs[0]);
    const double d = bigram_dice(c, rs[0]);
    ASSERT_TRUE(f >= 0.0 && f <= 100.0 && d >= 0.0 && d <= 100.0);
    ASSERT_DOUBLE_EQ(token_f1(c, rs[0]), token_f1(rs[0], c));
  }
}

TEST(AccAt, Examples) {
  std::vector<ScoredPrediction> all = {{"a", "S1", true, 100}, {"b", "S1", true, 100}};
  EXPECT_DOUBLE_EQ(acc_at(all, 60), 100.0);
  std::vector<ScoredPrediction> four = {
      {"a", "S1", true, 80}, {"b", "S1", true, 50}, {"c", "S1", false, 90}, {"d", "S1", true, 49.9}};
  EXPECT_DOUBLE_EQ(acc_at(four, 50), 50.0);
  EXPECT_DOUBLE_EQ(acc_at(four, 0), 75.0);
  EXPECT_THROW(acc_at({}, 0), UsageError);
}

TEST(AccAt, MonotoneAndZeroIsLabelAccuracy) {
  testing::Gen gen(4);
  for (int round = 0; round < 200; ++round) {
    std::vector<ScoredPrediction> xs(gen.uniform(1, 50));
    std::size_t correct = 0;
    for (auto& x : xs) {
      x.label_correct = gen.chance(0.6);
      x.explanation_score = gen.real(0, 100);
      correct += x.label_correct;
    }
    ASSERT_DOUBLE_EQ(acc_at(xs, 0), 100.0 * static_cast<double>(correct) / static_cast<double>(xs.size()));
    double prev = 101;
    for (double s = 0; s <= 100; s += 5) {
      const double v = acc_at(xs, s);
      ASSERT_LE(v, prev);
      prev = v;
    }
  }
}

std::vector<Example> gold_set(std::size_t n) {
  testing::Gen gen(31);
  std::vector<Example> xs;
  for (std::size_t i = 0; i < n; ++i) xs.push_back(gen.labeled_example("g" + std::to_string(i)));
  return xs;
}

PredictionBatch echo_batch(SystemId s, const std::vector<Example>& gold, bool flip) {
  PredictionBatch b;
  b.system = s;
  for (const auto& ex : gold) {
    Prediction p;
    p.system = s;
    p.example_id = ex.id;
    p.label = flip ? (*ex.gold_label == Label::Entailment ? Label::Contradiction : Label::Entailment)
                   : *ex.gold_label;
    p.explanation = ex.gold_explanations.front();
    b.predictions.push_back(p);
  }
  return b;
}

TEST(Evaluate, EchoIsPerfectFlipIsZero) {
  const auto gold = gold_set(25);
  std::map<SystemId, PredictionBatch> batches;
  batches[SystemId::S4_TwoStep] = echo_batch(SystemId::S4_TwoStep, gold, false);
  batches[SystemId::S1_Original] = echo_batch(SystemId::S1_Original, gold, true);
  LexicalPairScorer scorer;
  const auto ev = evaluate(batches, nullptr, gold, scorer);
  ASSERT_EQ(ev.report.rows.size(), 2u);
  EXPECT_EQ(ev.report.rows[0].name, "S1_Original");
  EXPECT_EQ(ev.report.rows[0].accuracy, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(ev.report.rows[1].accuracy, (std::vector<double>{100, 100, 100}));
  EXPECT_EQ(ev.report.n_examples, 25u);
  EXPECT_EQ(ev.report.scorer, "builtin-lexical-pair");
  EXPECT_EQ(ev.scored.size(), 50u);
}

TEST(Evaluate, MissingCountsIncorrectAndUnknownIdThrows) {
  const auto gold = gold_set(4);
  std::map<SystemId, PredictionBatch> batches;
  batches[SystemId::S2_FigType] = echo_batch(SystemId::S2_FigType, gold, false);
  batches[SystemId::S2_FigType].predictions.pop_back();
  LexicalPairScorer scorer;
  auto ev = evaluate(batches, nullptr, gold, scorer);
  EXPECT_DOUBLE_EQ(ev.report.rows[0].accuracy[0], 75.0);

  batches[SystemId::S2_FigType].predictions[0].example_id = "stranger";
  try {
    evaluate(batches, nullptr, gold, scorer);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("stranger"), std::string::npos);
  }
  EXPECT_THROW(evaluate(batches, nullptr, gold, scorer, {}), UsageError);
  EXPECT_THROW(evaluate(batches, nullptr, gold, scorer, {101}), UsageError);
}

TEST(Evaluate, EnsembleRowIsLastAndAbstainIsWrong) {
  const auto gold = gold_set(2);
  std::map<SystemId, PredictionBatch> batches;
  batches[SystemId::S1_Original] = echo_batch(SystemId::S1_Original, gold, false);
  std::vector<EnsembleResult> ens(2);
  ens[0].example_id = gold[0].id;
  ens[0].label = gold[0].gold_label;
  ens[0].explanation = gold[0].gold_explanations.front();
  ens[1].example_id = gold[1].id;  // abstained
  LexicalPairScorer scorer;
  const auto ev = evaluate(batches, &ens, gold, scorer, {0});
  ASSERT_EQ(ev.report.rows.size(), 2u);
  EXPECT_EQ(ev.report.rows[1].name, "ensemble");
  EXPECT_DOUBLE_EQ(ev.report.rows[1].accuracy[0], 50.0);
}

TEST(Render, ThreeColumnLiterals) {
  EvalReport report;
  report.thresholds = {0, 50, 60};
  report.rows = {{"ensemble", {95.9, 89.8, 63.7}}};
  EXPECT_EQ(render_report(report, ReportFormat::Plain),
            "System    Acc@0  Acc@50  Acc@60\n"
            "ensemble   95.9    89.8    63.7\n");
  EXPECT_EQ(render_report(report, ReportFormat::Markdown),
            "| System | Acc@0 | Acc@50 | Acc@60 |\n|---|---:|---:|---:|\n| ensemble | 95.9 | 89.8 | 63.7 |\n");
  report.rows.clear();
  EXPECT_THROW(render_report(report, ReportFormat::Plain), UsageError);
}

TEST(Render, TableOrderEnsembleLast) {
  EvalReport report;
  report.thresholds = {0, 50, 60};
  report.rows = {{"ensemble", {1, 1, 1}}, {"S4_TwoStep", {1, 1, 1}}, {"S3_Emotion", {1, 1, 1}},
                 {"S3_Consequence", {1, 1, 1}}, {"S1_Original", {1, 1, 1}}};
  std::istringstream in(render_report(report, ReportFormat::Plain));
  std::vector<std::string> names;
  for (std::string line; std::getline(in, line);) names.push_back(line.substr(0, line.find(' ')));
  EXPECT_EQ(names, (std::vector<std::string>{"System", "S1_Original", "S3_Emotion", "S3_Consequence",
                                             "S4_TwoStep", "ensemble"}));
}

// Minimal pipe-table reader for the round-trip check.
std::vector<std::vector<std::string>> parse_markdown(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.size() < 2 || line.front() != '|' || line.back() != '|') return {};
    std::vector<std::string> cells;
    std::size_t start = 1;
    for (std::size_t bar; (bar = line.find('|', start)) != std::string::npos; start = bar + 1) {
      std::string cell = line.substr(start, bar - start);
      cell.erase(0, cell.find_first_not_of(' '));
      cell.erase(cell.find_last_not_of(' ') + 1);
      cells.push_back(cell);
    }
    rows.push_back(cells);
  }
  return rows;
}

TEST(Render, MarkdownRoundTrips) {
  testing::Gen gen(13);
  for (int round = 0; round < 200; ++round) {
    EvalReport report;
    const std::size_t nt = gen.uniform(1, 4);
    for (std::size_t i = 0; i < nt; ++i) report.thresholds.push_back(static_cast<double>(gen.uniform(0, 100)));
    std::vector<SystemId> systems(kAllSystems.begin(), kAllSystems.end());
    std::shuffle(systems.begin(), systems.end(), gen.rng());
    systems.resize(gen.uniform(1, 8));
    for (SystemId s : systems) {
      ReportRow row{std::string(system_name(s)), {}};
      for (std::size_t i = 0; i < nt; ++i) row.accuracy.push_back(std::round(gen.real(0, 100) * 10) / 10);
      report.rows.push_back(row);
    }
    const auto table = parse_markdown(render_report(report, ReportFormat::Markdown));
    ASSERT_EQ(table.size(), report.rows.size() + 2);
    ASSERT_EQ(table[0].size(), nt + 1);
    for (std::size_t i = 0; i < nt; ++i) {
      ASSERT_DOUBLE_EQ(std::stod(table[0][i + 1].substr(4)), report.thresholds[i]);
      ASSERT_EQ(table[1][i + 1], "---:");
    }
    for (std::size_t r = 2; r < table.size(); ++r) {
      const auto s = parse_system(table[r][0]);
      ASSERT_TRUE(s);
      const auto it = std::find_if(report.rows.begin(), report.rows.end(),
                                   [&](const ReportRow& row) { return row.name == table[r][0]; });
      ASSERT_NE(it, report.rows.end());
      for (std::size_t i = 0; i < nt; ++i) ASSERT_NEAR(std::stod(table[r][i + 1]), it->accuracy[i], 1e-9);
      if (r > 2) ASSERT_LT(table_rank(*parse_system(table[r - 1][0])), table_rank(*s));
    }
  }
}

TEST(RemoteScore, ClampsAndSendsReferences) {
  std::atomic<int> refs_seen{0};
  testing::FakeService scorer("/score", [&](const std::string& body) {
    const auto req = nlohmann::json::parse(body);
    refs_seen = static_cast<int>(req.at("references").size());
    const std::string cand = req.at("candidate");
    if (cand == "outlier") return std::pair{200, std::string(R"({"combined":1.07})")};
    if (cand.empty()) return std::pair{200, std::string(R"({"combined":-0.4})")};
    return std::pair{200, std::string(R"({"combined":0.5})")};
  });
  Endpoint ep;
  ep.url = scorer.url();
  const auto rs = refs({"r1", "r2"});
  EXPECT_DOUBLE_EQ(remote_score(ep, "outlier", rs), 100.0);
  EXPECT_DOUBLE_EQ(remote_score(ep, "", rs), 0.0);
  EXPECT_DOUBLE_EQ(remote_score(ep, "fine", rs), 50.0);
  EXPECT_EQ(refs_seen, 2);
  RemoteMetricScorer remote(ep);
  EXPECT_DOUBLE_EQ(remote.score("fine", rs), 50.0);
}

TEST(RemoteScore, TransportFailureIsAnError) {
  testing::FakeService broken("/score", [](const std::string&) { return std::pair{502, std::string()}; });
  Endpoint ep;
  ep.url = broken.url();
  ep.retry.initial_backoff = std::chrono::milliseconds(1);
  EXPECT_THROW(remote_score(ep, "x", refs({"y"})), TransportError);
  EXPECT_EQ(broken.requests(), 3);
  testing::FakeService garbled("/score", [](const std::string&) { return std::pair{200, std::string("{}")}; });
  ep.url = garbled.url();
  EXPECT_THROW(remote_score(ep, "x", refs({"y"})), TransportError);
}

}  // namespace
}  // namespace dflute
