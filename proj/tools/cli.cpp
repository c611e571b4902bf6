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

#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dflute/corpus.hpp"
#include "dflute/elaboration.hpp"
#include "dflute/ensemble.hpp"
#include "dflute/errors.hpp"
#include "dflute/inference.hpp"
#include "dflute/metrics.hpp"
#include "dflute/prompting.hpp"

namespace dflute::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
  fs::path p = path;
  p += suffix;
  return p;
}

// Resolved config echo written next to each command's outputs.
void echo_config(const fs::path& path, const json& config) {
  write_text(path, config.dump(2) + "\n");
}

void write_failures(const fs::path& path, const std::vector<json>& rows) {
  if (rows.empty()) {
    std::error_code ec;
    fs::remove(path, ec);
    return;
  }
  std::string text;
  for (const auto& r : rows) text += r.dump() + "\n";
  write_text(path, text);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

SystemId require_system(const std::string& name) {
  const auto system = parse_system(name);
  if (!system) throw UsageError("unknown system \"" + name + "\"");
  return *system;
}

std::set<DreamDimension> dims_for(SystemId system) {
  if (system == SystemId::S3_AllDims) {
    return {kAllDimensions.begin(), kAllDimensions.end()};
  }
  if (auto d = system_dimension(system)) return {*d};
  return {};
}

Endpoint make_endpoint(const std::string& url, std::size_t max_in_flight,
                       long timeout_ms) {
  Endpoint e;
  e.url = url;
  e.max_in_flight = max_in_flight;
  e.timeout = std::chrono::milliseconds(timeout_ms);
  validate_endpoint(e);
  return e;
}

json failure_json(const ElaborationFailure& f) {
  json row;
  row["sentence"] = f.sentence;
  row["dimension"] = std::string(dimension_surface(f.dimension));
  row["examples"] = f.example_ids;
  row["error"] = f.message;
  return row;
}

// ---------------------------------------------------------------------------

struct SplitArgs {
  std::string input;
  double ratio = 0.8;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
};

int cmd_split(const SplitArgs& a, Streams io) {
  const auto examples = load_dataset(a.input, false);
  const auto split = split_dataset(examples, a.ratio, a.seed);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_dataset(split.train, dir / "train.jsonl");
  write_dataset(split.validation, dir / "validation.jsonl");

  json config;
  config["command"] = "split";
  config["input"] = a.input;
  config["ratio"] = a.ratio;
  config["seed"] = a.seed;
  config["out_dir"] = a.out_dir;
  config["train"] = split.train.size();
  config["validation"] = split.validation.size();
  echo_config(dir / "split.config.json", config);
  io.out << "train " << split.train.size() << ", validation "
         << split.validation.size() << "\n";
  return kExitOk;
}

struct ElaborateArgs {
  std::string input;
  std::string endpoint;
  bool stub = false;
  std::string dimensions = "consequence,emotion,motivation,social norm";
  std::string cache;
  std::size_t max_in_flight = 4;
  long timeout_ms = 30000;
};

int cmd_elaborate(ElaborateArgs a, Streams io) {
  if (!a.stub && a.endpoint.empty()) {
    if (auto url = env(kDreamUrlEnv)) a.endpoint = *url;
  }
  if (!a.stub && a.endpoint.empty()) {
    throw UsageError(std::string("need --stub, --endpoint or ") + kDreamUrlEnv);
  }
  std::set<DreamDimension> dims;
  for (const auto& name : split_csv(a.dimensions)) {
    const auto d = parse_dimension(name);
    if (!d) throw UsageError("unknown dimension \"" + name + "\"");
    dims.insert(*d);
  }
  if (dims.empty()) throw UsageError("no dimensions requested");

  const auto examples = load_dataset(a.input, false);
  std::unique_ptr<ElaborationProvider> provider;
  if (a.stub) {
    provider = std::make_unique<StubElaborator>();
  } else {
    provider = std::make_unique<RemoteElaborator>(
        make_endpoint(a.endpoint, a.max_in_flight, a.timeout_ms));
  }
  const fs::path cache(a.cache);
  if (cache.has_parent_path()) fs::create_directories(cache.parent_path());
  const auto outcome = elaborate_dataset(*provider, examples, dims, cache);

  json config;
  config["command"] = "elaborate";
  config["input"] = a.input;
  config["provider"] = provider->describe();
  config["dimensions"] = json::array();
  for (DreamDimension d : dims) {
    config["dimensions"].push_back(std::string(dimension_surface(d)));
  }
  config["cache"] = a.cache;
  config["max_in_flight"] = provider->max_in_flight();
  config["timeout_ms"] = a.timeout_ms;
  echo_config(with_suffix(cache, ".config.json"), config);

  std::vector<json> failures;
  for (const auto& f : outcome.failures) failures.push_back(failure_json(f));
  write_failures(with_suffix(cache, ".failures.jsonl"), failures);

  io.out << "fetched " << outcome.fetched << ", cached " << outcome.cache_hits
         << ", failed " << outcome.failures.size() << "\n";
  for (const auto& f : outcome.failures) {
    io.err << "failed: [" << dimension_surface(f.dimension) << "] "
           << f.sentence << ": " << f.message << "\n";
  }
  return outcome.failures.empty() ? kExitOk : kExitPartial;
}

struct PredictArgs {
  std::string input;
  std::string system;
  std::string endpoint;
  std::string mock_file;
  bool gold_echo = false;
  std::string elaborations;
  std::string out;
  std::size_t max_in_flight = 4;
  long timeout_ms = 60000;
};

int cmd_predict(PredictArgs a, Streams io) {
  const SystemId system = require_system(a.system);
  const int chosen = (a.endpoint.empty() ? 0 : 1) +
                     (a.mock_file.empty() ? 0 : 1) + (a.gold_echo ? 1 : 0);
  if (chosen > 1) {
    throw UsageError("--endpoint, --mock-file and --gold-echo are exclusive");
  }
  if (chosen == 0) {
    if (auto url = env(kModelUrlEnv)) {
      a.endpoint = *url;
    } else {
      throw UsageError(std::string("need --endpoint, --mock-file, --gold-echo "
                                   "or ") +
                       kModelUrlEnv);
    }
  }
  const auto needed = dims_for(system);
  if (!needed.empty() && a.elaborations.empty()) {
    throw UsageError(std::string(system_name(system)) +
                     " needs --elaborations");
  }

  const auto examples = load_dataset(a.input, a.gold_echo);
  std::unique_ptr<PredictorBackend> backend;
  if (a.gold_echo) {
    backend = std::make_unique<GoldEchoPredictor>();
  } else if (!a.mock_file.empty()) {
    auto table = MockTablePredictor::load(a.mock_file);
    table->set_max_in_flight(a.max_in_flight);
    backend = std::move(table);
  } else {
    backend = std::make_unique<RemotePredictor>(
        make_endpoint(a.endpoint, a.max_in_flight, a.timeout_ms));
  }

  ElaborationMap sets;
  if (!needed.empty()) {
    auto outcome = elaborations_from_cache(examples, needed, a.elaborations);
    sets = std::move(outcome.sets);
  }
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const auto batch = predict_batch(*backend, system, examples,
                                   needed.empty() ? nullptr : &sets, out);

  json config;
  config["command"] = "predict";
  config["input"] = a.input;
  config["system"] = std::string(system_name(system));
  config["backend"] = backend->describe();
  config["elaborations"] = a.elaborations;
  config["out"] = a.out;
  config["max_in_flight"] = backend->max_in_flight();
  echo_config(with_suffix(out, ".config.json"), config);

  std::vector<json> failures;
  for (const auto& p : batch.predictions) {
    if (p.error) failures.push_back({{"id", p.example_id}, {"error", *p.error}});
  }
  write_failures(with_suffix(out, ".failures.jsonl"), failures);

  io.out << system_name(system) << ": " << batch.predictions.size()
         << " predictions, " << backend->calls() << " backend calls, "
         << failures.size() << " failed\n";
  return failures.empty() ? kExitOk : kExitPartial;
}

std::map<SystemId, PredictionBatch> load_batches(
    const fs::path& dir, const std::vector<SystemId>& systems,
    const std::vector<SystemId>& required) {
  std::map<SystemId, PredictionBatch> batches;
  for (SystemId s : systems) {
    const fs::path file = dir / (std::string(system_name(s)) + ".jsonl");
    if (!fs::exists(file)) {
      if (std::find(required.begin(), required.end(), s) != required.end()) {
        throw DataError("missing prediction file for " +
                        std::string(system_name(s)) + ": " + file.string());
      }
      continue;
    }
    auto batch = load_predictions(file);
    if (batch.system != s) {
      throw DataError(file.string() + " holds " +
                      std::string(system_name(batch.system)) + " predictions");
    }
    batches.emplace(s, std::move(batch));
  }
  return batches;
}

struct EnsembleArgs {
  std::string preds_dir;
  std::string config;
  std::string out;
};

int cmd_ensemble(const EnsembleArgs& a, Streams io) {
  const EnsembleConfig config =
      a.config.empty() ? EnsembleConfig::defaults() : EnsembleConfig::load(a.config);
  config.validate();
  // Unreferenced systems are loaded too; they feed the all-abstain fallback.
  const std::vector<SystemId> all(kAllSystems.begin(), kAllSystems.end());
  const auto batches = load_batches(a.preds_dir, all, config.voters);
  const auto results = run_ensemble(batches, config);
  const fs::path out =
      a.out.empty() ? fs::path(a.preds_dir) / "ensemble.jsonl" : fs::path(a.out);
  write_ensemble_results(results, out);

  json echo;
  echo["command"] = "ensemble";
  echo["preds_dir"] = a.preds_dir;
  echo["config"] = json::parse(config.to_json());
  echo["out"] = out.string();
  echo_config(with_suffix(out, ".config.json"), echo);

  std::size_t flagged = 0;
  for (const auto& r : results) flagged += r.flags.empty() ? 0 : 1;
  io.out << results.size() << " ensemble rows, " << flagged << " flagged\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string gold;
  std::string preds_dir;
  std::string ensemble;
  std::string scorer;
  std::string thresholds = "0,50,60";
  std::string format = "plain";
  std::string out;
  std::string scored_out;
  std::size_t max_in_flight = 4;
  long timeout_ms = 60000;
};

int cmd_evaluate(EvaluateArgs a, Streams io) {
  if (a.scorer.empty()) a.scorer = env(kScorerUrlEnv).value_or("builtin");
  std::vector<double> thresholds;
  for (const auto& t : split_csv(a.thresholds)) {
    try {
      std::size_t used = 0;
      thresholds.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw UsageError("bad threshold \"" + t + "\"");
    }
  }
  ReportFormat format;
  if (a.format == "plain") {
    format = ReportFormat::Plain;
  } else if (a.format == "markdown") {
    format = ReportFormat::Markdown;
  } else {
    throw UsageError("unknown format \"" + a.format + "\"");
  }

  const auto gold = load_dataset(a.gold, true);
  const std::vector<SystemId> all(kAllSystems.begin(), kAllSystems.end());
  const auto batches = load_batches(a.preds_dir, all, {});
  std::optional<std::vector<EnsembleResult>> ensemble;
  if (!a.ensemble.empty()) ensemble = load_ensemble_results(a.ensemble);
  if (batches.empty() && !ensemble) {
    throw DataError("no prediction files found in " + a.preds_dir);
  }

  std::unique_ptr<ExplanationScorer> scorer;
  if (a.scorer == "builtin") {
    scorer = std::make_unique<LexicalPairScorer>();
  } else {
    scorer = std::make_unique<RemoteMetricScorer>(
        make_endpoint(a.scorer, a.max_in_flight, a.timeout_ms));
  }
  const Evaluation ev = evaluate(batches, ensemble ? &*ensemble : nullptr,
                                 gold, *scorer, thresholds);
  const std::string report = render_report(ev.report, format);

  const fs::path out =
      a.out.empty() ? fs::path(a.preds_dir) / "report.txt" : fs::path(a.out);
  write_text(out, report);
  if (!a.scored_out.empty()) {
    std::string text;
    for (const auto& s : ev.scored) text += serialize_scored(s) + "\n";
    write_text(a.scored_out, text);
  }

  json echo;
  echo["command"] = "evaluate";
  echo["gold"] = a.gold;
  echo["preds_dir"] = a.preds_dir;
  echo["ensemble"] = a.ensemble;
  echo["scorer"] = scorer->describe();
  echo["thresholds"] = thresholds;
  echo["format"] = a.format;
  echo["n_examples"] = ev.report.n_examples;
  echo["out"] = out.string();
  echo["scored_out"] = a.scored_out;
  echo_config(with_suffix(out, ".config.json"), echo);

  io.out << report;
  return kExitOk;
}

struct ExportArgs {
  std::string input;
  std::string systems;
  std::string elaborations;
  std::string out;
};

int cmd_export(const ExportArgs& a, Streams io) {
  std::vector<SystemId> systems;
  if (a.systems.empty()) {
    systems.assign(kAllSystems.begin(), kAllSystems.end());
  } else {
    for (const auto& name : split_csv(a.systems)) {
      systems.push_back(require_system(name));
    }
  }
  std::set<DreamDimension> dims;
  for (SystemId s : systems) {
    const auto d = dims_for(s);
    dims.insert(d.begin(), d.end());
  }
  if (!dims.empty() && a.elaborations.empty()) {
    throw UsageError("S3 systems need --elaborations");
  }
  const auto examples = load_dataset(a.input, true);
  ElaborationMap sets;
  if (!dims.empty()) {
    auto outcome = elaborations_from_cache(examples, dims, a.elaborations);
    if (!outcome.complete()) {
      throw DataError(std::to_string(outcome.failures.size()) +
                      " elaborations missing from " + a.elaborations);
    }
    sets = std::move(outcome.sets);
  }

  std::string text;
  std::size_t n = 0;
  for (SystemId s : systems) {
    for (const auto& ex : examples) {
      const ElaborationSet* set = nullptr;
      if (auto it = sets.find(ex.id); it != sets.end()) set = &it->second;
      for (const auto& row : finetune_rows(s, ex, set)) {
        text += serialize_finetune_row(row) + "\n";
        ++n;
      }
    }
  }
  write_text(a.out, text);

  json echo;
  echo["command"] = "export";
  echo["input"] = a.input;
  echo["systems"] = json::array();
  for (SystemId s : systems) echo["systems"].push_back(system_name(s));
  echo["elaborations"] = a.elaborations;
  echo["out"] = a.out;
  echo_config(with_suffix(a.out, ".config.json"), echo);
  io.out << n << " rows\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Figurative-language NLI pipeline: split, elaborate, predict, "
               "ensemble, evaluate"};
  app.name("dflute");
  app.require_subcommand(1);

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "80/20-style seeded split");
  split_cmd->add_option("--input", split.input, "Labeled JSONL dataset")
      ->required();
  split_cmd->add_option("--ratio", split.ratio, "Training fraction")
      ->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--seed", split.seed);
  split_cmd->add_option("--out-dir", split.out_dir);

  ElaborateArgs elab;
  auto* elab_cmd = app.add_subcommand("elaborate", "Fetch scene elaborations");
  elab_cmd->add_option("--input", elab.input)->required();
  auto* elab_endpoint = elab_cmd->add_option("--endpoint", elab.endpoint,
                                             "DREAM service URL");
  elab_cmd->add_flag("--stub", elab.stub, "Deterministic offline elaborator")
      ->excludes(elab_endpoint);
  elab_cmd->add_option("--dimensions", elab.dimensions,
                       "Comma-separated dimensions");
  elab_cmd->add_option("--cache", elab.cache)->required();
  elab_cmd->add_option("--max-in-flight", elab.max_in_flight)
      ->check(CLI::PositiveNumber);
  elab_cmd->add_option("--timeout-ms", elab.timeout_ms);

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Run one system");
  pred_cmd->add_option("--input", pred.input)->required();
  pred_cmd->add_option("--system", pred.system)->required();
  pred_cmd->add_option("--endpoint", pred.endpoint, "Model service URL");
  pred_cmd->add_option("--mock-file", pred.mock_file, "JSONL mock table");
  pred_cmd->add_flag("--gold-echo", pred.gold_echo);
  pred_cmd->add_option("--elaborations", pred.elaborations,
                       "Elaboration cache file");
  pred_cmd->add_option("--out", pred.out)->required();
  pred_cmd->add_option("--max-in-flight", pred.max_in_flight)
      ->check(CLI::PositiveNumber);
  pred_cmd->add_option("--timeout-ms", pred.timeout_ms);

  EnsembleArgs ens;
  auto* ens_cmd = app.add_subcommand("ensemble", "Vote and pick explanations");
  ens_cmd->add_option("--preds-dir", ens.preds_dir)->required();
  ens_cmd->add_option("--config", ens.config, "Ensemble config JSON");
  ens_cmd->add_option("--out", ens.out);

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Acc@s report");
  eval_cmd->add_option("--gold", eval.gold)->required();
  eval_cmd->add_option("--preds-dir", eval.preds_dir)->required();
  eval_cmd->add_option("--ensemble", eval.ensemble);
  eval_cmd->add_option("--scorer", eval.scorer, "builtin or a service URL");
  eval_cmd->add_option("--thresholds", eval.thresholds);
  eval_cmd->add_option("--format", eval.format)
      ->check(CLI::IsMember({"plain", "markdown"}));
  eval_cmd->add_option("--out", eval.out);
  eval_cmd->add_option("--scored-out", eval.scored_out);
  eval_cmd->add_option("--max-in-flight", eval.max_in_flight)
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--timeout-ms", eval.timeout_ms);

  ExportArgs exp;
  auto* exp_cmd = app.add_subcommand("export", "Fine-tuning JSONL export");
  exp_cmd->add_option("--input", exp.input)->required();
  exp_cmd->add_option("--systems", exp.systems, "Comma-separated systems");
  exp_cmd->add_option("--elaborations", exp.elaborations);
  exp_cmd->add_option("--out", exp.out)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  // Range() is inclusive; the split needs an open interval.
  if (split_cmd->parsed() && (split.ratio <= 0.0 || split.ratio >= 1.0)) {
    err << "dflute split: --ratio must be strictly between 0 and 1\n";
    return kExitError;
  }

  const Streams io{out, err};
  try {
    if (split_cmd->parsed()) return cmd_split(split, io);
    if (elab_cmd->parsed()) return cmd_elaborate(elab, io);
    if (pred_cmd->parsed()) return cmd_predict(pred, io);
    if (ens_cmd->parsed()) return cmd_ensemble(ens, io);
    if (eval_cmd->parsed()) return cmd_evaluate(eval, io);
    if (exp_cmd->parsed()) return cmd_export(exp, io);
  } catch (const std::exception& e) {
    err << "dflute: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace dflute::cli
