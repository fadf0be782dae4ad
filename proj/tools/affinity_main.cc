// Copyright 2026 The Affinity Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line driver: gen, analyze, encode, train, evaluate, predict.
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 internal. Failures print one
// `error=<Code> message=<text>` line to stderr.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "affinity/classifiers.h"
#include "affinity/ensemble_eval.h"
#include "affinity/feature_pipeline.h"
#include "affinity/matcher.h"
#include "affinity/parallel.h"
#include "affinity/status.h"
#include "affinity/synthetic_trace.h"
#include "affinity/text.h"
#include "affinity/trace_io.h"

namespace affinity {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct Globals {
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  bool strict = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string OneLine(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

void RequireDistinct(const std::vector<std::string>& inputs,
                     const std::vector<std::string>& outputs) {
  namespace fs = std::filesystem;
  auto normal = [](const std::string& p) { return fs::absolute(p).lexically_normal().string(); };
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    for (const std::string& in : inputs) {
      if (normal(in) == normal(outputs[i])) {
        throw UsageError("output path " + outputs[i] + " is also an input");
      }
    }
    for (std::size_t j = i + 1; j < outputs.size(); ++j) {
      if (normal(outputs[i]) == normal(outputs[j])) {
        throw UsageError("output path " + outputs[i] + " is given twice");
      }
    }
  }
}

std::string Footer(const Metadata& metadata) {
  std::string out;
  for (const auto& [key, value] : metadata) out += "# " + key + "=" + value + "\n";
  return out;
}

// ---------------------------------------------------------------- gen

struct GenOptions {
  std::string preset = "small";
  std::string out_dir;
  std::optional<std::uint32_t> nodes;
  std::optional<std::uint32_t> jobs;
  std::optional<double> group_a_fraction;
  std::optional<double> group_c_fraction;
  std::optional<double> unconstrained_fraction;
  std::optional<std::uint64_t> interval_us;
};

void CmdGen(const Globals& g, const GenOptions& o) {
  SyntheticTraceConfig config = SyntheticPreset(o.preset, g.seed);
  if (o.nodes) config.n_nodes = *o.nodes;
  if (o.jobs) config.n_jobs = *o.jobs;
  if (o.group_a_fraction) config.group_a_fraction = *o.group_a_fraction;
  if (o.group_c_fraction) config.group_c_fraction = *o.group_c_fraction;
  if (o.unconstrained_fraction) config.unconstrained_fraction = *o.unconstrained_fraction;
  if (o.interval_us) config.interval_us = *o.interval_us;
  const SyntheticTrace trace = GenerateSyntheticTrace(config);

  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) Fail(ErrorCode::kIOFailure, "cannot create " + o.out_dir + ": " + ec.message());
  const std::filesystem::path dir(o.out_dir);
  const std::string nodes = WriteTrace(trace.node_events, TraceKind::kNodes);
  const std::string tasks = WriteTrace(trace.task_events, TraceKind::kTasks);
  std::string oracle = "job_id,task_index,count,group\n";
  for (const auto& [key, count] : trace.oracle) {
    oracle += std::to_string(key.job_id) + "," + std::to_string(key.task_index) + "," +
              std::to_string(count) + "," +
              (count > 0 ? ClassifyGroup(static_cast<std::int64_t>(count)).str() : "") + "\n";
  }
  WriteFile((dir / "nodes.csv").string(), nodes);
  WriteFile((dir / "tasks.csv").string(), tasks);
  WriteFile((dir / "oracle.csv").string(), oracle);

  nlohmann::ordered_json manifest;
  manifest["seed"] = g.seed;
  manifest["preset"] = o.preset;
  manifest["config"] = {{"n_nodes", config.n_nodes},
                        {"n_attributes", config.n_attributes},
                        {"n_jobs", config.n_jobs},
                        {"group_a_fraction", config.group_a_fraction},
                        {"group_c_fraction", config.group_c_fraction},
                        {"unconstrained_fraction", config.unconstrained_fraction},
                        {"interval_us", config.interval_us}};
  manifest["files"] = {{"nodes.csv", Crc32Hex(nodes)},
                       {"tasks.csv", Crc32Hex(tasks)},
                       {"oracle.csv", Crc32Hex(oracle)}};
  WriteFile((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  std::cout << "nodes_events=" << trace.node_events.size()
            << " task_events=" << trace.task_events.size() << " tasks=" << trace.oracle.size()
            << "\n";
}

// ------------------------------------------------------------ analyze

struct AnalyzeOptions {
  std::string nodes;
  std::string tasks;
  std::string stats;
  std::string rows;
  std::uint64_t interval_us = 300'000'000;
};

void CmdAnalyze(const Globals& g, const AnalyzeOptions& o) {
  RequireDistinct({o.nodes, o.tasks}, {o.stats, o.rows});
  if (o.interval_us == 0) throw UsageError("--interval-us must be positive");
  const std::string nodes = ReadFile(o.nodes);
  const std::string tasks = ReadFile(o.tasks);
  std::istringstream nodes_in(nodes);
  std::istringstream tasks_in(tasks);
  MergedTraceReader reader(nodes_in, tasks_in);
  TraceAnalyzer analyzer({.strict = g.strict}, o.interval_us);
  const auto start = std::chrono::steady_clock::now();
  while (auto event = reader.Next()) analyzer.Apply(*event);
  analyzer.Finish();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const MatcherDiagnostics& d = analyzer.state().diagnostics();
  Metadata metadata = {{"seed", std::to_string(g.seed)},
                       {"nodes_crc32", Crc32Hex(nodes)},
                       {"tasks_crc32", Crc32Hex(tasks)},
                       {"mode", g.strict ? "strict" : "lenient"},
                       {"interval_us", std::to_string(o.interval_us)},
                       {"events", std::to_string(analyzer.events_applied())}};
  const std::string warnings =
      "stale_events=" + std::to_string(d.stale_events) +
      " unknown_node=" + std::to_string(d.unknown_node) +
      " unknown_task=" + std::to_string(d.unknown_task) +
      " duplicate_node=" + std::to_string(d.duplicate_node) +
      " duplicate_task=" + std::to_string(d.duplicate_task) +
      " unsatisfiable_tasks=" + std::to_string(d.unsatisfiable_tasks) +
      " type_mismatch_tasks=" + std::to_string(d.type_mismatch_tasks);
  WriteFile(o.stats, FormatIntervalStatsCsv(analyzer.stats()) + Footer(metadata) +
                         "# warnings " + warnings + "\n");

  RowsFile rows;
  rows.metadata = metadata;
  rows.metadata["warnings"] = warnings;
  for (const SnapshotRow& row : analyzer.rows()) rows.rows.push_back(MakeDataRow(row));
  WriteFile(o.rows, SerializeRows(rows));
  std::cout << "events=" << analyzer.events_applied() << " intervals=" << analyzer.stats().size()
            << " rows=" << rows.rows.size() << " seconds=" << FormatDouble(seconds)
            << " warnings: " << warnings << "\n";
}

// ------------------------------------------------------------- encode

struct EncodeOptions {
  std::string rows;
  std::string out;
};

void CmdEncode(const Globals& g, const EncodeOptions& o) {
  RequireDistinct({o.rows}, {o.out});
  const std::string file = ReadFile(o.rows);
  const RowsFile rows = ParseRows(file);
  Metadata metadata = {{"seed", std::to_string(g.seed)},
                       {"rows_crc32", Crc32Hex(file)},
                       {"rows_in", std::to_string(rows.rows.size())}};
  Dataset dataset = BuildDataset(rows.rows, metadata, g.threads);
  dataset.metadata["rows_out"] = std::to_string(dataset.rows.size());
  WriteDataset(dataset, o.out);
  std::cout << "rows_in=" << rows.rows.size() << " rows_out=" << dataset.rows.size()
            << " width=" << dataset.dictionary.width() << "\n";
}

// -------------------------------------------------------------- train

struct TrainOptions {
  std::string dataset;
  std::string out;
  std::string classifier = "ENSEMBLE";
};

void CmdTrain(const Globals& g, const TrainOptions& o) {
  RequireDistinct({o.dataset}, {o.out});
  const std::string file = ReadFile(o.dataset);
  const Dataset dataset = ParseDataset(file);
  const Metadata metadata = {{"seed", std::to_string(g.seed)},
                             {"dataset_crc32", Crc32Hex(file)},
                             {"classifier", o.classifier}};
  if (o.classifier == "ENSEMBLE") {
    VotingEnsemble ensemble =
        TrainEnsemble(dataset.Features(), dataset.Labels(), g.seed, g.threads);
    ensemble.metadata = metadata;
    WriteFile(o.out, SerializeEnsemble(ensemble));
    std::cout << "members=" << ensemble.members.size() << " width=" << ensemble.width() << "\n";
    return;
  }
  ClassifierSpec spec;
  spec.kind = ParseClassifierKind(o.classifier);
  spec.seed = g.seed;
  spec.threads = g.threads;
  TrainedModel model = Train(spec, dataset);
  model.metadata = metadata;
  WriteFile(o.out, SerializeModel(model));
  std::cout << "classifier=" << o.classifier << " classes=" << model.classes.size()
            << " width=" << model.width << "\n";
}

// ----------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::string dataset;
  std::string report;
  std::string metrics;
  std::string timings;
  std::size_t runs = 10;
  double train_fraction = 0.75;
};

void CmdEvaluate(const Globals& g, const EvaluateOptions& o) {
  std::vector<std::string> outputs = {o.report, o.metrics};
  if (!o.timings.empty()) outputs.push_back(o.timings);
  RequireDistinct({o.dataset}, outputs);
  const std::string file = ReadFile(o.dataset);
  const Dataset dataset = ParseDataset(file);
  const ProtocolReport report =
      RunProtocol(dataset, o.runs, g.seed, o.train_fraction, g.threads);
  const Metadata metadata = {{"seed", std::to_string(g.seed)},
                             {"dataset_crc32", Crc32Hex(file)}};
  WriteFile(o.report, RenderProtocolReport(report, metadata));
  WriteFile(o.metrics, RenderMetricsCsv(report) + Footer(metadata));
  if (!o.timings.empty()) WriteFile(o.timings, RenderTimingsCsv(report) + Footer(metadata));
  double train_wall = 0.0;
  double train_cpu = 0.0;
  for (const RunResult& run : report.runs) {
    train_wall += run.timing.train_wall_seconds;
    train_cpu += run.timing.train_cpu_seconds;
  }
  std::cout << "mean_accuracy=" << FormatDouble(report.mean_accuracy)
            << " train_wall_s=" << FormatDouble(train_wall)
            << " train_cpu_s=" << FormatDouble(train_cpu) << "\n";
}

// ------------------------------------------------------------ predict

struct PredictOptions {
  std::string model;
  std::string dataset;
  std::string rows;
  std::string out;
};

void CmdPredict(const Globals& g, const PredictOptions& o) {
  std::vector<std::string> inputs = {o.model, o.dataset};
  if (!o.rows.empty()) inputs.push_back(o.rows);
  RequireDistinct(inputs, {o.out});
  const std::string model_file = ReadFile(o.model);
  const std::string dataset_file = ReadFile(o.dataset);
  const Dataset dataset = ParseDataset(dataset_file);

  std::string header = "row,count,group,predicted\n";
  std::vector<std::string> prefixes;
  std::vector<EncodedRow> encoded;
  Metadata metadata = {{"seed", std::to_string(g.seed)},
                       {"model_crc32", Crc32Hex(model_file)},
                       {"dataset_crc32", Crc32Hex(dataset_file)}};
  if (o.rows.empty()) {
    encoded = dataset.rows;
    for (std::size_t i = 0; i < encoded.size(); ++i) prefixes.push_back(std::to_string(i));
  } else {
    const std::string rows_file = ReadFile(o.rows);
    metadata["rows_crc32"] = Crc32Hex(rows_file);
    const RowsFile rows = ParseRows(rows_file);
    encoded = EncodeAll(rows.rows, dataset.dictionary, g.threads);
    header = "job_id,task_index,count,group,predicted\n";
    for (const DataRow& row : rows.rows) {
      prefixes.push_back(std::to_string(row.job_id) + "," + std::to_string(row.task_index));
    }
  }
  SparseMatrix features(dataset.dictionary.width());
  for (const EncodedRow& row : encoded) features.AddRow(row.features);

  std::vector<GroupLabel> predicted;
  if (model_file.starts_with("#" + std::string(kEnsembleMagic) + " ")) {
    predicted = PredictEnsemble(ParseEnsemble(model_file), features, g.threads);
  } else {
    predicted = Predict(ParseModel(model_file), features, g.threads);
  }
  std::string out = header;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    out += prefixes[i] + "," + std::to_string(encoded[i].count) + "," + encoded[i].label.str() +
           "," + predicted[i].str() + "\n";
  }
  WriteFile(o.out, out + Footer(metadata));
  std::vector<GroupLabel> truth;
  for (const EncodedRow& row : encoded) truth.push_back(row.label);
  std::cout << "rows=" << encoded.size() << " accuracy=" << FormatDouble(Accuracy(truth, predicted))
            << "\n";
}

int Main(int argc, char** argv) {
  CLI::App app("Constraint-aware task placement analysis");
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML or INI file with option defaults; flags override it");
  Globals g;
  app.add_option("--seed", g.seed, "Base seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker cap, 0 for all cores")->capture_default_str();
  app.add_flag("--strict", g.strict, "Fail on stale or unknown trace events");
  std::function<void()> action;

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a synthetic trace with ground truth");
  gen_cmd->add_option("--preset", gen.preset, "small or desk")->capture_default_str();
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--nodes", gen.nodes, "Node count");
  gen_cmd->add_option("--jobs", gen.jobs, "Job count");
  gen_cmd->add_option("--group-a-fraction", gen.group_a_fraction);
  gen_cmd->add_option("--group-c-fraction", gen.group_c_fraction);
  gen_cmd->add_option("--unconstrained-fraction", gen.unconstrained_fraction);
  gen_cmd->add_option("--interval-us", gen.interval_us);
  gen_cmd->callback([&] { action = [&] { CmdGen(g, gen); }; });

  AnalyzeOptions analyze;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Replay a trace into stats and rows");
  analyze_cmd->add_option("--nodes", analyze.nodes, "Nodes trace")->required();
  analyze_cmd->add_option("--tasks", analyze.tasks, "Tasks trace")->required();
  analyze_cmd->add_option("--stats", analyze.stats, "Interval stats CSV output")->required();
  analyze_cmd->add_option("--rows", analyze.rows, "Rows file output")->required();
  analyze_cmd->add_option("--interval-us", analyze.interval_us)->capture_default_str();
  analyze_cmd->callback([&] { action = [&] { CmdAnalyze(g, analyze); }; });

  EncodeOptions encode;
  CLI::App* encode_cmd = app.add_subcommand("encode", "Compress and one-hot encode rows");
  encode_cmd->add_option("--rows", encode.rows, "Rows file")->required();
  encode_cmd->add_option("--out", encode.out, "Dataset output")->required();
  encode_cmd->callback([&] { action = [&] { CmdEncode(g, encode); }; });

  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a classifier or the ensemble");
  train_cmd->add_option("--dataset", train.dataset, "Dataset file")->required();
  train_cmd->add_option("--out", train.out, "Model output")->required();
  train_cmd
      ->add_option("--classifier", train.classifier,
                   "ENSEMBLE, RIDGE, SGD_HINGE, MLP, KNN, TREE or GNB")
      ->capture_default_str();
  train_cmd->callback([&] { action = [&] { CmdTrain(g, train); }; });

  EvaluateOptions evaluate;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Repeated train/test evaluation");
  evaluate_cmd->add_option("--dataset", evaluate.dataset, "Dataset file")->required();
  evaluate_cmd->add_option("--report", evaluate.report, "Text report output")->required();
  evaluate_cmd->add_option("--metrics", evaluate.metrics, "Metrics CSV output")->required();
  evaluate_cmd->add_option("--timings", evaluate.timings, "Per-run timings CSV output");
  evaluate_cmd->add_option("--runs", evaluate.runs)->capture_default_str()->check(
      CLI::PositiveNumber);
  evaluate_cmd->add_option("--train-fraction", evaluate.train_fraction)
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  evaluate_cmd->callback([&] { action = [&] { CmdEvaluate(g, evaluate); }; });

  PredictOptions predict;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Predict groups with a trained model");
  predict_cmd->add_option("--model", predict.model, "Model or ensemble file")->required();
  predict_cmd->add_option("--dataset", predict.dataset, "Dataset file (rows and dictionary)")
      ->required();
  predict_cmd->add_option("--rows", predict.rows, "Rows file encoded with the dataset dictionary");
  predict_cmd->add_option("--out", predict.out, "Labels CSV output")->required();
  predict_cmd->callback([&] { action = [&] { CmdPredict(g, predict); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error=Usage message=" << OneLine(e.what()) << "\n";
    return kExitUsage;
  }
  try {
    action();
  } catch (const UsageError& e) {
    std::cerr << "error=Usage message=" << OneLine(e.what()) << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error=" << ErrorCodeName(e.code()) << " message=" << OneLine(e.detail())
              << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error=Internal message=" << OneLine(e.what()) << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace
}  // namespace affinity

int main(int argc, char** argv) { return affinity::Main(argc, argv); }
