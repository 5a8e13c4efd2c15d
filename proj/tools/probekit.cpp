// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0
//
// probekit: command-line front end for split building, probe training and
// evaluation, attention analysis, gender translation scoring and correlation.

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "probekit/attnmap.hpp"
#include "probekit/baselines.hpp"
#include "probekit/checkpoint.hpp"
#include "probekit/error.hpp"
#include "probekit/featurestore.hpp"
#include "probekit/gendereval.hpp"
#include "probekit/io.hpp"
#include "probekit/metrics.hpp"
#include "probekit/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace probekit::cli {

constexpr const char* kVersion = "0.1.0";

// Input problems detected by the CLI itself; exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  std::uint64_t seed = 0;
  bool verbose = false;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty() || !fs::is_regular_file(path)) {
    throw UsageError(std::string(what) + " '" + path + "' does not exist or is not a file");
  }
}

void require_parent(const std::string& path, const char* what) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError(std::string(what) + " directory '" + parent.string() + "' does not exist");
  }
}

// Seed precedence: PROBEKIT_SEED, then the subcommand flag, then --seed.
std::uint64_t resolve_seed(const Globals& globals, std::optional<std::uint64_t> local) {
  if (const char* env = std::getenv("PROBEKIT_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const auto value = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return value;
    } catch (const std::exception&) {
      throw UsageError(std::string("PROBEKIT_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return local.value_or(globals.seed);
}

json header(const std::string& command, json config) {
  json h;
  h["tool"] = "probekit";
  h["version"] = kVersion;
  h["command"] = command;
  h["config"] = std::move(config);
  return h;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void log(const Globals& g, const std::string& message) {
  if (g.verbose) std::cerr << "[probekit] " << message << '\n';
}

std::vector<std::string> class_labels() { return {"She", "He"}; }

// ---------------------------------------------------------------------------

struct SplitArgs {
  std::string pack;
  std::string manifest;
  std::string out;
  std::size_t train_size = 0;
  std::size_t dev_size = 0;
  double tolerance = 0.02;
  std::optional<std::uint64_t> seed;
};

void cmd_split(const SplitArgs& a, const Globals& g) {
  require_file(a.pack, "pack");
  if (!a.manifest.empty()) require_file(a.manifest, "manifest");
  require_parent(a.out, "output");

  DatasetManifest manifest = a.manifest.empty() ? scan_pack(a.pack) : read_manifest(a.manifest, a.pack);
  SplitSpec spec{a.train_size, a.dev_size, a.tolerance, resolve_seed(g, a.seed)};
  assign_splits(manifest, spec);
  validate_manifest(manifest);
  std::array<std::array<std::size_t, 2>, 3> counts{};
  for (const auto& e : manifest.entries) {
    if (e.split) ++counts[static_cast<std::size_t>(*e.split)][class_index(e.gender)];
  }
  log(g, "train " + std::to_string(counts[0][0]) + " She / " + std::to_string(counts[0][1]) + " He; dev " +
             std::to_string(counts[1][0]) + " / " + std::to_string(counts[1][1]) + "; test " +
             std::to_string(counts[2][0]) + " / " + std::to_string(counts[2][1]));
  write_manifest(manifest, a.out);
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string pack;
  std::string manifest;
  std::string out_dir;
  std::string probe = "attention";
  TrainConfig config;
  std::optional<std::uint64_t> seed;
};

json training_metadata(const TrainConfig& config, const TrainLog& log_) {
  json m;
  m["train_config"] = config.to_json();
  m["best_epoch"] = log_.best_epoch;
  m["epochs_run"] = log_.epochs.size();
  m["stop_reason"] = log_.stop_reason == StopReason::EarlyStop ? "early_stop" : "max_epochs";
  m["best_dev_loss"] = log_.epochs.at(log_.best_epoch).dev_loss;
  return m;
}

void cmd_train(TrainArgs a, const Globals& g) {
  require_file(a.pack, "pack");
  require_file(a.manifest, "manifest");
  const ProbeKind kind = parse_probe_kind(a.probe);
  a.config.seed = resolve_seed(g, a.seed);
  a.config.validate();

  const DatasetManifest manifest = read_manifest(a.manifest, a.pack);
  const Dataset data = load_dataset(a.pack, manifest);
  if (data.train.empty() || data.dev.empty()) {
    throw ArgumentError("train: manifest has an empty train or dev split");
  }
  log(g, "loaded " + std::to_string(data.train.size()) + " train / " + std::to_string(data.dev.size()) + " dev");

  json config;
  config["pack"] = a.pack;
  config["manifest"] = a.manifest;
  config["probe"] = a.probe;
  config["train"] = a.config.to_json();

  // Everything is computed before the first file is written.
  std::vector<std::pair<fs::path, std::string>> outputs;
  const fs::path dir(a.out_dir);

  auto add_run = [&](Checkpoint checkpoint, const TrainLog& train_log, const std::string& suffix) {
    checkpoint.metadata = training_metadata(a.config, train_log);
    json log_json = header("train", config);
    log_json["log"] = train_log.to_json();
    outputs.emplace_back(dir / ("checkpoint" + suffix + ".json"), checkpoint_to_json(checkpoint));
    outputs.emplace_back(dir / ("train_log" + suffix + ".json"), dump(log_json));
    log(g, "trained " + std::string(to_string(checkpoint.kind)) + suffix + ": " +
               std::to_string(train_log.epochs.size()) + " epochs, best " + std::to_string(train_log.best_epoch));
  };

  switch (kind) {
    case ProbeKind::Attention: {
      auto trained = train_attention_probe(data.train, data.dev, a.config);
      Checkpoint c;
      c.kind = kind;
      c.attention = std::move(trained.params);
      add_run(std::move(c), trained.log, "");
      break;
    }
    case ProbeKind::MaxPool:
    case ProbeKind::MeanPool: {
      const Pooling pooling = kind == ProbeKind::MaxPool ? Pooling::Max : Pooling::Mean;
      const auto train_set = pool_examples(data.train, pooling);
      const auto dev_set = pool_examples(data.dev, pooling);
      auto trained = train_linear_probe(train_set, dev_set, a.config);
      Checkpoint c;
      c.kind = kind;
      c.linear = std::move(trained.params);
      add_run(std::move(c), trained.log, "");
      break;
    }
    case ProbeKind::Positional: {
      if (data.test.empty()) {
        throw ArgumentError("train: positional probes are selected on the test split, which is empty");
      }
      PositionalReport report = evaluate_positional(data, a.config);
      for (std::size_t slot = 0; slot < kRelativePositions.size(); ++slot) {
        Checkpoint c;
        c.kind = kind;
        c.position_slot = slot;
        c.linear = report.params[slot];
        add_run(std::move(c), report.logs[slot], "_pos" + std::to_string(slot));
      }
      json rep = header("train", config);
      rep["positional"] = report.to_json();
      outputs.emplace_back(dir / "positional_report.json", dump(rep));
      break;
    }
  }

  fs::create_directories(dir);
  for (const auto& [path, contents] : outputs) {
    write_file_atomic(path, contents);
  }
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string pack;
  std::string manifest;
  std::string split = "test";
  std::string out;
  std::string predictions;
  std::string dump_attention;
};

void cmd_eval(const EvalArgs& a, const Globals& g) {
  require_file(a.checkpoint, "checkpoint");
  require_file(a.pack, "pack");
  require_file(a.manifest, "manifest");
  for (const auto* p : {&a.out, &a.predictions, &a.dump_attention}) {
    if (!p->empty()) require_parent(*p, "output");
  }
  const Split split = parse_split(a.split);
  const Checkpoint checkpoint = load_checkpoint(a.checkpoint);
  if (!a.dump_attention.empty() && checkpoint.kind != ProbeKind::Attention) {
    throw UsageError("--dump-attention needs an attention probe checkpoint");
  }
  const DatasetManifest manifest = read_manifest(a.manifest, a.pack);
  const Dataset data = load_dataset(a.pack, manifest);
  const auto& sequences = data.split(split);
  if (sequences.empty()) {
    throw ArgumentError("eval: split '" + a.split + "' has no segments");
  }
  if (sequences.front().states.dim != checkpoint.dim()) {
    throw DimensionMismatch("eval: pack dim " + std::to_string(sequences.front().states.dim) +
                            " does not match checkpoint dim " + std::to_string(checkpoint.dim()));
  }

  std::vector<std::size_t> preds;
  std::vector<std::size_t> labels;
  std::ostringstream pred_tsv;
  std::ostringstream attn_tsv;
  pred_tsv << "segment_id\tlabel\tpredicted\tcorrect";
  for (const auto& name : checkpoint.labels) pred_tsv << "\tp_" << name;
  pred_tsv << '\n';
  attn_tsv << "segment_id\tlabel\tweights\n";
  for (const auto& seq : sequences) {
    const Prediction p = predict(checkpoint, seq);
    const std::size_t label = class_index(seq.gender);
    preds.push_back(p.label);
    labels.push_back(label);
    pred_tsv << seq.segment_id << '\t' << checkpoint.labels[label] << '\t' << checkpoint.labels[p.label] << '\t'
             << (p.label == label ? 1 : 0);
    for (double prob : p.probs) pred_tsv << '\t' << format_double(prob);
    pred_tsv << '\n';
    if (!p.attention.empty()) {
      attn_tsv << seq.segment_id << '\t' << checkpoint.labels[label] << '\t';
      for (std::size_t l = 0; l < p.attention.size(); ++l) {
        attn_tsv << (l ? "," : "") << format_double(p.attention[l]);
      }
      attn_tsv << '\n';
    }
  }
  const auto report = classification_report(preds, labels, checkpoint.num_classes());
  json config;
  config["checkpoint"] = a.checkpoint;
  config["pack"] = a.pack;
  config["manifest"] = a.manifest;
  config["split"] = a.split;
  config["probe"] = to_string(checkpoint.kind);
  json out = header("eval", config);
  out["report"] = report.to_json(checkpoint.labels);
  log(g, "macro F1 " + format_double(round2(100.0 * report.macro_f1)));

  if (!a.predictions.empty()) write_file_atomic(a.predictions, pred_tsv.str());
  if (!a.dump_attention.empty()) write_file_atomic(a.dump_attention, attn_tsv.str());
  if (a.out.empty()) {
    std::cout << dump(out);
  } else {
    write_file_atomic(a.out, dump(out));
  }
}

// ---------------------------------------------------------------------------

struct AttnmapArgs {
  std::string attention;
  std::string out;
  std::string summary;
  std::size_t length = kDefaultCurveLength;
  double fraction = 0.1;
  std::string label;
};

void cmd_attnmap(const AttnmapArgs& a, const Globals& g) {
  require_file(a.attention, "attention dump");
  require_parent(a.out, "output");
  if (!a.summary.empty()) require_parent(a.summary, "summary");

  std::vector<std::vector<double>> curves;
  const auto lines = split_lines(read_file(a.attention));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (line.empty() || (n == 0 && line.rfind("segment_id", 0) == 0)) continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() != 3) {
      throw FormatError("attention dump line " + std::to_string(n + 1) + ": expected 3 fields");
    }
    if (!a.label.empty() && fields[1] != a.label) continue;
    std::vector<double> weights;
    for (const auto& w : split_fields(fields[2], ',')) {
      try {
        std::size_t used = 0;
        weights.push_back(std::stod(w, &used));
        if (used != w.size()) throw std::invalid_argument(w);
      } catch (const std::exception&) {
        throw FormatError("attention dump line " + std::to_string(n + 1) + ": invalid weight '" + w + "'");
      }
    }
    curves.push_back(resample(weights, a.length));
  }
  if (curves.empty()) {
    throw ArgumentError("attnmap: no attention sequences to aggregate");
  }
  const AttentionCurve curve = aggregate(curves);
  log(g, "aggregated " + std::to_string(curve.count) + " curves");
  if (!a.summary.empty()) {
    json config;
    config["attention"] = a.attention;
    config["length"] = a.length;
    config["fraction"] = a.fraction;
    config["label"] = a.label.empty() ? json(nullptr) : json(a.label);
    json s = header("attnmap", config);
    s["count"] = curve.count;
    s["early_mass"] = early_mass(curve, a.fraction);
    write_file_atomic(a.summary, dump(s));
  }
  write_file_atomic(a.out, curve.to_csv());
}

// ---------------------------------------------------------------------------

struct GenderArgs {
  std::string outputs;
  std::string annotations;
  std::string manual;
  std::string out;
  std::string trace;
};

void cmd_gender(const GenderArgs& a, const Globals& g) {
  require_file(a.outputs, "outputs");
  require_file(a.annotations, "annotations");
  if (!a.manual.empty()) require_file(a.manual, "manual judgments");
  if (!a.out.empty()) require_parent(a.out, "output");
  if (!a.trace.empty()) require_parent(a.trace, "trace");

  const auto annotations = parse_annotations_tsv(read_file(a.annotations));
  const auto outputs = parse_outputs_tsv(read_file(a.outputs));
  const GenderScore base = score(outputs, annotations);
  GenderScore final_score = base;

  json config;
  config["outputs"] = a.outputs;
  config["annotations"] = a.annotations;
  config["manual"] = a.manual.empty() ? json(nullptr) : json(a.manual);
  json out = header("gender-score", config);
  out["string_matching"] = base.to_json();
  if (!a.manual.empty()) {
    final_score = merge_manual(base, parse_judgments_tsv(read_file(a.manual)));
    out["string_matching_plus_manual"] = final_score.to_json();
  }
  log(g, "scored " + std::to_string(base.all.n_terms) + " terms");

  if (!a.trace.empty()) write_file_atomic(a.trace, trace_to_tsv(final_score.trace));
  if (a.out.empty()) {
    std::cout << dump(out);
  } else {
    write_file_atomic(a.out, dump(out));
  }
}

// ---------------------------------------------------------------------------

struct CorrelateArgs {
  std::string points;
  std::string out;
};

void cmd_correlate(const CorrelateArgs& a, const Globals& /*g*/) {
  require_file(a.points, "points");
  if (!a.out.empty()) require_parent(a.out, "output");
  const auto lines = split_lines(read_file(a.points));
  if (lines.empty()) {
    throw UsageError("correlate: empty points file");
  }
  const auto header_fields = split_fields(lines.front(), ',');
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header_fields.size(); ++i) column[header_fields[i]] = i;
  for (const char* name : {"model", "language", "f1", "accuracy"}) {
    if (!column.contains(name)) {
      throw UsageError(std::string("correlate: header lacks column '") + name + "'");
    }
  }
  std::vector<double> x;
  std::vector<double> y;
  json points = json::array();
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto fields = split_fields(lines[n], ',');
    if (fields.size() != header_fields.size()) {
      throw UsageError("correlate: line " + std::to_string(n + 1) + " has the wrong number of fields");
    }
    try {
      std::size_t used_f1 = 0;
      std::size_t used_acc = 0;
      const auto& f1_text = fields[column["f1"]];
      const auto& acc_text = fields[column["accuracy"]];
      const double f1 = std::stod(f1_text, &used_f1);
      const double acc = std::stod(acc_text, &used_acc);
      if (used_f1 != f1_text.size() || used_acc != acc_text.size()) throw std::invalid_argument("trailing");
      x.push_back(f1);
      y.push_back(acc);
      points.push_back({{"model", fields[column["model"]]},
                        {"language", fields[column["language"]]},
                        {"f1", f1},
                        {"accuracy", acc}});
    } catch (const std::exception&) {
      throw UsageError("correlate: line " + std::to_string(n + 1) + " has a non-numeric score");
    }
  }
  if (x.size() < 2) {
    throw UsageError("correlate: need at least two points, got " + std::to_string(x.size()));
  }
  const RegressionSummary summary = linreg(x, y);
  json config;
  config["points"] = a.points;
  json out = header("correlate", config);
  out["points"] = points;
  out["regression"] = summary.to_json();
  if (a.out.empty()) {
    std::cout << dump(out);
  } else {
    write_file_atomic(a.out, dump(out));
  }
}

// ---------------------------------------------------------------------------

struct ConfusionArgs {
  std::string predictions;
  std::string trace;
  std::string out;
  std::string csv;
};

void cmd_confusion(const ConfusionArgs& a, const Globals& /*g*/) {
  require_file(a.predictions, "predictions");
  require_file(a.trace, "trace");
  if (!a.out.empty()) require_parent(a.out, "output");
  if (!a.csv.empty()) require_parent(a.csv, "csv");

  std::map<std::string, bool> probe_correct;
  const auto lines = split_lines(read_file(a.predictions));
  if (lines.empty()) {
    throw UsageError("confusion: empty predictions file");
  }
  const auto header_fields = split_fields(lines.front(), '\t');
  const auto correct_col = std::find(header_fields.begin(), header_fields.end(), "correct");
  if (header_fields.empty() || header_fields.front() != "segment_id" || correct_col == header_fields.end()) {
    throw UsageError("confusion: predictions header must start with segment_id and include 'correct'");
  }
  const auto col = static_cast<std::size_t>(correct_col - header_fields.begin());
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto fields = split_fields(lines[n], '\t');
    if (fields.size() <= col) {
      throw FormatError("predictions line " + std::to_string(n + 1) + ": too few fields");
    }
    probe_correct[fields[0]] = fields[col] == "1";
  }

  std::vector<bool> correct;
  std::vector<TranslationOutcome> outcome;
  std::vector<Gender> gender;
  std::size_t unmatched = 0;
  std::size_t out_of_coverage = 0;
  for (const auto& t : parse_trace_tsv(read_file(a.trace))) {
    if (t.outcome == TermOutcome::OutOfCoverage) {
      ++out_of_coverage;
      continue;
    }
    const auto it = probe_correct.find(t.segment_id);
    if (it == probe_correct.end()) {
      ++unmatched;
      continue;
    }
    correct.push_back(it->second);
    outcome.push_back(t.outcome == TermOutcome::Correct ? TranslationOutcome::CorrectGender
                                                        : TranslationOutcome::WrongGender);
    gender.push_back(t.gender);
  }
  // std::vector<bool> has no contiguous storage to view as a span.
  const auto flags = std::make_unique<bool[]>(correct.size());
  std::copy(correct.begin(), correct.end(), flags.get());
  const std::span<const bool> probe_flags(flags.get(), correct.size());
  const CrossTabs tabs = cross_tab(probe_flags, outcome, gender);

  json config;
  config["predictions"] = a.predictions;
  config["trace"] = a.trace;
  json out = header("confusion", config);
  out["tables"] = tabs.to_json();
  out["skipped_out_of_coverage"] = out_of_coverage;
  out["skipped_without_prediction"] = unmatched;
  if (!a.csv.empty()) write_file_atomic(a.csv, tabs.to_csv());
  if (a.out.empty()) {
    std::cout << dump(out);
  } else {
    write_file_atomic(a.out, dump(out));
  }
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"probekit: probing classifiers for speaker gender in speech translation hidden states"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Globals globals;
  app.add_option("--seed", globals.seed, "Default seed for stochastic steps (PROBEKIT_SEED overrides)");
  app.add_flag("-v,--verbose", globals.verbose, "Progress messages on stderr");

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Assign gender-balanced, speaker-disjoint train/dev/test splits");
  split_cmd->add_option("--pack", split.pack, "Feature pack")->required();
  split_cmd->add_option("--manifest", split.manifest, "Input manifest (default: rebuilt from the pack)");
  split_cmd->add_option("--out", split.out, "Output manifest (JSON lines)")->required();
  split_cmd->add_option("--train-size", split.train_size, "Train samples")->required();
  split_cmd->add_option("--dev-size", split.dev_size, "Dev samples")->required();
  split_cmd->add_option("--tolerance", split.tolerance, "Allowed |She-He| as a fraction of split size")
      ->capture_default_str();
  split_cmd->add_option("--seed", split.seed, "Sampling seed");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a probe on the train split with dev-based stopping");
  train_cmd->add_option("--pack", train.pack, "Feature pack")->required();
  train_cmd->add_option("--manifest", train.manifest, "Manifest with split labels")->required();
  train_cmd->add_option("--out-dir", train.out_dir, "Directory for checkpoints and logs")->required();
  train_cmd->add_option("--probe", train.probe, "attention, max, mean or positional")
      ->check(CLI::IsMember({"attention", "max", "mean", "positional"}))
      ->capture_default_str();
  train_cmd->add_option("--batch-size", train.config.batch_size)->capture_default_str();
  train_cmd->add_option("--lr", train.config.lr0, "Initial learning rate")->capture_default_str();
  train_cmd->add_option("--lr-patience", train.config.lr_patience)->capture_default_str();
  train_cmd->add_option("--lr-factor", train.config.lr_factor)->capture_default_str();
  train_cmd->add_option("--es-min-delta", train.config.es_min_delta)->capture_default_str();
  train_cmd->add_option("--es-patience", train.config.es_patience)->capture_default_str();
  train_cmd->add_option("--max-epochs", train.config.max_epochs)->capture_default_str();
  train_cmd->add_option("--adam-beta1", train.config.adam_beta1)->capture_default_str();
  train_cmd->add_option("--adam-beta2", train.config.adam_beta2)->capture_default_str();
  train_cmd->add_option("--adam-eps", train.config.adam_eps)->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Initialization and shuffling seed");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on one split");
  eval_cmd->add_option("--checkpoint", eval.checkpoint)->required();
  eval_cmd->add_option("--pack", eval.pack)->required();
  eval_cmd->add_option("--manifest", eval.manifest)->required();
  eval_cmd->add_option("--split", eval.split)->check(CLI::IsMember({"train", "dev", "test"}))->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Report JSON (default: stdout)");
  eval_cmd->add_option("--predictions", eval.predictions, "Per-segment predictions TSV");
  eval_cmd->add_option("--dump-attention", eval.dump_attention, "Per-segment attention weights TSV");

  AttnmapArgs attnmap;
  auto* attnmap_cmd = app.add_subcommand("attnmap", "Resample and average attention weights");
  attnmap_cmd->add_option("--attention", attnmap.attention, "Attention dump from eval")->required();
  attnmap_cmd->add_option("--out", attnmap.out, "Curve CSV (position,mean,std)")->required();
  attnmap_cmd->add_option("--length", attnmap.length, "Resampled length")->capture_default_str();
  attnmap_cmd->add_option("--summary", attnmap.summary, "Summary JSON with early attention mass");
  attnmap_cmd->add_option("--fraction", attnmap.fraction, "Leading fraction for early mass")->capture_default_str();
  attnmap_cmd->add_option("--label", attnmap.label, "Only aggregate segments with this gold label");

  GenderArgs gender;
  auto* gender_cmd = app.add_subcommand("gender-score", "Gender translation coverage and accuracy");
  gender_cmd->add_option("--outputs", gender.outputs, "segment_id<TAB>translation")->required();
  gender_cmd->add_option("--annotations", gender.annotations, "Annotation TSV")->required();
  gender_cmd->add_option("--manual", gender.manual, "Manual judgments of out-of-coverage terms");
  gender_cmd->add_option("--out", gender.out, "Score JSON (default: stdout)");
  gender_cmd->add_option("--trace", gender.trace, "Per-term outcome TSV");

  CorrelateArgs correlate;
  auto* correlate_cmd = app.add_subcommand("correlate", "Regress gender accuracy on probing F1");
  correlate_cmd->add_option("--points", correlate.points, "CSV with model,language,f1,accuracy")->required();
  correlate_cmd->add_option("--out", correlate.out, "Regression JSON (default: stdout)");

  ConfusionArgs confusion;
  auto* confusion_cmd = app.add_subcommand("confusion", "Cross-tabulate probe correctness and translation gender");
  confusion_cmd->add_option("--predictions", confusion.predictions, "Predictions TSV from eval")->required();
  confusion_cmd->add_option("--trace", confusion.trace, "Term trace TSV from gender-score")->required();
  confusion_cmd->add_option("--out", confusion.out, "Tables JSON (default: stdout)");
  confusion_cmd->add_option("--csv", confusion.csv, "Tables CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (split_cmd->parsed()) cmd_split(split, globals);
    if (train_cmd->parsed()) cmd_train(train, globals);
    if (eval_cmd->parsed()) cmd_eval(eval, globals);
    if (attnmap_cmd->parsed()) cmd_attnmap(attnmap, globals);
    if (gender_cmd->parsed()) cmd_gender(gender, globals);
    if (correlate_cmd->parsed()) cmd_correlate(correlate, globals);
    if (confusion_cmd->parsed()) cmd_confusion(confusion, globals);
  } catch (const UsageError& e) {
    std::cerr << "probekit: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "probekit: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "probekit: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace probekit::cli

int main(int argc, char** argv) { return probekit::cli::run(argc, argv); }
