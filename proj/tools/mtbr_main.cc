// Copyright 2026 The MTBR Authors.
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

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtbr/audit.h"
#include "mtbr/bootstrap.h"
#include "mtbr/config.h"
#include "mtbr/corpus.h"
#include "mtbr/error.h"
#include "mtbr/eval.h"
#include "mtbr/kernels.h"
#include "mtbr/loop.h"
#include "mtbr/model.h"
#include "mtbr/server.h"
#include "mtbr/synth.h"
#include "mtbr/train.h"

#ifndef MTBR_VERSION
#define MTBR_VERSION "0.0.0"
#endif
#ifndef MTBR_GIT_REV
#define MTBR_GIT_REV "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace mtbr {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadConfig: return kExitUsage;
    case ErrorCode::kUnknownTag:
    case ErrorCode::kIllegalTransition:
    case ErrorCode::kEmptySentence:
    case ErrorCode::kTooFewSentences:
    case ErrorCode::kRuleConflict:
    case ErrorCode::kInvalidTags:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kIo: return kExitData;
    default: return kExitRuntime;
  }
}

// Flag values; unset flags leave the config file's value alone.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> run_dir;
  std::optional<std::string> runs_root;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate;
  std::optional<double> alpha;
  std::optional<double> w1;
  std::optional<std::string> variant;
  std::optional<std::string> dataset;
  std::optional<std::string> dev;
  std::optional<std::string> vocab;
  std::optional<std::string> rules;
  std::optional<std::string> checkpoint;
  std::optional<std::string> store;
  std::optional<std::string> vectors;
  std::optional<std::string> static_dir;
  std::optional<std::string> corpus;
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> split_seed;
  std::optional<double> epsilon;
  std::optional<int> max_iters;
  std::optional<std::string> host;
  std::optional<int> port;
  bool no_case_fold = false;
  bool freeze_bd = false;
};

RunConfig EffectiveConfig(const Overrides &o) {
  RunConfig c = o.config_path ? RunConfig::Load(*o.config_path) : RunConfig{};
  if (o.runs_root) c.paths.runs_root = *o.runs_root;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.batch_size) c.train.batch_size = *o.batch_size;
  if (o.threads) c.train.threads = *o.threads;
  if (o.seed) c.hyper.seed = c.train.seed = *o.seed;
  if (o.learning_rate) c.train.optimizer.learning_rate = *o.learning_rate;
  if (o.alpha) c.hyper.alpha = *o.alpha;
  if (o.w1) c.hyper.w1 = *o.w1;
  if (o.variant) c.variant = VariantByName(*o.variant);
  if (o.dataset) c.paths.dataset = *o.dataset;
  if (o.dev) c.paths.dev = *o.dev;
  if (o.vocab) c.paths.vocab = *o.vocab;
  if (o.rules) c.paths.rules = *o.rules;
  if (o.checkpoint) c.paths.checkpoint = *o.checkpoint;
  if (o.store) c.paths.audit_store = *o.store;
  if (o.vectors) c.paths.vectors = *o.vectors;
  if (o.static_dir) c.paths.static_dir = *o.static_dir;
  if (o.corpus) c.paths.corpus = *o.corpus;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.split_seed) c.split_seed = *o.split_seed;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.max_iters) c.max_iters = *o.max_iters;
  if (o.host) c.host = *o.host;
  if (o.port) c.port = *o.port;
  if (o.no_case_fold) c.case_fold = false;
  if (o.freeze_bd) c.train.freeze_bd_in_ner = true;
  c.hyper.Validate();
  return c;
}

// Output directory, log file and reproducibility record of one invocation.
class Run {
 public:
  Run(std::string command, RunConfig cfg, const Overrides &o,
      std::vector<std::string> argv)
      : command_(std::move(command)), cfg_(std::move(cfg)),
        argv_(std::move(argv)) {
    const std::string hash = cfg_.Hash();
    if (o.run_dir) {
      dir_ = *o.run_dir;
    } else {
      const auto now = std::chrono::system_clock::to_time_t(
          std::chrono::system_clock::now());
      std::tm tm{};
      gmtime_r(&now, &tm);
      char stamp[32];
      std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);
      std::string slug = command_;
      std::replace(slug.begin(), slug.end(), ' ', '-');
      const fs::path base = fs::path(cfg_.paths.runs_root) /
                            fmt::format("{}-{}-{}", stamp, slug, hash.substr(0, 8));
      dir_ = base;
      for (int k = 2; fs::exists(dir_); ++k) {
        dir_ = base.string() + "-" + std::to_string(k);
      }
    }
    fs::create_directories(dir_);
    log_path_ = (dir_ / "log.txt").string();
    auto file_sink =
        std::make_shared<spdlog::sinks::basic_file_sink_mt>(log_path_, true);
    auto err_sink = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
    auto logger = std::make_shared<spdlog::logger>(
        "mtbr", spdlog::sinks_init_list{err_sink, file_sink});
    err_sink->set_level(spdlog::get_level());
    file_sink->set_level(spdlog::level::debug);
    logger->set_level(spdlog::level::debug);
    logger->flush_on(spdlog::level::info);
    spdlog::set_default_logger(logger);
    started_ = NowTimestamp();
    WriteRecord(false);
  }

  const fs::path &dir() const { return dir_; }
  const std::string &log_path() const { return log_path_; }
  const RunConfig &config() const { return cfg_; }

  std::string Output(const std::string &name) {
    outputs_.push_back(name);
    return (dir_ / name).string();
  }

  void Finish() { WriteRecord(true); }

 private:
  void WriteRecord(bool finished) {
    json versions = {
        {"mtbr", MTBR_VERSION},
        {"git", MTBR_GIT_REV},
        {"compiler", __VERSION__},
        {"cxx_standard", __cplusplus},
        {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                      NLOHMANN_JSON_VERSION_MINOR,
                                      NLOHMANN_JSON_VERSION_PATCH)},
        {"spdlog", fmt::format("{}.{}.{}", SPDLOG_VER_MAJOR, SPDLOG_VER_MINOR,
                               SPDLOG_VER_PATCH)},
        {"openmp", _OPENMP},
    };
    json rec = {{"command", command_},
                {"argv", argv_},
                {"config", cfg_.ToJson()},
                {"config_hash", cfg_.Hash()},
                {"seed", cfg_.hyper.seed},
                {"versions", versions},
                {"started", started_},
                {"outputs", outputs_}};
    if (finished) rec["finished"] = NowTimestamp();
    std::ofstream(dir_ / "run.json") << rec.dump(2) << "\n";
  }

  std::string command_;
  RunConfig cfg_;
  std::vector<std::string> argv_;
  fs::path dir_;
  std::string log_path_;
  std::string started_;
  std::vector<std::string> outputs_;
};

void WriteJson(const std::string &path, const json &j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << j.dump(2) << "\n";
}

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
}

std::string ReadText(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string SidecarPath(const std::string &checkpoint) {
  return fs::path(checkpoint).replace_extension(".json").string();
}

MtbrModel BuildModel(const RunConfig &cfg,
                     std::span<const LabeledSentence> train) {
  auto tokens = TokenIndex::Build(train);
  if (cfg.paths.vectors) {
    auto table = PrecomputedEncoder::LoadTable(
        RequireInput(cfg.paths.vectors, "vectors"), tokens);
    return MtbrModel(cfg.hyper, std::move(tokens), std::move(table));
  }
  return MtbrModel(cfg.hyper, std::move(tokens));
}

void LogEpoch(const EpochReport &r) {
  spdlog::info("epoch {:3d}  bd_loss {:.5f} ({} steps)  ner_loss {:.5f} ({} steps)",
               r.epoch, r.bd_loss, r.bd_steps, r.ner_loss, r.ner_steps);
}

void PrintEval(const EvalResult &ev) {
  fmt::print("precision {:.4f}  recall {:.4f}  f1 {:.4f}  bre {:.4f}  token_acc {:.4f}\n",
             ev.prf.precision, ev.prf.recall, ev.prf.f1, ev.bre.bre_ratio,
             ev.token_accuracy);
}

std::vector<std::vector<std::string>> ReadRawSentences(const std::string &path) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(ReadText(path));
  std::string line;
  while (std::getline(in, line)) {
    auto toks = Tokenize(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

// Subcommand bodies.

int CmdSynth(Run &run, int sentences, std::uint64_t seed) {
  SynthConfig sc;
  sc.sentences = sentences;
  sc.seed = seed;
  auto corpus = GenerateSyntheticCorpus(sc);
  WriteBio2File(run.Output("synthetic.bio2"), corpus);
  WriteJson(run.Output("rules.json"), SyntheticRuleConfig());
  fmt::print("{} sentences -> {}\n", corpus.size(),
             (run.dir() / "synthetic.bio2").string());
  return kExitOk;
}

int CmdVocabBuild(Run &run, const std::vector<std::string> &inputs) {
  std::vector<std::string> docs;
  for (const auto &p : inputs) docs.push_back(ReadText(p));
  if (docs.empty()) {
    docs.push_back(ReadText(RequireInput(run.config().paths.corpus, "corpus")));
  }
  auto vocab = BuildVocab(docs, run.config().case_fold);
  vocab.Save(run.Output("vocab.txt"));
  fmt::print("{} tokens from {} documents\n", vocab.size(), docs.size());
  return kExitOk;
}

int CmdBootstrapFilter(Run &run, const std::string &source) {
  const auto &cfg = run.config();
  auto vocab = Vocabulary::Load(RequireInput(cfg.paths.vocab, "vocab"),
                                cfg.case_fold);
  auto data = ReadBio2File(source);
  auto kept = FilterByVocab(data, vocab);
  WriteBio2File(run.Output("homologous.bio2"), kept);
  fmt::print("kept {} of {} sentences\n", kept.size(), data.size());
  return kExitOk;
}

int CmdBootstrapRules(Run &run, const std::string &raw,
                      const std::optional<std::string> &homologous) {
  const auto &cfg = run.config();
  auto rules = RuleConfig::Load(RequireInput(cfg.paths.rules, "rules"));
  auto sentences = ReadRawSentences(raw);
  auto res = TagSentencesWithRules(sentences, rules,
                                   fs::path(raw).stem().string());
  WriteBio2File(run.Output("rule_tagged.bio2"), res.tagged);
  fmt::print("tagged {} of {} sentences ({} conflicts, {} without matches)\n",
             res.tagged.size(), sentences.size(), res.conflicts, res.untouched);
  if (homologous) {
    auto homo = ReadBio2File(*homologous, Provenance::kHomologous);
    auto seed = AssembleSeed(homo, res.tagged);
    WriteBio2File(run.Output("seed.bio2"), seed);
    fmt::print("seed dataset: {} sentences\n", seed.size());
  }
  return kExitOk;
}

int CmdDatasetSplit(Run &run) {
  const auto &cfg = run.config();
  auto data = ReadBio2File(RequireInput(cfg.paths.dataset, "dataset"));
  auto split = SplitDataset(data, cfg.split_seed);
  WriteBio2File(run.Output("train.bio2"), split.train);
  WriteBio2File(run.Output("dev.bio2"), split.dev);
  WriteBio2File(run.Output("test.bio2"), split.test);
  fmt::print("train {}  dev {}  test {}\n", split.train.size(),
             split.dev.size(), split.test.size());
  return kExitOk;
}

int CmdDatasetStats(Run &run) {
  auto data = ReadBio2File(RequireInput(run.config().paths.dataset, "dataset"));
  auto stats = ComputeDatasetStats(data);
  const auto report = FormatStatsReport(stats);
  WriteText(run.Output("stats.tsv"), report);
  WriteJson(run.Output("stats.json"), StatsToJson(stats));
  fmt::print("{}", report);
  return kExitOk;
}

int CmdDatasetValidate(Run &run) {
  const auto &path = RequireInput(run.config().paths.dataset, "dataset");
  auto data = ReadBio2File(path);
  for (const auto &s : data) {
    if (s.tokens.empty()) throw Error(ErrorCode::kEmptySentence, s.id);
  }
  fmt::print("{}: {} sentences, valid BIO2\n", path, data.size());
  return kExitOk;
}

int CmdTrain(Run &run) {
  const auto &cfg = run.config();
  auto train = ReadBio2File(RequireInput(cfg.paths.dataset, "dataset"));
  std::vector<LabeledSentence> dev;
  if (cfg.paths.dev) dev = ReadBio2File(RequireInput(cfg.paths.dev, "dev"));
  auto model = BuildModel(cfg, train);
  auto examples = PrepareExamples(model, train);
  spdlog::info("training {} on {} sentences, {} parameters, {} epochs",
               cfg.variant.name, examples.size(), model.params().ScalarCount(),
               cfg.train.epochs);
  Trainer trainer(model, cfg.variant.variant, cfg.train);
  json epochs = json::array();
  trainer.Fit(examples, [&](const EpochReport &r) {
    LogEpoch(r);
    epochs.push_back({{"epoch", r.epoch},
                      {"bd_loss", r.bd_loss},
                      {"ner_loss", r.ner_loss},
                      {"bd_steps", r.bd_steps},
                      {"ner_steps", r.ner_steps}});
  });
  const auto ckpt = run.Output("model.ckpt");
  model.Save(ckpt, run.Output("model.json"), cfg.variant.variant);
  WriteJson(run.Output("epochs.json"), epochs);
  if (!dev.empty()) {
    auto ev = EvaluateModel(model, dev, cfg.variant.variant, cfg.train.threads);
    ev.predictions.clear();
    WriteJson(run.Output("dev_metrics.json"), ev.ToJson());
    PrintEval(ev);
  }
  fmt::print("checkpoint -> {}\n", ckpt);
  return kExitOk;
}

int CmdEval(Run &run, const std::string &test_path) {
  const auto &cfg = run.config();
  const auto &ckpt = RequireInput(cfg.paths.checkpoint, "checkpoint");
  auto [model, variant] = MtbrModel::Load(ckpt, SidecarPath(ckpt));
  auto test = ReadBio2File(test_path);
  auto ev = EvaluateModel(model, test, variant, cfg.train.threads);
  WriteBio2File(run.Output("predictions.bio2"), [&] {
    auto pred = test;
    for (size_t i = 0; i < pred.size(); ++i) pred[i].ner_tags = ev.predictions[i];
    return pred;
  }());
  ev.predictions.clear();
  WriteJson(run.Output("metrics.json"), ev.ToJson());
  PrintEval(ev);
  return kExitOk;
}

int CmdAblate(Run &run, const std::optional<std::string> &test_path) {
  const auto &cfg = run.config();
  DatasetSplit split;
  auto data = ReadBio2File(RequireInput(cfg.paths.dataset, "dataset"));
  if (test_path) {
    split.train = std::move(data);
    split.test = ReadBio2File(*test_path);
  } else {
    split = SplitDataset(data, cfg.split_seed);
  }
  ExperimentConfig base{cfg.hyper, cfg.train};
  auto variants = AblationVariants();
  auto rows = AblationRun(
      split, base, cfg.seeds, variants,
      [](const std::string &name, std::uint64_t seed, const EvalResult &ev) {
        spdlog::info("{} seed {}: f1 {:.4f} bre {:.4f}", name, seed,
                     ev.prf.f1, ev.bre.bre_ratio);
      });
  const auto table = FormatAblationTable(rows);
  WriteText(run.Output("ablation.tsv"), table);
  WriteJson(run.Output("ablation.json"),
            {{"rows", AblationToJson(rows)},
             {"seeds", cfg.seeds},
             {"config_hash", cfg.Hash()},
             {"mtbr", MTBR_VERSION},
             {"git", MTBR_GIT_REV}});
  fmt::print("{}", table);
  for (const auto &r : rows) {
    if (!r.error.empty()) {
      spdlog::error("variant {} aborted: {}", r.variant, r.error);
      return kExitRuntime;
    }
  }
  return kExitOk;
}

LoopConfig MakeLoopConfig(const RunConfig &cfg) {
  LoopConfig lc;
  lc.experiment = {cfg.hyper, cfg.train};
  lc.variant = cfg.variant.variant;
  lc.epsilon = cfg.epsilon;
  lc.max_iters = cfg.max_iters;
  return lc;
}

// One iteration per call: later iterations need the queued items audited.
int CmdIterate(Run &run) {
  const auto &cfg = run.config();
  const auto &dataset = RequireInput(cfg.paths.dataset, "dataset");
  std::optional<std::string> dev;
  if (cfg.paths.dev) dev = RequireInput(cfg.paths.dev, "dev");
  const std::string store_path =
      cfg.paths.audit_store ? *cfg.paths.audit_store : run.Output("audit.jsonl");
  AuditStore store(store_path);
  AuditLoop loop(dataset, dev, store, MakeLoopConfig(cfg));
  auto out = loop.Iterate();
  fmt::print("iteration {}: disagreement {}/{} ({:.4f}), {} queued{}\n",
             out.report.iteration, out.report.disagreement_count,
             out.report.dataset_size, out.report.disagreement_rate,
             out.enqueued.size(), out.report.converged ? ", converged" : "");
  WriteJson(run.Output("progress.json"), loop.Progress());
  return kExitOk;
}

int CmdServe(Run &run) {
  const auto &cfg = run.config();
  const std::string store_path =
      cfg.paths.audit_store ? *cfg.paths.audit_store : run.Output("audit.jsonl");
  AuditStore store(store_path);
  std::optional<AuditLoop> loop;
  if (cfg.paths.dataset) {
    std::optional<std::string> dev;
    if (cfg.paths.dev) dev = RequireInput(cfg.paths.dev, "dev");
    loop.emplace(RequireInput(cfg.paths.dataset, "dataset"), dev, store,
                 MakeLoopConfig(cfg));
  }
  std::string static_dir;
  if (cfg.paths.static_dir) static_dir = RequireInput(cfg.paths.static_dir, "static_dir");
  AuditServer server(store, loop ? &*loop : nullptr, static_dir);
  const int port = cfg.port == 0 ? server.BindToAnyPort(cfg.host)
                                 : server.Bind(cfg.host, cfg.port);
  fmt::print("serving {} on http://{}:{}\n", store_path, cfg.host, port);
  std::fflush(stdout);
  server.Listen();
  return kExitOk;
}

void SetLogLevelFromEnv() {
  spdlog::set_level(spdlog::level::info);
  if (const char *lvl = std::getenv("MTBR_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(lvl));
  }
}

int Main(int argc, char **argv) {
  SetLogLevelFromEnv();
  CLI::App app{"Dataset bootstrapping, training, evaluation and audit tool "
               "for Malay named entity recognition."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", MTBR_VERSION);

  Overrides o;
  std::string config_path;
  app.add_option("-c,--config", config_path, "Run config file (JSON)")
      ->check(CLI::ExistingFile);
  app.add_option("--run-dir", o.run_dir,
                 "Output directory (default: <runs_root>/<time>-<cmd>-<hash>)");
  app.add_option("--runs-root", o.runs_root, "Parent of per-run directories");

  auto add_training = [&](CLI::App *sub) {
    sub->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::PositiveNumber);
    sub->add_option("--batch-size", o.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    sub->add_option("--threads", o.threads, "Worker threads (1 = serial kernels)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Model and training seed");
    sub->add_option("--lr", o.learning_rate, "Learning rate");
    sub->add_option("--alpha", o.alpha, "Random-probability threshold");
    sub->add_option("--w1", o.w1, "Boundary vs span loss weight");
    sub->add_option("--variant", o.variant,
                    "MTBR, no-bd, no-revision, no-gate, no-random or a table row name");
    sub->add_option("--vectors", o.vectors, "Pretrained token vectors (frozen encoder)")
        ->check(CLI::ExistingFile);
    sub->add_flag("--freeze-bd-head", o.freeze_bd,
                  "Keep the boundary head fixed during NER steps");
  };

  // synth
  int synth_n = 2400;
  std::uint64_t synth_seed = 7;
  auto *synth = app.add_subcommand("synth", "Generate the synthetic corpus and its rule config");
  synth->add_option("-n,--sentences", synth_n, "Sentence count")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Generator seed");

  // vocab build
  std::vector<std::string> vocab_inputs;
  auto *vocab = app.add_subcommand("vocab", "Vocabulary tools");
  vocab->require_subcommand(1);
  auto *vocab_build = vocab->add_subcommand("build", "Build a vocabulary from raw text documents");
  vocab_build->add_option("inputs", vocab_inputs, "Text files, one document each")
      ->check(CLI::ExistingFile);
  vocab_build->add_flag("--no-case-fold", o.no_case_fold, "Keep case distinctions");

  // bootstrap
  auto *boot = app.add_subcommand("bootstrap", "Seed dataset construction");
  boot->require_subcommand(1);
  std::string filter_source;
  auto *boot_filter = boot->add_subcommand("filter", "Keep sentences whose tokens are all in the vocabulary");
  boot_filter->add_option("source", filter_source, "Labeled BIO2 file")
      ->required()->check(CLI::ExistingFile);
  boot_filter->add_option("--vocab", o.vocab, "Vocabulary file");
  boot_filter->add_flag("--no-case-fold", o.no_case_fold, "Keep case distinctions");
  std::string rules_raw;
  std::optional<std::string> rules_homologous;
  auto *boot_rules = boot->add_subcommand("rules", "Tag raw sentences with rules and gazetteers");
  boot_rules->add_option("raw", rules_raw, "Raw text, one sentence per line")
      ->required()->check(CLI::ExistingFile);
  boot_rules->add_option("--rules", o.rules, "Rule config (JSON)");
  boot_rules->add_option("--homologous", rules_homologous,
                         "Filtered BIO2 file to merge into a seed dataset")
      ->check(CLI::ExistingFile);

  // dataset
  auto *ds = app.add_subcommand("dataset", "Dataset tools");
  ds->require_subcommand(1);
  auto *ds_split = ds->add_subcommand("split", "Seeded 80/10/10 split");
  ds_split->add_option("dataset", o.dataset, "BIO2 file");
  ds_split->add_option("--seed", o.split_seed, "Shuffle seed");
  auto *ds_stats = ds->add_subcommand("stats", "Sentence, token and entity counts");
  ds_stats->add_option("dataset", o.dataset, "BIO2 file");
  auto *ds_validate = ds->add_subcommand("validate", "Check a BIO2 file");
  ds_validate->add_option("dataset", o.dataset, "BIO2 file");

  // train
  auto *train = app.add_subcommand("train", "Train a model and save a checkpoint");
  train->add_option("dataset", o.dataset, "Training BIO2 file");
  train->add_option("--dev", o.dev, "Dev BIO2 file, evaluated after training");
  add_training(train);

  // eval
  std::string eval_test;
  auto *eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("test", eval_test, "Test BIO2 file")->required()->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint (sidecar next to it, .json)");
  eval->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);

  // ablate
  std::optional<std::string> ablate_test;
  auto *ablate = app.add_subcommand("ablate", "Run every ablation variant over the seeds");
  ablate->add_option("dataset", o.dataset, "BIO2 file (split 80/10/10 unless --test)");
  ablate->add_option("--test", ablate_test, "Separate test file; dataset is then all training")
      ->check(CLI::ExistingFile);
  ablate->add_option("--seeds", o.seeds, "Seeds")->delimiter(',');
  ablate->add_option("--split-seed", o.split_seed, "Split seed");
  add_training(ablate);

  // iterate
  auto *iterate = app.add_subcommand(
      "iterate", "Merge resolved audits, retrain and queue new disagreements");
  iterate->add_option("dataset", o.dataset, "Dataset BIO2 file (rewritten with resolutions)");
  iterate->add_option("--dev", o.dev, "Dev BIO2 file");
  iterate->add_option("--store", o.store, "Audit store (JSON lines)");
  iterate->add_option("--epsilon", o.epsilon, "Convergence threshold on the disagreement rate");
  iterate->add_option("--max-iters", o.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  add_training(iterate);

  // serve
  auto *serve = app.add_subcommand("serve", "Serve the audit API");
  serve->add_option("--store", o.store, "Audit store (JSON lines)");
  serve->add_option("--dataset", o.dataset, "Dataset for POST /api/iterate");
  serve->add_option("--dev", o.dev, "Dev BIO2 file");
  serve->add_option("--static", o.static_dir, "Directory of UI assets served at /");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port (0 picks a free one)");
  add_training(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (!config_path.empty()) o.config_path = config_path;

  std::string command;
  for (auto *sub = app.get_subcommands().front(); sub;) {
    command += (command.empty() ? "" : " ") + sub->get_name();
    auto subs = sub->get_subcommands();
    sub = subs.empty() ? nullptr : subs.front();
  }

  std::optional<Run> run;
  try {
    auto cfg = EffectiveConfig(o);
    run.emplace(command, std::move(cfg), o,
                std::vector<std::string>(argv, argv + argc));
    int rc = kExitOk;
    if (*synth) {
      rc = CmdSynth(*run, synth_n, synth_seed);
    } else if (*vocab_build) {
      rc = CmdVocabBuild(*run, vocab_inputs);
    } else if (*boot_filter) {
      rc = CmdBootstrapFilter(*run, filter_source);
    } else if (*boot_rules) {
      rc = CmdBootstrapRules(*run, rules_raw, rules_homologous);
    } else if (*ds_split) {
      rc = CmdDatasetSplit(*run);
    } else if (*ds_stats) {
      rc = CmdDatasetStats(*run);
    } else if (*ds_validate) {
      rc = CmdDatasetValidate(*run);
    } else if (*train) {
      rc = CmdTrain(*run);
    } else if (*eval) {
      rc = CmdEval(*run, eval_test);
    } else if (*ablate) {
      rc = CmdAblate(*run, ablate_test);
    } else if (*iterate) {
      rc = CmdIterate(*run);
    } else if (*serve) {
      rc = CmdServe(*run);
    }
    run->Finish();
    return rc;
  } catch (const Error &e) {
    spdlog::debug("{}", e.what());
    std::cerr << "error: " << e.what();
    if (run) std::cerr << " (log: " << run->log_path() << ")";
    std::cerr << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what();
    if (run) std::cerr << " (log: " << run->log_path() << ")";
    std::cerr << "\n";
    return kExitRuntime;
  }
}

}  // namespace
}  // namespace mtbr

int main(int argc, char **argv) { return mtbr::Main(argc, argv); }
