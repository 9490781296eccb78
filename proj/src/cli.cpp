// Copyright 2026 The ENG Authors.
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

#include "eng/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eng/checkpoint.hpp"
#include "eng/common.hpp"
#include "eng/corpus.hpp"
#include "eng/fixtures.hpp"
#include "eng/metrics.hpp"
#include "eng/model.hpp"
#include "eng/narrative_graph.hpp"
#include "eng/symbolic.hpp"
#include "eng/training.hpp"
#include "json.hpp"

namespace eng {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string path_digest(const fs::path& p) {
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const fs::path& f : files) acc += f.filename().string() + ":" + file_digest(f) + ";";
    return hex_digest(fnv1a(acc));
  }
  if (fs::is_regular_file(p)) return file_digest(p);
  return "missing";
}

// Flags shared by every command that creates a model.
struct ModelFlags {
  std::string encoder = "bag";
  std::string embeddings;
  std::size_t dim = 128;
  std::size_t layers = 2;
  std::size_t head_hidden = 128;
  bool no_self_loop = false;
  bool out_neighbors = false;

  void add(CLI::App* app) {
    app->add_option("--encoder", encoder, "Node encoder: bag or external")->capture_default_str();
    app->add_option("--embeddings", embeddings, "Embedding exchange file for the external encoder");
    app->add_option("--dim", dim, "Node embedding size")->capture_default_str();
    app->add_option("--layers", layers, "R-GCN layers")->capture_default_str();
    app->add_option("--head-hidden", head_hidden, "Hidden size of the prediction heads")->capture_default_str();
    app->add_flag("--no-self-loop", no_self_loop, "Drop the self-connection term of the R-GCN");
    app->add_flag("--out-neighbors", out_neighbors, "Aggregate over outgoing instead of incoming edges");
  }

  ModelConfig config() const {
    ModelConfig c;
    c.encoder = parse_encoder_kind(encoder);
    c.dim = dim;
    c.layers = layers;
    c.head_hidden = head_hidden;
    c.self_loop = !no_self_loop;
    c.in_neighbors = !out_neighbors;
    return c;
  }
};

struct TrainFlags {
  TrainConfig config;
  std::string edge_weighting = "rate";

  void add(CLI::App* app) {
    app->add_option("--lr", config.lr, "Peak learning rate")->capture_default_str();
    app->add_option("--epochs", config.epochs, "Maximum epochs")->capture_default_str();
    app->add_option("--batch-graphs", config.batch_graphs, "Graphs per optimizer step")->capture_default_str();
    app->add_option("--warmup-proportion", config.warmup_proportion, "Warm-up share of all steps")
        ->capture_default_str();
    app->add_option("--warmup-steps", config.warmup_steps, "Warm-up steps (overrides the proportion when >= 0)")
        ->capture_default_str();
    app->add_option("--patience", config.patience, "Epochs without dev improvement before stopping")
        ->capture_default_str();
    app->add_option("--weight-decay", config.weight_decay, "Decoupled weight decay")->capture_default_str();
  }
};

struct RunRecord {
  std::string command;
  std::uint64_t seed = 0;
  json inputs = json::object();
  json outputs = json::object();
  fs::path manifest;

  void input(const std::string& p) {
    if (!p.empty()) inputs[p] = path_digest(p);
  }
  void output(const fs::path& p) { outputs[p.string()] = path_digest(p); }
};

json option_values(const CLI::App* app) {
  json flags = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || name == "--help" || name == "-h") continue;
    if (opt->count() > 0) {
      const std::vector<std::string>& r = opt->results();
      flags[opt->get_lnames().empty() ? name : "--" + opt->get_lnames().front()] =
          r.size() == 1 ? json(r.front()) : json(r);
    } else if (!opt->get_default_str().empty()) {
      flags["--" + (opt->get_lnames().empty() ? name : opt->get_lnames().front())] = opt->get_default_str();
    }
  }
  return flags;
}

void write_manifest(const RunRecord& run, const CLI::App* app, const CLI::App* sub, const std::string& status) {
  if (run.manifest.empty()) return;
  json m = {{"format", "eng-run-1"},
            {"command", run.command},
            {"status", status},
            {"seed", run.seed},
            {"versions",
             {{"eng", kVersion},
              {"compiler", __VERSION__},
              {"cli11", CLI11_VERSION},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
            {"flags", option_values(sub)},
            {"global_flags", option_values(app)},
            {"inputs", run.inputs},
            {"outputs", run.outputs}};
  if (run.manifest.has_parent_path()) fs::create_directories(run.manifest.parent_path());
  write_file(run.manifest, m.dump(2) + "\n");
}

fs::path default_manifest(const std::string& output, const std::string& command) {
  if (output.empty()) return fs::path("eng-" + command + ".manifest.json");
  fs::path p(output);
  while (!p.empty() && !p.has_filename()) p = p.parent_path();
  return p.parent_path() / (p.filename().string() + ".manifest.json");
}

std::vector<Document> load_optional_corpus(RunRecord& run, const std::string& path) {
  if (path.empty()) return {};
  run.input(path);
  return load_corpus(path);
}

std::vector<NarrativeGraph> graphs_of(std::span<const GraphExample> examples) {
  std::vector<NarrativeGraph> g;
  for (const GraphExample& ex : examples) g.push_back(ex.graph);
  return g;
}

std::optional<Task> node_task_of(const std::string& objective) {
  if (objective.empty() || is_pretraining_objective(objective)) return std::nullopt;
  return parse_task(objective);
}

void print_report(std::ostream& out, const MetricsReport& report, bool macro) {
  out << report.table();
  const PrfScores& s = macro ? report.macro : report.micro;
  out << (macro ? "macro" : "micro") << " P " << fixed(s.precision) << " R " << fixed(s.recall) << " F1 "
      << fixed(s.f1) << "\n";
}

// ---------------------------------------------------------------------------

struct BuildGraphCmd {
  std::string input, output;
  std::size_t max_nodes = 60;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Corpus file")->required();
    app->add_option("--output", output, "Graph file to write")->required();
    app->add_option("--max-nodes", max_nodes, "Node cap per graph")->capture_default_str();
  }

  void run(RunRecord& rec, std::ostream& out) {
    rec.input(input);
    const std::vector<Document> docs = load_corpus(input);
    GraphConfig gc;
    gc.max_nodes = max_nodes;
    std::vector<NarrativeGraph> graphs;
    std::size_t nodes = 0, edges = 0;
    for (const Document& d : docs) {
      graphs.push_back(build_graph(d, gc));
      nodes += graphs.back().nodes.size();
      edges += graphs.back().edges.size();
    }
    write_graphs(output, graphs);
    rec.output(output);
    out << "graphs " << graphs.size() << " nodes " << nodes << " edges " << edges << "\n";
  }
};

struct PretrainCmd {
  std::string objective = "link", graphs, corpus, out_dir, lexicon, weighting = "rate";
  std::size_t max_nodes = 60;
  bool mask = false;
  ModelFlags model;
  TrainFlags train{pretraining_defaults()};

  void add(CLI::App* app) {
    app->add_option("--objective", objective, "link or sentiment")
        ->capture_default_str()
        ->check(CLI::IsMember({"link", "sentiment"}));
    app->add_option("--graphs", graphs, "Graph file (built from the corpus when omitted)");
    app->add_option("--corpus", corpus, "Corpus file with the story text")->required();
    app->add_option("--out", out_dir, "Checkpoint directory")->required();
    app->add_option("--lexicon", lexicon, "Sentiment lexicon file (builtin when omitted)");
    app->add_option("--sample-rate", train.config.sample_rate, "Share of edges sampled per graph")
        ->capture_default_str();
    app->add_option("--edge-weighting", weighting, "rate, inverse or uniform")->capture_default_str();
    app->add_flag("--mask-sampled-edges", mask, "Remove sampled positives from the message graph");
    app->add_option("--max-nodes", max_nodes, "Node cap per graph")->capture_default_str();
    model.add(app);
    train.add(app);
  }

  void run(RunRecord& rec, std::ostream& out) {
    rec.input(corpus);
    const std::vector<Document> docs = load_corpus(corpus);
    std::vector<GraphExample> examples;
    if (!graphs.empty()) {
      rec.input(graphs);
      examples = pair_examples(docs, read_graphs(graphs), std::nullopt);
    } else {
      GraphConfig gc;
      gc.max_nodes = max_nodes;
      examples = prepare_examples(docs, gc, std::nullopt);
    }
    Rng rng(rec.seed);
    ModelConfig mc = model.config();
    std::unique_ptr<ExternalEmbeddingTable> table;
    if (mc.encoder == EncoderKind::kExternal) {
      if (model.embeddings.empty()) throw UsageError("--encoder external needs --embeddings");
      rec.input(model.embeddings);
      table = std::make_unique<ExternalEmbeddingTable>(load_external_embeddings(model.embeddings, graphs_of(examples)));
      mc.external_dim = table->dim;
    }
    EngModel m = create_model(mc, TokenVocabulary::build(docs), rng);
    m.external = table.get();
    attach_head(m, objective, rng);
    TrainConfig tc = train.config;
    tc.seed = rec.seed;
    tc.mask_sampled_edges = mask;
    tc.edge_weighting = parse_edge_weighting(weighting);
    tc.on_epoch = [&out](const EpochRecord& r) {
      out << "epoch " << r.epoch << " loss " << fixed(r.train_loss, 6) << "\n";
    };
    TrainResult result;
    if (objective == "link") {
      result = pretrain_link(m, examples, tc);
    } else {
      SentimentLexicon lex = builtin_sentiment_lexicon();
      if (!lexicon.empty()) {
        rec.input(lexicon);
        lex = load_sentiment_lexicon(lexicon);
      }
      result = pretrain_sentiment(m, examples, lex, tc);
      out << "sentiment accuracy " << fixed(100.0 * sentiment_accuracy(m, examples, lex)) << "\n";
    }
    save_model(out_dir, m, result.history_json());
    rec.output(out_dir);
    out << "saved " << out_dir << " after " << result.epochs_run << " epochs\n";
  }
};

struct TrainCmd {
  std::string task, train_path, dev_path, test_path, init, out_dir, predictions;
  std::size_t max_nodes = 60;
  bool lr_grid = false;
  ModelFlags model;
  TrainFlags train{downstream_defaults()};

  void add(CLI::App* app) {
    app->add_option("--task", task, "maslow, reiss, plutchik or desire")->required();
    app->add_option("--train", train_path, "Training corpus")->required();
    app->add_option("--dev", dev_path, "Development corpus (model selection)");
    app->add_option("--test", test_path, "Test corpus (scored after training)");
    app->add_option("--init", init, "Checkpoint to start from");
    app->add_option("--out", out_dir, "Checkpoint directory")->required();
    app->add_option("--predictions", predictions, "Prediction file for the test corpus");
    app->add_flag("--lr-grid", lr_grid, "Select the learning rate from {2e-3, 2e-4, 2e-5, 2e-6} on dev");
    app->add_option("--max-nodes", max_nodes, "Node cap per graph")->capture_default_str();
    model.add(app);
    train.add(app);
  }

  void run(RunRecord& rec, std::ostream& out) {
    const Task t = parse_task(task);
    rec.input(train_path);
    const std::vector<Document> train_docs = load_corpus(train_path);
    const std::vector<Document> dev_docs = load_optional_corpus(rec, dev_path);
    const std::vector<Document> test_docs = load_optional_corpus(rec, test_path);
    GraphConfig gc;
    gc.max_nodes = max_nodes;
    const auto train_ex = prepare_examples(train_docs, gc, t);
    const auto dev_ex = prepare_examples(dev_docs, gc, t);
    const auto test_ex = prepare_examples(test_docs, gc, t);
    Rng rng(rec.seed);
    EngModel base;
    if (!init.empty()) {
      rec.input(init);
      base = load_model(init);
      if (const auto prior = node_task_of(base.objective); prior && *prior != t) {
        throw UsageError("--init checkpoint was trained for task '" + base.objective + "', not '" + task + "'");
      }
    } else {
      ModelConfig mc = model.config();
      if (mc.encoder == EncoderKind::kExternal) {
        if (model.embeddings.empty()) throw UsageError("--encoder external needs --embeddings");
        std::size_t dim = 0;
        read_embedding_records(model.embeddings, &dim);
        mc.external_dim = dim;
      }
      base = create_model(mc, TokenVocabulary::build(train_docs), rng);
    }
    std::unique_ptr<ExternalEmbeddingTable> table;
    if (base.config.encoder == EncoderKind::kExternal) {
      if (model.embeddings.empty()) throw UsageError("the external encoder needs --embeddings");
      rec.input(model.embeddings);
      std::vector<NarrativeGraph> all = graphs_of(train_ex);
      for (const auto* set : {&dev_ex, &test_ex}) {
        for (const GraphExample& ex : *set) all.push_back(ex.graph);
      }
      table = std::make_unique<ExternalEmbeddingTable>(load_external_embeddings(model.embeddings, all));
      if (table->dim != base.config.external_dim) {
        throw DataError("embedding dimension " + std::to_string(table->dim) + " does not match the checkpoint (" +
                        std::to_string(base.config.external_dim) + ")");
      }
    }
    base.external = table.get();
    attach_head(base, std::string(task_name(t)), rng);

    std::vector<double> rates{train.config.lr};
    if (lr_grid) {
      if (dev_ex.empty()) throw UsageError("--lr-grid needs --dev");
      rates.assign(std::begin(kLearningRateGrid), std::end(kLearningRateGrid));
    }
    std::optional<EngModel> best;
    TrainResult best_result;
    double best_lr = 0.0;
    for (double lr : rates) {
      EngModel m = base;
      TrainConfig tc = train.config;
      tc.lr = lr;
      tc.seed = rec.seed;
      tc.on_epoch = [&out, lr](const EpochRecord& r) {
        out << "lr " << lr << " epoch " << r.epoch << " loss " << fixed(r.train_loss, 6);
        if (std::isfinite(r.dev_metric)) out << " dev " << fixed(r.dev_metric);
        out << "\n";
      };
      TrainResult result = train_downstream(m, t, train_ex, dev_ex, tc);
      const bool better = !best || (std::isfinite(result.best_metric) &&
                                    (!std::isfinite(best_result.best_metric) ||
                                     result.best_metric > best_result.best_metric));
      if (better) {
        best = std::move(m);
        best_result = result;
        best_lr = lr;
      }
    }
    json history = {{"lr", best_lr}, {"epochs", best_result.history_json()}, {"best_epoch", best_result.best_epoch}};
    save_model(out_dir, *best, history);
    rec.output(out_dir);
    out << "saved " << out_dir << " lr " << best_lr << " best epoch " << best_result.best_epoch;
    if (std::isfinite(best_result.best_metric)) out << " dev " << fixed(best_result.best_metric);
    out << "\n";
    if (!test_ex.empty()) {
      MetricsReport report;
      if (t == Task::kDesire) {
        const auto preds = predict_documents(*best, test_ex);
        report = evaluate_document_predictions(preds);
        if (!predictions.empty()) write_predictions(predictions, t, {}, preds);
      } else {
        const auto preds = predict_nodes(*best, t, test_ex, false);
        std::vector<NodePrediction> labeled;
        for (const NodePrediction& p : preds) {
          if (!p.gold.empty()) labeled.push_back(p);
        }
        report = evaluate_node_predictions(labeled, t);
        if (!predictions.empty()) write_predictions(predictions, t, preds, {});
      }
      if (!predictions.empty()) rec.output(predictions);
      out << "test\n";
      print_report(out, report, t == Task::kDesire);
    }
  }
};

struct EvalCmd {
  std::string pred, gold, ckpt, average = "auto", embeddings;
  std::size_t max_nodes = 60;

  void add(CLI::App* app) {
    app->add_option("--pred", pred, "Prediction file");
    app->add_option("--gold", gold, "Gold corpus")->required();
    app->add_option("--ckpt", ckpt, "Checkpoint to predict with instead of --pred");
    app->add_option("--embeddings", embeddings, "Embedding exchange file for external-encoder checkpoints");
    app->add_option("--average", average, "micro, macro or auto (macro for desire)")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "micro", "macro"}));
    app->add_option("--max-nodes", max_nodes, "Node cap per graph")->capture_default_str();
  }

  void run(RunRecord& rec, std::ostream& out) {
    if (pred.empty() == ckpt.empty()) throw UsageError("eval needs exactly one of --pred or --ckpt");
    rec.input(gold);
    const std::vector<Document> docs = load_corpus(gold);
    PredictionFile file;
    if (!pred.empty()) {
      rec.input(pred);
      file = read_predictions(pred);
    } else {
      rec.input(ckpt);
      EngModel m = load_model(ckpt);
      const auto task = node_task_of(m.objective);
      if (!task) throw UsageError("checkpoint '" + ckpt + "' has no downstream head");
      GraphConfig gc;
      gc.max_nodes = max_nodes;
      const auto examples = prepare_examples(docs, gc, *task);
      std::unique_ptr<ExternalEmbeddingTable> table;
      if (m.config.encoder == EncoderKind::kExternal) {
        if (embeddings.empty()) throw UsageError("the external encoder needs --embeddings");
        rec.input(embeddings);
        table = std::make_unique<ExternalEmbeddingTable>(load_external_embeddings(embeddings, graphs_of(examples)));
        m.external = table.get();
      }
      file.task = *task;
      if (*task == Task::kDesire) {
        file.documents = predict_documents(m, examples);
      } else {
        file.nodes = predict_nodes(m, *task, examples, false);
      }
    }
    const MetricsReport report = score_against_corpus(file, docs);
    const bool macro = average == "macro" || (average == "auto" && file.task == Task::kDesire);
    out << "task " << task_name(file.task) << "\n";
    print_report(out, report, macro);
    const PrfScores& s = macro ? report.macro : report.micro;
    out << "F1 " << fixed(s.f1) << "\n";
  }
};

struct InferCmd {
  std::string ckpt, input, out_path, rules_path, potentials, save_potentials, train_path, dev_path, embeddings;
  std::string solver = "auto", alignment, polarity;
  bool no_hard = false;
  std::size_t max_nodes = 60, node_budget = kDefaultNodeBudget;
  PotentialTrainConfig pconf;

  void add(CLI::App* app) {
    app->add_option("--ckpt", ckpt, "Checkpoint providing node embeddings (and the neural head)")->required();
    app->add_option("--input", input, "Corpus to predict")->required();
    app->add_option("--out", out_path, "Prediction file, or prefix of one file per task with --symbolic")
        ->required();
    app->add_option("--symbolic", rules_path, "Rule file; enables joint MAP inference");
    app->add_option("--potentials", potentials, "Trained potential checkpoint");
    app->add_option("--train", train_path, "Corpus to train potentials on");
    app->add_option("--dev", dev_path, "Corpus for potential early stopping");
    app->add_option("--save-potentials", save_potentials, "Where to store trained potentials");
    app->add_option("--embeddings", embeddings, "Embedding exchange file for external-encoder checkpoints");
    app->add_option("--solver", solver, "auto, branch_and_bound or exhaustive")->capture_default_str();
    app->add_option("--node-budget", node_budget, "Branch-and-bound nodes per component, 0 for no limit")
        ->capture_default_str();
    app->add_flag("--no-hard", no_hard, "Drop the hard rules");
    app->add_option("--alignment", alignment, "Maslow-Reiss alignment table (builtin when omitted)");
    app->add_option("--polarity", polarity, "Plutchik polarity groups (builtin when omitted)");
    app->add_option("--potential-lr", pconf.lr, "Potential SGD learning rate")->capture_default_str();
    app->add_option("--potential-epochs", pconf.max_epochs, "Potential epoch cap")->capture_default_str();
    app->add_option("--potential-patience", pconf.patience, "Potential early-stopping patience")
        ->capture_default_str();
    app->add_option("--potential-batch", pconf.batch, "Potential minibatch size")->capture_default_str();
    app->add_option("--max-nodes", max_nodes, "Node cap per graph")->capture_default_str();
  }

  void run(RunRecord& rec, std::ostream& out) {
    rec.input(ckpt);
    EngModel m = load_model(ckpt);
    rec.input(input);
    const std::vector<Document> docs = load_corpus(input);
    const std::optional<Task> head_task = node_task_of(m.objective);
    GraphConfig gc;
    gc.max_nodes = max_nodes;
    const auto examples = prepare_examples(docs, gc, head_task);
    std::vector<Document> train_docs = load_optional_corpus(rec, train_path);
    std::vector<Document> dev_docs = load_optional_corpus(rec, dev_path);
    const auto train_ex = prepare_examples(train_docs, gc, head_task);
    const auto dev_ex = prepare_examples(dev_docs, gc, head_task);
    std::unique_ptr<ExternalEmbeddingTable> table;
    if (m.config.encoder == EncoderKind::kExternal) {
      if (embeddings.empty()) throw UsageError("the external encoder needs --embeddings");
      rec.input(embeddings);
      std::vector<NarrativeGraph> all = graphs_of(examples);
      for (const auto* set : {&train_ex, &dev_ex}) {
        for (const GraphExample& ex : *set) all.push_back(ex.graph);
      }
      table = std::make_unique<ExternalEmbeddingTable>(load_external_embeddings(embeddings, all));
      m.external = table.get();
    }
    if (rules_path.empty()) {
      run_neural(rec, out, m, head_task, examples);
    } else {
      run_symbolic(rec, out, m, examples, train_ex, dev_ex);
    }
  }

  void run_neural(RunRecord& rec, std::ostream& out, const EngModel& m, std::optional<Task> task,
                  const std::vector<GraphExample>& examples) {
    if (!task) throw UsageError("checkpoint has no downstream head; pass --symbolic for rule-based inference");
    if (*task == Task::kDesire) {
      write_predictions(out_path, *task, {}, predict_documents(m, examples));
    } else {
      write_predictions(out_path, *task, predict_nodes(m, *task, examples, false), {});
    }
    rec.output(out_path);
    out << "wrote " << out_path << "\n";
  }

  static std::vector<StoryData> story_data(const EngModel& m, const std::vector<GraphExample>& examples) {
    std::vector<StoryData> out;
    for (const GraphExample& ex : examples) {
      if (ex.graph.nodes.empty()) continue;
      out.push_back({&ex.doc, story_context(ex.graph), node_embeddings(m, ex)});
    }
    return out;
  }

  void run_symbolic(RunRecord& rec, std::ostream& out, const EngModel& m, const std::vector<GraphExample>& examples,
                    const std::vector<GraphExample>& train_ex, const std::vector<GraphExample>& dev_ex) {
    rec.input(rules_path);
    const RuleSet rules = load_rules(rules_path);
    const SolverKind kind = parse_solver(solver);
    KnowledgeBase kb = builtin_knowledge();
    if (!alignment.empty()) {
      rec.input(alignment);
      kb.align = load_alignment(alignment);
    }
    if (!polarity.empty()) {
      rec.input(polarity);
      kb.polarity = load_polarity(polarity);
    }
    const std::vector<PotentialSpec> specs = potential_specs(rules);
    ad::ParameterStore store;
    std::set<std::string> disabled;
    const std::string rules_digest = file_digest(rules_path);
    if (!potentials.empty()) {
      rec.input(potentials);
      Rng init_rng(0);
      ad::ParameterStore expected;
      init_potentials(expected, specs, m.config.dim, m.config.head_hidden, init_rng);
      const std::vector<std::string> names = expected.names();
      Checkpoint c = load_checkpoint(potentials, {names.begin(), names.end()});
      if (c.meta.value("rules", std::string()) != rules_digest) {
        throw DataError("potentials in '" + potentials + "' were trained for a different rule file");
      }
      for (const std::string& n : names) {
        if (!c.store.value(n).same_shape(expected.value(n))) {
          throw DataError("potential parameter '" + n + "' has shape " + c.store.value(n).shape_string() +
                          ", expected " + expected.value(n).shape_string());
        }
      }
      store = std::move(c.store);
      for (const auto& d : c.meta.value("disabled", json::array())) disabled.insert(d.get<std::string>());
    } else {
      if (train_ex.empty()) throw UsageError("--symbolic needs --potentials or a --train corpus");
      Rng rng(rec.seed);
      init_potentials(store, specs, m.config.dim, m.config.head_hidden, rng);
      PotentialTrainConfig pc = pconf;
      pc.seed = rec.seed;
      const auto train_data = story_data(m, train_ex);
      const auto dev_data = story_data(m, dev_ex);
      const PotentialTrainReport report = train_potentials(store, rules, train_data, dev_data, pc);
      for (const std::string& w : report.warnings) out << "warning: " << w << "\n";
      disabled = report.disabled;
      for (const auto& [name, rows] : report.rows) {
        out << "potential " << name << " rows " << rows;
        if (report.train_loss.count(name)) out << " train_loss " << fixed(report.train_loss.at(name), 6);
        if (report.dev_loss.count(name)) out << " dev_loss " << fixed(report.dev_loss.at(name), 6);
        if (report.epochs.count(name)) out << " epochs " << report.epochs.at(name);
        out << "\n";
      }
      if (!save_potentials.empty()) {
        save_checkpoint(save_potentials, store,
                        {{"rules", rules_digest}, {"disabled", disabled}, {"dim", m.config.dim}});
        rec.output(save_potentials);
      }
    }

    std::map<Task, std::vector<NodePrediction>> by_task;
    std::size_t violations = 0, alignment_conflicts = 0, polarity_conflicts = 0, stories = 0, unproven = 0;
    for (const GraphExample& ex : examples) {
      if (ex.graph.nodes.empty()) continue;
      const StoryContext ctx = story_context(ex.graph);
      GroundProgram program = ground_rules(rules, ctx, kb, !no_hard);
      score_rules(program, rules, store, node_embeddings(m, ex), disabled);
      const MapResult map = map_inference(program, kind, node_budget);
      unproven += map.unproven;
      violations += program.violations(map.assignment);
      const auto decoded = decode_assignment(program, map.assignment, ctx.mentions.size());
      const ViolationCount vc = count_violations(decoded, kb);
      alignment_conflicts += vc.alignment;
      polarity_conflicts += vc.polarity;
      ++stories;
      for (const auto& [task, per_mention] : decoded) {
        const std::size_t labels = label_vocabulary(task).size();
        for (std::size_t i = 0; i < per_mention.size(); ++i) {
          const StoryMention& sm = ctx.mentions[i];
          NodePrediction p;
          p.doc_id = ex.doc.doc_id;
          p.node_id = sm.node_id;
          p.entity = sm.entity;
          p.sentence = sm.sentence;
          p.decisions.assign(labels, 0);
          for (int l : per_mention[i]) p.decisions[static_cast<std::size_t>(l)] = 1;
          p.probabilities.assign(p.decisions.begin(), p.decisions.end());
          if (auto g = gold_vector(ex.doc, task, sm.entity, sm.sentence)) p.gold = *g;
          by_task[task].push_back(std::move(p));
        }
      }
    }
    for (const auto& [task, preds] : by_task) {
      const std::string path = out_path + "." + std::string(task_name(task)) + ".tsv";
      write_predictions(path, task, preds, {});
      rec.output(path);
      std::vector<NodePrediction> labeled;
      for (const NodePrediction& p : preds) {
        if (!p.gold.empty()) labeled.push_back(p);
      }
      out << "wrote " << path << "\n";
      if (!labeled.empty()) {
        const MetricsReport r = evaluate_node_predictions(labeled, task);
        out << task_name(task) << " micro P " << fixed(r.micro.precision) << " R " << fixed(r.micro.recall)
            << " F1 " << fixed(r.micro.f1) << "\n";
      }
    }
    out << "stories " << stories << " hard_violations " << violations << " alignment_conflicts "
        << alignment_conflicts << " polarity_conflicts " << polarity_conflicts << " unproven_components " << unproven
        << "\n";
  }
};

struct AnalyzeCmd {
  std::string ckpt, input, label_task, tag = "verb", dump, embeddings;
  std::size_t clusters = 5, folds = 10, neighbors = 5, max_nodes = 60;

  void add(CLI::App* app) {
    app->add_option("--ckpt", ckpt, "Checkpoint")->required();
    app->add_option("--input", input, "Corpus")->required();
    app->add_option("--label-task", label_task, "Task whose first gold label tags each node");
    app->add_option("--tag", tag, "Grouping tag for purity and KNN: verb or label")
        ->capture_default_str()
        ->check(CLI::IsMember({"verb", "label"}));
    app->add_option("--dump", dump, "Write tagged contextual embeddings here");
    app->add_option("--embeddings", embeddings, "Embedding exchange file for external-encoder checkpoints");
    app->add_option("--clusters", clusters, "K-means clusters")->capture_default_str();
    app->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
    app->add_option("--neighbors", neighbors, "KNN neighbours")->capture_default_str();
    app->add_option("--max-nodes", max_nodes, "Node cap per graph")->capture_default_str();
  }

  void run(RunRecord& rec, std::ostream& out) {
    rec.input(ckpt);
    EngModel m = load_model(ckpt);
    rec.input(input);
    const std::vector<Document> docs = load_corpus(input);
    GraphConfig gc;
    gc.max_nodes = max_nodes;
    const auto examples = prepare_examples(docs, gc, node_task_of(m.objective));
    std::unique_ptr<ExternalEmbeddingTable> table;
    if (m.config.encoder == EncoderKind::kExternal) {
      if (embeddings.empty()) throw UsageError("the external encoder needs --embeddings");
      rec.input(embeddings);
      table = std::make_unique<ExternalEmbeddingTable>(load_external_embeddings(embeddings, graphs_of(examples)));
      m.external = table.get();
    }
    std::optional<Task> lt;
    if (!label_task.empty()) lt = parse_task(label_task);
    if (tag == "label" && !lt) throw UsageError("--tag label needs --label-task");
    const std::vector<EmbeddingRecord> records = embedding_records(m, examples, lt);
    if (!dump.empty()) {
      write_embedding_records(dump, m.config.dim, records, true);
      rec.output(dump);
      out << "wrote " << records.size() << " rows to " << dump << "\n";
    }
    Points points;
    std::vector<std::string> tags;
    for (const EmbeddingRecord& r : records) {
      const std::string& t = tag == "verb" ? r.verb : r.label;
      if (t.empty()) continue;
      points.push_back(r.vector);
      tags.push_back(t);
    }
    out << "tagged nodes " << points.size() << "\n";
    if (points.size() < clusters * folds) {
      out << "too few tagged nodes for " << folds << "-fold analysis with " << clusters << " clusters\n";
      return;
    }
    Rng rng(rec.seed);
    out << "purity " << fixed(cluster_purity(points, tags, clusters, folds, rng), 4) << "\n";
    out << "knn_accuracy " << fixed(knn_classify(points, tags, neighbors, folds, rng), 4) << "\n";
  }
};

struct ExportCmd {
  std::string out_dir;

  void add(CLI::App* app) { app->add_option("--out", out_dir, "Directory to write fixtures to")->required(); }

  void run(RunRecord& rec, std::ostream& out) {
    for (const fs::path& p : export_fixtures(out_dir, rec.seed)) {
      rec.output(p);
      out << "wrote " << p.string() << "\n";
    }
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entity-based narrative graph toolkit", "eng"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML or INI file mirroring the flags; command-line flags win");
  app.set_version_flag("--version", kVersion);
  RunRecord rec;
  std::string manifest;
  app.add_option("--seed", rec.seed, "Random seed")->capture_default_str();
  app.add_option("--manifest", manifest, "Run manifest path (default: next to the main output)");

  BuildGraphCmd build;
  PretrainCmd pretrain;
  TrainCmd train;
  EvalCmd eval;
  InferCmd infer;
  AnalyzeCmd analyze;
  ExportCmd fixtures;
  auto* c_build = app.add_subcommand("build-graph", "Build narrative graphs from a corpus");
  auto* c_pretrain = app.add_subcommand("pretrain", "Task-adaptive pre-training (link or sentiment)");
  auto* c_train = app.add_subcommand("train", "Train a downstream head");
  auto* c_eval = app.add_subcommand("eval", "Score predictions against a gold corpus");
  auto* c_infer = app.add_subcommand("infer", "Predict with a checkpoint, optionally with joint rule inference");
  auto* c_analyze = app.add_subcommand("analyze", "Cluster purity, KNN accuracy and embedding dumps");
  auto* c_fixtures = app.add_subcommand("export-fixtures", "Write the synthetic fixture corpora");
  build.add(c_build);
  pretrain.add(c_pretrain);
  train.add(c_train);
  eval.add(c_eval);
  infer.add(c_infer);
  analyze.add(c_analyze);
  fixtures.add(c_fixtures);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(kVersion) + "\n" : app.help());
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  rec.command = sub->get_name();
  std::string primary;
  if (sub == c_build) primary = build.output;
  if (sub == c_pretrain) primary = pretrain.out_dir;
  if (sub == c_train) primary = train.out_dir;
  if (sub == c_infer) primary = infer.out_path;
  if (sub == c_analyze) primary = analyze.dump;
  if (sub == c_fixtures) primary = fixtures.out_dir;
  rec.manifest = manifest.empty() ? default_manifest(primary, rec.command) : fs::path(manifest);

  int code = kExitOk;
  std::string status = "ok";
  try {
    if (sub == c_build) build.run(rec, out);
    if (sub == c_pretrain) pretrain.run(rec, out);
    if (sub == c_train) train.run(rec, out);
    if (sub == c_eval) eval.run(rec, out);
    if (sub == c_infer) infer.run(rec, out);
    if (sub == c_analyze) analyze.run(rec, out);
    if (sub == c_fixtures) fixtures.run(rec, out);
  } catch (const UsageError& e) {
    code = kExitUsage;
    status = std::string("usage error: ") + e.what();
  } catch (const NumericError& e) {
    code = kExitNumeric;
    status = std::string("numeric failure: ") + e.what();
  } catch (const DataError& e) {
    code = kExitData;
    status = std::string("data error: ") + e.what();
  } catch (const nlohmann::json::exception& e) {
    code = kExitData;
    status = std::string("data error: ") + e.what();
  } catch (const fs::filesystem_error& e) {
    code = kExitData;
    status = std::string("data error: ") + e.what();
  } catch (const std::invalid_argument& e) {
    code = kExitUsage;
    status = std::string("usage error: ") + e.what();
  }
  if (code != kExitOk) err << "error: " << status << "\n";
  try {
    write_manifest(rec, &app, sub, status);
  } catch (const std::exception& e) {
    err << "error: cannot write run manifest: " << e.what() << "\n";
    if (code == kExitOk) code = kExitData;
  }
  return code;
}

}  // namespace eng
