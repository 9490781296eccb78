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

#include "eng/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace eng {
namespace {

using nlohmann::json;

// Builds the loss of one micro-batch (one graph); false skips the graph.
using LossFn = std::function<bool(ad::Tape&, std::size_t index, Rng&, ad::Var* loss)>;

TrainResult run_training(EngModel& model, std::size_t count, const TrainConfig& config, Rng& rng,
                         const LossFn& build, const std::function<double()>& dev_metric) {
  if (count == 0) throw DataError("training set is empty");
  if (config.batch_graphs == 0 || config.patience == 0) throw UsageError("batch size and patience must be positive");
  if (!(config.lr >= 0.0) || !std::isfinite(config.lr)) throw UsageError("learning rate must be finite and >= 0");
  const std::size_t steps_per_epoch = (count + config.batch_graphs - 1) / config.batch_graphs;
  const auto total = static_cast<std::int64_t>(steps_per_epoch * config.epochs);
  const std::int64_t warmup = resolve_warmup(config, total);
  ad::AdamConfig adam;
  adam.weight_decay = config.weight_decay;

  TrainResult result;
  std::optional<ad::ParameterStore> best;
  std::size_t stale = 0;
  std::int64_t step = 0;
  std::vector<std::size_t> order(count);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t start = 0; start < count; start += config.batch_graphs) {
      const std::size_t end = std::min(count, start + config.batch_graphs);
      ad::Gradients acc;
      std::size_t used = 0;
      for (std::size_t pos = start; pos < end; ++pos) {
        ad::Tape tape;
        ad::Var loss;
        if (!build(tape, order[pos], rng, &loss)) continue;
        const double value = loss.value().item();
        if (!std::isfinite(value)) throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
        ad::accumulate(acc, tape.backward(loss));
        loss_sum += value;
        ++loss_count;
        ++used;
      }
      if (used == 0) continue;
      ad::scale_gradients(acc, 1.0 / static_cast<double>(used));
      ++step;
      adam.lr = scheduled_lr(config.lr, step, warmup);
      ad::adam_update(model.store, acc, adam);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.step = step;
    rec.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    result.epochs_run = epoch;
    if (dev_metric) {
      rec.dev_metric = dev_metric();
      if (!best || rec.dev_metric > result.best_metric) {
        result.best_metric = rec.dev_metric;
        result.best_epoch = epoch;
        best = model.store;
        stale = 0;
      } else {
        ++stale;
      }
    }
    result.history.push_back(rec);
    if (config.on_epoch) config.on_epoch(rec);
    if (dev_metric && stale >= config.patience) break;
  }
  if (best) {
    model.store = std::move(*best);
  } else {
    result.best_epoch = result.epochs_run;
  }
  return result;
}

std::string format_float(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(v));
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) out.push_back(field);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& where) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw DataError(where + ": malformed number '" + tok + "'");
    }
  }
  return out;
}

struct NodeBatch {
  std::vector<int> ids;
  ad::Tensor targets;
};

NodeBatch labeled_nodes(const GraphExample& ex, Task task) {
  NodeBatch b;
  std::vector<std::vector<int>> rows;
  for (const EngNode& n : ex.graph.nodes) {
    auto gold = gold_vector(ex.doc, task, n.entity, n.sentence);
    if (!gold) continue;
    b.ids.push_back(n.id);
    rows.push_back(std::move(*gold));
  }
  const std::size_t classes = label_vocabulary(task).size();
  b.targets = ad::Tensor(rows.size(), classes);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < classes; ++c) b.targets(i, c) = rows[i][c];
  }
  return b;
}

int desire_gold(const Document& doc) {
  if (!doc.labels || !doc.labels->desire) return -1;
  return label_index(Task::kDesire, doc.labels->desire->label);
}

}  // namespace

TrainConfig pretraining_defaults() { return TrainConfig{}; }

TrainConfig downstream_defaults() {
  TrainConfig c;
  c.lr = 2e-4;
  c.batch_graphs = 1;
  c.warmup_steps = 5000;
  c.patience = 10;
  c.epochs = 100;
  return c;
}

json TrainResult::history_json() const {
  json h = json::array();
  for (const EpochRecord& r : history) {
    json row = {{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"step", r.step}};
    if (std::isfinite(r.dev_metric)) row["dev_metric"] = r.dev_metric;
    h.push_back(row);
  }
  return h;
}

double scheduled_lr(double base, std::int64_t step, std::int64_t warmup) {
  if (warmup <= 0 || step >= warmup) return base;
  return base * static_cast<double>(step) / static_cast<double>(warmup);
}

std::int64_t resolve_warmup(const TrainConfig& config, std::int64_t total_steps) {
  if (config.warmup_steps >= 0) return config.warmup_steps;
  return static_cast<std::int64_t>(std::ceil(config.warmup_proportion * static_cast<double>(total_steps)));
}

TrainResult pretrain_link(EngModel& model, std::span<const GraphExample> examples, const TrainConfig& config) {
  if (model.objective != "link") throw UsageError("pretrain_link needs a model with the link head");
  Rng rng(config.seed);
  const RelationWeights weights = relation_loss_weights(config.edge_weighting);
  const RelationDistribution& dist = default_relation_distribution();
  LossFn build = [&](ad::Tape& tape, std::size_t index, Rng& r, ad::Var* loss) {
    const GraphExample& ex = examples[index];
    if (ex.graph.nodes.empty()) return false;
    std::vector<EdgeSample> samples = sample_training_edges(ex.graph, config.sample_rate, dist, r);
    if (samples.empty()) return false;
    const std::size_t positives = samples.size();
    for (std::size_t k = 0; k < positives; ++k) samples.push_back(corrupt_edge(ex.graph, samples[k].edge, r));
    NarrativeGraph masked;
    const NarrativeGraph* message = nullptr;
    if (config.mask_sampled_edges) {
      masked = ex.graph;
      for (std::size_t k = 0; k < positives; ++k) masked.edges.erase(samples[k].edge);
      message = &masked;
    }
    ad::Var h = encode_graph(tape, model, ex, message);
    *loss = link_loss(distmult_scores(tape, model.store, h, samples), samples, weights);
    return true;
  };
  return run_training(model, examples.size(), config, rng, build, nullptr);
}

std::vector<int> sentiment_targets(const GraphExample& example, const SentimentLexicon& lexicon) {
  std::vector<int> out;
  for (const EngNode& n : example.graph.nodes) {
    const auto& tokens = example.doc.sentences.at(static_cast<std::size_t>(n.sentence)).tokens;
    out.push_back(static_cast<int>(sentiment_label(tokens, lexicon)));
  }
  return out;
}

TrainResult pretrain_sentiment(EngModel& model, std::span<const GraphExample> examples,
                               const SentimentLexicon& lexicon, const TrainConfig& config) {
  if (model.objective != "sentiment") throw UsageError("pretrain_sentiment needs a model with the sentiment head");
  Rng rng(config.seed);
  std::vector<std::vector<int>> targets;
  std::vector<int> all;
  for (const GraphExample& ex : examples) {
    targets.push_back(sentiment_targets(ex, lexicon));
    all.insert(all.end(), targets.back().begin(), targets.back().end());
  }
  const std::vector<double> alpha = inverse_frequency_weights(all, kSentimentClasses);
  LossFn build = [&](ad::Tape& tape, std::size_t index, Rng&, ad::Var* loss) {
    const GraphExample& ex = examples[index];
    if (ex.graph.nodes.empty()) return false;
    ad::Var logits = feed_forward(tape, model.store, "head/sentiment", encode_graph(tape, model, ex));
    *loss = node_loss_multiclass(logits, targets[index], alpha);
    return true;
  };
  return run_training(model, examples.size(), config, rng, build, nullptr);
}

double sentiment_accuracy(const EngModel& model, std::span<const GraphExample> examples,
                          const SentimentLexicon& lexicon) {
  std::size_t correct = 0, total = 0;
  for (const GraphExample& ex : examples) {
    if (ex.graph.nodes.empty()) continue;
    const std::vector<int> gold = sentiment_targets(ex, lexicon);
    ad::Tape tape;
    const ad::Tensor logits =
        feed_forward(tape, model.store, "head/sentiment", encode_graph(tape, model, ex)).value();
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const auto row = logits.row(i);
      const auto arg = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      correct += arg == gold[i] ? 1 : 0;
      ++total;
    }
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

TrainResult train_downstream(EngModel& model, Task task, std::span<const GraphExample> train,
                             std::span<const GraphExample> dev, const TrainConfig& config) {
  if (model.objective != task_name(task)) {
    throw UsageError("model head '" + model.objective + "' does not match task '" + std::string(task_name(task)) + "'");
  }
  Rng rng(config.seed);
  LossFn build;
  std::vector<NodeBatch> batches;
  std::vector<double> alpha;
  if (task == Task::kDesire) {
    std::vector<int> labels;
    for (const GraphExample& ex : train) {
      const int g = desire_gold(ex.doc);
      if (g >= 0) labels.push_back(g);
    }
    alpha = inverse_frequency_weights(labels, label_vocabulary(task).size());
    build = [&](ad::Tape& tape, std::size_t index, Rng&, ad::Var* loss) {
      const GraphExample& ex = train[index];
      const int g = desire_gold(ex.doc);
      if (g < 0 || ex.graph.nodes.empty()) return false;
      ad::Var h = encode_graph(tape, model, ex);
      Attended att = attend_document(tape, model.store, h, desire_query(tape, model, ex));
      ad::Var logits = feed_forward(tape, model.store, "head/doc", att.document);
      const int gold[] = {g};
      *loss = node_loss_multiclass(logits, gold, alpha);
      return true;
    };
  } else {
    for (const GraphExample& ex : train) batches.push_back(labeled_nodes(ex, task));
    build = [&](ad::Tape& tape, std::size_t index, Rng&, ad::Var* loss) {
      const NodeBatch& b = batches[index];
      if (b.ids.empty()) return false;
      ad::Var h = encode_graph(tape, model, train[index]);
      ad::Var logits = feed_forward(tape, model.store, "head/node", ad::embedding_lookup(h, b.ids));
      *loss = node_loss_multilabel(logits, b.targets);
      return true;
    };
  }
  std::function<double()> metric;
  if (!dev.empty()) metric = [&] { return selection_metric(model, task, dev); };
  return run_training(model, train.size(), config, rng, build, metric);
}

std::optional<std::vector<int>> gold_vector(const Document& doc, Task task, const std::string& entity,
                                            int sentence) {
  if (!doc.labels) return std::nullopt;
  const NodeLabels* nl = doc.labels->find(task, entity, sentence);
  if (!nl) return std::nullopt;
  std::vector<int> v(label_vocabulary(task).size(), 0);
  for (const std::string& l : nl->labels) v[static_cast<std::size_t>(label_index(task, l))] = 1;
  return v;
}

std::vector<NodePrediction> predict_nodes(const EngModel& model, Task task, std::span<const GraphExample> examples,
                                          bool labeled_only) {
  std::vector<NodePrediction> out;
  for (const GraphExample& ex : examples) {
    if (ex.graph.nodes.empty()) continue;
    ad::Tape tape;
    const ad::Tensor logits = feed_forward(tape, model.store, "head/node", encode_graph(tape, model, ex)).value();
    for (const EngNode& n : ex.graph.nodes) {
      NodePrediction p;
      p.doc_id = ex.graph.doc_id;
      p.node_id = n.id;
      p.entity = n.entity;
      p.sentence = n.sentence;
      if (auto g = gold_vector(ex.doc, task, n.entity, n.sentence)) p.gold = std::move(*g);
      if (labeled_only && p.gold.empty()) continue;
      for (double z : logits.row(static_cast<std::size_t>(n.id))) {
        const double prob = 1.0 / (1.0 + std::exp(-z));
        p.probabilities.push_back(prob);
        p.decisions.push_back(prob > kDecisionThreshold ? 1 : 0);
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<DocumentPrediction> predict_documents(const EngModel& model, std::span<const GraphExample> examples) {
  std::vector<DocumentPrediction> out;
  for (const GraphExample& ex : examples) {
    if (ex.graph.nodes.empty() || !ex.doc.labels || !ex.doc.labels->desire) continue;
    ad::Tape tape;
    ad::Var h = encode_graph(tape, model, ex);
    Attended att = attend_document(tape, model.store, h, desire_query(tape, model, ex));
    const ad::Tensor probs = ad::softmax(feed_forward(tape, model.store, "head/doc", att.document), 1).value();
    DocumentPrediction p;
    p.doc_id = ex.graph.doc_id;
    p.probabilities.assign(probs.values().begin(), probs.values().end());
    p.predicted = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                                   p.probabilities.begin());
    p.gold = desire_gold(ex.doc);
    out.push_back(std::move(p));
  }
  return out;
}

MetricsReport evaluate_node_predictions(std::span<const NodePrediction> predictions, Task task) {
  std::vector<std::vector<int>> pred, gold;
  for (const NodePrediction& p : predictions) {
    if (p.gold.empty()) continue;
    pred.push_back(p.decisions);
    gold.push_back(p.gold);
  }
  return prf1_multilabel(pred, gold, label_vocabulary(task));
}

MetricsReport evaluate_document_predictions(std::span<const DocumentPrediction> predictions) {
  std::vector<int> pred, gold;
  for (const DocumentPrediction& p : predictions) {
    if (p.gold < 0) continue;
    pred.push_back(p.predicted);
    gold.push_back(p.gold);
  }
  return prf1_multiclass(pred, gold, label_vocabulary(Task::kDesire));
}

double selection_metric(const EngModel& model, Task task, std::span<const GraphExample> examples) {
  if (task == Task::kDesire) return evaluate_document_predictions(predict_documents(model, examples)).macro.f1;
  return evaluate_node_predictions(predict_nodes(model, task, examples, true), task).macro.f1;
}

void write_predictions(const std::filesystem::path& path, Task task, std::span<const NodePrediction> nodes,
                       std::span<const DocumentPrediction> documents) {
  const std::vector<std::string>& labels = label_vocabulary(task);
  std::string out = "#eng-predictions task=" + std::string(task_name(task)) + "\n";
  auto probs = [](const std::vector<double>& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) s += ' ';
      s += format_float(p[i]);
    }
    return s;
  };
  for (const NodePrediction& p : nodes) {
    std::vector<std::string> active;
    for (std::size_t l = 0; l < p.decisions.size(); ++l) {
      if (p.decisions[l]) active.push_back(labels[l]);
    }
    out += p.doc_id + "\t" + std::to_string(p.node_id) + "\t" + p.entity + "\t" + std::to_string(p.sentence) + "\t" +
           (active.empty() ? std::string("-") : join(active, ",")) + "\t" + probs(p.probabilities) + "\n";
  }
  for (const DocumentPrediction& p : documents) {
    out += p.doc_id + "\t" + labels[static_cast<std::size_t>(p.predicted)] + "\t" + probs(p.probabilities) + "\n";
  }
  write_file(path, out);
}

PredictionFile read_predictions(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines.front().rfind("#eng-predictions task=", 0) != 0) {
    throw DataError(path.string() + ":1: missing '#eng-predictions task=<task>' header");
  }
  PredictionFile file;
  try {
    file.task = parse_task(trim(lines.front().substr(std::string("#eng-predictions task=").size())));
  } catch (const std::exception& e) {
    throw DataError(path.string() + ":1: " + e.what());
  }
  const std::vector<std::string>& labels = label_vocabulary(file.task);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const std::vector<std::string> cols = split_tabs(lines[i]);
    if (file.task == Task::kDesire) {
      if (cols.size() != 3) throw DataError(where + ": expected 3 columns for desire predictions");
      DocumentPrediction p;
      p.doc_id = cols[0];
      p.predicted = label_index(Task::kDesire, cols[1]);
      if (p.predicted < 0) throw DataError(where + ": unknown label '" + cols[1] + "'");
      p.probabilities = parse_numbers(cols[2], where);
      file.documents.push_back(std::move(p));
      continue;
    }
    if (cols.size() != 6) throw DataError(where + ": expected 6 columns for node predictions");
    NodePrediction p;
    p.doc_id = cols[0];
    try {
      p.node_id = std::stoi(cols[1]);
      p.sentence = std::stoi(cols[3]);
    } catch (const std::exception&) {
      throw DataError(where + ": malformed node id or sentence index");
    }
    p.entity = cols[2];
    p.decisions.assign(labels.size(), 0);
    if (cols[4] != "-") {
      std::stringstream ss(cols[4]);
      std::string label;
      while (std::getline(ss, label, ',')) {
        const int idx = label_index(file.task, label);
        if (idx < 0) throw DataError(where + ": unknown label '" + label + "'");
        p.decisions[static_cast<std::size_t>(idx)] = 1;
      }
    }
    p.probabilities = parse_numbers(cols[5], where);
    file.nodes.push_back(std::move(p));
  }
  return file;
}

MetricsReport score_against_corpus(const PredictionFile& predictions, std::span<const Document> gold) {
  std::map<std::string, const Document*> docs;
  for (const Document& d : gold) docs[d.doc_id] = &d;
  const Task task = predictions.task;
  if (task == Task::kDesire) {
    std::map<std::string, int> by_doc;
    for (const DocumentPrediction& p : predictions.documents) {
      if (!docs.count(p.doc_id)) throw DataError("prediction for unknown document '" + p.doc_id + "'");
      by_doc[p.doc_id] = p.predicted;
    }
    std::vector<int> pred, gl;
    for (const Document& d : gold) {
      const int g = desire_gold(d);
      if (g < 0) continue;
      auto it = by_doc.find(d.doc_id);
      if (it == by_doc.end()) throw DataError("no prediction for document '" + d.doc_id + "'");
      pred.push_back(it->second);
      gl.push_back(g);
    }
    return prf1_multiclass(pred, gl, label_vocabulary(task));
  }
  std::map<std::tuple<std::string, std::string, int>, const NodePrediction*> by_key;
  for (const NodePrediction& p : predictions.nodes) {
    if (!docs.count(p.doc_id)) throw DataError("prediction for unknown document '" + p.doc_id + "'");
    by_key[{p.doc_id, p.entity, p.sentence}] = &p;
  }
  std::vector<std::vector<int>> pred, gl;
  for (const Document& d : gold) {
    if (!d.labels) continue;
    auto it = d.labels->nodes.find(task);
    if (it == d.labels->nodes.end()) continue;
    for (const NodeLabels& nl : it->second) {
      auto p = by_key.find({d.doc_id, nl.entity, nl.sentence});
      if (p == by_key.end()) {
        throw DataError("no prediction for (" + d.doc_id + ", " + nl.entity + ", sentence " +
                        std::to_string(nl.sentence) + ")");
      }
      pred.push_back(p->second->decisions);
      gl.push_back(*gold_vector(d, task, nl.entity, nl.sentence));
    }
  }
  return prf1_multilabel(pred, gl, label_vocabulary(task));
}

LinkSplit hold_out_edges(std::span<const GraphExample> examples, std::optional<Relation> relation, double fraction,
                         Rng& rng) {
  LinkSplit split;
  for (const GraphExample& ex : examples) {
    std::vector<TypedEdge> candidates;
    for (const TypedEdge& e : ex.graph.edges) {
      if (!relation || e.relation == *relation) candidates.push_back(e);
    }
    rng.shuffle(candidates);
    std::size_t take = 0;
    if (!candidates.empty()) {
      take = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(candidates.size()))));
      take = std::min(take, candidates.size());
    }
    candidates.resize(take);
    std::sort(candidates.begin(), candidates.end());
    GraphExample reduced = ex;
    for (const TypedEdge& e : candidates) reduced.graph.edges.erase(e);
    split.full.push_back(ex.graph);
    split.train.push_back(std::move(reduced));
    split.heldout.push_back(std::move(candidates));
  }
  return split;
}

RankingResult rank_heldout_edges(const EngModel& model, const LinkSplit& split) {
  RankingResult r;
  for (std::size_t g = 0; g < split.train.size(); ++g) {
    if (split.heldout[g].empty()) continue;
    const ad::Tensor h = node_embeddings(model, split.train[g]);
    const NarrativeGraph& full = split.full[g];
    for (const TypedEdge& e : split.heldout[g]) {
      const double truth = distmult_score(model.store, h.row(static_cast<std::size_t>(e.source)), e.relation,
                                          h.row(static_cast<std::size_t>(e.target)));
      std::size_t greater = 0, equal = 0, candidates = 1;
      for (const EngNode& n : full.nodes) {
        if (n.id == e.target || full.has_edge({e.source, e.relation, n.id})) continue;
        ++candidates;
        const double s = distmult_score(model.store, h.row(static_cast<std::size_t>(e.source)), e.relation,
                                        h.row(static_cast<std::size_t>(n.id)));
        if (s > truth) {
          ++greater;
        } else if (s == truth) {
          ++equal;
        }
      }
      const double rank = 1.0 + static_cast<double>(greater) + 0.5 * static_cast<double>(equal);
      r.mrr += 1.0 / rank;
      r.hits_at_1 += greater == 0 && equal == 0 ? 1.0 : 0.0;
      double harmonic = 0.0;
      for (std::size_t k = 1; k <= candidates; ++k) harmonic += 1.0 / static_cast<double>(k);
      r.random_mrr += harmonic / static_cast<double>(candidates);
      ++r.edges;
    }
  }
  if (r.edges) {
    const auto n = static_cast<double>(r.edges);
    r.mrr /= n;
    r.random_mrr /= n;
    r.hits_at_1 /= n;
  }
  return r;
}

std::vector<EmbeddingRecord> embedding_records(const EngModel& model, std::span<const GraphExample> examples,
                                               std::optional<Task> label_task) {
  std::vector<EmbeddingRecord> out;
  for (const GraphExample& ex : examples) {
    if (ex.graph.nodes.empty()) continue;
    const ad::Tensor h = node_embeddings(model, ex);
    for (const EngNode& n : ex.graph.nodes) {
      EmbeddingRecord rec;
      rec.doc_id = ex.graph.doc_id;
      rec.node_id = n.id;
      const auto row = h.row(static_cast<std::size_t>(n.id));
      rec.vector.assign(row.begin(), row.end());
      if (ex.doc.labels) {
        for (const NodeTag& t : ex.doc.labels->tags) {
          if (t.entity == n.entity && t.sentence == n.sentence) rec.verb = t.verb;
        }
        if (label_task) {
          if (const NodeLabels* nl = ex.doc.labels->find(*label_task, n.entity, n.sentence)) {
            if (!nl->labels.empty()) rec.label = nl->labels.front();
          }
        }
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace eng
