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

// Pre-training (link prediction, node sentiment), downstream training with
// early stopping, prediction dumps and held-out link ranking.

#ifndef ENG_TRAINING_HPP_
#define ENG_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eng/metrics.hpp"
#include "eng/model.hpp"
#include "eng/task_heads.hpp"
#include "json.hpp"

namespace eng {

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_metric = std::numeric_limits<double>::quiet_NaN();
  std::int64_t step = 0;
};

struct TrainConfig {
  double lr = 1e-4;
  std::size_t epochs = 100;
  std::size_t batch_graphs = 256;  // graphs accumulated per optimizer step
  double warmup_proportion = 0.06;
  std::int64_t warmup_steps = -1;  // overrides the proportion when >= 0
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  double sample_rate = 0.2;
  bool mask_sampled_edges = false;
  EdgeWeighting edge_weighting = EdgeWeighting::kRate;
  double weight_decay = 0.01;
  std::function<void(const EpochRecord&)> on_epoch;
};

TrainConfig pretraining_defaults();
// lr 2e-4, 5000 warm-up steps, patience 10, one graph per step.
TrainConfig downstream_defaults();
inline constexpr double kLearningRateGrid[] = {2e-3, 2e-4, 2e-5, 2e-6};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_metric = std::numeric_limits<double>::quiet_NaN();

  nlohmann::json history_json() const;
};

// Linear warm-up to `base` over `warmup` steps, then constant; `step` is
// the 1-based index of the update being taken.
double scheduled_lr(double base, std::int64_t step, std::int64_t warmup);
std::int64_t resolve_warmup(const TrainConfig& config, std::int64_t total_steps);

// The model must carry the matching head (see attach_head).
TrainResult pretrain_link(EngModel& model, std::span<const GraphExample> examples, const TrainConfig& config);
std::vector<int> sentiment_targets(const GraphExample& example, const SentimentLexicon& lexicon);
TrainResult pretrain_sentiment(EngModel& model, std::span<const GraphExample> examples,
                               const SentimentLexicon& lexicon, const TrainConfig& config);
double sentiment_accuracy(const EngModel& model, std::span<const GraphExample> examples,
                          const SentimentLexicon& lexicon);

// Keeps the parameters of the best validation epoch (macro F1 for node
// tasks, average F1 for desire); stops after `patience` epochs without
// improvement. Without dev examples the last epoch is kept.
TrainResult train_downstream(EngModel& model, Task task, std::span<const GraphExample> train,
                             std::span<const GraphExample> dev, const TrainConfig& config);

struct NodePrediction {
  std::string doc_id;
  int node_id = 0;
  std::string entity;
  int sentence = 0;
  std::vector<double> probabilities;
  std::vector<int> decisions;
  std::vector<int> gold;  // empty when unlabeled
};

struct DocumentPrediction {
  std::string doc_id;
  std::vector<double> probabilities;
  int predicted = 0;
  int gold = -1;
};

// Multi-hot gold vector for (entity, sentence), or nullopt.
std::optional<std::vector<int>> gold_vector(const Document& doc, Task task, const std::string& entity, int sentence);

std::vector<NodePrediction> predict_nodes(const EngModel& model, Task task, std::span<const GraphExample> examples,
                                          bool labeled_only);
std::vector<DocumentPrediction> predict_documents(const EngModel& model, std::span<const GraphExample> examples);
MetricsReport evaluate_node_predictions(std::span<const NodePrediction> predictions, Task task);
MetricsReport evaluate_document_predictions(std::span<const DocumentPrediction> predictions);
double selection_metric(const EngModel& model, Task task, std::span<const GraphExample> examples);

// "#eng-predictions task=<t>" then tab-separated rows:
//   node task: doc_id, node_id, entity, sentence, active labels (comma list or -), probabilities
//   desire:    doc_id, label, probabilities
struct PredictionFile {
  Task task = Task::kMaslow;
  std::vector<NodePrediction> nodes;
  std::vector<DocumentPrediction> documents;
};
void write_predictions(const std::filesystem::path& path, Task task, std::span<const NodePrediction> nodes,
                       std::span<const DocumentPrediction> documents);
PredictionFile read_predictions(const std::filesystem::path& path);
// Aligns predictions with the labels of `gold`; every gold entry needs a row.
MetricsReport score_against_corpus(const PredictionFile& predictions, std::span<const Document> gold);

// Held-out link ranking.
struct LinkSplit {
  std::vector<GraphExample> train;  // held-out edges removed
  std::vector<std::vector<TypedEdge>> heldout;
  std::vector<NarrativeGraph> full;
};
// Removes round(fraction * |E_r|) edges (at least one when any exist) of
// `relation`, or of every relation when nullopt, from each graph.
LinkSplit hold_out_edges(std::span<const GraphExample> examples, std::optional<Relation> relation, double fraction,
                         Rng& rng);

struct RankingResult {
  double mrr = 0.0;
  double random_mrr = 0.0;  // expected MRR of a uniformly random scorer
  double hits_at_1 = 0.0;
  std::size_t edges = 0;
};
// Ranks the true tail against every filtered replacement tail.
RankingResult rank_heldout_edges(const EngModel& model, const LinkSplit& split);

std::vector<EmbeddingRecord> embedding_records(const EngModel& model, std::span<const GraphExample> examples,
                                               std::optional<Task> label_task);

}  // namespace eng

#endif  // ENG_TRAINING_HPP_
