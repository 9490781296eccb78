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

// The assembled ENG model: node encoder, R-GCN stack and one task head.

#ifndef ENG_MODEL_HPP_
#define ENG_MODEL_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "eng/autodiff.hpp"
#include "eng/corpus.hpp"
#include "eng/graph_encoder.hpp"
#include "eng/narrative_graph.hpp"
#include "eng/node_encoding.hpp"
#include "json.hpp"

namespace eng {

struct ModelConfig {
  EncoderKind encoder = EncoderKind::kBag;
  std::size_t dim = 128;
  std::size_t external_dim = 0;  // only for the external encoder
  std::size_t layers = 2;
  bool self_loop = true;
  bool in_neighbors = true;
  std::size_t head_hidden = 128;

  RgcnConfig rgcn() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// Objectives: "link", "sentiment" or a task name.
bool is_pretraining_objective(std::string_view objective);

struct EngModel {
  ModelConfig config;
  TokenVocabulary vocab;
  ad::ParameterStore store;
  std::string objective;
  const ExternalEmbeddingTable* external = nullptr;  // not owned
};

EngModel create_model(const ModelConfig& config, TokenVocabulary vocab, Rng& rng);
// Drops any existing head and initialises a fresh one for `objective`.
void attach_head(EngModel& model, const std::string& objective, Rng& rng);
std::set<std::string> expected_parameter_names(const ModelConfig& config, std::size_t vocab_size,
                                               const std::string& objective);

void save_model(const std::filesystem::path& dir, const EngModel& model, const nlohmann::json& history = {});
EngModel load_model(const std::filesystem::path& dir, nlohmann::json* history = nullptr);
std::string config_fingerprint(const EngModel& model);

// A document with its graph and per-node encoder inputs.
struct GraphExample {
  Document doc;
  NarrativeGraph graph;
  std::vector<NodeInput> inputs;
};

// Label sentences list the candidate labels of `task`; none for pre-training.
GraphExample make_example(const Document& doc, NarrativeGraph graph, std::optional<Task> task);
std::vector<GraphExample> prepare_examples(std::span<const Document> docs, const GraphConfig& graph_config,
                                           std::optional<Task> task);
// Pairs documents with pre-built graphs by doc_id.
std::vector<GraphExample> pair_examples(std::span<const Document> docs, std::span<const NarrativeGraph> graphs,
                                        std::optional<Task> task);

ad::Var encode_nodes(ad::Tape& tape, const EngModel& model, const GraphExample& example);
// Contextualised node matrix; `message_graph` overrides the edges used for
// message passing.
ad::Var encode_graph(ad::Tape& tape, const EngModel& model, const GraphExample& example,
                     const NarrativeGraph* message_graph = nullptr);
// Encoding of the desire-expression sentence alone.
ad::Var desire_query(ad::Tape& tape, const EngModel& model, const GraphExample& example);
ad::Tensor node_embeddings(const EngModel& model, const GraphExample& example);

}  // namespace eng

#endif  // ENG_MODEL_HPP_
