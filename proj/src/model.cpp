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

#include "eng/model.hpp"

#include <map>

#include "eng/checkpoint.hpp"
#include "eng/task_heads.hpp"

namespace eng {

using nlohmann::json;

RgcnConfig ModelConfig::rgcn() const {
  RgcnConfig c;
  c.layers = layers;
  c.input_dim = dim;
  c.hidden_dim = dim;
  c.self_loop = self_loop;
  c.in_neighbors = in_neighbors;
  return c;
}

json ModelConfig::to_json() const {
  return {{"encoder", encoder_kind_name(encoder)}, {"dim", dim},          {"external_dim", external_dim},
          {"layers", layers},                      {"self_loop", self_loop}, {"in_neighbors", in_neighbors},
          {"head_hidden", head_hidden}};
}

ModelConfig ModelConfig::from_json(const json& j) {
  ModelConfig c;
  c.encoder = parse_encoder_kind(j.at("encoder").get<std::string>());
  c.dim = j.at("dim").get<std::size_t>();
  c.external_dim = j.at("external_dim").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.self_loop = j.at("self_loop").get<bool>();
  c.in_neighbors = j.at("in_neighbors").get<bool>();
  c.head_hidden = j.at("head_hidden").get<std::size_t>();
  return c;
}

bool is_pretraining_objective(std::string_view objective) {
  return objective == "link" || objective == "sentiment";
}

EngModel create_model(const ModelConfig& config, TokenVocabulary vocab, Rng& rng) {
  if (config.dim == 0 || config.head_hidden == 0) throw UsageError("model dimensions must be positive");
  EngModel m;
  m.config = config;
  m.vocab = std::move(vocab);
  if (config.encoder == EncoderKind::kBag) {
    init_bag_encoder(m.store, m.vocab.size(), config.dim, rng);
  } else {
    if (config.external_dim == 0) throw UsageError("external encoder needs the embedding dimension");
    init_external_projection(m.store, config.external_dim, config.dim, rng);
  }
  init_rgcn(m.store, config.rgcn(), rng);
  return m;
}

void attach_head(EngModel& model, const std::string& objective, Rng& rng) {
  for (const std::string& name : model.store.names()) {
    if (name.rfind("head/", 0) == 0 || name.rfind("distmult/", 0) == 0) model.store.erase(name);
  }
  model.objective = objective;
  const std::size_t d = model.config.dim;
  const std::size_t hidden = model.config.head_hidden;
  if (objective.empty()) return;
  if (objective == "link") {
    init_distmult(model.store, d, rng);
  } else if (objective == "sentiment") {
    init_feed_forward(model.store, "head/sentiment", d, hidden, kSentimentClasses, rng);
  } else {
    const Task task = parse_task(objective);
    const std::size_t classes = label_vocabulary(task).size();
    if (task == Task::kDesire) {
      init_attention(model.store, d, rng);
      init_feed_forward(model.store, "head/doc", d, hidden, classes, rng);
    } else {
      init_feed_forward(model.store, "head/node", d, hidden, classes, rng);
    }
  }
}

std::set<std::string> expected_parameter_names(const ModelConfig& config, std::size_t vocab_size,
                                               const std::string& objective) {
  std::vector<std::string> tokens{"<unk>"};
  for (std::size_t i = 1; i < vocab_size; ++i) tokens.push_back("t" + std::to_string(i));
  Rng rng(0);
  EngModel m = create_model(config, TokenVocabulary(tokens), rng);
  attach_head(m, objective, rng);
  const std::vector<std::string> names = m.store.names();
  return {names.begin(), names.end()};
}

std::string config_fingerprint(const EngModel& model) {
  json j = model.config.to_json();
  j["objective"] = model.objective;
  j["vocab_size"] = model.vocab.size();
  return hex_digest(fnv1a(j.dump()));
}

void save_model(const std::filesystem::path& dir, const EngModel& model, const json& history) {
  json meta = {{"config", model.config.to_json()},
               {"objective", model.objective},
               {"vocabulary", model.vocab.tokens()},
               {"fingerprint", config_fingerprint(model)},
               {"history", history.is_null() ? json::array() : history}};
  save_checkpoint(dir, model.store, meta);
}

EngModel load_model(const std::filesystem::path& dir, json* history) {
  json meta;
  {
    const std::filesystem::path manifest = dir / "manifest.json";
    if (!std::filesystem::exists(manifest)) throw DataError("checkpoint " + dir.string() + ": manifest.json not found");
    try {
      meta = json::parse(read_file(manifest)).at("meta");
    } catch (const json::exception& e) {
      throw DataError(manifest.string() + ": " + e.what());
    }
  }
  EngModel m;
  try {
    m.config = ModelConfig::from_json(meta.at("config"));
    m.objective = meta.at("objective").get<std::string>();
    m.vocab = TokenVocabulary(meta.at("vocabulary").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + dir.string() + ": malformed meta: " + e.what());
  }
  Checkpoint ckpt = load_checkpoint(dir, expected_parameter_names(m.config, m.vocab.size(), m.objective));
  Rng rng(0);
  EngModel fresh = create_model(m.config, m.vocab, rng);
  attach_head(fresh, m.objective, rng);
  for (const std::string& name : fresh.store.names()) {
    if (!ckpt.store.value(name).same_shape(fresh.store.value(name))) {
      throw DataError("checkpoint parameter '" + name + "': shape " + ckpt.store.value(name).shape_string() +
                      " does not match model " + fresh.store.value(name).shape_string());
    }
  }
  m.store = std::move(ckpt.store);
  if (history) *history = meta.value("history", json::array());
  return m;
}

GraphExample make_example(const Document& doc, NarrativeGraph graph, std::optional<Task> task) {
  GraphExample ex;
  ex.doc = doc;
  ex.graph = std::move(graph);
  std::span<const std::string> labels;
  if (task) labels = label_vocabulary(*task);
  for (const EngNode& n : ex.graph.nodes) ex.inputs.push_back(assemble_node_input(doc, n, labels));
  return ex;
}

std::vector<GraphExample> prepare_examples(std::span<const Document> docs, const GraphConfig& graph_config,
                                           std::optional<Task> task) {
  std::vector<GraphExample> out;
  out.reserve(docs.size());
  for (const Document& d : docs) out.push_back(make_example(d, build_graph(d, graph_config), task));
  return out;
}

std::vector<GraphExample> pair_examples(std::span<const Document> docs, std::span<const NarrativeGraph> graphs,
                                        std::optional<Task> task) {
  std::map<std::string, const Document*> by_id;
  for (const Document& d : docs) by_id[d.doc_id] = &d;
  std::vector<GraphExample> out;
  for (const NarrativeGraph& g : graphs) {
    auto it = by_id.find(g.doc_id);
    if (it == by_id.end()) throw DataError("graph '" + g.doc_id + "' has no document in the corpus");
    for (const EngNode& n : g.nodes) {
      if (n.sentence < 0 || static_cast<std::size_t>(n.sentence) >= it->second->sentences.size()) {
        throw DataError("graph '" + g.doc_id + "': node " + std::to_string(n.id) + " cites a missing sentence");
      }
    }
    out.push_back(make_example(*it->second, g, task));
  }
  return out;
}

ad::Var encode_nodes(ad::Tape& tape, const EngModel& model, const GraphExample& example) {
  if (model.config.encoder == EncoderKind::kBag) return encode_bag(tape, model.store, model.vocab, example.inputs);
  if (!model.external) throw UsageError("external encoder selected but no embedding table loaded");
  return encode_external(tape, model.store, *model.external, example.graph, model.config.dim);
}

ad::Var encode_graph(ad::Tape& tape, const EngModel& model, const GraphExample& example,
                     const NarrativeGraph* message_graph) {
  if (example.graph.nodes.empty()) throw DataError("graph '" + example.doc.doc_id + "' has no nodes");
  ad::Var h0 = encode_nodes(tape, model, example);
  return contextualize(tape, model.store, model.config.rgcn(), message_graph ? *message_graph : example.graph, h0);
}

ad::Var desire_query(ad::Tape& tape, const EngModel& model, const GraphExample& example) {
  const std::optional<TaskLabels>& labels = example.doc.labels;
  if (!labels || !labels->desire) throw DataError("document '" + example.doc.doc_id + "' has no desire label");
  const int s = labels->desire->sentence;
  if (model.config.encoder == EncoderKind::kBag) {
    NodeInput in;
    in.sentence = example.doc.sentences.at(static_cast<std::size_t>(s)).tokens;
    apply_token_budget(in);
    return encode_bag(tape, model.store, model.vocab, std::span<const NodeInput>(&in, 1));
  }
  if (!model.external) throw UsageError("external encoder selected but no embedding table loaded");
  std::vector<int> ids;
  for (const EngNode& n : example.graph.nodes) {
    if (n.sentence == s) ids.push_back(n.id);
  }
  if (ids.empty()) return tape.constant(ad::Tensor(1, model.config.dim));
  ad::Tensor rows = external_rows(*model.external, example.graph.doc_id, ids);
  ad::Tensor mean(1, rows.cols());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    for (std::size_t c = 0; c < rows.cols(); ++c) mean(0, c) += rows(i, c) / static_cast<double>(rows.rows());
  }
  return project_external(tape, model.store, std::move(mean), model.config.dim);
}

ad::Tensor node_embeddings(const EngModel& model, const GraphExample& example) {
  ad::Tape tape;
  return encode_graph(tape, model, example).value();
}

}  // namespace eng
