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

#include "eng/graph_encoder.hpp"

#include <vector>

namespace eng {

std::string rgcn_parameter_name(std::size_t layer, Relation r) {
  const std::string rel = r == Relation::kSelfLoop ? "SelfLoop" : std::string(relation_name(r));
  return "rgcn/l" + std::to_string(layer) + "/" + rel;
}

void init_rgcn(ad::ParameterStore& store, const RgcnConfig& config, Rng& rng) {
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::size_t in = l == 0 ? config.input_dim : config.hidden_dim;
    for (Relation r : kRelations) store.create(rgcn_parameter_name(l, r), ad::glorot(in, config.hidden_dim, rng));
    if (config.self_loop) {
      store.create(rgcn_parameter_name(l, Relation::kSelfLoop), ad::glorot(in, config.hidden_dim, rng));
    }
  }
}

ad::Tensor normalized_adjacency(const NarrativeGraph& graph, Relation r, bool in_neighbors) {
  const std::size_t n = graph.nodes.size();
  ad::Tensor a(n, n);
  std::vector<double> degree(n, 0.0);
  for (const TypedEdge& e : graph.edges) {
    if (e.relation != r) continue;
    const int i = in_neighbors ? e.target : e.source;
    const int u = in_neighbors ? e.source : e.target;
    a(static_cast<std::size_t>(i), static_cast<std::size_t>(u)) = 1.0;
    degree[static_cast<std::size_t>(i)] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (degree[i] == 0.0) continue;
    for (std::size_t u = 0; u < n; ++u) a(i, u) /= degree[i];
  }
  return a;
}

ad::Var rgcn_layer_forward(ad::Tape& tape, const ad::ParameterStore& store, const RgcnConfig& config,
                           std::size_t layer, const NarrativeGraph& graph, ad::Var h) {
  if (h.value().rows() != graph.nodes.size()) {
    throw ad::ShapeError("rgcn: " + h.value().shape_string() + " rows for " +
                         std::to_string(graph.nodes.size()) + " nodes");
  }
  std::vector<ad::Var> terms;
  for (Relation r : kRelations) {
    bool any = false;
    for (const TypedEdge& e : graph.edges) {
      if (e.relation == r) {
        any = true;
        break;
      }
    }
    if (!any) continue;
    ad::Var a = tape.constant(normalized_adjacency(graph, r, config.in_neighbors));
    terms.push_back(ad::matmul(ad::matmul(a, h), tape.parameter(store, rgcn_parameter_name(layer, r))));
  }
  if (config.self_loop) {
    terms.push_back(ad::matmul(h, tape.parameter(store, rgcn_parameter_name(layer, Relation::kSelfLoop))));
  }
  if (terms.empty()) return tape.constant(ad::Tensor(graph.nodes.size(), config.hidden_dim));
  ad::Var total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = ad::add(total, terms[i]);
  return ad::relu(total);
}

ad::Var contextualize(ad::Tape& tape, const ad::ParameterStore& store, const RgcnConfig& config,
                      const NarrativeGraph& graph, ad::Var h0) {
  ad::Var h = h0;
  for (std::size_t l = 0; l < config.layers; ++l) h = rgcn_layer_forward(tape, store, config, l, graph, h);
  return h;
}

}  // namespace eng
