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

// Relational graph convolution over narrative graphs.

#ifndef ENG_GRAPH_ENCODER_HPP_
#define ENG_GRAPH_ENCODER_HPP_

#include <cstddef>
#include <string>

#include "eng/autodiff.hpp"
#include "eng/narrative_graph.hpp"

namespace eng {

struct RgcnConfig {
  std::size_t layers = 2;
  std::size_t input_dim = 128;
  std::size_t hidden_dim = 128;
  bool self_loop = true;
  // Messages arrive from in-neighbours (u -> i); false uses out-neighbours.
  bool in_neighbors = true;
};

// "rgcn/l<k>/<Relation>" for the eight relations plus SelfLoop.
std::string rgcn_parameter_name(std::size_t layer, Relation r);
void init_rgcn(ad::ParameterStore& store, const RgcnConfig& config, Rng& rng);

// A(i, u) = 1 / |U_r(i)| for every u in U_r(i).
ad::Tensor normalized_adjacency(const NarrativeGraph& graph, Relation r, bool in_neighbors);

// h_i' = ReLU(sum_r sum_{u in U_r(i)} W_r h_u / |U_r(i)| + W_self h_i), in
// row form H' = ReLU(sum_r A_r H W_r + H W_self).
ad::Var rgcn_layer_forward(ad::Tape& tape, const ad::ParameterStore& store, const RgcnConfig& config,
                           std::size_t layer, const NarrativeGraph& graph, ad::Var h);

ad::Var contextualize(ad::Tape& tape, const ad::ParameterStore& store, const RgcnConfig& config,
                      const NarrativeGraph& graph, ad::Var h0);

}  // namespace eng

#endif  // ENG_GRAPH_ENCODER_HPP_
