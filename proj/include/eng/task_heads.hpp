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

// Output layers and losses: node classification, DistMult link scoring and
// attention-pooled document classification.

#ifndef ENG_TASK_HEADS_HPP_
#define ENG_TASK_HEADS_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eng/autodiff.hpp"
#include "eng/narrative_graph.hpp"

namespace eng {

inline constexpr std::size_t kHeadHidden = 128;

// Two-layer feed-forward net: ReLU(x W1 + b1) W2 + b2, parameters
// <prefix>/w1, b1, w2, b2.
void init_feed_forward(ad::ParameterStore& store, const std::string& prefix, std::size_t in,
                       std::size_t hidden, std::size_t out, Rng& rng);
ad::Var feed_forward(ad::Tape& tape, const ad::ParameterStore& store, const std::string& prefix, ad::Var x);

// Inverse class frequency scaled to mean 1 over the classes that occur;
// absent classes get weight 1.
std::vector<double> inverse_frequency_weights(std::span<const int> labels, std::size_t classes);

// Mean over rows of -alpha_y log softmax(logits)_y.
ad::Var node_loss_multiclass(ad::Var logits, std::span<const int> gold, std::span<const double> class_weights);
// Unweighted mean BCE over every (row, label).
ad::Var node_loss_multilabel(ad::Var logits, const ad::Tensor& targets);

inline constexpr double kDecisionThreshold = 0.5;

// "distmult/<Relation>", full d x d.
std::string distmult_parameter_name(Relation r);
void init_distmult(ad::ParameterStore& store, std::size_t dim, Rng& rng);
// D(i, r, j) = h_i^T W_r h_j for every sample, as a column in sample order.
ad::Var distmult_scores(ad::Tape& tape, const ad::ParameterStore& store, ad::Var h,
                        std::span<const EdgeSample> samples);
double distmult_score(const ad::ParameterStore& store, std::span<const double> hi, Relation r,
                      std::span<const double> hj);

enum class EdgeWeighting { kRate, kInverse, kUniform };
std::string_view edge_weighting_name(EdgeWeighting w);
EdgeWeighting parse_edge_weighting(std::string_view name);
using RelationWeights = std::array<double, kNumRelations>;
// kRate: eps_r proportional to the sampling rate, kInverse: to its inverse;
// both scaled to mean 1 over the eight relations.
RelationWeights relation_loss_weights(EdgeWeighting mode,
                                      const RelationDistribution& distribution = default_relation_distribution());

// -(1/|T|) sum [y log s(eps_r D) + (1 - y) log(1 - s(eps_r D))].
ad::Var link_loss(ad::Var scores, std::span<const EdgeSample> samples, const RelationWeights& weights);

// Self-attention pooling with head/attn/w (2d x 1) and head/attn/b (1 x 1).
void init_attention(ad::ParameterStore& store, std::size_t dim, Rng& rng);
struct Attended {
  ad::Var document;  // 1 x d
  ad::Var weights;   // N x 1
};
// a_i = ReLU(W_a [h_i; h_t] + b_a), alpha = softmax(a), h_d = sum alpha_i h_i.
Attended attend_document(ad::Tape& tape, const ad::ParameterStore& store, ad::Var h, ad::Var query);

}  // namespace eng

#endif  // ENG_TASK_HEADS_HPP_
