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

#include "eng/task_heads.hpp"

#include <map>
#include <stdexcept>

namespace eng {

void init_feed_forward(ad::ParameterStore& store, const std::string& prefix, std::size_t in,
                       std::size_t hidden, std::size_t out, Rng& rng) {
  store.create(prefix + "/w1", ad::glorot(in, hidden, rng));
  store.create(prefix + "/b1", ad::Tensor(1, hidden));
  store.create(prefix + "/w2", ad::glorot(hidden, out, rng));
  store.create(prefix + "/b2", ad::Tensor(1, out));
}

ad::Var feed_forward(ad::Tape& tape, const ad::ParameterStore& store, const std::string& prefix, ad::Var x) {
  ad::Var hidden = ad::relu(ad::add(ad::matmul(x, tape.parameter(store, prefix + "/w1")),
                                    tape.parameter(store, prefix + "/b1")));
  return ad::add(ad::matmul(hidden, tape.parameter(store, prefix + "/w2")), tape.parameter(store, prefix + "/b2"));
}

std::vector<double> inverse_frequency_weights(std::span<const int> labels, std::size_t classes) {
  std::vector<double> counts(classes, 0.0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) throw std::out_of_range("class label out of range");
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  std::vector<double> w(classes, 1.0);
  double total = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] == 0.0) continue;
    w[c] = 1.0 / counts[c];
    total += w[c];
    ++present;
  }
  if (present == 0) return w;
  const double mean = total / static_cast<double>(present);
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] > 0.0) w[c] /= mean;
  }
  return w;
}

ad::Var node_loss_multiclass(ad::Var logits, std::span<const int> gold, std::span<const double> class_weights) {
  const ad::Tensor& z = logits.value();
  if (gold.size() != z.rows()) throw ad::ShapeError("node_loss: gold size does not match logits rows");
  ad::Tensor alpha(z.rows(), 1);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || static_cast<std::size_t>(gold[i]) >= z.cols()) {
      throw std::out_of_range("node_loss: label " + std::to_string(gold[i]) + " outside " +
                              std::to_string(z.cols()) + " classes");
    }
    alpha(i, 0) = class_weights.empty() ? 1.0 : class_weights[static_cast<std::size_t>(gold[i])];
  }
  ad::Var picked = ad::pick(ad::log_softmax(logits, 1), gold);
  return ad::scale(ad::sum(ad::mul_const(picked, alpha)), -1.0 / static_cast<double>(z.rows()));
}

ad::Var node_loss_multilabel(ad::Var logits, const ad::Tensor& targets) {
  return ad::mean(ad::bce_with_logits(logits, targets));
}

std::string distmult_parameter_name(Relation r) { return "distmult/" + std::string(relation_name(r)); }

void init_distmult(ad::ParameterStore& store, std::size_t dim, Rng& rng) {
  for (Relation r : kRelations) store.create(distmult_parameter_name(r), ad::glorot(dim, dim, rng));
}

ad::Var distmult_scores(ad::Tape& tape, const ad::ParameterStore& store, ad::Var h,
                        std::span<const EdgeSample> samples) {
  if (samples.empty()) throw std::invalid_argument("distmult_scores: no samples");
  std::map<Relation, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < samples.size(); ++k) groups[samples[k].edge.relation].push_back(k);
  std::vector<ad::Var> parts;
  std::vector<int> position(samples.size());
  int offset = 0;
  for (const auto& [rel, members] : groups) {
    std::vector<int> src, dst;
    for (std::size_t k : members) {
      src.push_back(samples[k].edge.source);
      dst.push_back(samples[k].edge.target);
      position[k] = offset++;
    }
    ad::Var hi = ad::embedding_lookup(h, src);
    ad::Var hj = ad::embedding_lookup(h, dst);
    ad::Var w = tape.parameter(store, distmult_parameter_name(rel));
    parts.push_back(ad::sum(ad::mul(ad::matmul(hi, w), hj), 1));
  }
  ad::Var grouped = parts.size() == 1 ? parts.front() : ad::concat(parts, 0);
  return ad::embedding_lookup(grouped, position);
}

double distmult_score(const ad::ParameterStore& store, std::span<const double> hi, Relation r,
                      std::span<const double> hj) {
  const ad::Tensor& w = store.value(distmult_parameter_name(r));
  double total = 0.0;
  for (std::size_t a = 0; a < w.rows(); ++a) {
    if (hi[a] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t b = 0; b < w.cols(); ++b) inner += w(a, b) * hj[b];
    total += hi[a] * inner;
  }
  return total;
}

std::string_view edge_weighting_name(EdgeWeighting w) {
  switch (w) {
    case EdgeWeighting::kRate:
      return "rate";
    case EdgeWeighting::kInverse:
      return "inverse";
    case EdgeWeighting::kUniform:
      return "uniform";
  }
  return "rate";
}

EdgeWeighting parse_edge_weighting(std::string_view name) {
  if (name == "rate") return EdgeWeighting::kRate;
  if (name == "inverse") return EdgeWeighting::kInverse;
  if (name == "uniform") return EdgeWeighting::kUniform;
  throw UsageError("unknown edge weighting '" + std::string(name) + "' (expected rate|inverse|uniform)");
}

RelationWeights relation_loss_weights(EdgeWeighting mode, const RelationDistribution& distribution) {
  RelationWeights w{};
  w.fill(1.0);
  if (mode == EdgeWeighting::kUniform) return w;
  double total = 0.0;
  for (std::size_t r = 0; r < kNumRelations; ++r) {
    if (distribution[r] <= 0.0) throw std::invalid_argument("relation weights need positive rates");
    w[r] = mode == EdgeWeighting::kRate ? distribution[r] : 1.0 / distribution[r];
    total += w[r];
  }
  for (double& v : w) v *= static_cast<double>(kNumRelations) / total;
  return w;
}

ad::Var link_loss(ad::Var scores, std::span<const EdgeSample> samples, const RelationWeights& weights) {
  if (samples.empty()) throw std::invalid_argument("link_loss: empty sample set");
  if (scores.value().rows() != samples.size() || scores.value().cols() != 1) {
    throw ad::ShapeError("link_loss: scores " + scores.value().shape_string() + " for " +
                         std::to_string(samples.size()) + " samples");
  }
  ad::Tensor eps(samples.size(), 1), y(samples.size(), 1);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    eps(k, 0) = weights[relation_index(samples[k].edge.relation)];
    y(k, 0) = samples[k].label;
  }
  return ad::mean(ad::bce_with_logits(ad::mul_const(scores, eps), y));
}

void init_attention(ad::ParameterStore& store, std::size_t dim, Rng& rng) {
  store.create("head/attn/w", ad::glorot(2 * dim, 1, rng));
  store.create("head/attn/b", ad::Tensor(1, 1));
}

Attended attend_document(ad::Tape& tape, const ad::ParameterStore& store, ad::Var h, ad::Var query) {
  const std::size_t n = h.value().rows();
  if (n == 0) throw std::invalid_argument("attend_document: empty graph");
  ad::Var repeated = ad::matmul(tape.constant(ad::Tensor(n, 1, 1.0)), query);
  ad::Var a = ad::relu(ad::add(ad::matmul(ad::concat({h, repeated}, 1), tape.parameter(store, "head/attn/w")),
                               tape.parameter(store, "head/attn/b")));
  ad::Var alpha = ad::softmax(a, 0);
  return {ad::matmul(ad::transpose(alpha), h), alpha};
}

}  // namespace eng
