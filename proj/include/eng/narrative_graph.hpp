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

// Entity-based narrative graphs: one node per (entity, sentence) mention
// and typed, directed edges over eight narrative/discourse relations.

#ifndef ENG_NARRATIVE_GRAPH_HPP_
#define ENG_NARRATIVE_GRAPH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eng/common.hpp"
#include "eng/corpus.hpp"

namespace eng {

enum class Relation : std::uint8_t {
  kNext = 0,
  kCNext,
  kBefore,
  kAfter,
  kSync,
  kContrast,
  kReason,
  kResult,
  kSelfLoop,  // graph-encoder only; never stored as an edge
};

inline constexpr std::size_t kNumRelations = 8;
inline constexpr std::array<Relation, kNumRelations> kRelations = {
    Relation::kNext,     Relation::kCNext,  Relation::kBefore, Relation::kAfter,
    Relation::kSync,     Relation::kContrast, Relation::kReason, Relation::kResult};

std::string_view relation_name(Relation r);
Relation parse_relation(std::string_view name);
inline std::size_t relation_index(Relation r) { return static_cast<std::size_t>(r); }

using RelationDistribution = std::array<double, kNumRelations>;

// Sampling rates per relation: Next .50, CNext .20, each discourse type .05.
const RelationDistribution& default_relation_distribution();

using ConnectiveLexicon = std::map<std::string, Relation, std::less<>>;
const ConnectiveLexicon& default_connective_lexicon();

struct EngNode {
  int id = 0;
  std::string entity;
  int sentence = 0;
  TokenSpan span;  // first mention of the entity in this sentence
};

struct TypedEdge {
  int source = 0;
  Relation relation = Relation::kNext;
  int target = 0;
  auto operator<=>(const TypedEdge&) const = default;
};

struct NarrativeGraph {
  std::string doc_id;
  std::vector<EngNode> nodes;
  std::set<TypedEdge> edges;

  std::size_t node_count() const { return nodes.size(); }
  bool has_edge(const TypedEdge& e) const { return edges.count(e) != 0; }
  // Inserts unless present; endpoints must exist.
  bool add_edge(const TypedEdge& e);
  std::vector<TypedEdge> edges_of(Relation r) const;
  // Node id of (entity, sentence), or -1.
  int find_node(std::string_view entity, int sentence) const;
};

struct GraphConfig {
  std::size_t max_nodes = 60;
  ConnectiveLexicon lexicon = default_connective_lexicon();
};

// Nodes ordered by sentence, then by the entity's chain order.
std::vector<EngNode> build_nodes(const Document& doc);

// Sentence-initial connective in sentence k: edges from every node of
// sentence k-1 to every node of sentence k. Medial connective: edges from
// nodes left of the connective to nodes right of it in the same sentence.
std::vector<TypedEdge> extract_discourse_relations(const Document& doc, std::span<const EngNode> nodes,
                                                   const ConnectiveLexicon& lexicon);
std::vector<TypedEdge> extract_discourse_relations(const Document& doc, const ConnectiveLexicon& lexicon);

NarrativeGraph build_graph(const Document& doc, const GraphConfig& config = {});

struct EdgeSample {
  TypedEdge edge;
  int label = 1;  // 1 positive, 0 negative
};

// Draws ceil(rate * |E|) distinct positives. Each draw picks a relation by
// `distribution` (renormalised over relations that still have unsampled
// edges), then a uniform unsampled edge of that relation.
std::vector<EdgeSample> sample_training_edges(const NarrativeGraph& graph, double sample_rate,
                                              const RelationDistribution& distribution, Rng& rng);

// Replaces one uniformly chosen component of `positive` until the triple is
// absent from the graph; 100 attempts per component before rotating to the
// next one. Throws DataError when no negative exists.
EdgeSample corrupt_edge(const NarrativeGraph& graph, const TypedEdge& positive, Rng& rng);

// One graph per line: doc_id, nodes (id, entity, sentence, span), edges
// as [source, relation name, target].
std::string format_graph_line(const NarrativeGraph& graph);
NarrativeGraph parse_graph_line(std::string_view line);
void write_graphs(const std::filesystem::path& path, std::span<const NarrativeGraph> graphs);
std::vector<NarrativeGraph> read_graphs(const std::filesystem::path& path);

}  // namespace eng

#endif  // ENG_NARRATIVE_GRAPH_HPP_
