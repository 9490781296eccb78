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

#include "eng/narrative_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace eng {

using nlohmann::json;

namespace {

constexpr std::string_view kRelationNames[] = {"Next", "CNext",    "Before", "After", "Sync",
                                               "Contrast", "Reason", "Result", "SelfLoop"};

constexpr int kAttemptsPerComponent = 100;

std::vector<std::vector<int>> nodes_by_sentence(std::span<const EngNode> nodes, std::size_t sentences) {
  std::vector<std::vector<int>> out(sentences);
  for (const EngNode& n : nodes) out[static_cast<std::size_t>(n.sentence)].push_back(n.id);
  return out;
}

}  // namespace

std::string_view relation_name(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }

Relation parse_relation(std::string_view name) {
  const std::string lower = to_lower(name);
  for (std::size_t i = 0; i < std::size(kRelationNames); ++i) {
    if (to_lower(kRelationNames[i]) == lower) return static_cast<Relation>(i);
  }
  if (lower == "sync.") return Relation::kSync;
  throw DataError("unknown relation '" + std::string(name) + "'");
}

const RelationDistribution& default_relation_distribution() {
  static const RelationDistribution d = {0.50, 0.20, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05};
  return d;
}

const ConnectiveLexicon& default_connective_lexicon() {
  static const ConnectiveLexicon lex = {
      {"before", Relation::kBefore},   {"after", Relation::kAfter},      {"once", Relation::kAfter},
      {"while", Relation::kSync},      {"meanwhile", Relation::kSync},   {"when", Relation::kSync},
      {"but", Relation::kContrast},    {"however", Relation::kContrast}, {"though", Relation::kContrast},
      {"because", Relation::kReason},  {"since", Relation::kReason},     {"so", Relation::kResult},
      {"thus", Relation::kResult},     {"therefore", Relation::kResult},
  };
  return lex;
}

bool NarrativeGraph::add_edge(const TypedEdge& e) {
  const int n = static_cast<int>(nodes.size());
  if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n) {
    throw std::out_of_range("edge endpoint outside graph of " + std::to_string(n) + " nodes");
  }
  if (e.relation == Relation::kSelfLoop) throw std::invalid_argument("SelfLoop is not an edge relation");
  return edges.insert(e).second;
}

std::vector<TypedEdge> NarrativeGraph::edges_of(Relation r) const {
  std::vector<TypedEdge> out;
  for (const TypedEdge& e : edges) {
    if (e.relation == r) out.push_back(e);
  }
  return out;
}

int NarrativeGraph::find_node(std::string_view entity, int sentence) const {
  for (const EngNode& n : nodes) {
    if (n.sentence == sentence && n.entity == entity) return n.id;
  }
  return -1;
}

std::vector<EngNode> build_nodes(const Document& doc) {
  std::vector<std::string> entity_order;
  for (const CorefChain& c : doc.chains) {
    if (std::find(entity_order.begin(), entity_order.end(), c.entity) == entity_order.end()) {
      entity_order.push_back(c.entity);
    }
  }
  std::vector<EngNode> nodes;
  for (const Sentence& s : doc.sentences) {
    for (const std::string& entity : entity_order) {
      bool found = false;
      TokenSpan first;
      for (const CorefChain& c : doc.chains) {
        if (c.entity != entity) continue;
        for (const Mention& m : c.mentions) {
          if (m.sentence != s.index) continue;
          if (!found || m.span < first) first = m.span;
          found = true;
        }
      }
      if (found) {
        nodes.push_back(EngNode{static_cast<int>(nodes.size()), entity, s.index, first});
      }
    }
  }
  return nodes;
}

std::vector<TypedEdge> extract_discourse_relations(const Document& doc, std::span<const EngNode> nodes,
                                                   const ConnectiveLexicon& lexicon) {
  const auto by_sentence = nodes_by_sentence(nodes, doc.sentences.size());
  std::vector<TypedEdge> out;
  for (const ConnectiveAnnotation& ca : doc.connectives) {
    auto it = lexicon.find(ca.surface);
    if (it == lexicon.end()) continue;
    const Relation rel = it->second;
    const auto k = static_cast<std::size_t>(ca.sentence);
    if (ca.position == ConnectivePosition::kSentenceInitial) {
      if (k == 0) continue;
      for (int src : by_sentence[k - 1]) {
        for (int dst : by_sentence[k]) out.push_back(TypedEdge{src, rel, dst});
      }
    } else {
      for (int src : by_sentence[k]) {
        const EngNode& left = nodes[static_cast<std::size_t>(src)];
        if (left.span.end > ca.span.start) continue;
        for (int dst : by_sentence[k]) {
          const EngNode& right = nodes[static_cast<std::size_t>(dst)];
          if (dst == src || right.span.start < ca.span.end) continue;
          out.push_back(TypedEdge{src, rel, dst});
        }
      }
    }
  }
  return out;
}

std::vector<TypedEdge> extract_discourse_relations(const Document& doc, const ConnectiveLexicon& lexicon) {
  const std::vector<EngNode> nodes = build_nodes(doc);
  return extract_discourse_relations(doc, nodes, lexicon);
}

NarrativeGraph build_graph(const Document& doc, const GraphConfig& config) {
  NarrativeGraph g;
  g.doc_id = doc.doc_id;
  g.nodes = build_nodes(doc);
  const auto by_sentence = nodes_by_sentence(g.nodes, doc.sentences.size());

  for (std::size_t i = 0; i + 1 < by_sentence.size(); ++i) {
    for (int src : by_sentence[i]) {
      for (int dst : by_sentence[i + 1]) g.add_edge(TypedEdge{src, Relation::kNext, dst});
    }
  }
  std::map<std::string, int> last_of_entity;
  for (const EngNode& n : g.nodes) {
    auto it = last_of_entity.find(n.entity);
    if (it != last_of_entity.end()) g.add_edge(TypedEdge{it->second, Relation::kCNext, n.id});
    last_of_entity[n.entity] = n.id;
  }
  for (const TypedEdge& e : extract_discourse_relations(doc, g.nodes, config.lexicon)) g.add_edge(e);

  if (g.nodes.size() > config.max_nodes) {
    const int keep = static_cast<int>(config.max_nodes);
    g.nodes.resize(config.max_nodes);
    for (auto it = g.edges.begin(); it != g.edges.end();) {
      it = (it->source >= keep || it->target >= keep) ? g.edges.erase(it) : std::next(it);
    }
  }
  return g;
}

std::vector<EdgeSample> sample_training_edges(const NarrativeGraph& graph, double sample_rate,
                                              const RelationDistribution& distribution, Rng& rng) {
  if (!(sample_rate > 0.0 && sample_rate <= 1.0)) {
    throw std::invalid_argument("sample_rate must lie in (0, 1]");
  }
  double total = 0.0;
  for (double p : distribution) {
    if (p < 0.0) throw std::invalid_argument("negative relation probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("relation distribution must sum to 1");

  std::array<std::vector<TypedEdge>, kNumRelations> pools;
  for (const TypedEdge& e : graph.edges) pools[relation_index(e.relation)].push_back(e);
  const auto wanted = static_cast<std::size_t>(
      std::ceil(sample_rate * static_cast<double>(graph.edges.size()) - 1e-9));

  std::vector<EdgeSample> out;
  out.reserve(wanted);
  while (out.size() < wanted) {
    double mass = 0.0;
    for (std::size_t r = 0; r < kNumRelations; ++r) {
      if (!pools[r].empty()) mass += distribution[r];
    }
    std::size_t chosen = kNumRelations;
    if (mass > 0.0) {
      double u = rng.uniform() * mass;
      for (std::size_t r = 0; r < kNumRelations; ++r) {
        if (pools[r].empty() || distribution[r] <= 0.0) continue;
        chosen = r;
        if (u < distribution[r]) break;
        u -= distribution[r];
      }
    } else {
      // Only zero-probability relations remain: fall back to edge counts.
      std::size_t remaining = 0;
      for (const auto& p : pools) remaining += p.size();
      std::size_t k = rng.index(remaining);
      for (std::size_t r = 0; r < kNumRelations; ++r) {
        if (k < pools[r].size()) {
          chosen = r;
          break;
        }
        k -= pools[r].size();
      }
    }
    auto& pool = pools[chosen];
    const std::size_t pick = rng.index(pool.size());
    out.push_back(EdgeSample{pool[pick], 1});
    pool[pick] = pool.back();
    pool.pop_back();
  }
  return out;
}

EdgeSample corrupt_edge(const NarrativeGraph& graph, const TypedEdge& positive, Rng& rng) {
  if (!graph.has_edge(positive)) throw std::invalid_argument("corrupt_edge: positive edge not in graph");
  const std::size_t n = graph.nodes.size();
  auto replaced = [&](int component) {
    TypedEdge e = positive;
    if (component == 0) {
      e.source = static_cast<int>(rng.index(n));
    } else if (component == 1) {
      std::size_t r = rng.index(kNumRelations - 1);
      if (r >= relation_index(positive.relation)) ++r;
      e.relation = static_cast<Relation>(r);
    } else {
      e.target = static_cast<int>(rng.index(n));
    }
    return e;
  };
  const int start = static_cast<int>(rng.index(3));
  for (int k = 0; k < 3; ++k) {
    const int component = (start + k) % 3;
    for (int attempt = 0; attempt < kAttemptsPerComponent; ++attempt) {
      const TypedEdge e = replaced(component);
      if (!graph.has_edge(e)) return EdgeSample{e, 0};
    }
  }
  // Random attempts exhausted: scan every single-component replacement.
  for (int k = 0; k < 3; ++k) {
    const int component = (start + k) % 3;
    const std::size_t options = component == 1 ? kNumRelations : n;
    for (std::size_t v = 0; v < options; ++v) {
      TypedEdge e = positive;
      if (component == 0) e.source = static_cast<int>(v);
      if (component == 1) e.relation = static_cast<Relation>(v);
      if (component == 2) e.target = static_cast<int>(v);
      if (!graph.has_edge(e)) return EdgeSample{e, 0};
    }
  }
  throw DataError("graph '" + graph.doc_id + "' is too dense to corrupt edge (" +
                  std::to_string(positive.source) + ", " + std::string(relation_name(positive.relation)) +
                  ", " + std::to_string(positive.target) + ")");
}

std::string format_graph_line(const NarrativeGraph& graph) {
  json j;
  j["doc_id"] = graph.doc_id;
  j["nodes"] = json::array();
  for (const EngNode& n : graph.nodes) {
    j["nodes"].push_back({{"id", n.id},
                          {"entity", n.entity},
                          {"sentence", n.sentence},
                          {"span", {n.span.start, n.span.end}}});
  }
  j["edges"] = json::array();
  for (const TypedEdge& e : graph.edges) {
    j["edges"].push_back({e.source, relation_name(e.relation), e.target});
  }
  return j.dump();
}

NarrativeGraph parse_graph_line(std::string_view line) {
  const json j = json::parse(line);
  NarrativeGraph g;
  g.doc_id = j.at("doc_id").get<std::string>();
  for (const json& n : j.at("nodes")) {
    EngNode node;
    node.id = n.at("id").get<int>();
    node.entity = n.at("entity").get<std::string>();
    node.sentence = n.at("sentence").get<int>();
    node.span = TokenSpan{n.at("span").at(0).get<int>(), n.at("span").at(1).get<int>()};
    if (node.id != static_cast<int>(g.nodes.size())) {
      throw DataError("graph '" + g.doc_id + "': node ids must be dense and ordered");
    }
    g.nodes.push_back(std::move(node));
  }
  for (const json& e : j.at("edges")) {
    const TypedEdge edge{e.at(0).get<int>(), parse_relation(e.at(1).get<std::string>()), e.at(2).get<int>()};
    try {
      if (!g.add_edge(edge)) throw DataError("duplicate edge");
    } catch (const std::exception& ex) {
      throw DataError("graph '" + g.doc_id + "': bad edge: " + ex.what());
    }
  }
  return g;
}

void write_graphs(const std::filesystem::path& path, std::span<const NarrativeGraph> graphs) {
  std::string out;
  for (const NarrativeGraph& g : graphs) {
    out += format_graph_line(g);
    out += '\n';
  }
  write_file(path, out);
}

std::vector<NarrativeGraph> read_graphs(const std::filesystem::path& path) {
  std::vector<NarrativeGraph> graphs;
  std::size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      graphs.push_back(parse_graph_line(line));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": parse error: " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return graphs;
}

}  // namespace eng
