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

#ifndef ENG_NODE_ENCODING_HPP_
#define ENG_NODE_ENCODING_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eng/autodiff.hpp"
#include "eng/corpus.hpp"
#include "eng/narrative_graph.hpp"

namespace eng {

inline constexpr std::size_t kMaxSequenceLength = 160;

// The three-part node input: the target sentence, the entity's context
// (every sentence it appears in) and the label sentence.
struct NodeInput {
  std::vector<std::string> sentence;
  std::vector<std::string> context;
  std::vector<std::string> label_sentence;

  std::size_t token_count() const { return sentence.size() + context.size() + label_sentence.size(); }
};

// Keeps the label sentence intact and cuts the context, then the sentence,
// from the right until the total fits the budget.
void apply_token_budget(NodeInput& input, std::size_t budget = kMaxSequenceLength);

// `label_vocab` may be empty, in which case no label sentence is appended.
NodeInput assemble_node_input(const Document& doc, const EngNode& node,
                              std::span<const std::string> label_vocab,
                              std::size_t budget = kMaxSequenceLength);

class TokenVocabulary {
 public:
  static constexpr int kUnk = 0;

  TokenVocabulary();
  explicit TokenVocabulary(std::vector<std::string> tokens);

  int add(std::string_view token);
  int id(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Every sentence token of `docs` plus the tokens of every task's labels,
  // in first-seen order.
  static TokenVocabulary build(std::span<const Document> docs);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

enum class EncoderKind { kBag, kExternal };
std::string_view encoder_kind_name(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view name);

// Bag encoder: v = ReLU([mean(s); mean(ctx); mean(L)] W + b) with
// parameters encoder/embedding (V x d), encoder/proj_w (3d x d) and
// encoder/proj_b (1 x d). Unknown tokens share the UNK row.
void init_bag_encoder(ad::ParameterStore& store, std::size_t vocab_size, std::size_t dim, Rng& rng);
ad::Var encode_bag(ad::Tape& tape, const ad::ParameterStore& store, const TokenVocabulary& vocab,
                   std::span<const NodeInput> inputs);

struct ExternalEmbeddingTable {
  std::size_t dim = 0;
  std::map<std::pair<std::string, int>, std::vector<double>> vectors;

  const std::vector<double>* find(const std::string& doc_id, int node_id) const;
  std::size_t size() const { return vectors.size(); }
};

// One row of an embedding exchange or dump file.
struct EmbeddingRecord {
  std::string doc_id;
  int node_id = 0;
  std::vector<double> vector;
  std::string verb;
  std::string label;
};

// Exchange format. Header "#eng-embeddings dim=<D>" (plus " tags=verb,label"
// for analysis dumps), then one tab-separated row per node:
//   doc_id, node_id, D space-separated decimals[, verb, label]
// Values are read at f32 precision.
std::vector<EmbeddingRecord> read_embedding_records(const std::filesystem::path& path, std::size_t* dim);
void write_embedding_records(const std::filesystem::path& path, std::size_t dim,
                             std::span<const EmbeddingRecord> records, bool with_tags);

// Rejects duplicate or ragged rows, listing every offender.
ExternalEmbeddingTable read_embedding_table(const std::filesystem::path& path);
// Rejects tables that miss any node of `graphs`, listing every (doc_id, node_id).
void check_embedding_coverage(const ExternalEmbeddingTable& table, std::span<const NarrativeGraph> graphs);
ExternalEmbeddingTable load_external_embeddings(const std::filesystem::path& path,
                                                std::span<const NarrativeGraph> graphs);

// When the external dimension differs from the model dimension, a learned
// linear map encoder/ext_proj_w (D x d), encoder/ext_proj_b (1 x d) is used.
void init_external_projection(ad::ParameterStore& store, std::size_t external_dim, std::size_t dim, Rng& rng);
ad::Var encode_external(ad::Tape& tape, const ad::ParameterStore& store, const ExternalEmbeddingTable& table,
                        const NarrativeGraph& graph, std::size_t dim);
// Rows for an arbitrary subset of nodes (e.g. a query built from nodes).
ad::Tensor external_rows(const ExternalEmbeddingTable& table, const std::string& doc_id,
                         std::span<const int> node_ids);
ad::Var project_external(ad::Tape& tape, const ad::ParameterStore& store, ad::Tensor rows, std::size_t dim);

}  // namespace eng

#endif  // ENG_NODE_ENCODING_HPP_
