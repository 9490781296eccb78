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

#include "eng/node_encoding.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace eng {
namespace {

constexpr std::string_view kHeaderPrefix = "#eng-embeddings";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string format_float(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(v));
  return std::string(buf, res.ptr);
}

double parse_float(std::string_view text, const std::string& where) {
  float v = 0.0f;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError(where + ": malformed number '" + std::string(text) + "'");
  }
  return static_cast<double>(v);
}

std::vector<int> token_ids(const TokenVocabulary& vocab, const std::vector<std::string>& tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(vocab.id(t));
  return ids;
}

}  // namespace

void apply_token_budget(NodeInput& input, std::size_t budget) {
  if (input.token_count() <= budget) return;
  const std::size_t available = budget > input.label_sentence.size() ? budget - input.label_sentence.size() : 0;
  const std::size_t ctx_room = available > input.sentence.size() ? available - input.sentence.size() : 0;
  if (input.context.size() > ctx_room) input.context.resize(ctx_room);
  if (input.sentence.size() > available) input.sentence.resize(available);
}

NodeInput assemble_node_input(const Document& doc, const EngNode& node,
                              std::span<const std::string> label_vocab, std::size_t budget) {
  NodeInput in;
  in.sentence = doc.sentences.at(static_cast<std::size_t>(node.sentence)).tokens;
  std::set<int> sentences;
  for (const CorefChain& c : doc.chains) {
    if (c.entity != node.entity) continue;
    for (const Mention& m : c.mentions) sentences.insert(m.sentence);
  }
  for (int s : sentences) {
    const auto& toks = doc.sentences[static_cast<std::size_t>(s)].tokens;
    in.context.insert(in.context.end(), toks.begin(), toks.end());
  }
  if (!label_vocab.empty()) in.label_sentence = tokenize(build_label_sentence(node.entity, label_vocab));
  apply_token_budget(in, budget);
  return in;
}

// ---------------------------------------------------------------------------
// Vocabulary

TokenVocabulary::TokenVocabulary() { add("<unk>"); }

TokenVocabulary::TokenVocabulary(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens.front() != "<unk>") throw DataError("vocabulary must start with <unk>");
  for (const std::string& t : tokens) {
    if (index_.count(t)) throw DataError("duplicate vocabulary token '" + t + "'");
    add(t);
  }
}

int TokenVocabulary::add(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

int TokenVocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

TokenVocabulary TokenVocabulary::build(std::span<const Document> docs) {
  TokenVocabulary v;
  for (Task task : {Task::kMaslow, Task::kReiss, Task::kPlutchik, Task::kDesire}) {
    for (const std::string& label : label_vocabulary(task)) {
      for (const std::string& t : tokenize(label)) v.add(t);
    }
  }
  for (const std::string& t : tokenize("is , .")) v.add(t);
  for (const Document& d : docs) {
    for (const Sentence& s : d.sentences) {
      for (const std::string& t : s.tokens) v.add(t);
    }
    for (const CorefChain& c : d.chains) {
      for (const std::string& t : tokenize(c.entity)) v.add(t);
    }
  }
  return v;
}

std::string_view encoder_kind_name(EncoderKind kind) {
  return kind == EncoderKind::kBag ? "bag" : "external";
}

EncoderKind parse_encoder_kind(std::string_view name) {
  if (name == "bag") return EncoderKind::kBag;
  if (name == "external") return EncoderKind::kExternal;
  throw UsageError("unknown encoder kind '" + std::string(name) + "' (expected bag|external)");
}

// ---------------------------------------------------------------------------
// Bag encoder

void init_bag_encoder(ad::ParameterStore& store, std::size_t vocab_size, std::size_t dim, Rng& rng) {
  ad::Tensor emb(vocab_size, dim);
  for (double& v : emb.values()) v = 0.1 * rng.normal();
  store.create("encoder/embedding", std::move(emb));
  store.create("encoder/proj_w", ad::glorot(3 * dim, dim, rng));
  store.create("encoder/proj_b", ad::Tensor(1, dim, 0.01));
}

ad::Var encode_bag(ad::Tape& tape, const ad::ParameterStore& store, const TokenVocabulary& vocab,
                   std::span<const NodeInput> inputs) {
  std::vector<std::vector<int>> s_bags, ctx_bags, label_bags;
  for (const NodeInput& in : inputs) {
    s_bags.push_back(token_ids(vocab, in.sentence));
    ctx_bags.push_back(token_ids(vocab, in.context));
    label_bags.push_back(token_ids(vocab, in.label_sentence));
  }
  ad::Var table = tape.parameter(store, "encoder/embedding");
  ad::Var pooled = ad::concat({ad::embedding_bag(table, s_bags), ad::embedding_bag(table, ctx_bags),
                               ad::embedding_bag(table, label_bags)},
                              1);
  ad::Var w = tape.parameter(store, "encoder/proj_w");
  ad::Var b = tape.parameter(store, "encoder/proj_b");
  return ad::relu(ad::add(ad::matmul(pooled, w), b));
}

// ---------------------------------------------------------------------------
// External embeddings

const std::vector<double>* ExternalEmbeddingTable::find(const std::string& doc_id, int node_id) const {
  auto it = vectors.find({doc_id, node_id});
  return it == vectors.end() ? nullptr : &it->second;
}

std::vector<EmbeddingRecord> read_embedding_records(const std::filesystem::path& path, std::size_t* dim) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<EmbeddingRecord> records;
  std::size_t declared = 0;
  bool have_header = false;
  std::vector<std::string> ragged;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (trim(line).empty()) continue;
    if (!have_header) {
      std::istringstream ss(line);
      std::string prefix, field;
      ss >> prefix;
      if (prefix != kHeaderPrefix) throw DataError(where + ": missing '#eng-embeddings dim=<D>' header");
      while (ss >> field) {
        if (field.rfind("dim=", 0) == 0) declared = std::stoul(field.substr(4));
      }
      if (declared == 0) throw DataError(where + ": header must declare a positive dim");
      have_header = true;
      continue;
    }
    const std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 3 && cols.size() != 5) {
      throw DataError(where + ": expected 3 or 5 tab-separated columns, got " + std::to_string(cols.size()));
    }
    EmbeddingRecord rec;
    rec.doc_id = cols[0];
    try {
      rec.node_id = std::stoi(cols[1]);
    } catch (const std::exception&) {
      throw DataError(where + ": malformed node_id '" + cols[1] + "'");
    }
    std::istringstream vs(cols[2]);
    std::string num;
    while (vs >> num) rec.vector.push_back(parse_float(num, where));
    if (cols.size() == 5) {
      rec.verb = cols[3];
      rec.label = cols[4];
    }
    if (rec.vector.size() != declared) {
      ragged.push_back("(" + rec.doc_id + ", " + std::to_string(rec.node_id) + ") has " +
                       std::to_string(rec.vector.size()) + " values");
    }
    records.push_back(std::move(rec));
  }
  if (!ragged.empty()) {
    throw DataError(path.string() + ": rows disagree with declared dim " + std::to_string(declared) + ": " +
                    join(ragged, "; "));
  }
  if (dim) *dim = declared;
  return records;
}

void write_embedding_records(const std::filesystem::path& path, std::size_t dim,
                             std::span<const EmbeddingRecord> records, bool with_tags) {
  std::string out = std::string(kHeaderPrefix) + " dim=" + std::to_string(dim);
  if (with_tags) out += " tags=verb,label";
  out += '\n';
  for (const EmbeddingRecord& r : records) {
    if (r.vector.size() != dim) throw DataError("embedding row dimension mismatch for " + r.doc_id);
    out += r.doc_id;
    out += '\t';
    out += std::to_string(r.node_id);
    out += '\t';
    for (std::size_t i = 0; i < r.vector.size(); ++i) {
      if (i) out += ' ';
      out += format_float(r.vector[i]);
    }
    if (with_tags) {
      out += '\t';
      out += r.verb;
      out += '\t';
      out += r.label;
    }
    out += '\n';
  }
  write_file(path, out);
}

ExternalEmbeddingTable read_embedding_table(const std::filesystem::path& path) {
  if (std::filesystem::exists(path) && std::filesystem::file_size(path) == 0) return {};
  std::size_t dim = 0;
  std::vector<EmbeddingRecord> records = read_embedding_records(path, &dim);
  ExternalEmbeddingTable table;
  table.dim = dim;
  std::vector<std::string> duplicates;
  for (EmbeddingRecord& r : records) {
    auto key = std::make_pair(r.doc_id, r.node_id);
    if (table.vectors.count(key)) {
      duplicates.push_back("(" + r.doc_id + ", " + std::to_string(r.node_id) + ")");
      continue;
    }
    table.vectors.emplace(std::move(key), std::move(r.vector));
  }
  if (!duplicates.empty()) {
    throw DataError(path.string() + ": duplicate node rows: " + join(duplicates, ", "));
  }
  return table;
}

void check_embedding_coverage(const ExternalEmbeddingTable& table, std::span<const NarrativeGraph> graphs) {
  std::vector<std::string> missing;
  for (const NarrativeGraph& g : graphs) {
    for (const EngNode& n : g.nodes) {
      if (!table.find(g.doc_id, n.id)) missing.push_back("(" + g.doc_id + ", " + std::to_string(n.id) + ")");
    }
  }
  if (!missing.empty()) {
    throw DataError("embedding table is missing " + std::to_string(missing.size()) +
                    " node(s): " + join(missing, ", "));
  }
}

ExternalEmbeddingTable load_external_embeddings(const std::filesystem::path& path,
                                                std::span<const NarrativeGraph> graphs) {
  ExternalEmbeddingTable table = read_embedding_table(path);
  check_embedding_coverage(table, graphs);
  return table;
}

void init_external_projection(ad::ParameterStore& store, std::size_t external_dim, std::size_t dim, Rng& rng) {
  if (external_dim == dim) return;
  store.create("encoder/ext_proj_w", ad::glorot(external_dim, dim, rng));
  store.create("encoder/ext_proj_b", ad::Tensor(1, dim));
}

ad::Tensor external_rows(const ExternalEmbeddingTable& table, const std::string& doc_id,
                         std::span<const int> node_ids) {
  ad::Tensor rows(node_ids.size(), table.dim);
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    const std::vector<double>* v = table.find(doc_id, node_ids[i]);
    if (!v) throw DataError("no external embedding for (" + doc_id + ", " + std::to_string(node_ids[i]) + ")");
    std::copy(v->begin(), v->end(), rows.row(i).begin());
  }
  return rows;
}

ad::Var project_external(ad::Tape& tape, const ad::ParameterStore& store, ad::Tensor rows, std::size_t dim) {
  ad::Var x = tape.constant(std::move(rows));
  if (x.value().cols() == dim) return x;
  return ad::add(ad::matmul(x, tape.parameter(store, "encoder/ext_proj_w")),
                 tape.parameter(store, "encoder/ext_proj_b"));
}

ad::Var encode_external(ad::Tape& tape, const ad::ParameterStore& store, const ExternalEmbeddingTable& table,
                        const NarrativeGraph& graph, std::size_t dim) {
  std::vector<int> ids(graph.nodes.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return project_external(tape, store, external_rows(table, graph.doc_id, ids), dim);
}

}  // namespace eng
