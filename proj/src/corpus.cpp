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

#include "eng/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "eng/common.hpp"
#include "json.hpp"

namespace eng {

using nlohmann::json;

namespace {

const std::vector<std::string> kMaslow = {"esteem", "love", "physiological", "spiritual growth",
                                          "stability"};
const std::vector<std::string> kReiss = {
    "approval", "belonging", "competition", "contact",     "curiosity", "family", "food",
    "health",   "honor",     "idealism",    "independence", "order",     "power",  "rest",
    "romance",  "savings",   "serenity",    "status",       "tranquility"};
const std::vector<std::string> kPlutchik = {"anger", "anticipation", "disgust", "fear",
                                            "joy",   "sadness",      "surprise", "trust"};
const std::vector<std::string> kDesire = {"fulfilled", "unfulfilled"};

[[noreturn]] void fail(const std::string& doc_id, const std::string& field, const std::string& what) {
  throw DataError("document '" + doc_id + "': " + field + ": " + what);
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || (c & 0x80); }

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

std::string_view position_name(ConnectivePosition p) {
  return p == ConnectivePosition::kSentenceInitial ? "sentence-initial" : "medial";
}

ConnectivePosition parse_position(const std::string& s) {
  if (s == "sentence-initial" || s == "initial") return ConnectivePosition::kSentenceInitial;
  if (s == "medial") return ConnectivePosition::kMedial;
  throw DataError("unknown connective position '" + s + "'");
}

void require_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw DataError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end()) {
      throw DataError(where + ": unknown field '" + key + "'");
    }
  }
}

std::vector<double> parse_votes(const json& arr) {
  std::vector<double> out;
  for (const json& v : arr) {
    if (v.is_boolean()) {
      out.push_back(v.get<bool>() ? 1.0 : 0.0);
    } else {
      out.push_back(v.get<double>());
    }
  }
  return out;
}

std::vector<std::string> canonical_order(Task task, std::vector<std::string> labels) {
  const auto& vocab = label_vocabulary(task);
  std::vector<std::string> out;
  for (const auto& l : vocab) {
    if (std::find(labels.begin(), labels.end(), l) != labels.end()) out.push_back(l);
  }
  for (const auto& l : labels) {
    if (std::find(vocab.begin(), vocab.end(), l) == vocab.end()) out.push_back(l);  // caught by validation
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tasks and labels

std::string_view task_name(Task task) {
  switch (task) {
    case Task::kMaslow: return "maslow";
    case Task::kReiss: return "reiss";
    case Task::kPlutchik: return "plutchik";
    case Task::kDesire: return "desire";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "maslow") return Task::kMaslow;
  if (n == "reiss") return Task::kReiss;
  if (n == "plutchik" || n == "plut") return Task::kPlutchik;
  if (n == "desire") return Task::kDesire;
  throw UsageError("unknown task '" + std::string(name) + "' (expected maslow|reiss|plutchik|desire)");
}

bool is_node_task(Task task) { return task != Task::kDesire; }

const std::vector<std::string>& label_vocabulary(Task task) {
  switch (task) {
    case Task::kMaslow: return kMaslow;
    case Task::kReiss: return kReiss;
    case Task::kPlutchik: return kPlutchik;
    case Task::kDesire: return kDesire;
  }
  return kDesire;
}

int label_index(Task task, std::string_view label) {
  const auto& v = label_vocabulary(task);
  auto it = std::find(v.begin(), v.end(), label);
  return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}

const NodeLabels* TaskLabels::find(Task task, std::string_view entity, int sentence) const {
  auto it = nodes.find(task);
  if (it == nodes.end()) return nullptr;
  for (const NodeLabels& nl : it->second) {
    if (nl.entity == entity && nl.sentence == sentence) return &nl;
  }
  return nullptr;
}

bool TaskLabels::has(Task task) const {
  if (task == Task::kDesire) return desire.has_value();
  auto it = nodes.find(task);
  return it != nodes.end() && !it->second.empty();
}

// ---------------------------------------------------------------------------
// Tokens

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (is_word_char(c)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if ((c == '\'' || c == '-') && !cur.empty() && i + 1 < text.size() &&
               is_word_char(text[i + 1])) {
      cur.push_back(c);
    } else {
      flush();
      tokens.emplace_back(1, c);
    }
  }
  flush();
  return tokens;
}

std::string normalize_text(std::string_view text) { return join(tokenize(text), " "); }

// ---------------------------------------------------------------------------
// Validation

void validate_document(const Document& doc) {
  const std::string& id = doc.doc_id;
  if (id.empty()) fail("<missing>", "doc_id", "empty");
  const int n = static_cast<int>(doc.sentences.size());
  for (int i = 0; i < n; ++i) {
    const Sentence& s = doc.sentences[static_cast<std::size_t>(i)];
    const std::string field = "sentences[" + std::to_string(i) + "]";
    if (s.index != i) fail(id, field + ".index", "expected " + std::to_string(i) + ", got " + std::to_string(s.index));
    if (strip_spaces(to_lower(join(s.tokens, " "))) != strip_spaces(to_lower(s.text))) {
      fail(id, field + ".tokens", "tokens do not reconstruct the sentence text");
    }
  }
  auto check_span = [&](int sent, TokenSpan span, const std::string& field) {
    if (sent < 0 || sent >= n) {
      fail(id, field, "sentence_index " + std::to_string(sent) + " outside " + std::to_string(n) + " sentences");
    }
    const int len = static_cast<int>(doc.sentences[static_cast<std::size_t>(sent)].tokens.size());
    if (span.start < 0 || span.end <= span.start || span.end > len) {
      fail(id, field, "token span [" + std::to_string(span.start) + "," + std::to_string(span.end) +
                          ") outside sentence of " + std::to_string(len) + " tokens");
    }
  };
  for (std::size_t c = 0; c < doc.chains.size(); ++c) {
    const CorefChain& chain = doc.chains[c];
    const std::string field = "chains[" + std::to_string(c) + "]";
    if (chain.entity.empty()) fail(id, field + ".entity", "empty entity name");
    if (chain.mentions.empty()) fail(id, field + ".mentions", "chain has no mentions");
    for (std::size_t m = 0; m < chain.mentions.size(); ++m) {
      const Mention& mention = chain.mentions[m];
      check_span(mention.sentence, mention.span, field + ".mentions[" + std::to_string(m) + "]");
      if (m > 0) {
        const Mention& prev = chain.mentions[m - 1];
        if (std::pair(prev.sentence, prev.span.start) > std::pair(mention.sentence, mention.span.start)) {
          fail(id, field + ".mentions[" + std::to_string(m) + "]", "mentions not sorted");
        }
      }
    }
  }
  for (std::size_t c = 0; c < doc.connectives.size(); ++c) {
    const ConnectiveAnnotation& ca = doc.connectives[c];
    const std::string field = "connectives[" + std::to_string(c) + "]";
    check_span(ca.sentence, ca.span, field);
    if (ca.surface.empty() || ca.surface != to_lower(ca.surface)) {
      fail(id, field + ".surface", "surface must be non-empty lowercase");
    }
  }
  if (!doc.labels) return;
  auto has_mention = [&](const std::string& entity, int sent) {
    for (const CorefChain& chain : doc.chains) {
      if (chain.entity != entity) continue;
      for (const Mention& m : chain.mentions) {
        if (m.sentence == sent) return true;
      }
    }
    return false;
  };
  for (const auto& [task, entries] : doc.labels->nodes) {
    const std::string tname(task_name(task));
    if (!is_node_task(task)) fail(id, "labels." + tname, "not a node task");
    std::set<std::pair<std::string, int>> seen;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const NodeLabels& nl = entries[e];
      const std::string field = "labels." + tname + "[" + std::to_string(e) + "]";
      if (!has_mention(nl.entity, nl.sentence)) {
        fail(id, field, "no mention of '" + nl.entity + "' in sentence " + std::to_string(nl.sentence));
      }
      if (!seen.emplace(nl.entity, nl.sentence).second) fail(id, field, "duplicate (entity, sentence) key");
      for (const std::string& l : nl.labels) {
        if (label_index(task, l) < 0) fail(id, field + ".labels", "unknown " + tname + " label '" + l + "'");
      }
      for (const auto& [label, votes] : nl.votes) {
        if (label_index(task, label) < 0) fail(id, field + ".votes", "unknown " + tname + " label '" + label + "'");
        if (static_cast<int>(votes.size()) != kAnnotatorCount) {
          fail(id, field + ".votes." + label, "expected " + std::to_string(kAnnotatorCount) + " annotators");
        }
        for (double v : votes) {
          const bool ok = task == Task::kPlutchik ? (v >= 0.0 && v <= 5.0) : (v == 0.0 || v == 1.0);
          if (!ok) fail(id, field + ".votes." + label, "vote value out of range");
        }
      }
    }
  }
  if (doc.labels->desire) {
    const DesireLabel& d = *doc.labels->desire;
    if (label_index(Task::kDesire, d.label) < 0) fail(id, "labels.desire.label", "unknown label '" + d.label + "'");
    if (d.sentence < 0 || d.sentence >= n) fail(id, "labels.desire.sentence", "outside document");
  }
  for (std::size_t t = 0; t < doc.labels->tags.size(); ++t) {
    const NodeTag& tag = doc.labels->tags[t];
    if (!has_mention(tag.entity, tag.sentence)) {
      fail(id, "labels.tags[" + std::to_string(t) + "]", "no such (entity, sentence) node");
    }
  }
}

// ---------------------------------------------------------------------------
// JSON lines

Document parse_document_line(std::string_view line) {
  json j = json::parse(line);
  require_keys(j, {"doc_id", "sentences", "chains", "connectives", "labels"}, "document");
  Document doc;
  doc.doc_id = j.at("doc_id").get<std::string>();
  for (const json& s : j.at("sentences")) {
    require_keys(s, {"index", "text", "tokens"}, "sentence");
    Sentence sent;
    sent.index = s.at("index").get<int>();
    sent.text = s.at("text").get<std::string>();
    for (const json& t : s.at("tokens")) sent.tokens.push_back(to_lower(t.get<std::string>()));
    doc.sentences.push_back(std::move(sent));
  }
  for (const json& c : j.value("chains", json::array())) {
    require_keys(c, {"entity", "mentions"}, "chain");
    CorefChain chain;
    chain.entity = c.at("entity").get<std::string>();
    for (const json& m : c.at("mentions")) {
      if (!m.is_array() || m.size() != 3) throw DataError("chain mention must be [sent, start, end]");
      chain.mentions.push_back(Mention{m[0].get<int>(), TokenSpan{m[1].get<int>(), m[2].get<int>()}});
    }
    doc.chains.push_back(std::move(chain));
  }
  for (const json& c : j.value("connectives", json::array())) {
    require_keys(c, {"sent", "start", "end", "surface", "position"}, "connective");
    ConnectiveAnnotation ca;
    ca.sentence = c.at("sent").get<int>();
    ca.span = TokenSpan{c.at("start").get<int>(), c.at("end").get<int>()};
    ca.surface = c.at("surface").get<std::string>();
    ca.position = parse_position(c.at("position").get<std::string>());
    doc.connectives.push_back(std::move(ca));
  }
  if (j.contains("labels") && !j.at("labels").is_null()) {
    const json& lj = j.at("labels");
    require_keys(lj, {"maslow", "reiss", "plutchik", "desire", "tags"}, "labels");
    TaskLabels labels;
    for (Task task : {Task::kMaslow, Task::kReiss, Task::kPlutchik}) {
      const std::string key(task_name(task));
      if (!lj.contains(key)) continue;
      auto& entries = labels.nodes[task];
      for (const json& e : lj.at(key)) {
        require_keys(e, {"entity", "sentence", "labels", "votes"}, "labels." + key);
        NodeLabels nl;
        nl.entity = e.at("entity").get<std::string>();
        nl.sentence = e.at("sentence").get<int>();
        if (e.contains("votes")) {
          for (const auto& [label, arr] : e.at("votes").items()) nl.votes[label] = parse_votes(arr);
        }
        if (e.contains("labels")) {
          nl.labels = canonical_order(task, e.at("labels").get<std::vector<std::string>>());
        } else {
          nl.labels = aggregate_votes(nl.votes, task);
        }
        entries.push_back(std::move(nl));
      }
    }
    if (lj.contains("desire") && !lj.at("desire").is_null()) {
      const json& d = lj.at("desire");
      require_keys(d, {"label", "sentence"}, "labels.desire");
      labels.desire = DesireLabel{d.at("label").get<std::string>(), d.at("sentence").get<int>()};
    }
    for (const json& t : lj.value("tags", json::array())) {
      require_keys(t, {"entity", "sentence", "verb"}, "labels.tags");
      labels.tags.push_back(NodeTag{t.at("entity").get<std::string>(), t.at("sentence").get<int>(),
                                    t.value("verb", std::string())});
    }
    doc.labels = std::move(labels);
  }
  validate_document(doc);
  return doc;
}

std::string format_document_line(const Document& doc) {
  json j;
  j["doc_id"] = doc.doc_id;
  j["sentences"] = json::array();
  for (const Sentence& s : doc.sentences) {
    j["sentences"].push_back({{"index", s.index}, {"text", s.text}, {"tokens", s.tokens}});
  }
  j["chains"] = json::array();
  for (const CorefChain& c : doc.chains) {
    json mentions = json::array();
    for (const Mention& m : c.mentions) mentions.push_back({m.sentence, m.span.start, m.span.end});
    j["chains"].push_back({{"entity", c.entity}, {"mentions", mentions}});
  }
  j["connectives"] = json::array();
  for (const ConnectiveAnnotation& ca : doc.connectives) {
    j["connectives"].push_back({{"sent", ca.sentence},
                                {"start", ca.span.start},
                                {"end", ca.span.end},
                                {"surface", ca.surface},
                                {"position", position_name(ca.position)}});
  }
  if (doc.labels) {
    json lj = json::object();
    for (const auto& [task, entries] : doc.labels->nodes) {
      json arr = json::array();
      for (const NodeLabels& nl : entries) {
        json e = {{"entity", nl.entity}, {"sentence", nl.sentence}, {"labels", nl.labels}};
        if (!nl.votes.empty()) {
          json votes = json::object();
          for (const auto& [label, v] : nl.votes) votes[label] = v;
          e["votes"] = votes;
        }
        arr.push_back(std::move(e));
      }
      lj[std::string(task_name(task))] = std::move(arr);
    }
    if (doc.labels->desire) {
      lj["desire"] = {{"label", doc.labels->desire->label}, {"sentence", doc.labels->desire->sentence}};
    }
    if (!doc.labels->tags.empty()) {
      json tags = json::array();
      for (const NodeTag& t : doc.labels->tags) {
        tags.push_back({{"entity", t.entity}, {"sentence", t.sentence}, {"verb", t.verb}});
      }
      lj["tags"] = std::move(tags);
    }
    j["labels"] = std::move(lj);
  } else {
    j["labels"] = nullptr;
  }
  return j.dump();
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path.string());
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      docs.push_back(parse_document_line(line));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": parse error: " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

void write_corpus(const std::filesystem::path& path, std::span<const Document> docs) {
  std::string out;
  for (const Document& d : docs) {
    out += format_document_line(d);
    out += '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// Votes and label sentences

bool vote_active(std::span<const double> votes, Task task) {
  if (static_cast<int>(votes.size()) != kAnnotatorCount) {
    throw DataError("expected votes from " + std::to_string(kAnnotatorCount) + " annotators, got " +
                    std::to_string(votes.size()));
  }
  switch (task) {
    case Task::kMaslow:
    case Task::kReiss: {
      int flags = 0;
      for (double v : votes) flags += v != 0.0 ? 1 : 0;
      return flags >= 2;
    }
    case Task::kPlutchik: {
      double total = 0.0;
      for (double v : votes) total += v;
      // mean >= 2 compared as total >= 6 to stay exact for integer ratings
      return total >= kPlutchikActiveRating * kAnnotatorCount;
    }
    case Task::kDesire:
      break;
  }
  throw DataError("vote aggregation is undefined for task desire");
}

std::vector<std::string> aggregate_votes(const RawVotes& votes, Task task) {
  std::vector<std::string> active;
  for (const auto& [label, v] : votes) {
    if (vote_active(v, task)) active.push_back(label);
  }
  return canonical_order(task, std::move(active));
}

std::string build_label_sentence(std::string_view entity, std::span<const std::string> vocabulary) {
  if (vocabulary.empty()) throw std::invalid_argument("build_label_sentence: empty label vocabulary");
  std::string out(entity);
  out += " is ";
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (i) out += ", ";
    out += vocabulary[i];
  }
  out += ".";
  return out;
}

// ---------------------------------------------------------------------------
// Sentiment

std::string_view sentiment_name(Sentiment s) {
  switch (s) {
    case Sentiment::kNegative: return "negative";
    case Sentiment::kNeutral: return "neutral";
    case Sentiment::kPositive: return "positive";
  }
  return "?";
}

SentimentLexicon load_sentiment_lexicon(const std::filesystem::path& path) {
  SentimentLexicon lex;
  bool custom_negations = false;
  std::size_t lineno = 0;
  for (const std::string& raw : read_lines(path)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(trim(col));
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      if (cols[0] == "@negation" && cols.size() == 2) {
        lex.negations.insert(to_lower(cols[1]));
        custom_negations = true;
      } else if (cols[0] == "@thresholds" && cols.size() == 3) {
        lex.t_neg = std::stod(cols[1]);
        lex.t_pos = std::stod(cols[2]);
      } else if (cols.size() == 2) {
        const double score = std::stod(cols[1]);
        if (score < -1.0 || score > 1.0) throw DataError(where + ": score outside [-1, 1]");
        lex.scores[to_lower(cols[0])] = score;
      } else {
        throw DataError(where + ": expected 'word<TAB>score'");
      }
    } catch (const std::invalid_argument&) {
      throw DataError(where + ": malformed number");
    }
  }
  if (!(lex.t_neg < 0.0 && 0.0 < lex.t_pos)) throw DataError(path.string() + ": thresholds must satisfy t_neg < 0 < t_pos");
  if (!custom_negations) lex.negations = default_negations();
  return lex;
}

double sentiment_score(std::span<const std::string> tokens, const SentimentLexicon& lexicon) {
  if (tokens.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = lexicon.scores.find(tokens[i]);
    if (it == lexicon.scores.end()) continue;
    bool negated = false;
    for (std::size_t k = i >= 3 ? i - 3 : 0; k < i; ++k) {
      if (lexicon.negations.count(tokens[k])) negated = true;
    }
    total += negated ? -it->second : it->second;
  }
  return total / std::sqrt(static_cast<double>(tokens.size()));
}

Sentiment sentiment_label(std::span<const std::string> tokens, const SentimentLexicon& lexicon) {
  const double score = sentiment_score(tokens, lexicon);
  if (score >= lexicon.t_pos) return Sentiment::kPositive;
  if (score <= lexicon.t_neg) return Sentiment::kNegative;
  return Sentiment::kNeutral;
}

}  // namespace eng
