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

// Annotated narrative documents: data model, line-delimited JSON ingestion,
// annotator vote aggregation, label sentences and lexicon sentiment.

#ifndef ENG_CORPUS_HPP_
#define ENG_CORPUS_HPP_

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace eng {

enum class Task { kMaslow, kReiss, kPlutchik, kDesire };

std::string_view task_name(Task task);
Task parse_task(std::string_view name);
bool is_node_task(Task task);

// Candidate labels of a task in canonical (alphabetical) order.
const std::vector<std::string>& label_vocabulary(Task task);
int label_index(Task task, std::string_view label);

inline constexpr int kAnnotatorCount = 3;
inline constexpr double kPlutchikActiveRating = 2.0;

// Half-open token range [start, end).
struct TokenSpan {
  int start = 0;
  int end = 0;
  auto operator<=>(const TokenSpan&) const = default;
};

struct Mention {
  int sentence = 0;
  TokenSpan span;
  auto operator<=>(const Mention&) const = default;
};

struct Sentence {
  int index = 0;
  std::string text;
  std::vector<std::string> tokens;
};

struct CorefChain {
  std::string entity;
  std::vector<Mention> mentions;
};

enum class ConnectivePosition { kSentenceInitial, kMedial };

struct ConnectiveAnnotation {
  int sentence = 0;
  TokenSpan span;
  std::string surface;
  ConnectivePosition position = ConnectivePosition::kSentenceInitial;
};

// label -> one entry per annotator (flags as 0/1 for maslow/reiss,
// ratings in [0, 5] for plutchik).
using RawVotes = std::map<std::string, std::vector<double>>;

struct NodeLabels {
  std::string entity;
  int sentence = 0;
  std::vector<std::string> labels;  // canonical order
  RawVotes votes;
};

struct DesireLabel {
  std::string label;  // fulfilled | unfulfilled
  int sentence = 0;   // desire-expression sentence
};

// Optional analysis tags for a node (e.g. its main verb).
struct NodeTag {
  std::string entity;
  int sentence = 0;
  std::string verb;
};

struct TaskLabels {
  std::map<Task, std::vector<NodeLabels>> nodes;
  std::optional<DesireLabel> desire;
  std::vector<NodeTag> tags;

  const NodeLabels* find(Task task, std::string_view entity, int sentence) const;
  bool has(Task task) const;
};

struct Document {
  std::string doc_id;
  std::vector<Sentence> sentences;
  std::vector<CorefChain> chains;
  std::vector<ConnectiveAnnotation> connectives;
  std::optional<TaskLabels> labels;
};

// Lowercases and splits on whitespace; punctuation becomes separate tokens
// except apostrophes and hyphens inside a word.
std::vector<std::string> tokenize(std::string_view text);

// Token sequence joined by single spaces.
std::string normalize_text(std::string_view text);

// Throws DataError naming the doc_id and field path of the first violation.
void validate_document(const Document& doc);

Document parse_document_line(std::string_view line);
std::string format_document_line(const Document& doc);

// Parse errors carry the 1-based line number.
std::vector<Document> load_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, std::span<const Document> docs);

// Majority rule for one label: 2-of-3 flags (maslow, reiss) or mean rating
// >= 2 (plutchik). Throws DataError unless exactly three votes are given.
bool vote_active(std::span<const double> votes, Task task);
// Active labels in canonical order.
std::vector<std::string> aggregate_votes(const RawVotes& votes, Task task);

// "<entity> is <l1>, <l2>, ..., <lk>."
std::string build_label_sentence(std::string_view entity, std::span<const std::string> vocabulary);

enum class Sentiment { kNegative = 0, kNeutral = 1, kPositive = 2 };
inline constexpr int kSentimentClasses = 3;
std::string_view sentiment_name(Sentiment s);

struct SentimentLexicon {
  std::unordered_map<std::string, double> scores;  // polarity in [-1, 1]
  std::unordered_set<std::string> negations;
  double t_pos = 0.05;
  double t_neg = -0.05;
};

const SentimentLexicon& builtin_sentiment_lexicon();
const std::unordered_set<std::string>& default_negations();

// Tab-separated "word<TAB>score" lines; "@negation<TAB>word" adds a negation
// word (defaults apply when none is given); "@thresholds<TAB>neg<TAB>pos".
SentimentLexicon load_sentiment_lexicon(const std::filesystem::path& path);

// Sum of matched scores, each flipped when a negation word occurs among the
// three preceding tokens, divided by sqrt(token count).
double sentiment_score(std::span<const std::string> tokens, const SentimentLexicon& lexicon);
Sentiment sentiment_label(std::span<const std::string> tokens, const SentimentLexicon& lexicon);

}  // namespace eng

#endif  // ENG_CORPUS_HPP_
