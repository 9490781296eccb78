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

#include <utility>

#include "eng/corpus.hpp"

namespace eng {
namespace {

// Polarity scores on a [-1, 1] scale for everyday narrative vocabulary.
constexpr std::pair<const char*, double> kEntries[] = {
    // positive
    {"happy", 0.8},      {"happily", 0.75},   {"happiness", 0.8},   {"glad", 0.6},
    {"joy", 0.8},        {"joyful", 0.8},     {"love", 0.8},        {"loved", 0.8},
    {"loves", 0.8},      {"lovely", 0.7},     {"like", 0.4},        {"liked", 0.45},
    {"likes", 0.4},      {"enjoy", 0.6},      {"enjoyed", 0.6},     {"enjoys", 0.6},
    {"fun", 0.6},        {"great", 0.7},      {"good", 0.5},        {"nice", 0.5},
    {"wonderful", 0.85}, {"amazing", 0.8},    {"awesome", 0.8},     {"excellent", 0.85},
    {"fantastic", 0.85}, {"perfect", 0.8},    {"best", 0.8},        {"better", 0.5},
    {"beautiful", 0.75}, {"pretty", 0.45},    {"excited", 0.7},     {"exciting", 0.7},
    {"thrilled", 0.8},   {"delighted", 0.8},  {"pleased", 0.6},     {"proud", 0.6},
    {"grateful", 0.7},   {"thankful", 0.7},   {"thanks", 0.5},      {"thank", 0.45},
    {"relieved", 0.5},   {"calm", 0.4},       {"relaxed", 0.5},     {"peaceful", 0.6},
    {"safe", 0.45},      {"comfortable", 0.5}, {"friend", 0.45},    {"friends", 0.45},
    {"friendly", 0.55},  {"kind", 0.55},      {"helpful", 0.5},     {"help", 0.4},
    {"helped", 0.4},     {"win", 0.7},        {"won", 0.7},         {"winning", 0.7},
    {"success", 0.7},    {"successful", 0.7}, {"succeeded", 0.7},   {"passed", 0.4},
    {"celebrate", 0.65}, {"celebrated", 0.65}, {"party", 0.45},     {"smile", 0.55},
    {"smiled", 0.55},    {"laugh", 0.6},      {"laughed", 0.6},     {"hug", 0.55},
    {"hugged", 0.55},    {"gift", 0.5},       {"surprise", 0.3},    {"surprised", 0.25},
    {"hope", 0.45},      {"hoped", 0.4},      {"hopeful", 0.55},    {"cheerful", 0.7},
    {"satisfied", 0.55}, {"impressed", 0.6},  {"brave", 0.55},      {"confident", 0.55},
    {"free", 0.4},       {"healthy", 0.5},    {"rich", 0.45},       {"lucky", 0.6},
    {"fortunate", 0.6},  {"sweet", 0.5},      {"delicious", 0.65},  {"tasty", 0.55},
    {"warm", 0.35},      {"cool", 0.35},      {"favorite", 0.55},   {"adore", 0.75},
    {"admire", 0.6},     {"wow", 0.55},       {"yay", 0.65},        {"cute", 0.5},
    {"trust", 0.5},      {"trusted", 0.5},    {"agree", 0.35},      {"agreed", 0.35},
    {"finally", 0.2},    {"fixed", 0.35},     {"solved", 0.45},     {"rescued", 0.5},
    {"promoted", 0.6},   {"married", 0.45},   {"reward", 0.55},     {"praised", 0.6},
    // negative
    {"sad", -0.7},       {"sadly", -0.65},    {"sadness", -0.7},    {"unhappy", -0.7},
    {"upset", -0.6},     {"angry", -0.75},    {"anger", -0.75},     {"mad", -0.6},
    {"furious", -0.85},  {"annoyed", -0.5},   {"annoying", -0.5},   {"frustrated", -0.6},
    {"hate", -0.8},      {"hated", -0.8},     {"hates", -0.8},      {"bad", -0.6},
    {"worse", -0.6},     {"worst", -0.8},     {"terrible", -0.8},   {"horrible", -0.8},
    {"awful", -0.75},    {"scared", -0.6},    {"afraid", -0.6},     {"fear", -0.65},
    {"feared", -0.6},    {"frightened", -0.65}, {"terrified", -0.8}, {"worried", -0.55},
    {"worry", -0.5},     {"nervous", -0.45},  {"anxious", -0.5},    {"panic", -0.65},
    {"cry", -0.55},      {"cried", -0.55},    {"crying", -0.55},    {"tears", -0.45},
    {"hurt", -0.6},      {"hurts", -0.6},     {"pain", -0.6},       {"painful", -0.65},
    {"sick", -0.55},     {"ill", -0.5},       {"injured", -0.6},    {"broke", -0.45},
    {"broken", -0.5},    {"lost", -0.5},      {"lose", -0.5},       {"loses", -0.5},
    {"losing", -0.5},    {"fail", -0.65},     {"failed", -0.65},    {"failure", -0.7},
    {"fired", -0.6},     {"died", -0.8},      {"dead", -0.75},      {"death", -0.8},
    {"lonely", -0.6},    {"alone", -0.35},    {"bored", -0.4},      {"boring", -0.45},
    {"tired", -0.35},    {"exhausted", -0.45}, {"hungry", -0.25},   {"poor", -0.45},
    {"problem", -0.4},   {"trouble", -0.5},   {"mistake", -0.45},   {"wrong", -0.45},
    {"disappointed", -0.65}, {"disappointing", -0.6}, {"embarrassed", -0.55}, {"ashamed", -0.6},
    {"guilty", -0.5},    {"jealous", -0.5},   {"disgusted", -0.7},  {"disgusting", -0.7},
    {"gross", -0.55},    {"ugly", -0.55},     {"stupid", -0.6},     {"rude", -0.55},
    {"mean", -0.4},      {"cruel", -0.75},    {"yelled", -0.5},     {"screamed", -0.5},
    {"argued", -0.45},   {"fight", -0.5},     {"fought", -0.5},     {"punished", -0.55},
    {"stolen", -0.6},    {"stole", -0.6},     {"crashed", -0.6},    {"accident", -0.55},
    {"damaged", -0.5},   {"ruined", -0.65},   {"late", -0.3},       {"missed", -0.35},
    {"rejected", -0.6},  {"refused", -0.4},   {"ignored", -0.45},   {"regret", -0.55},
    {"sorry", -0.3},     {"miserable", -0.8}, {"depressed", -0.75}, {"stress", -0.5},
    {"stressed", -0.55}, {"danger", -0.6},    {"dangerous", -0.6},  {"storm", -0.35},
    {"cold", -0.2},      {"dirty", -0.4},     {"mess", -0.4},       {"messy", -0.4},
    {"burned", -0.5},    {"spilled", -0.35},  {"dropped", -0.3},    {"forgot", -0.35},
    {"unfortunately", -0.5}, {"sadden", -0.6}, {"grief", -0.75},    {"heartbroken", -0.8},
};

constexpr const char* kNegations[] = {
    "not",      "no",       "never",    "n't",      "nobody",    "nothing",  "neither",
    "nor",      "none",     "cannot",   "without",  "didn't",    "don't",    "doesn't",
    "wasn't",   "weren't",  "isn't",    "aren't",   "won't",     "wouldn't", "couldn't",
    "shouldn't", "hasn't",  "haven't",  "hadn't",   "can't",     "nowhere",  "hardly",
};

}  // namespace

const std::unordered_set<std::string>& default_negations() {
  static const std::unordered_set<std::string> set(std::begin(kNegations), std::end(kNegations));
  return set;
}

const SentimentLexicon& builtin_sentiment_lexicon() {
  static const SentimentLexicon lex = [] {
    SentimentLexicon l;
    for (const auto& [word, score] : kEntries) l.scores.emplace(word, score);
    l.negations = default_negations();
    return l;
  }();
  return lex;
}

}  // namespace eng
