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

// Precision/recall/F1, K-Means cluster purity, KNN accuracy and embedding
// dumps. Scores are on a 0-100 scale; purity and accuracy on 0-1.

#ifndef ENG_METRICS_HPP_
#define ENG_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eng/common.hpp"

namespace eng {

struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

PrfScores scores_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

struct MetricsReport {
  std::vector<std::string> labels;
  std::vector<PrfScores> per_label;
  PrfScores micro;
  // Mean per-label precision and recall over labels that occur in gold or
  // predictions; F1 is their harmonic mean.
  PrfScores macro;

  std::string table() const;
  std::string rows() const;  // tab-separated, machine readable
};

// One 0/1 vector per example.
MetricsReport prf1_multilabel(std::span<const std::vector<int>> predicted, std::span<const std::vector<int>> gold,
                              const std::vector<std::string>& labels);
MetricsReport prf1_multiclass(std::span<const int> predicted, std::span<const int> gold,
                              const std::vector<std::string>& labels);

using Points = std::vector<std::vector<double>>;

struct KMeansResult {
  std::vector<int> assignment;
  Points centers;
  double inertia = 0.0;
};

// Lloyd's algorithm from k-means++ seeds; best inertia over `restarts`.
KMeansResult kmeans(const Points& points, std::size_t k, Rng& rng, std::size_t restarts = 5,
                    std::size_t max_iterations = 100);

// (1/N) sum over clusters of the majority tag count.
double purity_from_assignment(std::span<const int> assignment, std::span<const std::string> tags);

// Mean purity of K-Means over each of `folds` disjoint shuffled folds.
double cluster_purity(const Points& points, std::span<const std::string> tags, std::size_t k, std::size_t folds,
                      Rng& rng);

// Majority vote of the k nearest training points; vote ties go to the tied
// tag whose neighbour is closest.
std::string knn_predict(const Points& train, std::span<const std::string> train_tags, std::span<const double> query,
                        std::size_t k);
// Mean held-out accuracy over `folds`-fold cross-validation.
double knn_classify(const Points& points, std::span<const std::string> tags, std::size_t k, std::size_t folds,
                    Rng& rng);

// Fold id per point after a seeded shuffle; sizes differ by at most one.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, Rng& rng);

}  // namespace eng

#endif  // ENG_METRICS_HPP_
