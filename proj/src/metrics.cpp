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

#include "eng/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

namespace eng {
namespace {

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

MetricsReport finish_report(std::vector<std::string> labels, const std::vector<std::size_t>& tp,
                            const std::vector<std::size_t>& fp, const std::vector<std::size_t>& fn) {
  MetricsReport r;
  r.labels = std::move(labels);
  std::size_t ttp = 0, tfp = 0, tfn = 0, active = 0;
  double sum_p = 0.0, sum_r = 0.0;
  for (std::size_t l = 0; l < r.labels.size(); ++l) {
    r.per_label.push_back(scores_from_counts(tp[l], fp[l], fn[l]));
    ttp += tp[l];
    tfp += fp[l];
    tfn += fn[l];
    if (tp[l] + fp[l] + fn[l] > 0) {
      sum_p += r.per_label.back().precision;
      sum_r += r.per_label.back().recall;
      ++active;
    }
  }
  r.micro = scores_from_counts(ttp, tfp, tfn);
  r.macro.tp = ttp;
  r.macro.fp = tfp;
  r.macro.fn = tfn;
  if (active > 0) {
    r.macro.precision = sum_p / static_cast<double>(active);
    r.macro.recall = sum_r / static_cast<double>(active);
    r.macro.f1 = harmonic(r.macro.precision, r.macro.recall);
  }
  return r;
}

std::string format_row(const std::string& name, const PrfScores& s) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-18s %8.2f %8.2f %8.2f %6zu %6zu %6zu\n", name.c_str(), s.precision, s.recall,
                s.f1, s.tp, s.fp, s.fn);
  return buf;
}

}  // namespace

PrfScores scores_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrfScores s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.precision = tp + fp > 0 ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

std::string MetricsReport::table() const {
  char head[160];
  std::snprintf(head, sizeof(head), "%-18s %8s %8s %8s %6s %6s %6s\n", "label", "P", "R", "F1", "tp", "fp", "fn");
  std::string out = head;
  for (std::size_t l = 0; l < labels.size(); ++l) out += format_row(labels[l], per_label[l]);
  out += format_row("micro", micro);
  out += format_row("macro", macro);
  return out;
}

std::string MetricsReport::rows() const {
  std::string out = "scope\tlabel\tprecision\trecall\tf1\ttp\tfp\tfn\n";
  auto add = [&out](const std::string& scope, const std::string& label, const PrfScores& s) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s\t%s\t%.4f\t%.4f\t%.4f\t%zu\t%zu\t%zu\n", scope.c_str(), label.c_str(),
                  s.precision, s.recall, s.f1, s.tp, s.fp, s.fn);
    out += buf;
  };
  for (std::size_t l = 0; l < labels.size(); ++l) add("label", labels[l], per_label[l]);
  add("micro", "*", micro);
  add("macro", "*", macro);
  return out;
}

MetricsReport prf1_multilabel(std::span<const std::vector<int>> predicted, std::span<const std::vector<int>> gold,
                              const std::vector<std::string>& labels) {
  if (predicted.size() != gold.size()) {
    throw DataError("prf1: " + std::to_string(predicted.size()) + " predictions for " +
                    std::to_string(gold.size()) + " gold examples");
  }
  const std::size_t n = labels.size();
  std::vector<std::size_t> tp(n, 0), fp(n, 0), fn(n, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i].size() != n || gold[i].size() != n) {
      throw DataError("prf1: example " + std::to_string(i) + " does not have " + std::to_string(n) + " labels");
    }
    for (std::size_t l = 0; l < n; ++l) {
      const bool p = predicted[i][l] != 0, g = gold[i][l] != 0;
      if (p && g) ++tp[l];
      if (p && !g) ++fp[l];
      if (!p && g) ++fn[l];
    }
  }
  return finish_report(labels, tp, fp, fn);
}

MetricsReport prf1_multiclass(std::span<const int> predicted, std::span<const int> gold,
                              const std::vector<std::string>& labels) {
  if (predicted.size() != gold.size()) {
    throw DataError("prf1: " + std::to_string(predicted.size()) + " predictions for " +
                    std::to_string(gold.size()) + " gold examples");
  }
  const std::size_t n = labels.size();
  std::vector<std::size_t> tp(n, 0), fp(n, 0), fn(n, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int p = predicted[i], g = gold[i];
    if (p < 0 || g < 0 || static_cast<std::size_t>(p) >= n || static_cast<std::size_t>(g) >= n) {
      throw DataError("prf1: class index out of range at example " + std::to_string(i));
    }
    if (p == g) {
      ++tp[static_cast<std::size_t>(p)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(g)];
    }
  }
  return finish_report(labels, tp, fp, fn);
}

KMeansResult kmeans(const Points& points, std::size_t k, Rng& rng, std::size_t restarts,
                    std::size_t max_iterations) {
  const std::size_t n = points.size();
  if (k == 0 || n < k) {
    throw DataError("kmeans: need at least K=" + std::to_string(k) + " points, got " + std::to_string(n));
  }
  const std::size_t dim = points.front().size();
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(restarts, 1); ++attempt) {
    Points centers;
    centers.push_back(points[rng.index(n)]);
    std::vector<double> d2(n);
    while (centers.size() < k) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) m = std::min(m, squared_distance(points[i], c));
        d2[i] = m;
        total += m;
      }
      std::size_t pick = 0;
      if (total <= 0.0) {
        pick = rng.index(n);
      } else {
        double u = rng.uniform() * total;
        for (pick = 0; pick + 1 < n; ++pick) {
          if (u < d2[pick]) break;
          u -= d2[pick];
        }
      }
      centers.push_back(points[pick]);
    }
    std::vector<int> assign(n, -1);
    for (std::size_t it = 0; it < max_iterations; ++it) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        int arg = 0;
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
          const double d = squared_distance(points[i], centers[c]);
          if (d < m) {
            m = d;
            arg = static_cast<int>(c);
          }
        }
        if (assign[i] != arg) {
          assign[i] = arg;
          changed = true;
        }
      }
      if (!changed) break;
      Points sums(k, std::vector<double>(dim, 0.0));
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(assign[i]);
        ++counts[c];
        for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (std::size_t j = 0; j < dim; ++j) centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += squared_distance(points[i], centers[static_cast<std::size_t>(assign[i])]);
    if (inertia < best.inertia) {
      best.assignment = assign;
      best.centers = centers;
      best.inertia = inertia;
    }
  }
  return best;
}

double purity_from_assignment(std::span<const int> assignment, std::span<const std::string> tags) {
  if (assignment.size() != tags.size()) throw DataError("purity: assignment and tag counts differ");
  if (tags.empty()) return 0.0;
  std::map<int, std::map<std::string, std::size_t>> table;
  for (std::size_t i = 0; i < tags.size(); ++i) ++table[assignment[i]][tags[i]];
  std::size_t total = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t m = 0;
    for (const auto& [tag, c] : counts) m = std::max(m, c);
    total += m;
  }
  return static_cast<double>(total) / static_cast<double>(tags.size());
}

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, Rng& rng) {
  if (folds == 0) throw UsageError("folds must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::size_t> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = pos % folds;
  return fold;
}

double cluster_purity(const Points& points, std::span<const std::string> tags, std::size_t k, std::size_t folds,
                      Rng& rng) {
  if (points.size() != tags.size()) throw DataError("cluster_purity: point and tag counts differ");
  if (points.size() < k * folds) {
    throw DataError("cluster_purity: " + std::to_string(points.size()) + " points cannot give " +
                    std::to_string(folds) + " folds of at least K=" + std::to_string(k));
  }
  const std::vector<std::size_t> fold = assign_folds(points.size(), folds, rng);
  double total = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    Points sub;
    std::vector<std::string> sub_tags;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (fold[i] != f) continue;
      sub.push_back(points[i]);
      sub_tags.push_back(tags[i]);
    }
    const KMeansResult km = kmeans(sub, k, rng);
    total += purity_from_assignment(km.assignment, sub_tags);
  }
  return total / static_cast<double>(folds);
}

std::string knn_predict(const Points& train, std::span<const std::string> train_tags, std::span<const double> query,
                        std::size_t k) {
  if (train.empty() || k == 0) throw DataError("knn: empty training set or K=0");
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) dist.emplace_back(squared_distance(train[i], query), i);
  const std::size_t kk = std::min(k, train.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  std::map<std::string, std::size_t> votes;
  std::map<std::string, std::size_t> first_rank;
  for (std::size_t r = 0; r < kk; ++r) {
    const std::string& tag = train_tags[dist[r].second];
    ++votes[tag];
    first_rank.emplace(tag, r);
  }
  std::string best;
  std::size_t best_votes = 0, best_rank = 0;
  for (const auto& [tag, v] : votes) {
    const std::size_t rank = first_rank[tag];
    if (v > best_votes || (v == best_votes && rank < best_rank)) {
      best = tag;
      best_votes = v;
      best_rank = rank;
    }
  }
  return best;
}

double knn_classify(const Points& points, std::span<const std::string> tags, std::size_t k, std::size_t folds,
                    Rng& rng) {
  if (points.size() != tags.size()) throw DataError("knn_classify: point and tag counts differ");
  if (points.size() < folds || points.size() <= k) {
    throw DataError("knn_classify: too few points (" + std::to_string(points.size()) + ") for K=" +
                    std::to_string(k) + " and " + std::to_string(folds) + " folds");
  }
  const std::vector<std::size_t> fold = assign_folds(points.size(), folds, rng);
  double total = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    Points train;
    std::vector<std::string> train_tags;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (fold[i] == f) {
        test.push_back(i);
      } else {
        train.push_back(points[i]);
        train_tags.push_back(tags[i]);
      }
    }
    std::size_t correct = 0;
    for (std::size_t i : test) correct += knn_predict(train, train_tags, points[i], k) == tags[i] ? 1 : 0;
    total += test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  }
  return total / static_cast<double>(folds);
}

}  // namespace eng
