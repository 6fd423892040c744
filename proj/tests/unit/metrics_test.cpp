// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "golden.h"
#include "lhe/common/error.h"
#include "lhe/metrics/metrics.h"

namespace lhe::metrics {
namespace {

ScoreMatrix matrix(std::size_t n, std::size_t k, std::vector<double> scores, std::vector<std::uint8_t> labels) {
  ScoreMatrix sm;
  sm.samples = n;
  sm.classes = k;
  sm.scores = std::move(scores);
  sm.labels = std::move(labels);
  return sm;
}

// Exhaustive pairwise comparison.
double pairwise_auroc(const std::vector<double>& s, const std::vector<std::uint8_t>& l) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!l[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (l[j]) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

bool has_both(const std::vector<std::uint8_t>& l) {
  const auto pos = std::count(l.begin(), l.end(), 1);
  return pos > 0 && pos < static_cast<long>(l.size());
}

TEST(Auroc, SmallExamples) {
  EXPECT_EQ(auroc(matrix(2, 1, {0.9, 0.2}, {1, 0}), Averaging::kMacro), 1.0);
  EXPECT_EQ(auroc(matrix(2, 1, {0.5, 0.5}, {1, 0}), Averaging::kMicro), 0.5);
  EXPECT_EQ(auroc(matrix(2, 1, {0.2, 0.9}, {1, 0}), Averaging::kWeighted), 0.0);
}

TEST(Auroc, MatchesPairwiseOracleExactly) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 9, k = 1 + rng() % 5;
    ScoreMatrix sm;
    sm.samples = n;
    sm.classes = k;
    for (std::size_t i = 0; i < n * k; ++i) {
      sm.scores.push_back(static_cast<double>(rng() % 7) / 6.0);  // coarse grid: plenty of ties
      sm.labels.push_back(static_cast<std::uint8_t>(rng() % 2));
    }
    std::vector<double> flat_s = sm.scores;
    std::vector<std::uint8_t> flat_l = sm.labels;
    if (has_both(flat_l)) {
      EXPECT_EQ(auroc(sm, Averaging::kMicro), pairwise_auroc(flat_s, flat_l));
    } else {
      EXPECT_THROW(auroc(sm, Averaging::kMicro), MetricError);
    }
    double macro = 0, weighted = 0, classes = 0, support = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const auto s = sm.score_column(c);
      const auto l = sm.label_column(c);
      if (!has_both(l)) continue;
      const double a = pairwise_auroc(s, l);
      EXPECT_EQ(binary_auroc(s, l), a);
      const double pos = static_cast<double>(std::count(l.begin(), l.end(), 1));
      macro += a;
      weighted += pos * a;
      classes += 1;
      support += pos;
    }
    if (classes == 0) {
      EXPECT_THROW(auroc(sm, Averaging::kMacro), MetricError);
      continue;
    }
    EXPECT_EQ(auroc(sm, Averaging::kMacro), macro / classes);
    EXPECT_EQ(auroc(sm, Averaging::kWeighted), weighted / support);
    ++checked;
  }
  EXPECT_GT(checked, 80);
}

TEST(Auroc, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> s(30);
    std::vector<std::uint8_t> l(30);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = u(rng);
      l[i] = static_cast<std::uint8_t>(i % 3 == 0);
    }
    auto transformed = s;
    for (auto& v : transformed) v = std::exp(3 * v) - 7;
    EXPECT_EQ(binary_auroc(s, l), binary_auroc(transformed, l));
    auto complement = s;
    for (auto& v : complement) v = 1 - v;
    EXPECT_NEAR(binary_auroc(s, l) + binary_auroc(complement, l), 1.0, 1e-15);
  }
}

TEST(Auroc, IdenticalColumnsAgreeAcrossAveragings) {
  const std::vector<double> col{0.1, 0.7, 0.4, 0.9, 0.3};
  const std::vector<std::uint8_t> lab{0, 1, 0, 1, 1};
  ScoreMatrix sm;
  sm.samples = 5;
  sm.classes = 3;
  for (std::size_t i = 0; i < 5; ++i)
    for (int c = 0; c < 3; ++c) {
      sm.scores.push_back(col[i]);
      sm.labels.push_back(lab[i]);
    }
  const double micro = auroc(sm, Averaging::kMicro);
  EXPECT_EQ(micro, auroc(sm, Averaging::kMacro));
  EXPECT_EQ(micro, auroc(sm, Averaging::kWeighted));
}

TEST(Auroc, SingleLabelClassesAreExcluded) {
  // Class 1 is all positive.
  auto sm = matrix(3, 2, {0.9, 0.5, 0.1, 0.6, 0.8, 0.7}, {1, 1, 0, 1, 0, 1});
  EXPECT_EQ(auroc_excluded_classes(sm), std::vector<std::size_t>{1});
  EXPECT_EQ(auroc(sm, Averaging::kMacro), 1.0);
  auto none = matrix(2, 1, {0.3, 0.4}, {1, 1});
  EXPECT_THROW(auroc(none, Averaging::kMacro), MetricError);
  EXPECT_THROW(auroc(none, Averaging::kMicro), MetricError);
}

// 4 samples x 2 classes, threshold 0.5.
//   class 0: preds 1 1 0 0, labels 1 0 1 0 -> tp 1 fp 1 fn 1 -> F1 2/4
//   class 1: preds 1 1 0 1, labels 1 1 1 0 -> tp 2 fp 1 fn 1 -> F1 4/6
//   pooled:  tp 3 fp 2 fn 2 -> 6/10
ScoreMatrix hand_case() {
  return matrix(4, 2, {0.9, 0.7, 0.6, 0.8, 0.4, 0.1, 0.2, 0.55}, {1, 1, 0, 1, 1, 1, 0, 0});
}

TEST(F1, HandComputedCase) {
  const auto sm = hand_case();
  EXPECT_EQ(f1(sm, Averaging::kMicro), 6.0 / 10.0);
  EXPECT_EQ(f1(sm, Averaging::kMacro), (2.0 / 4.0 + 4.0 / 6.0) / 2.0);
  EXPECT_EQ(f1(sm, Averaging::kWeighted), (2.0 * (2.0 / 4.0) + 3.0 * (4.0 / 6.0)) / 5.0);
}

TEST(F1, PerfectAndEmptyPredictions) {
  auto perfect = matrix(3, 2, {0.9, 0.1, 0.2, 0.8, 0.7, 0.6}, {1, 0, 0, 1, 1, 1});
  for (auto a : {Averaging::kMicro, Averaging::kMacro, Averaging::kWeighted}) EXPECT_EQ(f1(perfect, a), 1.0);
  auto silent = matrix(3, 1, {0.1, 0.2, 0.3}, {1, 0, 1});
  EXPECT_EQ(f1(silent, Averaging::kMacro), 0.0);
  EXPECT_EQ(f1_from({0, 0, 0, 5}), 0.0);
  EXPECT_THROW(f1(silent, Averaging::kMacro, 1.0), MetricError);
}

TEST(F1, ThresholdIsInclusive) {
  auto sm = matrix(2, 1, {0.5, 0.49}, {1, 0});
  EXPECT_EQ(f1(sm, Averaging::kMicro), 1.0);
}

TEST(Metrics, ValidationErrors) {
  auto bad_label = matrix(1, 1, {0.5}, {2});
  EXPECT_THROW(bad_label.validate(), MetricError);
  auto bad_score = matrix(1, 1, {std::nan("")}, {1});
  EXPECT_THROW(bad_score.validate(), MetricError);
  auto bad_shape = matrix(2, 1, {0.5}, {1, 0});
  EXPECT_THROW(bad_shape.validate(), MetricError);
  EXPECT_THROW(parse_csv("a,b\n1,2\n3\n"), MetricError);
  EXPECT_THROW(parse_csv("a,b\n1,x\n"), MetricError);
  EXPECT_THROW(parse_csv(""), MetricError);
  EXPECT_THROW(make_score_matrix(parse_csv("a\n0.5\n"), parse_csv("a\n0.5\n")), MetricError);
  EXPECT_THROW(read_csv("/nonexistent/scores.csv"), IoError);
}

TEST(Metrics, CsvFilesAndReportGolden) {
  const auto scores = read_csv(testing::data_path("scores_small.csv"));
  const auto labels = read_csv(testing::data_path("labels_small.csv"));
  EXPECT_EQ(scores.header, (std::vector<std::string>{"atelectasis", "effusion", "edema"}));
  EXPECT_EQ(format_csv(scores), format_csv(parse_csv(format_csv(scores))));
  const auto sm = make_score_matrix(scores, labels);
  const auto report = evaluate(sm);
  EXPECT_EQ(report.classes.size(), 3u);
  const std::string json = report.to_json() + "\n";
  testing::expect_golden("report_small.json", std::vector<std::uint8_t>(json.begin(), json.end()));
}

}  // namespace
}  // namespace lhe::metrics
